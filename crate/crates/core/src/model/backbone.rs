//! Backbone specifications, the toy backbones, and the external adapter registry.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Param;
use crate::data::Normalization;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackboneKind {
    /// One dense layer over the flattened input followed by `tanh`.
    ToyMlp,
    /// 3x3 same-padded convolution, `tanh`, then mean pooling over positions.
    ToyConv,
    /// Adapter looked up by `external_id` in a [`BackboneRegistry`].
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneSpec {
    pub kind: BackboneKind,
    /// `[H, W, C]`
    pub input_shape: [usize; 3],
    pub embed_dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_id: Option<String>,
    /// `false` freezes the backbone and trains the head only.
    #[serde(default = "default_true")]
    pub trainable: bool,
    /// Image normalization for this backbone; `None` uses the defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

fn default_true() -> bool {
    true
}

impl BackboneSpec {
    pub fn toy_mlp(input_dim: usize, embed_dim: usize, seed: u64) -> Self {
        Self {
            kind: BackboneKind::ToyMlp,
            input_shape: [1, 1, input_dim],
            embed_dim,
            seed,
            external_id: None,
            trainable: true,
            normalization: None,
        }
    }

    pub fn toy_conv(input_shape: [usize; 3], embed_dim: usize, seed: u64) -> Self {
        Self {
            kind: BackboneKind::ToyConv,
            input_shape,
            embed_dim,
            seed,
            external_id: None,
            trainable: true,
            normalization: None,
        }
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization.unwrap_or_default()
    }

    pub fn input_len(&self) -> usize {
        self.input_shape.iter().product()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 {
            return Err(Error::InvalidArgument("embed_dim must be >= 1".into()));
        }
        if self.input_shape.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "input_shape {:?} has a zero dimension",
                self.input_shape
            )));
        }
        if self.kind == BackboneKind::External && self.external_id.is_none() {
            return Err(Error::InvalidArgument("external backbone needs external_id".into()));
        }
        Ok(())
    }
}

/// A pretrained feature extractor plugged in from outside the crate.
///
/// Adapters return token features; the classifier mean-pools them to one
/// `embed_dim` vector. External backbones are always frozen.
pub trait ExternalBackbone: Send + Sync {
    fn embed_dim(&self) -> usize;
    /// Parameter count reported by the profiler.
    fn param_count(&self) -> usize;
    fn tokens(&self, input: &[f64]) -> Result<Vec<Vec<f64>>>;
}

impl fmt::Debug for dyn ExternalBackbone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalBackbone")
            .field("embed_dim", &self.embed_dim())
            .finish_non_exhaustive()
    }
}

type Factory = Arc<dyn Fn(&BackboneSpec) -> Result<Arc<dyn ExternalBackbone>> + Send + Sync>;

/// Lookup table from `external_id` to adapter constructors. Ships empty.
#[derive(Clone, Default)]
pub struct BackboneRegistry {
    factories: HashMap<String, Factory>,
}

impl BackboneRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<F>(&mut self, external_id: impl Into<String>, factory: F)
    where
        F: Fn(&BackboneSpec) -> Result<Arc<dyn ExternalBackbone>> + Send + Sync + 'static,
    {
        self.factories.insert(external_id.into(), Arc::new(factory));
    }

    pub(crate) fn instantiate(&self, spec: &BackboneSpec) -> Result<Arc<dyn ExternalBackbone>> {
        let id = spec.external_id.as_deref().unwrap_or_default();
        let factory = self
            .factories
            .get(id)
            .ok_or_else(|| Error::UnknownBackbone(id.to_string()))?;
        let adapter = factory(spec)?;
        if adapter.embed_dim() != spec.embed_dim {
            return Err(Error::Shape(format!(
                "adapter {id} produces {} features, spec says {}",
                adapter.embed_dim(),
                spec.embed_dim
            )));
        }
        Ok(adapter)
    }
}

impl fmt::Debug for BackboneRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut ids: Vec<_> = self.factories.keys().collect();
        ids.sort();
        f.debug_struct("BackboneRegistry").field("ids", &ids).finish()
    }
}

/// Parameter arrays of a toy backbone, in enumeration order.
pub(crate) fn toy_param_shapes(spec: &BackboneSpec) -> Vec<(&'static str, Vec<usize>, usize)> {
    let [_, _, c] = spec.input_shape;
    let e = spec.embed_dim;
    match spec.kind {
        BackboneKind::ToyMlp => vec![
            ("backbone.dense.weight", vec![e, spec.input_len()], spec.input_len()),
            ("backbone.dense.bias", vec![e], 0),
        ],
        BackboneKind::ToyConv => vec![
            ("backbone.conv.weight", vec![e, c, 3, 3], c * 9),
            ("backbone.conv.bias", vec![e], 0),
        ],
        BackboneKind::External => Vec::new(),
    }
}

/// Intermediate values kept for the backward pass.
pub(crate) enum BackboneCache {
    /// `tanh` activations, one per embedding unit.
    Mlp(Vec<f64>),
    /// `tanh` activations per position, `[H*W, E]`.
    Conv(Vec<f64>),
    Frozen,
}

pub(crate) fn mlp_forward(weight: &Param, bias: &Param, x: &[f64]) -> (Vec<f64>, BackboneCache) {
    let n_in = x.len();
    let out: Vec<f64> = bias
        .data
        .iter()
        .enumerate()
        .map(|(o, b)| {
            let row = &weight.data[o * n_in..(o + 1) * n_in];
            (b + dot(row, x)).tanh()
        })
        .collect();
    (out.clone(), BackboneCache::Mlp(out))
}

pub(crate) fn mlp_backward(
    x: &[f64],
    act: &[f64],
    grad_embed: &[f64],
    grad_weight: &mut [f64],
    grad_bias: &mut [f64],
) {
    let n_in = x.len();
    for (o, (&t, &g)) in act.iter().zip(grad_embed).enumerate() {
        let da = g * (1.0 - t * t);
        grad_bias[o] += da;
        for (gw, &xi) in grad_weight[o * n_in..(o + 1) * n_in].iter_mut().zip(x) {
            *gw += da * xi;
        }
    }
}

fn conv_pre(kernel: &[f64], bias: &[f64], x: &[f64], shape: [usize; 3], py: usize, px: usize, out: &mut [f64]) {
    let [h, w, c] = shape;
    out.copy_from_slice(bias);
    for dy in 0..3 {
        let Some(y) = (py + dy).checked_sub(1).filter(|&y| y < h) else {
            continue;
        };
        for dx in 0..3 {
            let Some(xx) = (px + dx).checked_sub(1).filter(|&xx| xx < w) else {
                continue;
            };
            let pix = &x[(y * w + xx) * c..(y * w + xx + 1) * c];
            for (o, acc) in out.iter_mut().enumerate() {
                for (ci, &v) in pix.iter().enumerate() {
                    *acc += kernel[((o * c + ci) * 3 + dy) * 3 + dx] * v;
                }
            }
        }
    }
}

pub(crate) fn conv_forward(
    kernel: &Param,
    bias: &Param,
    x: &[f64],
    shape: [usize; 3],
) -> (Vec<f64>, BackboneCache) {
    let [h, w, _] = shape;
    let e = bias.data.len();
    let positions = h * w;
    let mut acts = vec![0.0; positions * e];
    let mut pooled = vec![0.0; e];
    for py in 0..h {
        for px in 0..w {
            let slot = &mut acts[(py * w + px) * e..(py * w + px + 1) * e];
            conv_pre(&kernel.data, &bias.data, x, shape, py, px, slot);
            for (p, a) in pooled.iter_mut().zip(slot.iter_mut()) {
                *a = a.tanh();
                *p += *a;
            }
        }
    }
    let inv = 1.0 / positions as f64;
    pooled.iter_mut().for_each(|p| *p *= inv);
    (pooled, BackboneCache::Conv(acts))
}

pub(crate) fn conv_backward(
    x: &[f64],
    shape: [usize; 3],
    acts: &[f64],
    grad_embed: &[f64],
    grad_kernel: &mut [f64],
    grad_bias: &mut [f64],
) {
    let [h, w, c] = shape;
    let e = grad_embed.len();
    let inv = 1.0 / (h * w) as f64;
    let mut da = vec![0.0; e];
    for py in 0..h {
        for px in 0..w {
            let t = &acts[(py * w + px) * e..(py * w + px + 1) * e];
            for o in 0..e {
                da[o] = grad_embed[o] * inv * (1.0 - t[o] * t[o]);
                grad_bias[o] += da[o];
            }
            for dy in 0..3 {
                let Some(y) = (py + dy).checked_sub(1).filter(|&y| y < h) else {
                    continue;
                };
                for dx in 0..3 {
                    let Some(xx) = (px + dx).checked_sub(1).filter(|&xx| xx < w) else {
                        continue;
                    };
                    let pix = &x[(y * w + xx) * c..(y * w + xx + 1) * c];
                    for (o, &d) in da.iter().enumerate() {
                        for (ci, &v) in pix.iter().enumerate() {
                            grad_kernel[((o * c + ci) * 3 + dy) * 3 + dx] += d * v;
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
