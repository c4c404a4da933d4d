//! Backbone + two-dense-layer sigmoid head classifier.
//!
//! ```text
//! x -> backbone -> e (embed_dim) -> dense1 -> ReLU -> dense2 -> sigmoid -> score
//! ```
//!
//! Parameters are enumerated in a fixed order: backbone arrays first, then
//! `head.dense1.weight`, `head.dense1.bias`, `head.dense2.weight`,
//! `head.dense2.bias`. Gradients, optimizer state and checkpoints all use
//! that order.

mod backbone;
mod checkpoint;
mod profile;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub(crate) use backbone::BackboneCache;
pub use backbone::{BackboneKind, BackboneRegistry, BackboneSpec, ExternalBackbone};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use profile::{profile, render_profile_row, ProfileRecord};

use crate::error::{Error, Result};

/// Default hidden width of the head.
pub const DEFAULT_HEAD_HIDDEN: usize = 256;

const N_HEAD_PARAMS: usize = 4;

/// One named parameter array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub shape: Vec<usize>,
    pub trainable: bool,
    pub data: Vec<f64>,
}

impl Param {
    fn zeros(name: &str, shape: Vec<usize>, trainable: bool) -> Self {
        let n = shape.iter().product();
        Self {
            name: name.to_string(),
            shape,
            trainable,
            data: vec![0.0; n],
        }
    }

    fn uniform(name: &str, shape: Vec<usize>, fan_in: usize, trainable: bool, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeros(name, shape, trainable);
        let bound = 1.0 / (fan_in as f64).sqrt();
        p.data.iter_mut().for_each(|v| *v = rng.random_range(-bound..bound));
        p
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    All,
    TrainableOnly,
}

#[derive(Debug, Clone)]
pub struct ClassifierModel {
    model_id: String,
    spec: BackboneSpec,
    head_hidden: usize,
    params: Vec<Param>,
    external: Option<Arc<dyn ExternalBackbone>>,
}

impl PartialEq for ClassifierModel {
    fn eq(&self, other: &Self) -> bool {
        self.model_id == other.model_id
            && self.spec == other.spec
            && self.head_hidden == other.head_hidden
            && self.params == other.params
    }
}

/// Build a model using only the built-in toy backbones.
pub fn build_model(spec: &BackboneSpec, head_hidden: usize, seed: u64) -> Result<ClassifierModel> {
    build_model_with(&BackboneRegistry::default(), spec, head_hidden, seed)
}

pub fn build_model_with(
    registry: &BackboneRegistry,
    spec: &BackboneSpec,
    head_hidden: usize,
    seed: u64,
) -> Result<ClassifierModel> {
    spec.validate()?;
    if head_hidden == 0 {
        return Err(Error::InvalidArgument("head_hidden must be >= 1".into()));
    }
    let external = if spec.kind == BackboneKind::External {
        if spec.trainable {
            return Err(Error::InvalidArgument(
                "external backbones are frozen; set trainable = false".into(),
            ));
        }
        Some(registry.instantiate(spec)?)
    } else {
        None
    };

    let mut params = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for (name, shape, fan_in) in backbone::toy_param_shapes(spec) {
        params.push(if fan_in == 0 {
            Param::zeros(name, shape, spec.trainable)
        } else {
            Param::uniform(name, shape, fan_in, spec.trainable, &mut rng)
        });
    }
    let e = spec.embed_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    params.push(Param::uniform("head.dense1.weight", vec![e, head_hidden], e, true, &mut rng));
    params.push(Param::zeros("head.dense1.bias", vec![head_hidden], true));
    params.push(Param::uniform("head.dense2.weight", vec![head_hidden, 1], head_hidden, true, &mut rng));
    params.push(Param::zeros("head.dense2.bias", vec![1], true));

    Ok(ClassifierModel {
        model_id: format!("{:?}-e{e}-h{head_hidden}-s{seed}", spec.kind).to_lowercase(),
        spec: spec.clone(),
        head_hidden,
        params,
        external,
    })
}

/// Exact element count over the parameter enumeration.
pub fn count_params(model: &ClassifierModel, mode: CountMode) -> usize {
    model
        .params
        .iter()
        .filter(|p| mode == CountMode::All || p.trainable)
        .map(Param::len)
        .sum()
}

/// Analytic head size: `embed*hidden + hidden + hidden + 1`.
pub fn head_param_count(embed_dim: usize, hidden: usize) -> usize {
    embed_dim * hidden + hidden + hidden + 1
}

/// Logistic function, saturating at the representable values just inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    const LO: f64 = f64::MIN_POSITIVE;
    const HI: f64 = 1.0 - f64::EPSILON / 2.0;
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let ez = z.exp();
        ez / (1.0 + ez)
    };
    s.clamp(LO, HI)
}

/// Values from one forward pass needed by backpropagation.
pub(crate) struct Trace {
    pub embed: Vec<f64>,
    pub backbone: BackboneCache,
    pub hidden: Vec<f64>,
    pub score: f64,
}

impl ClassifierModel {
    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn set_model_id(&mut self, id: impl Into<String>) {
        self.model_id = id.into();
    }

    pub fn spec(&self) -> &BackboneSpec {
        &self.spec
    }

    pub fn head_hidden(&self) -> usize {
        self.head_hidden
    }

    pub fn input_len(&self) -> usize {
        self.spec.input_len()
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.params.iter_mut().find(|p| p.name == name)
    }

    /// Parameters contributed by an external adapter (not enumerated).
    pub fn external_param_count(&self) -> usize {
        self.external.as_ref().map_or(0, |e| e.param_count())
    }

    fn head(&self) -> &[Param] {
        &self.params[self.params.len() - N_HEAD_PARAMS..]
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::Shape(format!(
                "input has {} values, backbone expects {:?} = {}",
                x.len(),
                self.spec.input_shape,
                self.input_len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("input element {i} is {}", x[i])));
        }
        Ok(())
    }

    fn embed(&self, x: &[f64]) -> Result<(Vec<f64>, BackboneCache)> {
        match self.spec.kind {
            BackboneKind::ToyMlp => Ok(backbone::mlp_forward(&self.params[0], &self.params[1], x)),
            BackboneKind::ToyConv => Ok(backbone::conv_forward(
                &self.params[0],
                &self.params[1],
                x,
                self.spec.input_shape,
            )),
            BackboneKind::External => {
                let adapter = self
                    .external
                    .as_ref()
                    .ok_or_else(|| Error::UnknownBackbone(format!("{:?}", self.spec.external_id)))?;
                let tokens = adapter.tokens(x)?;
                Ok((mean_pool(&tokens, self.spec.embed_dim)?, BackboneCache::Frozen))
            }
        }
    }

    pub(crate) fn trace(&self, x: &[f64]) -> Result<Trace> {
        self.check_input(x)?;
        let (embed, cache) = self.embed(x)?;
        let [w1, b1, w2, b2] = self.head() else {
            unreachable!("head always has four arrays")
        };
        let hdim = self.head_hidden;
        let mut hidden = b1.data.clone();
        for (i, &ei) in embed.iter().enumerate() {
            for (h, &w) in hidden.iter_mut().zip(&w1.data[i * hdim..(i + 1) * hdim]) {
                *h += ei * w;
            }
        }
        hidden.iter_mut().for_each(|h| *h = h.max(0.0));
        let z = b2.data[0] + backbone::dot(&w2.data, &hidden);
        Ok(Trace {
            embed,
            backbone: cache,
            hidden,
            score: sigmoid(z),
        })
    }

    /// Probability-of-fake for one input.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.trace(x)?.score)
    }

    /// Scores for a batch, in batch order.
    pub fn forward<X: AsRef<[f64]>>(&self, batch: &[X]) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        batch.iter().map(|x| self.score(x.as_ref())).collect()
    }

    /// Accumulate `dL/dz * dz/dθ` for one sample into `grads`, which is
    /// aligned with [`params`](Self::params). Frozen arrays are left untouched.
    pub(crate) fn backward(&self, x: &[f64], trace: &Trace, dz: f64, grads: &mut [Vec<f64>]) {
        let n = self.params.len();
        let hdim = self.head_hidden;
        let (w1, w2) = (&self.params[n - 4], &self.params[n - 2]);

        grads[n - 1][0] += dz;
        let mut dh = vec![0.0; hdim];
        for j in 0..hdim {
            grads[n - 2][j] += dz * trace.hidden[j];
            // ReLU: gradient passes only where the unit is active.
            if trace.hidden[j] > 0.0 {
                dh[j] = dz * w2.data[j];
            }
        }
        let mut de = vec![0.0; trace.embed.len()];
        for (i, &ei) in trace.embed.iter().enumerate() {
            let row = &w1.data[i * hdim..(i + 1) * hdim];
            let grow = &mut grads[n - 4][i * hdim..(i + 1) * hdim];
            for j in 0..hdim {
                grow[j] += ei * dh[j];
                de[i] += row[j] * dh[j];
            }
        }
        for (g, d) in grads[n - 3].iter_mut().zip(&dh) {
            *g += d;
        }

        if !self.spec.trainable {
            return;
        }
        let (gw, rest) = grads.split_at_mut(1);
        match (&trace.backbone, self.spec.kind) {
            (BackboneCache::Mlp(act), BackboneKind::ToyMlp) => {
                backbone::mlp_backward(x, act, &de, &mut gw[0], &mut rest[0])
            }
            (BackboneCache::Conv(acts), BackboneKind::ToyConv) => backbone::conv_backward(
                x,
                self.spec.input_shape,
                acts,
                &de,
                &mut gw[0],
                &mut rest[0],
            ),
            _ => {}
        }
    }

    /// Zero-filled gradient buffers aligned with the parameter enumeration.
    pub fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.params.iter().map(|p| vec![0.0; p.len()]).collect()
    }
}

fn mean_pool(tokens: &[Vec<f64>], dim: usize) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::Shape("backbone returned no tokens".into()));
    }
    let mut out = vec![0.0; dim];
    for t in tokens {
        if t.len() != dim {
            return Err(Error::Shape(format!("token has {} features, expected {dim}", t.len())));
        }
        out.iter_mut().zip(t).for_each(|(o, v)| *o += v);
    }
    let inv = 1.0 / tokens.len() as f64;
    out.iter_mut().for_each(|o| *o *= inv);
    Ok(out)
}
