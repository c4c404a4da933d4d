use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dfdetect::config::RunConfig;
use dfdetect::data::Split;
use dfdetect::model::BackboneRegistry;
use dfdetect::pipeline;
use dfdetect::{Error, Result};

#[derive(Parser)]
#[command(name = "dfdetect", version, about = "Train, fuse and evaluate real-vs-fake image classifiers")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every stochastic component; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Decision threshold for accuracy and F1.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-Gaussian dataset manifest.
    Synth {
        #[arg(long)]
        n_real: Option<usize>,
        #[arg(long)]
        n_fake: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        separation: Option<f64>,
        #[arg(long)]
        label_noise: Option<f64>,
    },
    /// Fit a model and write a run directory.
    Train {
        /// Manifest to train on; overrides data.manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Allow writing into a non-empty run directory.
        #[arg(long)]
        overwrite: bool,
    },
    /// Score one manifest split with a checkpoint.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        /// Score file to write (default: <out-dir>/scores.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average score files into one.
    Fuse {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Fused score file (default: <out-dir>/fused.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a score file against manifest labels.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        /// Report file (default: eval.report, then <out-dir>/report.txt).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter count, latency and size of a checkpoint.
    Profile {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Row label for the table line.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threshold {
        cfg.eval.threshold = t;
    }
    cfg.resolve_seeds();
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<String> {
    let registry = BackboneRegistry::default();
    let mut cfg = load_config(&cli)?;
    let dir = out_dir(&cli);
    match &cli.command {
        Command::Synth {
            n_real,
            n_fake,
            dim,
            separation,
            label_noise,
        } => {
            let synth = cfg.data.synth.get_or_insert_with(Default::default);
            synth.seed = cfg.seed;
            synth.n_real = n_real.unwrap_or(synth.n_real);
            synth.n_fake = n_fake.unwrap_or(synth.n_fake);
            synth.dim = dim.unwrap_or(synth.dim);
            synth.separation = separation.unwrap_or(synth.separation);
            synth.label_noise = label_noise.unwrap_or(synth.label_noise);
            Ok(pipeline::cmd_synth(&cfg, &dir)?.summary())
        }
        Command::Train { manifest, overwrite } => {
            if let Some(m) = manifest {
                cfg.data.manifest = Some(m.clone());
            }
            Ok(pipeline::cmd_train(&cfg, &registry, &dir, *overwrite)?.summary())
        }
        Command::Predict {
            checkpoint,
            manifest,
            split,
            out,
        } => {
            let out = out.clone().unwrap_or_else(|| dir.join("scores.csv"));
            let set = pipeline::cmd_predict(checkpoint, &registry, manifest, *split, &out)?;
            Ok(format!("scores: {} ({} samples)\n", out.display(), set.len()))
        }
        Command::Fuse { files, out } => {
            let out = out.clone().unwrap_or_else(|| dir.join("fused.csv"));
            let set = pipeline::cmd_fuse(files, &out)?;
            Ok(format!("fused: {} ({} samples)\n", out.display(), set.len()))
        }
        Command::Eval {
            scores,
            manifest,
            split,
            out,
        } => {
            let out = out
                .clone()
                .or_else(|| cfg.eval.report.clone())
                .unwrap_or_else(|| dir.join("report.txt"));
            let report = pipeline::cmd_eval(scores, manifest, *split, cfg.eval.threshold, Some(&out))?;
            Ok(dfdetect::metrics::render_report(&report))
        }
        Command::Profile {
            checkpoint,
            name,
            warmup,
            reps,
        } => {
            let out = pipeline::cmd_profile(checkpoint, &registry, name.as_deref(), *warmup, *reps)?;
            Ok(out.summary())
        }
    }
}

fn fail(err: &Error) -> ExitCode {
    // one line: reason code first for machine parsing
    let msg = err.to_string().replace('\n', " ");
    eprintln!("error[{}]: {msg}", err.code());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("usage error");
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

