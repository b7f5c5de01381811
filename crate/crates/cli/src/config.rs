//! Run configuration: defaults, key=value config files, and flag
//! overrides, resolved into validated pipeline pieces.
//!
//! Precedence is defaults < config file < command-line flags. Config
//! files are flat `key = value` lines (`#` comments allowed); unknown
//! keys are rejected so typos fail loudly.

use crate::error::{config_error, CliResult};
use clap::Args;
use segstream::{
    ComputeModel, DecoderConfig, EncoderConfig, Mode, SegmentLayout, SimulationConfig, Simulator,
};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Flags shared by every subcommand that builds a pipeline.
#[derive(Debug, Clone, Args)]
pub struct CommonOpts {
    /// Flat key=value config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Left context length in frames.
    #[arg(long)]
    pub left: Option<usize>,
    /// Center (output-producing) length in frames.
    #[arg(long)]
    pub center: Option<usize>,
    /// Right context length in frames.
    #[arg(long)]
    pub right: Option<usize>,
    /// Frames delivered per stream step.
    #[arg(long)]
    pub chunk: Option<usize>,
    /// Temporal subsampling factor (1, 2, 4, or 8).
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Segmentation mode: baseline or shiftable.
    #[arg(long)]
    pub mode: Option<String>,
    /// Wait-k policy offset.
    #[arg(long = "wait-k")]
    pub wait_k: Option<usize>,
    /// Encoder output rows per decoder READ.
    #[arg(long = "pre-decision")]
    pub pre_decision: Option<usize>,
    /// Memory-bank slots visible to each segment.
    #[arg(long)]
    pub banks: Option<usize>,
    /// Relative-position clipping distance.
    #[arg(long)]
    pub clip: Option<usize>,
    /// Model dimension shared by encoder and decoder.
    #[arg(long = "model-dim")]
    pub model_dim: Option<usize>,
    /// Encoder layers.
    #[arg(long = "enc-layers")]
    pub enc_layers: Option<usize>,
    /// Decoder layers.
    #[arg(long = "dec-layers")]
    pub dec_layers: Option<usize>,
    /// Attention heads (encoder and decoder).
    #[arg(long)]
    pub heads: Option<usize>,
    /// Decoder vocabulary size (ids 0/1 are reserved).
    #[arg(long)]
    pub vocab: Option<usize>,
    /// Hard cap on emitted tokens per instance.
    #[arg(long = "max-len")]
    pub max_len: Option<usize>,
    /// Source frame feature dimension.
    #[arg(long = "input-dim")]
    pub input_dim: Option<usize>,
    /// Arrival period of one source frame, in ms.
    #[arg(long = "frame-ms")]
    pub frame_ms: Option<f64>,
    /// Compute model: zero, fixed:<ms>, or measured.
    #[arg(long)]
    pub compute: Option<String>,
    /// Seed for weights and synthetic sources.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for corpus processing.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub left: usize,
    pub center: usize,
    pub right: usize,
    pub chunk: usize,
    pub subsample: usize,
    pub mode: Mode,
    pub wait_k: usize,
    pub pre_decision: usize,
    pub banks: usize,
    pub clip: usize,
    pub model_dim: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub heads: usize,
    pub vocab: usize,
    pub max_len: usize,
    pub input_dim: usize,
    pub frame_ms: f64,
    pub compute: ComputeModel,
    pub seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            left: 32,
            center: 64,
            right: 32,
            chunk: 32,
            subsample: 4,
            mode: Mode::Shiftable,
            wait_k: 5,
            pre_decision: 8,
            banks: 3,
            clip: 16,
            model_dim: 32,
            enc_layers: 2,
            dec_layers: 2,
            heads: 4,
            vocab: 64,
            max_len: 32,
            input_dim: 16,
            frame_ms: 10.0,
            compute: ComputeModel::Zero,
            seed: 0,
            workers: 4,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| config_error(format!("config key {key}: bad value {value:?}: {e}")))
}

impl RunConfig {
    /// Apply one `key = value` assignment from a config file.
    fn apply(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "left" => self.left = parse_value(key, value)?,
            "center" => self.center = parse_value(key, value)?,
            "right" => self.right = parse_value(key, value)?,
            "chunk" => self.chunk = parse_value(key, value)?,
            "subsample" => self.subsample = parse_value(key, value)?,
            "mode" => self.mode = parse_value(key, value)?,
            "wait_k" => self.wait_k = parse_value(key, value)?,
            "pre_decision" => self.pre_decision = parse_value(key, value)?,
            "banks" => self.banks = parse_value(key, value)?,
            "clip" => self.clip = parse_value(key, value)?,
            "model_dim" => self.model_dim = parse_value(key, value)?,
            "enc_layers" => self.enc_layers = parse_value(key, value)?,
            "dec_layers" => self.dec_layers = parse_value(key, value)?,
            "heads" => self.heads = parse_value(key, value)?,
            "vocab" => self.vocab = parse_value(key, value)?,
            "max_len" => self.max_len = parse_value(key, value)?,
            "input_dim" => self.input_dim = parse_value(key, value)?,
            "frame_ms" => self.frame_ms = parse_value(key, value)?,
            "compute" => self.compute = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "workers" => self.workers = parse_value(key, value)?,
            other => {
                return Err(config_error(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    fn load_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_error(format!(
                    "{}:{}: expected key = value, got {line:?}",
                    path.display(),
                    number + 1
                ))
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Defaults, then config file, then flags.
    pub fn resolve(opts: &CommonOpts) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &opts.config {
            cfg.load_file(path)?;
        }
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &opts.$field {
                    cfg.$field = v.clone();
                }
            };
        }
        take!(left);
        take!(center);
        take!(right);
        take!(chunk);
        take!(subsample);
        take!(wait_k);
        take!(pre_decision);
        take!(banks);
        take!(clip);
        take!(model_dim);
        take!(enc_layers);
        take!(dec_layers);
        take!(heads);
        take!(vocab);
        take!(max_len);
        take!(input_dim);
        take!(frame_ms);
        take!(seed);
        take!(workers);
        if let Some(mode) = &opts.mode {
            cfg.mode = mode.parse().map_err(config_error)?;
        }
        if let Some(compute) = &opts.compute {
            cfg.compute = compute.parse().map_err(config_error)?;
        }
        if cfg.workers == 0 {
            return Err(config_error("workers must be >= 1"));
        }
        Ok(cfg)
    }

    pub fn layout(&self) -> CliResult<SegmentLayout> {
        SegmentLayout::new(self.left, self.center, self.right, self.chunk, self.subsample)
            .map_err(config_error)
    }

    pub fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            d_model: self.model_dim,
            layers: self.enc_layers,
            heads: self.heads,
            banks: self.banks,
            clip: self.clip,
            subsample: self.subsample,
            d_in: self.input_dim,
        }
    }

    pub fn decoder_config(&self) -> DecoderConfig {
        DecoderConfig {
            d_model: self.model_dim,
            layers: self.dec_layers,
            heads: self.heads,
            d_enc: self.model_dim,
            vocab: self.vocab,
            max_len: self.max_len,
        }
    }

    pub fn simulation_config(&self) -> CliResult<SimulationConfig> {
        Ok(SimulationConfig {
            layout: self.layout()?,
            mode: self.mode,
            wait_k: self.wait_k,
            pre_decision: self.pre_decision,
            frame_ms: self.frame_ms,
            compute: self.compute,
        })
    }

    pub fn simulator(&self) -> CliResult<Simulator> {
        Simulator::new(
            self.simulation_config()?,
            self.encoder_config(),
            self.decoder_config(),
            self.seed,
        )
        .map_err(config_error)
    }
}
