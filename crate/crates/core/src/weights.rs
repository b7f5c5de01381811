//! Toy encoder weights: seeded initialization and a flat binary format.
//!
//! Weights are fully determined by an `EncoderConfig` plus a seed, and
//! round-trip through a little-endian binary dump:
//!
//! - 8-byte magic, `u32` version;
//! - seven `u32` header fields: model dim, layers, heads, bank slots,
//!   relative-position clip, subsample factor, input dim;
//! - `f32` tensors in a fixed order: each subsampling conv stage
//!   (weights then bias); per layer `ln1 γ/β`, `Wq/bq`, `Wk/bk`,
//!   `Wv/bv`, `Wo/bo`, relative-position keys, `ln2 γ/β`, `W1/b1`,
//!   `W2/b2`; finally the output layer-norm `γ/β`.

use crate::error::{CoreError, CoreResult};
use crate::math::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const WEIGHT_MAGIC: &[u8; 8] = b"SGSTENC\0";
pub const WEIGHT_VERSION: u32 = 1;

/// Shape of the toy augmented-memory encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Model (embedding) dimension.
    pub d_model: usize,
    /// Number of transformer layers.
    pub layers: usize,
    /// Attention heads per layer.
    pub heads: usize,
    /// Memory-bank slots visible to each segment.
    pub banks: usize,
    /// Relative-position clipping distance.
    pub clip: usize,
    /// Temporal subsampling factor (1, 2, 4, or 8).
    pub subsample: usize,
    /// Input feature dimension.
    pub d_in: usize,
}

impl EncoderConfig {
    pub fn validate(&self) -> CoreResult<()> {
        if self.d_model == 0 || self.layers == 0 || self.heads == 0 || self.d_in == 0 {
            return Err(CoreError::InvalidConfig(
                "encoder dims and layer/head counts must be >= 1".into(),
            ));
        }
        if self.d_model % self.heads != 0 {
            return Err(CoreError::InvalidConfig(format!(
                "model dim {} must be divisible by heads {}",
                self.d_model, self.heads
            )));
        }
        if ![1, 2, 4, 8].contains(&self.subsample) {
            return Err(CoreError::InvalidConfig(format!(
                "subsample factor {} must be one of 1, 2, 4, 8",
                self.subsample
            )));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.heads
    }

    pub fn ffn_dim(&self) -> usize {
        2 * self.d_model
    }

    /// `(in_channels, out_channels, stride)` of each subsampling conv
    /// stage: one stride-1 stage at factor 1, otherwise one stride-2
    /// stage per halving.
    pub fn conv_stages(&self) -> Vec<(usize, usize, usize)> {
        match self.subsample {
            1 => vec![(self.d_in, self.d_model, 1)],
            2 => vec![(self.d_in, self.d_model, 2)],
            4 => vec![(self.d_in, self.d_model, 2), (self.d_model, self.d_model, 2)],
            8 => vec![
                (self.d_in, self.d_model, 2),
                (self.d_model, self.d_model, 2),
                (self.d_model, self.d_model, 2),
            ],
            _ => unreachable!("validated subsample factor"),
        }
    }
}

/// One kernel-3, pad-1 temporal convolution stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvStage {
    pub in_ch: usize,
    pub out_ch: usize,
    pub stride: usize,
    /// `out_ch × in_ch × 3`, row-major.
    pub w: Vec<f32>,
    pub b: Vec<f32>,
}

/// Weights of one transformer layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub ln1_gamma: Vec<f32>,
    pub ln1_beta: Vec<f32>,
    pub wq: Mat,
    pub bq: Vec<f32>,
    pub wk: Mat,
    pub bk: Vec<f32>,
    pub wv: Mat,
    pub bv: Vec<f32>,
    pub wo: Mat,
    pub bo: Vec<f32>,
    /// `(2·clip + 1) × head_dim` relative-position key table, shared
    /// across heads.
    pub rel_k: Mat,
    pub ln2_gamma: Vec<f32>,
    pub ln2_beta: Vec<f32>,
    pub w1: Mat,
    pub b1: Vec<f32>,
    pub w2: Mat,
    pub b2: Vec<f32>,
}

/// Complete encoder parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    pub config: EncoderConfig,
    pub conv: Vec<ConvStage>,
    pub layers: Vec<LayerWeights>,
    pub ln_f_gamma: Vec<f32>,
    pub ln_f_beta: Vec<f32>,
}

/// `rows × cols` matrix with entries drawn uniformly from
/// `[-1/√fan_in, 1/√fan_in]`.
pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, fan_in: usize) -> Mat {
    let bound = 1.0 / (fan_in as f32).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Mat::from_vec(rows, cols, data)
}

/// Vector with entries drawn uniformly from `[-1/√fan_in, 1/√fan_in]`.
pub fn uniform_vec(rng: &mut ChaCha8Rng, len: usize, fan_in: usize) -> Vec<f32> {
    let bound = 1.0 / (fan_in as f32).sqrt();
    (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
}

impl EncoderWeights {
    /// Initialize all weights from a seed. Matrices and biases are drawn
    /// in dump order; layer-norm scales start at 1 and shifts at 0.
    pub fn seeded(config: EncoderConfig, seed: u64) -> CoreResult<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.d_model;
        let ffn = config.ffn_dim();

        let conv = config
            .conv_stages()
            .into_iter()
            .map(|(in_ch, out_ch, stride)| {
                let fan = in_ch * 3;
                ConvStage {
                    in_ch,
                    out_ch,
                    stride,
                    w: uniform_vec(&mut rng, out_ch * in_ch * 3, fan),
                    b: uniform_vec(&mut rng, out_ch, fan),
                }
            })
            .collect();

        let layers = (0..config.layers)
            .map(|_| LayerWeights {
                ln1_gamma: vec![1.0; d],
                ln1_beta: vec![0.0; d],
                wq: uniform_matrix(&mut rng, d, d, d),
                bq: uniform_vec(&mut rng, d, d),
                wk: uniform_matrix(&mut rng, d, d, d),
                bk: uniform_vec(&mut rng, d, d),
                wv: uniform_matrix(&mut rng, d, d, d),
                bv: uniform_vec(&mut rng, d, d),
                wo: uniform_matrix(&mut rng, d, d, d),
                bo: uniform_vec(&mut rng, d, d),
                rel_k: uniform_matrix(
                    &mut rng,
                    2 * config.clip + 1,
                    config.head_dim(),
                    config.head_dim(),
                ),
                ln2_gamma: vec![1.0; d],
                ln2_beta: vec![0.0; d],
                w1: uniform_matrix(&mut rng, d, ffn, d),
                b1: uniform_vec(&mut rng, ffn, d),
                w2: uniform_matrix(&mut rng, ffn, d, ffn),
                b2: uniform_vec(&mut rng, d, ffn),
            })
            .collect();

        Ok(Self {
            config,
            conv,
            layers,
            ln_f_gamma: vec![1.0; d],
            ln_f_beta: vec![0.0; d],
        })
    }

    /// Serialize to the flat binary format.
    pub fn dump(&self, out: &mut impl Write) -> CoreResult<()> {
        out.write_all(WEIGHT_MAGIC)?;
        write_u32(out, WEIGHT_VERSION)?;
        for field in [
            self.config.d_model,
            self.config.layers,
            self.config.heads,
            self.config.banks,
            self.config.clip,
            self.config.subsample,
            self.config.d_in,
        ] {
            write_u32(out, u32::try_from(field).map_err(|_| {
                CoreError::WeightFormat("config field exceeds u32".into())
            })?)?;
        }
        for stage in &self.conv {
            write_f32s(out, &stage.w)?;
            write_f32s(out, &stage.b)?;
        }
        for layer in &self.layers {
            write_f32s(out, &layer.ln1_gamma)?;
            write_f32s(out, &layer.ln1_beta)?;
            write_f32s(out, layer.wq.data())?;
            write_f32s(out, &layer.bq)?;
            write_f32s(out, layer.wk.data())?;
            write_f32s(out, &layer.bk)?;
            write_f32s(out, layer.wv.data())?;
            write_f32s(out, &layer.bv)?;
            write_f32s(out, layer.wo.data())?;
            write_f32s(out, &layer.bo)?;
            write_f32s(out, layer.rel_k.data())?;
            write_f32s(out, &layer.ln2_gamma)?;
            write_f32s(out, &layer.ln2_beta)?;
            write_f32s(out, layer.w1.data())?;
            write_f32s(out, &layer.b1)?;
            write_f32s(out, layer.w2.data())?;
            write_f32s(out, &layer.b2)?;
        }
        write_f32s(out, &self.ln_f_gamma)?;
        write_f32s(out, &self.ln_f_beta)?;
        Ok(())
    }

    /// Deserialize from the flat binary format.
    pub fn load(input: &mut impl Read) -> CoreResult<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != WEIGHT_MAGIC {
            return Err(CoreError::WeightFormat("bad magic".into()));
        }
        let version = read_u32(input)?;
        if version != WEIGHT_VERSION {
            return Err(CoreError::WeightFormat(format!(
                "unsupported version {version}"
            )));
        }
        let mut fields = [0usize; 7];
        for f in &mut fields {
            *f = read_u32(input)? as usize;
        }
        let config = EncoderConfig {
            d_model: fields[0],
            layers: fields[1],
            heads: fields[2],
            banks: fields[3],
            clip: fields[4],
            subsample: fields[5],
            d_in: fields[6],
        };
        config.validate()?;
        let d = config.d_model;
        let ffn = config.ffn_dim();

        let conv = config
            .conv_stages()
            .into_iter()
            .map(|(in_ch, out_ch, stride)| -> CoreResult<ConvStage> {
                Ok(ConvStage {
                    in_ch,
                    out_ch,
                    stride,
                    w: read_f32s(input, out_ch * in_ch * 3)?,
                    b: read_f32s(input, out_ch)?,
                })
            })
            .collect::<CoreResult<Vec<_>>>()?;

        let layers = (0..config.layers)
            .map(|_| -> CoreResult<LayerWeights> {
                Ok(LayerWeights {
                    ln1_gamma: read_f32s(input, d)?,
                    ln1_beta: read_f32s(input, d)?,
                    wq: Mat::from_vec(d, d, read_f32s(input, d * d)?),
                    bq: read_f32s(input, d)?,
                    wk: Mat::from_vec(d, d, read_f32s(input, d * d)?),
                    bk: read_f32s(input, d)?,
                    wv: Mat::from_vec(d, d, read_f32s(input, d * d)?),
                    bv: read_f32s(input, d)?,
                    wo: Mat::from_vec(d, d, read_f32s(input, d * d)?),
                    bo: read_f32s(input, d)?,
                    rel_k: Mat::from_vec(
                        2 * config.clip + 1,
                        config.head_dim(),
                        read_f32s(input, (2 * config.clip + 1) * config.head_dim())?,
                    ),
                    ln2_gamma: read_f32s(input, d)?,
                    ln2_beta: read_f32s(input, d)?,
                    w1: Mat::from_vec(d, ffn, read_f32s(input, d * ffn)?),
                    b1: read_f32s(input, ffn)?,
                    w2: Mat::from_vec(ffn, d, read_f32s(input, ffn * d)?),
                    b2: read_f32s(input, d)?,
                })
            })
            .collect::<CoreResult<Vec<_>>>()?;

        let ln_f_gamma = read_f32s(input, d)?;
        let ln_f_beta = read_f32s(input, d)?;

        let mut trailing = [0u8; 1];
        match input.read(&mut trailing)? {
            0 => Ok(Self {
                config,
                conv,
                layers,
                ln_f_gamma,
                ln_f_beta,
            }),
            _ => Err(CoreError::WeightFormat("trailing bytes after tensors".into())),
        }
    }
}

fn write_u32(out: &mut impl Write, v: u32) -> CoreResult<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32(input: &mut impl Read) -> CoreResult<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn write_f32s(out: &mut impl Write, vals: &[f32]) -> CoreResult<()> {
    for v in vals {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f32s(input: &mut impl Read, count: usize) -> CoreResult<Vec<f32>> {
    let mut bytes = vec![0u8; count * 4];
    input.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
