use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::kernel::{Tape, Tensor, Var};

/// All trainable matrices of an encoder plus its heads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Perceptron weight stack per layer, each `in × out`.
    pub layers: Vec<Vec<Tensor>>,
    /// `bottleneck × bottleneck` readout map.
    pub readout: Tensor,
    /// `bottleneck × classes` classifier.
    pub decoder: Tensor,
    /// `bottleneck × bottleneck` bilinear discriminator.
    pub discriminator: Tensor,
}

/// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Tensor::from_vec(rows, cols, data).expect("sized")
}

impl ModelParams {
    pub fn init(cfg: &EncoderConfig, feature_dim: usize, n_classes: usize, seed: u64) -> Result<Self> {
        let shapes = cfg.layer_shapes(feature_dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = shapes
            .iter()
            .map(|s| {
                (0..cfg.perceptron_depth)
                    .map(|i| {
                        let fan_in = if i == 0 { s.input } else { s.output };
                        glorot(fan_in, s.output, &mut rng)
                    })
                    .collect()
            })
            .collect();
        let b = cfg.bottleneck();
        Ok(Self {
            layers,
            readout: glorot(b, b, &mut rng),
            decoder: glorot(b, n_classes, &mut rng),
            discriminator: glorot(b, b, &mut rng),
        })
    }

    /// Checks every matrix against the shapes `cfg` implies.
    pub fn check(&self, cfg: &EncoderConfig, feature_dim: usize, n_classes: usize) -> Result<()> {
        let shapes = cfg.layer_shapes(feature_dim)?;
        let bad = |what: String| Err(Error::Encoder(format!("parameter shape mismatch: {what}")));
        if self.layers.len() != shapes.len() {
            return bad(format!("{} layers, expected {}", self.layers.len(), shapes.len()));
        }
        for (k, (stack, s)) in self.layers.iter().zip(&shapes).enumerate() {
            if stack.len() != cfg.perceptron_depth {
                return bad(format!("layer {} depth {}", k + 1, stack.len()));
            }
            for (i, w) in stack.iter().enumerate() {
                let want = (if i == 0 { s.input } else { s.output }, s.output);
                if w.shape() != want {
                    return bad(format!("layer {} weight {i}: {:?} vs {want:?}", k + 1, w.shape()));
                }
            }
        }
        let b = cfg.bottleneck();
        if self.readout.shape() != (b, b)
            || self.decoder.shape() != (b, n_classes)
            || self.discriminator.shape() != (b, b)
        {
            return bad("head shapes".into());
        }
        if !self.iter().all(Tensor::is_finite) {
            return Err(Error::Encoder("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Every matrix in a fixed order: layer stacks, readout, decoder,
    /// discriminator.
    pub fn iter(&self) -> impl Iterator<Item = &Tensor> {
        self.layers
            .iter()
            .flatten()
            .chain([&self.readout, &self.decoder, &self.discriminator])
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.layers.iter_mut().flatten().chain([
            &mut self.readout,
            &mut self.decoder,
            &mut self.discriminator,
        ])
    }

    pub fn count(&self) -> usize {
        self.iter().map(|t| t.data().len()).sum()
    }

    /// Order-sensitive hash of every parameter bit pattern.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the raw f64 bits.
        let mut h: u64 = 0xcbf29ce484222325;
        for t in self.iter() {
            for &x in t.data() {
                for b in x.to_bits().to_le_bytes() {
                    h ^= u64::from(b);
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }

    /// Registers every matrix on `tape` as a trainable leaf.
    pub fn register(&self, tape: &mut Tape) -> Result<ParamVars> {
        let layers = self
            .layers
            .iter()
            .map(|stack| stack.iter().map(|w| tape.param(w)).collect())
            .collect::<Result<Vec<Vec<Var>>>>()?;
        Ok(ParamVars {
            layers,
            readout: tape.param(&self.readout)?,
            decoder: tape.param(&self.decoder)?,
            discriminator: tape.param(&self.discriminator)?,
        })
    }
}

/// Tape handles for a [`ModelParams`], in the same order as
/// [`ModelParams::iter`].
#[derive(Clone, Debug)]
pub struct ParamVars {
    pub layers: Vec<Vec<Var>>,
    pub readout: Var,
    pub decoder: Var,
    pub discriminator: Var,
}

impl ParamVars {
    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        self.layers
            .iter()
            .flatten()
            .copied()
            .chain([self.readout, self.decoder, self.discriminator])
    }
}
