//! Linearized two-layer surrogate used by black-box attacks:
//! `logits = Â (Â X W1) W2` with `Â` the row-normalized adjacency
//! including self-loops and no nonlinearity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::params::glorot;
use crate::error::Result;
use crate::graph::{Graph, SplitMasks};
use crate::kernel::{Reduce, Tape, Tensor, Var};
use crate::optim::Adam;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateParams {
    pub w1: Tensor,
    pub w2: Tensor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateTraining {
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for SurrogateTraining {
    fn default() -> Self {
        Self {
            hidden: 16,
            epochs: 100,
            lr: 0.01,
            seed: 0,
        }
    }
}

fn surrogate_logits(tape: &mut Tape, g: &Graph, w1: Var, w2: Var) -> Result<Var> {
    let adj = g.adjacency_arc();
    let x = tape.constant(g.features().clone())?;
    let xw = tape.matmul(x, w1)?;
    let zw = tape.matmul(xw, w2)?;
    let one = tape.neighbor_rows(zw, &adj, Reduce::MeanWithSelf)?;
    tape.neighbor_rows(one, &adj, Reduce::MeanWithSelf)
}

impl SurrogateParams {
    pub fn init(feature_dim: usize, hidden: usize, n_classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            w1: glorot(feature_dim, hidden, &mut rng),
            w2: glorot(hidden, n_classes, &mut rng),
        }
    }

    /// `X W1 W2`, the per-node class scores before propagation.
    pub fn projected(&self, g: &Graph) -> Result<Tensor> {
        g.features().matmul(&self.w1)?.matmul(&self.w2)
    }

    pub fn logits(&self, g: &Graph) -> Result<Tensor> {
        let mut tape = Tape::new();
        let w1 = tape.constant(self.w1.clone())?;
        let w2 = tape.constant(self.w2.clone())?;
        let out = surrogate_logits(&mut tape, g, w1, w2)?;
        Ok(tape.value(out).clone())
    }

    /// Supervised loss on `nodes` together with its tape gradient.
    pub fn loss_and_grads(&self, g: &Graph, nodes: &[usize]) -> Result<(f64, [Tensor; 2])> {
        let mut tape = Tape::new();
        let w1 = tape.param(&self.w1)?;
        let w2 = tape.param(&self.w2)?;
        let logits = surrogate_logits(&mut tape, g, w1, w2)?;
        let targets: Vec<usize> = nodes.iter().map(|&v| g.labels()[v]).collect();
        let loss = tape.softmax_xent(logits, nodes, &targets)?;
        let grads = tape.backward(loss)?;
        Ok((
            tape.value(loss).scalar(),
            [
                grads.get_or_zeros(w1, self.w1.shape()),
                grads.get_or_zeros(w2, self.w2.shape()),
            ],
        ))
    }
}

/// Fits the surrogate on the training nodes of the clean graph.
pub fn train_surrogate(g: &Graph, masks: &SplitMasks, opts: &SurrogateTraining) -> Result<SurrogateParams> {
    let mut params = SurrogateParams::init(g.feature_dim(), opts.hidden, g.n_classes(), opts.seed);
    let mut adam = Adam::new([&params.w1, &params.w2]);
    for _ in 0..opts.epochs {
        let (_, grads) = params.loss_and_grads(g, &masks.train)?;
        adam.step([&mut params.w1, &mut params.w2], &grads, opts.lr);
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Csr;

    #[test]
    fn identity_weights_give_two_hop_features() {
        // path 0-1-2, identity features, W1 = W2 = I
        let g = Graph::new(
            Csr::from_edges(3, [(0, 1), (1, 2)]).unwrap(),
            Tensor::identity(3),
            vec![0, 1, 2],
            3,
        )
        .unwrap();
        let s = SurrogateParams {
            w1: Tensor::identity(3),
            w2: Tensor::identity(3),
        };
        let a_hat = Tensor::from_rows(&[
            [0.5, 0.5, 0.0],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            [0.0, 0.5, 0.5],
        ]);
        let want = a_hat.matmul(&a_hat).unwrap();
        assert!(s.logits(&g).unwrap().max_abs_diff(&want) < 1e-15);
    }
}
