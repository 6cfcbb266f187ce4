//! Random full-model instances for the gradient oracle: small connected
//! graphs, every encoder variant, every training objective.

use rand::Rng;
use robust_gnn::attack::{apply_ops, EdgeOp};
use robust_gnn::encoder::{EncoderConfig, ModelParams};
use robust_gnn::train::{
    acl_objective, ncl_objective, noise_weights, plain_objective, sample_batch, sample_ncl, AclInputs,
    AclUpdate,
};
use robust_gnn::{Csr, Graph, Tensor};

use super::{max_rel_err, numeric_gradient, random_edges, random_tensor, rng, tiny_encoder, INTER, INTRA};

pub const D: usize = 16;
// At 1e-6 the round-off of the differenced loss (~1e-10 absolute) is
// already visible against the 1e-6 floor; 1e-5 balances it against the
// O(h²) truncation error.
pub const STEP: f64 = 1e-5;
pub const FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loss {
    Supervised,
    Ncl,
    AclJoint,
    AclMinimax,
}

impl Loss {
    pub const ALL: [Loss; 4] = [Loss::Supervised, Loss::Ncl, Loss::AclJoint, Loss::AclMinimax];
}

pub fn flat(p: &ModelParams) -> Vec<Tensor> {
    p.iter().cloned().collect()
}

pub fn rebuild(template: &ModelParams, values: &[Tensor]) -> ModelParams {
    let mut p = template.clone();
    for (dst, src) in p.iter_mut().zip(values) {
        *dst = src.clone();
    }
    p
}

/// Random graph on 6 to 10 nodes with a spanning path, so no node is
/// isolated and the contrastive sample has edges.
fn connected_graph(seed: u64) -> Graph {
    let mut r = rng(seed);
    let n = r.random_range(6..11);
    let classes = r.random_range(2..4);
    let mut edges = random_edges(n, 0.3, &mut r);
    edges.extend((1..n).map(|v| (v - 1, v)));
    edges.sort_unstable();
    edges.dedup();
    let x = random_tensor(n, D, &mut r);
    let labels = (0..n).map(|v| v % classes).collect();
    Graph::new(Csr::from_edges(n, edges).unwrap(), x, labels, classes).unwrap()
}

/// Instance `seed`: the loss cycles fastest, then the intra and inter
/// aggregators, so every 36 seeds cover each pairing once.
pub fn instance(seed: u64) -> (Loss, EncoderConfig) {
    let s = seed as usize;
    let cfg = tiny_encoder(INTRA[(s / 4) % 3], INTER[(s / 12) % 3]);
    (Loss::ALL[s % 4], cfg)
}

/// Worst relative error between the objective's gradient and central
/// differences for instance `seed`.
pub fn model_error(seed: u64) -> (Loss, f64) {
    let (loss, cfg) = instance(seed);
    let g = connected_graph(seed);
    let n = g.node_count();
    let p = ModelParams::init(&cfg, D, g.n_classes(), seed + 100).unwrap();
    let train: Vec<usize> = (0..n).step_by(2).collect();
    let params = flat(&p);
    let err = match loss {
        Loss::Supervised => {
            let (_, grads) = plain_objective(&p, &cfg, &g, &train).unwrap();
            let num = numeric_gradient(
                |v| plain_objective(&rebuild(&p, v), &cfg, &g, &train).unwrap().0,
                &params,
                STEP,
            );
            max_rel_err(&grads, &num, FLOOR)
        }
        Loss::Ncl => {
            let sample = sample_ncl(&g, 3, &noise_weights(&g), seed).unwrap();
            let (_, grads) = ncl_objective(&p, &cfg, &g, &train, &sample, 0.7).unwrap();
            let num = numeric_gradient(
                |v| {
                    ncl_objective(&rebuild(&p, v), &cfg, &g, &train, &sample, 0.7)
                        .unwrap()
                        .0
                },
                &params,
                STEP,
            );
            max_rel_err(&grads, &num, FLOOR)
        }
        Loss::AclJoint | Loss::AclMinimax => {
            let mut r = rng(seed ^ 0x5eed);
            let mut ops: Vec<EdgeOp> = (0..2)
                .filter_map(|_| {
                    let (a, b) = (r.random_range(0..n), r.random_range(0..n));
                    (a != b && !g.has_edge(a, b)).then(|| EdgeOp::add(a, b))
                })
                .collect();
            ops.dedup_by_key(|op| op.pair());
            let adv = apply_ops(&g, &ops).unwrap();
            let batch = sample_batch(n, 4, seed);
            let update = if loss == Loss::AclJoint {
                AclUpdate::Joint
            } else {
                AclUpdate::Minimax
            };
            let inputs = AclInputs {
                graph: &g,
                adversarial: &adv,
                train_nodes: &train,
                batch: &batch,
                lambda: 1.1,
                update,
            };
            let eval = acl_objective(&p, &cfg, &inputs).unwrap();
            let enc = numeric_gradient(
                |v| {
                    acl_objective(&rebuild(&p, v), &cfg, &inputs)
                        .unwrap()
                        .encoder_loss
                },
                &params,
                STEP,
            );
            if update == AclUpdate::Joint {
                max_rel_err(&eval.grads, &enc, FLOOR)
            } else {
                // the discriminator weight answers to the contrastive term only
                let last = params.len() - 1;
                let disc = numeric_gradient(
                    |w| {
                        let mut v = params.clone();
                        v[last] = w[0].clone();
                        acl_objective(&rebuild(&p, &v), &cfg, &inputs)
                            .unwrap()
                            .contrastive
                    },
                    &params[last..],
                    STEP,
                );
                max_rel_err(&eval.grads[..last], &enc[..last], FLOOR).max(max_rel_err(
                    &eval.grads[last..],
                    &disc,
                    FLOOR,
                ))
            }
        }
    };
    (loss, err)
}
