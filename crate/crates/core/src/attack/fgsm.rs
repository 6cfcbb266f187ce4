use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attack::perturbation::{EdgeOp, Perturbation};
use crate::attack::random::random_step;
use crate::attack::view::{SurrogateScores, TargetView};
use crate::graph::Graph;
use crate::seed;

/// Greedy gradient-sign attack on the target's adjacency row.
///
/// Each step takes the gradient of the surrogate's cross-entropy for the
/// target with respect to the relaxed entries `A[v, u]`, and flips the
/// entry whose sign-aligned change (add where the gradient is positive,
/// remove where it is negative) has the largest magnitude. Gradients are
/// recomputed after every flip. When no entry has a positive aligned
/// gradient the step falls back to a random flip.
pub fn attack_fgsm(
    g: &Graph,
    target: usize,
    budget: usize,
    scores: &SurrogateScores,
    seed: u64,
) -> Perturbation {
    let labels = g.labels();
    let y = labels[target];
    let mut view = TargetView::new(g, scores);
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[0x4647534d, target as u64]));
    let mut flipped = HashSet::new();
    let mut p = Perturbation::empty(target, budget);

    for _ in 0..budget {
        let grad = view.adjacency_gradient(target, y);
        let mut best: Option<(f64, EdgeOp)> = None;
        for (u, &gu) in grad.iter().enumerate() {
            if u == target || flipped.contains(&(target.min(u), target.max(u))) {
                continue;
            }
            let op = view.graph.flip_op(target, u);
            let gain = match op {
                EdgeOp::Add(..) => gu,
                EdgeOp::Remove(..) => -gu,
            };
            if gain <= 0.0 || !view.graph.keeps_nodes_connected(op) {
                continue;
            }
            if best.is_none_or(|(b, _)| gain > b) {
                best = Some((gain, op));
            }
        }
        let op = match best {
            Some((_, op)) => op,
            None => match random_step(&view.graph, labels, target, &flipped, &mut rng) {
                Some(op) => {
                    p.fallback_steps += 1;
                    op
                }
                None => {
                    p.truncated = true;
                    break;
                }
            },
        };
        view.apply(op);
        flipped.insert(op.pair());
        p.ops.push(op);
    }
    p
}
