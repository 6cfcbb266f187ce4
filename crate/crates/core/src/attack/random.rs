use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attack::perturbation::{EdgeOp, Perturbation, WorkingGraph};
use crate::graph::Graph;
use crate::seed;

/// Flips available to the random attack in the current state: edges to
/// other-class nodes that can be added, and same-class edges that can be
/// removed without isolating either endpoint.
pub(crate) fn random_candidates(
    work: &WorkingGraph,
    labels: &[usize],
    target: usize,
    flipped: &HashSet<(usize, usize)>,
) -> (Vec<EdgeOp>, Vec<EdgeOp>) {
    let y = labels[target];
    let adds = (0..work.node_count())
        .filter(|&u| u != target && labels[u] != y && !work.has_edge(target, u))
        .map(|u| EdgeOp::add(target, u))
        .filter(|op| !flipped.contains(&op.pair()))
        .collect();
    let dels = work
        .neighbors(target)
        .iter()
        .filter(|&&u| labels[u] == y)
        .map(|&u| EdgeOp::remove(target, u))
        .filter(|op| !flipped.contains(&op.pair()) && work.keeps_nodes_connected(*op))
        .collect();
    (adds, dels)
}

/// One random step: pick add-cross-class or delete-same-class with equal
/// probability (or whichever is feasible), then a uniform op of that kind.
pub(crate) fn random_step(
    work: &WorkingGraph,
    labels: &[usize],
    target: usize,
    flipped: &HashSet<(usize, usize)>,
    rng: &mut impl Rng,
) -> Option<EdgeOp> {
    let (adds, dels) = random_candidates(work, labels, target, flipped);
    let pool = match (adds.is_empty(), dels.is_empty()) {
        (true, true) => return None,
        (false, true) => &adds,
        (true, false) => &dels,
        (false, false) => {
            if rng.random_bool(0.5) {
                &adds
            } else {
                &dels
            }
        }
    };
    pool.choose(rng).copied()
}

/// Random structure attack using ground-truth `labels`. Returns fewer
/// than `budget` ops, flagged as truncated, when no feasible op is left.
pub fn attack_rand(g: &Graph, target: usize, budget: usize, labels: &[usize], seed: u64) -> Perturbation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[0x52414e44, target as u64]));
    let mut work = WorkingGraph::from_graph(g);
    let mut flipped = HashSet::new();
    let mut p = Perturbation::empty(target, budget);
    for _ in 0..budget {
        match random_step(&work, labels, target, &flipped, &mut rng) {
            Some(op) => {
                work.apply(op);
                flipped.insert(op.pair());
                p.ops.push(op);
            }
            None => {
                p.truncated = true;
                break;
            }
        }
    }
    p
}
