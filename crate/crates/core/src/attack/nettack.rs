use std::collections::HashSet;

use crate::attack::perturbation::Perturbation;
use crate::attack::view::{logit_margin, SurrogateScores, TargetView};
use crate::graph::Graph;

/// Scores within this distance of the best are treated as ties.
pub const TIE_EPS: f64 = 1e-9;

/// Pairs whose flip can change the surrogate logits of `target`: every
/// pair with at least one endpoint in the closed neighborhood `N[target]`.
/// Sorted lexicographically.
pub fn influence_candidates(view: &TargetView<'_>, target: usize) -> Vec<(usize, usize)> {
    let n = view.graph.node_count();
    let mut closed: Vec<usize> = view.graph.neighbors(target).to_vec();
    closed.push(target);
    closed.sort_unstable();
    let in_closed = |x: usize| closed.binary_search(&x).is_ok();
    let mut pairs = Vec::new();
    for &s in &closed {
        for w in 0..n {
            if w == s || (in_closed(w) && w < s) {
                continue;
            }
            pairs.push((s.min(w), s.max(w)));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Lowest score; among scores within [`TIE_EPS`] of it, the
/// lexicographically smallest pair.
pub fn pick_best(scored: &[((usize, usize), f64)]) -> Option<((usize, usize), f64)> {
    let min = scored.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    scored
        .iter()
        .filter(|&&(_, s)| s <= min + TIE_EPS)
        .min_by_key(|&&(pair, _)| pair)
        .copied()
}

/// Greedy structure search on the surrogate. Every step scores each
/// legal flip that touches the target's closed neighborhood by the exact
/// surrogate logit margin after the flip, and commits the lowest. Stops
/// early once no flip lowers the margin.
pub fn attack_nettack(g: &Graph, target: usize, budget: usize, scores: &SurrogateScores) -> Perturbation {
    let mut view = TargetView::new(g, scores);
    nettack_on_view(&mut view, g.labels(), target, budget)
}

/// Runs the greedy search against an existing working state, leaving the
/// committed flips applied to `view`.
pub fn nettack_on_view(
    view: &mut TargetView<'_>,
    labels: &[usize],
    target: usize,
    budget: usize,
) -> Perturbation {
    let y = labels[target];
    let mut flipped: HashSet<(usize, usize)> = HashSet::new();
    let mut p = Perturbation::empty(target, budget);
    for _ in 0..budget {
        let current = logit_margin(&view.logits(target), y);
        let scored: Vec<((usize, usize), f64)> = influence_candidates(view, target)
            .into_iter()
            .filter(|pair| !flipped.contains(pair))
            .filter(|&(a, b)| view.graph.keeps_nodes_connected(view.graph.flip_op(a, b)))
            .map(|(a, b)| ((a, b), logit_margin(&view.logits_after_flip(target, a, b), y)))
            .collect();
        match pick_best(&scored) {
            Some(((a, b), score)) if score < current - TIE_EPS => {
                let op = view.graph.flip_op(a, b);
                view.apply(op);
                flipped.insert((a, b));
                p.ops.push(op);
            }
            _ => {
                p.truncated = true;
                break;
            }
        }
    }
    p
}
