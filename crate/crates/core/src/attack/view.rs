//! Incremental evaluation of the linear surrogate around one target.
//!
//! With `Z = X W1 W2` and `M = Â Z`, the target's logits are
//! `L_v = Σ_{j ∈ N[v]} M_j / |N[v]|`. Flipping `(a, b)` only changes the
//! rows `M_a` and `M_b` and, when `v ∈ {a, b}`, the closed neighborhood
//! of `v`, so every candidate is scored in `O(deg(v) · classes)`.

use crate::attack::perturbation::{EdgeOp, WorkingGraph};
use crate::encoder::SurrogateParams;
use crate::error::Result;
use crate::graph::Graph;
use crate::kernel::Tensor;

/// Surrogate scores of the clean graph, shared by all targets.
#[derive(Clone, Debug)]
pub struct SurrogateScores {
    z: Tensor,
    m: Tensor,
}

impl SurrogateScores {
    pub fn new(g: &Graph, surrogate: &SurrogateParams) -> Result<Self> {
        let z = surrogate.projected(g)?;
        let work = WorkingGraph::from_graph(g);
        let mut m = Tensor::zeros(z.rows(), z.cols());
        for v in 0..z.rows() {
            closed_mean_into(&work, &z, v, m.row_mut(v));
        }
        Ok(Self { z, m })
    }

    pub fn classes(&self) -> usize {
        self.z.cols()
    }
}

fn closed_mean_into(work: &WorkingGraph, z: &Tensor, v: usize, out: &mut [f64]) {
    out.copy_from_slice(z.row(v));
    for &u in work.neighbors(v) {
        for (o, x) in out.iter_mut().zip(z.row(u)) {
            *o += x;
        }
    }
    let inv = 1.0 / (work.degree(v) + 1) as f64;
    out.iter_mut().for_each(|o| *o *= inv);
}

/// Logit margin `z_y − max_{c≠y} z_c`.
pub fn logit_margin(logits: &[f64], label: usize) -> f64 {
    let other = logits
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != label)
        .map(|(_, &x)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    logits[label] - other
}

/// Mutable surrogate state for one attack run.
#[derive(Clone, Debug)]
pub struct TargetView<'a> {
    pub graph: WorkingGraph,
    z: &'a Tensor,
    m: Tensor,
}

impl<'a> TargetView<'a> {
    pub fn new(g: &Graph, scores: &'a SurrogateScores) -> Self {
        Self {
            graph: WorkingGraph::from_graph(g),
            z: &scores.z,
            m: scores.m.clone(),
        }
    }

    pub fn from_working(graph: WorkingGraph, scores: &'a SurrogateScores) -> Self {
        let mut m = Tensor::zeros(scores.z.rows(), scores.z.cols());
        for v in 0..scores.z.rows() {
            closed_mean_into(&graph, &scores.z, v, m.row_mut(v));
        }
        Self {
            graph,
            z: &scores.z,
            m,
        }
    }

    pub fn logits(&self, v: usize) -> Vec<f64> {
        let mut out = self.m.row(v).to_vec();
        for &u in self.graph.neighbors(v) {
            for (o, x) in out.iter_mut().zip(self.m.row(u)) {
                *o += x;
            }
        }
        let inv = 1.0 / (self.graph.degree(v) + 1) as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        out
    }

    /// Row `M_x` after flipping the edge `(x, other)`.
    fn m_after(&self, x: usize, other: usize, adding: bool) -> Vec<f64> {
        let d = self.graph.degree(x) as f64;
        let (sign, d_new) = if adding { (1.0, d + 2.0) } else { (-1.0, d) };
        self.m
            .row(x)
            .iter()
            .zip(self.z.row(other))
            .map(|(m, z)| (m * (d + 1.0) + sign * z) / d_new)
            .collect()
    }

    /// Target logits as if `(a, b)` were flipped, without mutating.
    pub fn logits_after_flip(&self, v: usize, a: usize, b: usize) -> Vec<f64> {
        let adding = !self.graph.has_edge(a, b);
        let ma = self.m_after(a, b, adding);
        let mb = self.m_after(b, a, adding);
        let row = |j: usize| -> &[f64] {
            if j == a {
                &ma
            } else if j == b {
                &mb
            } else {
                self.m.row(j)
            }
        };
        let mut out = row(v).to_vec();
        let mut count = 1usize;
        // the partner of v in the flipped pair, if any
        let partner = if a == v {
            Some(b)
        } else if b == v {
            Some(a)
        } else {
            None
        };
        for &u in self.graph.neighbors(v) {
            if Some(u) == partner {
                continue;
            }
            for (o, x) in out.iter_mut().zip(row(u)) {
                *o += x;
            }
            count += 1;
        }
        if let (Some(p), true) = (partner, adding) {
            for (o, x) in out.iter_mut().zip(row(p)) {
                *o += x;
            }
            count += 1;
        }
        let inv = 1.0 / count as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        out
    }

    pub fn apply(&mut self, op: EdgeOp) -> bool {
        if !self.graph.apply(op) {
            return false;
        }
        let (a, b) = op.pair();
        for x in [a, b] {
            let mut row = vec![0.0; self.m.cols()];
            closed_mean_into(&self.graph, self.z, x, &mut row);
            self.m.row_mut(x).copy_from_slice(&row);
        }
        true
    }

    /// Gradient of the target's cross-entropy loss with respect to every
    /// symmetric adjacency entry `A[v, u]`, treating entries as continuous.
    pub fn adjacency_gradient(&self, v: usize, label: usize) -> Vec<f64> {
        let logits = self.logits(v);
        let mx = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|x| (x - mx).exp()).collect();
        let total: f64 = exps.iter().sum();
        let dl: Vec<f64> = exps
            .iter()
            .enumerate()
            .map(|(c, e)| e / total - if c == label { 1.0 } else { 0.0 })
            .collect();

        let n = self.graph.node_count();
        let dv1 = (self.graph.degree(v) + 1) as f64;
        let mv = self.m.row(v);
        let zv = self.z.row(v);
        let mut grad = vec![0.0; n];
        for (u, slot) in grad.iter_mut().enumerate() {
            if u == v {
                continue;
            }
            let a_vu = if self.graph.has_edge(v, u) { 1.0 } else { 0.0 };
            let du1 = (self.graph.degree(u) + 1) as f64;
            let mu = self.m.row(u);
            let zu = self.z.row(u);
            let mut s = 0.0;
            for c in 0..logits.len() {
                let d = (mu[c] - logits[c]) / dv1
                    + (zu[c] - mv[c]) / (dv1 * dv1)
                    + a_vu / dv1 * (zv[c] - mu[c]) / du1;
                s += dl[c] * d;
            }
            *slot = s;
        }
        grad
    }
}
