//! Reverse-mode differentiation over a fixed vocabulary of matrix ops.
//!
//! Every op appends a node holding its forward value and whatever the
//! backward rule needs. [`Tape::backward`] walks the nodes in exact
//! reverse order of execution and accumulates gradients. Nodes that do
//! not depend on any gradient-requiring leaf are skipped.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::Csr;
use crate::kernel::tensor::{gemm, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// Neighborhood reduction used by [`Tape::neighbor_rows`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduce {
    Mean,
    Sum,
    Max,
    /// Mean over the closed neighborhood `N(v) ∪ {v}`.
    MeanWithSelf,
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Sigmoid(Var),
    Transpose(Var),
    Concat(Vec<Var>),
    RowLookup(Var, Vec<usize>),
    MeanRows(Var),
    RowDot(Var, Var),
    Neighbor {
        input: Var,
        adj: Arc<Csr>,
        reduce: Reduce,
        // Max only: source row per output element, usize::MAX if none.
        argmax: Vec<usize>,
    },
    SoftmaxXent {
        logits: Var,
        rows: Vec<usize>,
        targets: Vec<usize>,
        probs: Tensor,
    },
    BceLogits {
        logits: Var,
        targets: Vec<f64>,
        scale: f64,
    },
}

struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one scalar with respect to the tape's gradient-requiring
/// leaves.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient for `v`, or zeros of `shape` when `v` did not influence
    /// the output.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Tensor {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(shape.0, shape.1))
    }
}

fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    stable_sigmoid(x)
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool, name: &'static str) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite(name));
        }
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// Trainable leaf.
    pub fn param(&mut self, t: &Tensor) -> Result<Var> {
        self.push(t.clone(), Op::Leaf, true, "param")
    }

    /// Leaf that receives no gradient.
    pub fn constant(&mut self, t: Tensor) -> Result<Var> {
        self.push(t, Op::Leaf, false, "constant")
    }

    /// Copies `v` into a new constant leaf, cutting gradient flow.
    pub fn detach(&mut self, v: Var) -> Result<Var> {
        let t = self.value(v).clone();
        self.constant(t)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.1 != sb.0 {
            return Err(Error::Shape {
                op: "matmul",
                left: sa,
                right: sb,
            });
        }
        let out = self.value(a).matmul(self.value(b))?;
        let ng = self.needs(a) || self.needs(b);
        self.push(out, Op::MatMul(a, b), ng, "matmul")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(Error::Shape {
                op: "add",
                left: sa,
                right: sb,
            });
        }
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        let ng = self.needs(a) || self.needs(b);
        self.push(out, Op::Add(a, b), ng, "add")
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var> {
        let out = self.value(a).scaled(s);
        let ng = self.needs(a);
        self.push(out, Op::Scale(a, s), ng, "scale")
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(|x| x.max(0.0));
        let ng = self.needs(a);
        self.push(out, Op::Relu(a), ng, "relu")
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).map(stable_sigmoid);
        let ng = self.needs(a);
        self.push(out, Op::Sigmoid(a), ng, "sigmoid")
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let out = self.value(a).transpose();
        let ng = self.needs(a);
        self.push(out, Op::Transpose(a), ng, "transpose")
    }

    /// Column-wise concatenation `[a; b; ...]` per row.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let Some(&first) = parts.first() else {
            return Err(Error::Other("concat_cols of nothing".into()));
        };
        let rows = self.shape(first).0;
        for &p in parts {
            if self.shape(p).0 != rows {
                return Err(Error::Shape {
                    op: "concat_cols",
                    left: self.shape(first),
                    right: self.shape(p),
                });
            }
        }
        let cols: usize = parts.iter().map(|&p| self.shape(p).1).sum();
        let mut out = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let dst = out.row_mut(r);
            let mut off = 0;
            for &p in parts {
                let src = self.nodes[p.0].value.row(r);
                dst[off..off + src.len()].copy_from_slice(src);
                off += src.len();
            }
        }
        let ng = parts.iter().any(|&p| self.needs(p));
        self.push(out, Op::Concat(parts.to_vec()), ng, "concat_cols")
    }

    /// Gathers rows `idx` (repeats allowed).
    pub fn row_lookup(&mut self, a: Var, idx: &[usize]) -> Result<Var> {
        let rows = self.shape(a).0;
        if let Some(&bad) = idx.iter().find(|&&i| i >= rows) {
            return Err(Error::Shape {
                op: "row_lookup",
                left: self.shape(a),
                right: (bad, 0),
            });
        }
        let out = self.value(a).gather_rows(idx);
        let ng = self.needs(a);
        self.push(out, Op::RowLookup(a, idx.to_vec()), ng, "row_lookup")
    }

    /// Column means: `n×c -> 1×c`.
    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let t = self.value(a);
        let (n, c) = t.shape();
        if n == 0 {
            return Err(Error::Shape {
                op: "mean_rows",
                left: (n, c),
                right: (1, c),
            });
        }
        let mut out = Tensor::zeros(1, c);
        for r in 0..n {
            for (o, x) in out.data_mut().iter_mut().zip(t.row(r)) {
                *o += x;
            }
        }
        let out = out.scaled(1.0 / n as f64);
        let ng = self.needs(a);
        self.push(out, Op::MeanRows(a), ng, "mean_rows")
    }

    /// Row-wise inner products: `r×c, r×c -> r×1`. A `1×c` right operand
    /// is broadcast against every row of `a`.
    pub fn row_dot(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.1 != sb.1 || (sa.0 != sb.0 && sb.0 != 1) {
            return Err(Error::Shape {
                op: "row_dot",
                left: sa,
                right: sb,
            });
        }
        let (ta, tb) = (self.value(a), self.value(b));
        let data = (0..sa.0)
            .map(|r| {
                let rb = if sb.0 == 1 { 0 } else { r };
                ta.row(r).iter().zip(tb.row(rb)).map(|(x, y)| x * y).sum()
            })
            .collect();
        let out = Tensor::from_vec(sa.0, 1, data)?;
        let ng = self.needs(a) || self.needs(b);
        self.push(out, Op::RowDot(a, b), ng, "row_dot")
    }

    /// Reduces each node's neighbor rows of `input`. Isolated nodes get a
    /// zero row (except under `MeanWithSelf`, which always includes the
    /// node itself). Max ties resolve to the first neighbor in id order.
    pub fn neighbor_rows(&mut self, input: Var, adj: &Arc<Csr>, reduce: Reduce) -> Result<Var> {
        let t = self.value(input);
        let (n, c) = t.shape();
        if n != adj.node_count() {
            return Err(Error::Shape {
                op: "neighbor_rows",
                left: (n, c),
                right: (adj.node_count(), adj.node_count()),
            });
        }
        let mut out = Tensor::zeros(n, c);
        let mut argmax = Vec::new();
        match reduce {
            Reduce::Sum | Reduce::Mean | Reduce::MeanWithSelf => {
                for v in 0..n {
                    let nb = adj.neighbors(v);
                    let dst = out.row_mut(v);
                    for &u in nb {
                        for (o, x) in dst.iter_mut().zip(t.row(u)) {
                            *o += x;
                        }
                    }
                    let count = match reduce {
                        Reduce::Sum => 1.0,
                        Reduce::Mean => nb.len().max(1) as f64,
                        _ => {
                            for (o, x) in dst.iter_mut().zip(t.row(v)) {
                                *o += x;
                            }
                            (nb.len() + 1) as f64
                        }
                    };
                    if count != 1.0 {
                        dst.iter_mut().for_each(|o| *o /= count);
                    }
                }
            }
            Reduce::Max => {
                argmax = vec![usize::MAX; n * c];
                for v in 0..n {
                    let nb = adj.neighbors(v);
                    if nb.is_empty() {
                        continue;
                    }
                    for j in 0..c {
                        let mut best = nb[0];
                        let mut best_val = t.get(best, j);
                        for &u in &nb[1..] {
                            let x = t.get(u, j);
                            if x > best_val {
                                best = u;
                                best_val = x;
                            }
                        }
                        out.set(v, j, best_val);
                        argmax[v * c + j] = best;
                    }
                }
            }
        }
        let ng = self.needs(input);
        self.push(
            out,
            Op::Neighbor {
                input,
                adj: Arc::clone(adj),
                reduce,
                argmax,
            },
            ng,
            "neighbor_rows",
        )
    }

    pub fn neighbor_mean_rows(&mut self, input: Var, adj: &Arc<Csr>) -> Result<Var> {
        self.neighbor_rows(input, adj, Reduce::Mean)
    }

    pub fn neighbor_sum_rows(&mut self, input: Var, adj: &Arc<Csr>) -> Result<Var> {
        self.neighbor_rows(input, adj, Reduce::Sum)
    }

    pub fn neighbor_max_rows(&mut self, input: Var, adj: &Arc<Csr>) -> Result<Var> {
        self.neighbor_rows(input, adj, Reduce::Max)
    }

    /// Mean softmax cross-entropy over the selected rows of `logits`.
    pub fn softmax_xent(&mut self, logits: Var, rows: &[usize], targets: &[usize]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::EmptyMask);
        }
        let t = self.value(logits);
        let (n, c) = t.shape();
        if rows.len() != targets.len() || rows.iter().any(|&r| r >= n) || targets.iter().any(|&y| y >= c) {
            return Err(Error::Shape {
                op: "softmax_xent",
                left: (n, c),
                right: (rows.len(), targets.len()),
            });
        }
        let mut probs = Tensor::zeros(rows.len(), c);
        let mut loss = 0.0;
        for (i, (&r, &y)) in rows.iter().zip(targets).enumerate() {
            let row = t.row(r);
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = row.iter().map(|x| (x - m).exp()).sum();
            let lse = m + z.ln();
            loss += lse - row[y];
            for (p, x) in probs.row_mut(i).iter_mut().zip(row) {
                *p = (x - lse).exp();
            }
        }
        let out = Tensor::filled(1, 1, loss / rows.len() as f64);
        let ng = self.needs(logits);
        self.push(
            out,
            Op::SoftmaxXent {
                logits,
                rows: rows.to_vec(),
                targets: targets.to_vec(),
                probs,
            },
            ng,
            "softmax_xent",
        )
    }

    /// `scale · Σ BCE(sigmoid(logits), targets)` computed from logits.
    pub fn binary_xent_with_logits(&mut self, logits: Var, targets: &[f64], scale: f64) -> Result<Var> {
        let t = self.value(logits);
        if t.data().len() != targets.len() {
            return Err(Error::Shape {
                op: "binary_xent",
                left: t.shape(),
                right: (targets.len(), 1),
            });
        }
        let total: f64 = t
            .data()
            .iter()
            .zip(targets)
            .map(|(&x, &y)| y * softplus(-x) + (1.0 - y) * softplus(x))
            .sum();
        let out = Tensor::filled(1, 1, scale * total);
        let ng = self.needs(logits);
        self.push(
            out,
            Op::BceLogits {
                logits,
                targets: targets.to_vec(),
                scale,
            },
            ng,
            "binary_xent",
        )
    }

    /// Reverse pass from the scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.shape(loss) != (1, 1) {
            return Err(Error::Shape {
                op: "backward",
                left: self.shape(loss),
                right: (1, 1),
            });
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::filled(1, 1, 1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let acc = |v: Var, delta: Tensor, grads: &mut Vec<Option<Tensor>>| {
                if !self.nodes[v.0].needs_grad {
                    return;
                }
                match &mut grads[v.0] {
                    Some(existing) => existing.add_assign(&delta),
                    slot => *slot = Some(delta),
                }
            };
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    if self.needs(*a) {
                        let mut ga = Tensor::zeros(ta.rows(), ta.cols());
                        gemm(&g, false, tb, true, &mut ga);
                        acc(*a, ga, &mut grads);
                    }
                    if self.needs(*b) {
                        let mut gb = Tensor::zeros(tb.rows(), tb.cols());
                        gemm(ta, true, &g, false, &mut gb);
                        acc(*b, gb, &mut grads);
                    }
                }
                Op::Add(a, b) => {
                    acc(*a, g.clone(), &mut grads);
                    acc(*b, g.clone(), &mut grads);
                }
                Op::Scale(a, s) => acc(*a, g.scaled(*s), &mut grads),
                Op::Relu(a) => {
                    let x = self.value(*a);
                    let mut d = g.clone();
                    for (o, &xi) in d.data_mut().iter_mut().zip(x.data()) {
                        if xi <= 0.0 {
                            *o = 0.0;
                        }
                    }
                    acc(*a, d, &mut grads);
                }
                Op::Sigmoid(a) => {
                    let mut d = g.clone();
                    for (o, &s) in d.data_mut().iter_mut().zip(node.value.data()) {
                        *o *= s * (1.0 - s);
                    }
                    acc(*a, d, &mut grads);
                }
                Op::Transpose(a) => acc(*a, g.transpose(), &mut grads),
                Op::Concat(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let (r, c) = self.shape(p);
                        if self.needs(p) {
                            let mut d = Tensor::zeros(r, c);
                            for row in 0..r {
                                d.row_mut(row).copy_from_slice(&g.row(row)[off..off + c]);
                            }
                            acc(p, d, &mut grads);
                        }
                        off += c;
                    }
                }
                Op::RowLookup(a, idx) => {
                    let (r, c) = self.shape(*a);
                    let mut d = Tensor::zeros(r, c);
                    for (k, &src) in idx.iter().enumerate() {
                        for (o, x) in d.row_mut(src).iter_mut().zip(g.row(k)) {
                            *o += x;
                        }
                    }
                    acc(*a, d, &mut grads);
                }
                Op::MeanRows(a) => {
                    let (r, c) = self.shape(*a);
                    let mut d = Tensor::zeros(r, c);
                    let inv = 1.0 / r as f64;
                    for row in 0..r {
                        for (o, x) in d.row_mut(row).iter_mut().zip(g.row(0)) {
                            *o = x * inv;
                        }
                    }
                    acc(*a, d, &mut grads);
                }
                Op::RowDot(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    let broadcast = tb.rows() == 1 && ta.rows() != 1;
                    let mut ga = Tensor::zeros(ta.rows(), ta.cols());
                    let mut gb = Tensor::zeros(tb.rows(), tb.cols());
                    for r in 0..ta.rows() {
                        let gr = g.get(r, 0);
                        let rb = if broadcast { 0 } else { r };
                        for j in 0..ta.cols() {
                            ga.set(r, j, gr * tb.get(rb, j));
                            let cur = gb.get(rb, j);
                            gb.set(rb, j, cur + gr * ta.get(r, j));
                        }
                    }
                    acc(*a, ga, &mut grads);
                    acc(*b, gb, &mut grads);
                }
                Op::Neighbor {
                    input,
                    adj,
                    reduce,
                    argmax,
                } => {
                    let (n, c) = self.shape(*input);
                    let mut d = Tensor::zeros(n, c);
                    match reduce {
                        Reduce::Max => {
                            for v in 0..n {
                                for j in 0..c {
                                    let src = argmax[v * c + j];
                                    if src != usize::MAX {
                                        let cur = d.get(src, j);
                                        d.set(src, j, cur + g.get(v, j));
                                    }
                                }
                            }
                        }
                        _ => {
                            for v in 0..n {
                                let nb = adj.neighbors(v);
                                let count = match reduce {
                                    Reduce::Sum => 1.0,
                                    Reduce::Mean => nb.len().max(1) as f64,
                                    _ => (nb.len() + 1) as f64,
                                };
                                let gv: Vec<f64> = g.row(v).iter().map(|x| x / count).collect();
                                for &u in nb {
                                    for (o, x) in d.row_mut(u).iter_mut().zip(&gv) {
                                        *o += x;
                                    }
                                }
                                if *reduce == Reduce::MeanWithSelf {
                                    for (o, x) in d.row_mut(v).iter_mut().zip(&gv) {
                                        *o += x;
                                    }
                                }
                            }
                        }
                    }
                    acc(*input, d, &mut grads);
                }
                Op::SoftmaxXent {
                    logits,
                    rows,
                    targets,
                    probs,
                } => {
                    let (n, c) = self.shape(*logits);
                    let mut d = Tensor::zeros(n, c);
                    let s = g.scalar() / rows.len() as f64;
                    for (i, (&r, &y)) in rows.iter().zip(targets).enumerate() {
                        let dst = d.row_mut(r);
                        for (k, (o, p)) in dst.iter_mut().zip(probs.row(i)).enumerate() {
                            *o += s * (p - if k == y { 1.0 } else { 0.0 });
                        }
                    }
                    acc(*logits, d, &mut grads);
                }
                Op::BceLogits {
                    logits,
                    targets,
                    scale,
                } => {
                    let x = self.value(*logits);
                    let s = g.scalar() * scale;
                    let mut d = x.clone();
                    for (o, &y) in d.data_mut().iter_mut().zip(targets) {
                        *o = s * (stable_sigmoid(*o) - y);
                    }
                    acc(*logits, d, &mut grads);
                }
            }
            if matches!(node.op, Op::Leaf) {
                grads[i] = Some(g);
            }
        }
        Ok(Gradients { grads })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj(n: usize, edges: &[(usize, usize)]) -> Arc<Csr> {
        Arc::new(Csr::from_edges(n, edges.iter().copied()).unwrap())
    }

    #[test]
    fn relu_forward() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row_vector(&[-1.0, 0.0, 2.0])).unwrap();
        let y = tape.relu(x).unwrap();
        assert_eq!(tape.value(y).data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn neighbor_mean_two_rows() {
        // node 0 has neighbors 1, 2 holding [1,3] and [3,1]
        let a = adj(3, &[(0, 1), (0, 2)]);
        let mut tape = Tape::new();
        let h = tape
            .constant(Tensor::from_rows(&[[9.0, 9.0], [1.0, 3.0], [3.0, 1.0]]))
            .unwrap();
        let m = tape.neighbor_mean_rows(h, &a).unwrap();
        assert_eq!(tape.value(m).row(0), &[2.0, 2.0]);
    }

    #[test]
    fn isolated_node_aggregates_to_zero() {
        let a = adj(3, &[(0, 1)]);
        for reduce in [Reduce::Mean, Reduce::Sum, Reduce::Max] {
            let mut tape = Tape::new();
            let h = tape.constant(Tensor::filled(3, 2, 5.0)).unwrap();
            let m = tape.neighbor_rows(h, &a, reduce).unwrap();
            assert_eq!(tape.value(m).row(2), &[0.0, 0.0], "{reduce:?}");
        }
    }

    #[test]
    fn max_ties_route_to_first_neighbor() {
        let a = adj(3, &[(0, 1), (0, 2)]);
        let mut tape = Tape::new();
        let h = tape.param(&Tensor::from_rows(&[[0.0], [4.0], [4.0]])).unwrap();
        let m = tape.neighbor_max_rows(h, &a).unwrap();
        let r = tape.row_lookup(m, &[0]).unwrap();
        let loss = tape.binary_xent_with_logits(r, &[1.0], 1.0).unwrap();
        let g = tape.backward(loss).unwrap();
        let gh = g.get(h).unwrap();
        assert!(gh.get(1, 0) != 0.0);
        assert_eq!(gh.get(2, 0), 0.0);
    }

    #[test]
    fn sigmoid_extremes_stay_finite() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row_vector(&[-800.0, 800.0])).unwrap();
        let s = tape.sigmoid(x).unwrap();
        assert_eq!(tape.value(s).data(), &[0.0, 1.0]);
        let l = tape.binary_xent_with_logits(x, &[1.0, 0.0], 1.0).unwrap();
        assert!((tape.value(l).scalar() - 1600.0).abs() < 1e-9);
    }

    #[test]
    fn non_finite_rejected() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row_vector(&[1e300])).unwrap();
        assert!(matches!(tape.scale(x, 1e300), Err(Error::NonFinite(_))));
    }

    #[test]
    fn constants_receive_no_gradient() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::row_vector(&[1.0, 2.0])).unwrap();
        let w = tape.param(&Tensor::from_rows(&[[1.0], [1.0]])).unwrap();
        let y = tape.matmul(x, w).unwrap();
        let loss = tape.binary_xent_with_logits(y, &[1.0], 1.0).unwrap();
        let g = tape.backward(loss).unwrap();
        assert!(g.get(w).is_some());
        assert!(g.get(x).is_none());
    }
}
