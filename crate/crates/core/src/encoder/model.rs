//! Forward pass of the refined encoder.
//!
//! Layer `k` computes
//! `h(k) = BPERCE(AGG_inter(AGG_intra(h(k-1)), h(k-1), ..., h(0)))`
//! starting from `h(0) = X`, then the graph embedding
//! `h_G = σ(mean(h(K)) · W_r)` and classifier logits `h(K) · W_dec`.

use std::sync::Arc;

use crate::encoder::{EncoderConfig, InterAgg, IntraAgg, ModelParams, ParamVars};
use crate::error::Result;
use crate::graph::{Csr, Graph};
use crate::kernel::{Reduce, Tape, Tensor, Var};

/// Handles to the encoder outputs on a tape.
#[derive(Clone, Copy, Debug)]
pub struct EncodedVars {
    pub h: Var,
    pub h_graph: Var,
    pub logits: Var,
}

/// Plain-value encoder outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    pub h: Tensor,
    pub h_graph: Tensor,
    pub logits: Tensor,
}

pub fn agg_intra(tape: &mut Tape, adj: &Arc<Csr>, h_prev: Var, mode: IntraAgg) -> Result<Var> {
    let reduce = match mode {
        IntraAgg::Mean => Reduce::Mean,
        IntraAgg::Sum => Reduce::Sum,
        IntraAgg::Max => Reduce::Max,
    };
    tape.neighbor_rows(h_prev, adj, reduce)
}

/// `history` is ordered oldest first. Dense concatenates
/// `[intra; newest; ...; oldest]`, skip keeps only the newest entry.
pub fn agg_inter(tape: &mut Tape, intra: Var, history: &[Var], mode: InterAgg) -> Result<Var> {
    match (mode, history.last()) {
        (InterAgg::None, _) | (_, None) => Ok(intra),
        (InterAgg::Skip, Some(&last)) => tape.concat_cols(&[intra, last]),
        (InterAgg::Dense, Some(_)) => {
            let mut parts = Vec::with_capacity(history.len() + 1);
            parts.push(intra);
            parts.extend(history.iter().rev());
            tape.concat_cols(&parts)
        }
    }
}

/// Bottleneck perceptron: each weight is a linear map followed by ReLU.
pub fn bperce(tape: &mut Tape, a: Var, weights: &[Var]) -> Result<Var> {
    weights.iter().try_fold(a, |x, &w| {
        let z = tape.matmul(x, w)?;
        tape.relu(z)
    })
}

pub fn readout(tape: &mut Tape, h: Var, w_r: Var) -> Result<Var> {
    let pooled = tape.mean_rows(h)?;
    let z = tape.matmul(pooled, w_r)?;
    tape.sigmoid(z)
}

pub fn decode(tape: &mut Tape, h: Var, w_dec: Var) -> Result<Var> {
    tape.matmul(h, w_dec)
}

/// Node embeddings only, with `x` already on the tape.
pub fn encode_nodes(
    tape: &mut Tape,
    adj: &Arc<Csr>,
    x: Var,
    cfg: &EncoderConfig,
    vars: &ParamVars,
) -> Result<Var> {
    let mut history = vec![x];
    let mut h = x;
    for weights in &vars.layers {
        let intra = agg_intra(tape, adj, h, cfg.intra)?;
        let a = agg_inter(tape, intra, &history, cfg.inter)?;
        h = bperce(tape, a, weights)?;
        history.push(h);
    }
    Ok(h)
}

pub fn encode(tape: &mut Tape, g: &Graph, cfg: &EncoderConfig, vars: &ParamVars) -> Result<EncodedVars> {
    let x = tape.constant(g.features().clone())?;
    encode_with_features(tape, g, x, cfg, vars)
}

/// [`encode`] with a caller-provided feature node, so several forward
/// passes over graphs sharing `X` can reuse one copy.
pub fn encode_with_features(
    tape: &mut Tape,
    g: &Graph,
    x: Var,
    cfg: &EncoderConfig,
    vars: &ParamVars,
) -> Result<EncodedVars> {
    let adj = g.adjacency_arc();
    let h = encode_nodes(tape, &adj, x, cfg, vars)?;
    let h_graph = readout(tape, h, vars.readout)?;
    let logits = decode(tape, h, vars.decoder)?;
    Ok(EncodedVars { h, h_graph, logits })
}

/// A configured encoder with its trained parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: EncoderConfig,
    pub params: ModelParams,
}

impl Model {
    pub fn new(config: EncoderConfig, params: ModelParams) -> Self {
        Self { config, params }
    }

    pub fn init(config: EncoderConfig, g: &Graph, seed: u64) -> Result<Self> {
        let params = ModelParams::init(&config, g.feature_dim(), g.n_classes(), seed)?;
        Ok(Self { config, params })
    }

    pub fn forward(&self, g: &Graph) -> Result<Embeddings> {
        let mut tape = Tape::new();
        let vars = self.params.register(&mut tape)?;
        let out = encode(&mut tape, g, &self.config, &vars)?;
        Ok(Embeddings {
            h: tape.value(out.h).clone(),
            h_graph: tape.value(out.h_graph).clone(),
            logits: tape.value(out.logits).clone(),
        })
    }

    /// Softmax class probabilities, one row per node.
    pub fn predict_proba(&self, g: &Graph) -> Result<Tensor> {
        Ok(softmax_rows(&self.forward(g)?.logits))
    }
}

pub fn softmax_rows(logits: &Tensor) -> Tensor {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for x in row.iter_mut() {
            *x = (*x - m).exp();
            z += *x;
        }
        row.iter_mut().for_each(|x| *x /= z);
    }
    out
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of `nodes` whose argmax logit equals the label.
pub fn accuracy(logits: &Tensor, labels: &[usize], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let hits = nodes
        .iter()
        .filter(|&&v| argmax(logits.row(v)) == labels[v])
        .count();
    hits as f64 / nodes.len() as f64
}
