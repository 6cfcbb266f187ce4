//! Loss terms built on a [`Tape`].

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::{sigmoid, Tape, Var};

/// Mean softmax cross-entropy of `logits` over the `mask` nodes.
pub fn supervised_loss(tape: &mut Tape, logits: Var, labels: &[usize], mask: &[usize]) -> Result<Var> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let targets: Vec<usize> = mask.iter().map(|&v| labels[v]).collect();
    tape.softmax_xent(logits, mask, &targets)
}

/// Negative-sampling noise distribution: node degree raised to 0.75.
/// Isolated nodes get weight zero unless every node is isolated.
pub fn noise_weights(g: &Graph) -> Vec<f64> {
    let w: Vec<f64> = (0..g.node_count())
        .map(|v| (g.degree(v) as f64).powf(0.75))
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        vec![1.0; w.len()]
    } else {
        w
    }
}

/// Positive edges and their sampled negatives for [`ncl_loss`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NclSample {
    pub pos_u: Vec<usize>,
    pub pos_v: Vec<usize>,
    /// `k` noise nodes per positive edge, edge-major.
    pub neg: Vec<usize>,
    pub k: usize,
}

pub fn sample_ncl(g: &Graph, k: usize, noise: &[f64], seed: u64) -> Result<NclSample> {
    let dist = WeightedIndex::new(noise).map_err(|e| Error::Other(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pos_u, pos_v): (Vec<usize>, Vec<usize>) = g.adjacency().edges().unzip();
    let neg = (0..pos_u.len() * k).map(|_| dist.sample(&mut rng)).collect();
    Ok(NclSample { pos_u, pos_v, neg, k })
}

/// Noise-contrastive loss on node embeddings `h`: for each edge
/// `(u, v)`, `-log σ(h_u·h_v) - Σ_k log σ(-h_n·h_v)`, averaged over edges.
pub fn ncl_loss(tape: &mut Tape, h: Var, sample: &NclSample) -> Result<Var> {
    let e = sample.pos_u.len();
    if e == 0 {
        return Err(Error::InvalidGraph(
            "noise-contrastive loss needs at least one edge".into(),
        ));
    }
    let hu = tape.row_lookup(h, &sample.pos_u)?;
    let hv = tape.row_lookup(h, &sample.pos_v)?;
    let pos = tape.row_dot(hu, hv)?;
    let rep: Vec<usize> = sample
        .pos_v
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, sample.k))
        .collect();
    let hn = tape.row_lookup(h, &sample.neg)?;
    let hv_rep = tape.row_lookup(h, &rep)?;
    let neg = tape.row_dot(hn, hv_rep)?;
    let scale = 1.0 / e as f64;
    let lp = tape.binary_xent_with_logits(pos, &vec![1.0; e], scale)?;
    let ln = tape.binary_xent_with_logits(neg, &vec![0.0; sample.neg.len()], scale)?;
    tape.add(lp, ln)
}

/// Bilinear discriminator logits `h_v W_D h_Gᵀ` for every row of `h`
/// against the single graph embedding `h_graph` (1×b).
pub fn discriminator_logits(tape: &mut Tape, h: Var, w_d: Var, h_graph: Var) -> Result<Var> {
    let hw = tape.matmul(h, w_d)?;
    tape.row_dot(hw, h_graph)
}

/// Probability that `(h_v, h_G)` is a real pair: `σ(h_v W_D h_G)`.
pub fn discriminate(tape: &mut Tape, h_v: Var, h_graph: Var, w_d: Var) -> Result<f64> {
    let z = discriminator_logits(tape, h_v, w_d, h_graph)?;
    let t = tape.value(z);
    if t.shape() != (1, 1) {
        return Err(Error::Shape {
            op: "discriminate",
            left: t.shape(),
            right: (1, 1),
        });
    }
    Ok(sigmoid(t.scalar()))
}
