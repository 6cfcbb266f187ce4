//! Adversarial contrastive objective.
//!
//! Real pairs are `(h_v, h_G)` on the clean graph, fake pairs `(h'_v, h_G)`
//! where `h'` is computed on a surrogate-perturbed copy of the graph and
//! `h_G` always comes from the clean graph. The perturbed copy is rebuilt
//! every epoch around freshly sampled nodes.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attack::{nettack_on_view, Perturbation, SurrogateScores, TargetView};
use crate::encoder::{encode_nodes, encode_with_features, EncoderConfig, ModelParams};
use crate::error::Result;
use crate::graph::Graph;
use crate::kernel::{Gradients, Tape, Tensor, Var};
use crate::train::config::AclUpdate;
use crate::train::losses::{discriminator_logits, supervised_loss};

/// `size` distinct nodes drawn uniformly (all nodes if `size >= n`),
/// sorted.
pub fn sample_batch(n: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batch = index::sample(&mut rng, n, size.min(n)).into_vec();
    batch.sort_unstable();
    batch
}

/// Builds the adversarial graph `G'` by running the greedy surrogate
/// search for `gen_budget` flips around each batch node in turn, each
/// search seeing the flips committed before it. `labels` are the labels
/// the search pushes away from (ground truth where known, surrogate
/// predictions elsewhere).
pub fn generate_negatives(
    g: &Graph,
    scores: &SurrogateScores,
    labels: &[usize],
    gen_budget: usize,
    batch: &[usize],
) -> Result<(Graph, Vec<Perturbation>)> {
    let mut view = TargetView::new(g, scores);
    let mut perturbations = Vec::with_capacity(batch.len());
    for &v in batch {
        perturbations.push(nettack_on_view(&mut view, labels, v, gen_budget));
    }
    let adv = g.with_adjacency(view.graph.to_csr())?;
    Ok((adv, perturbations))
}

/// Loss value, parameter gradients and discriminator statistics of one
/// adversarial step.
#[derive(Clone, Debug)]
pub struct AclEval {
    pub loss: f64,
    pub supervised: f64,
    pub contrastive: f64,
    /// What the encoder parameters descend: `loss` under the joint
    /// update, supervised plus fooling term under minimax.
    pub encoder_loss: f64,
    /// Fraction of real and fake batch pairs the discriminator gets right.
    pub disc_acc: f64,
    /// One gradient per parameter in [`ModelParams::iter`] order.
    pub grads: Vec<Tensor>,
}

pub struct AclInputs<'a> {
    pub graph: &'a Graph,
    pub adversarial: &'a Graph,
    pub train_nodes: &'a [usize],
    pub batch: &'a [usize],
    pub lambda: f64,
    pub update: AclUpdate,
}

fn collect(grads: &Gradients, vars: &[Var], params: &ModelParams) -> Vec<Tensor> {
    vars.iter()
        .zip(params.iter())
        .map(|(&v, p)| grads.get_or_zeros(v, p.shape()))
        .collect()
}

/// Supervised loss plus `λ` times the pair BCE averaged over the batch.
pub fn acl_objective(params: &ModelParams, cfg: &EncoderConfig, inp: &AclInputs<'_>) -> Result<AclEval> {
    let mut tape = Tape::new();
    let vars = params.register(&mut tape)?;
    let x = tape.constant(inp.graph.features().clone())?;
    let clean = encode_with_features(&mut tape, inp.graph, x, cfg, &vars)?;
    let fake_h = encode_nodes(&mut tape, &inp.adversarial.adjacency_arc(), x, cfg, &vars)?;
    let sup = supervised_loss(&mut tape, clean.logits, inp.graph.labels(), inp.train_nodes)?;

    let hb = tape.row_lookup(clean.h, inp.batch)?;
    let hf = tape.row_lookup(fake_h, inp.batch)?;
    let real = discriminator_logits(&mut tape, hb, vars.discriminator, clean.h_graph)?;
    let fake = discriminator_logits(&mut tape, hf, vars.discriminator, clean.h_graph)?;
    let m = inp.batch.len();
    let scale = inp.lambda / m as f64;
    let ones = vec![1.0; m];
    let zeros = vec![0.0; m];
    let bce_real = tape.binary_xent_with_logits(real, &ones, scale)?;
    let bce_fake = tape.binary_xent_with_logits(fake, &zeros, scale)?;
    let disc = tape.add(bce_real, bce_fake)?;
    let loss = tape.add(sup, disc)?;

    let var_list: Vec<Var> = vars.iter().collect();
    let (encoder_loss, grads) = match inp.update {
        AclUpdate::Joint => (
            tape.value(loss).scalar(),
            collect(&tape.backward(loss)?, &var_list, params),
        ),
        AclUpdate::Minimax => {
            let fool = tape.binary_xent_with_logits(fake, &ones, scale)?;
            let enc_loss = tape.add(sup, fool)?;
            let mut g = collect(&tape.backward(enc_loss)?, &var_list, params);
            let gd = tape.backward(disc)?;
            let last = g.len() - 1;
            g[last] = gd.get_or_zeros(vars.discriminator, params.discriminator.shape());
            (tape.value(enc_loss).scalar(), g)
        }
    };

    let right = tape.value(real).data().iter().filter(|&&z| z > 0.0).count()
        + tape.value(fake).data().iter().filter(|&&z| z < 0.0).count();
    Ok(AclEval {
        loss: tape.value(loss).scalar(),
        supervised: tape.value(sup).scalar(),
        contrastive: tape.value(disc).scalar(),
        encoder_loss,
        disc_acc: right as f64 / (2 * m) as f64,
        grads,
    })
}

/// Discriminator accuracy on `nodes`: real pairs from `clean`, fake pairs
/// from `adversarial`, both scored against the clean graph embedding.
pub fn discriminator_accuracy(
    params: &ModelParams,
    cfg: &EncoderConfig,
    clean: &Graph,
    adversarial: &Graph,
    nodes: &[usize],
) -> Result<f64> {
    if nodes.is_empty() {
        return Err(crate::Error::EmptyMask);
    }
    let mut tape = Tape::new();
    let vars = params.register(&mut tape)?;
    let x = tape.constant(clean.features().clone())?;
    let enc = encode_with_features(&mut tape, clean, x, cfg, &vars)?;
    let fake_h = encode_nodes(&mut tape, &adversarial.adjacency_arc(), x, cfg, &vars)?;
    let hb = tape.row_lookup(enc.h, nodes)?;
    let hf = tape.row_lookup(fake_h, nodes)?;
    let real = discriminator_logits(&mut tape, hb, vars.discriminator, enc.h_graph)?;
    let fake = discriminator_logits(&mut tape, hf, vars.discriminator, enc.h_graph)?;
    let right = tape.value(real).data().iter().filter(|&&z| z > 0.0).count()
        + tape.value(fake).data().iter().filter(|&&z| z < 0.0).count();
    Ok(right as f64 / (2 * nodes.len()) as f64)
}
