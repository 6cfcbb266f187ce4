//! Supervised, noise-contrastive and adversarial-contrastive training.

mod acl;
mod config;
mod losses;

use std::fmt::Write as _;
use std::path::Path;

pub use acl::{acl_objective, discriminator_accuracy, generate_negatives, sample_batch, AclEval, AclInputs};
pub use config::{AclUpdate, TrainConfig, TrainMode};
pub use losses::{
    discriminate, discriminator_logits, ncl_loss, noise_weights, sample_ncl, supervised_loss, NclSample,
};

use crate::attack::SurrogateScores;
use crate::encoder::{
    accuracy, argmax, encode, train_surrogate, EncoderConfig, Model, ModelParams, SurrogateParams,
    SurrogateTraining,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, SplitMasks};
use crate::kernel::{Tape, Tensor};
use crate::optim::Adam;
use crate::seed;

const INIT_STREAM: u64 = 1;
const SURROGATE_STREAM: u64 = 2;
const BATCH_STREAM: u64 = 3;
const NOISE_STREAM: u64 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_acc: f64,
    pub val_loss: f64,
    /// Only recorded by adversarial training.
    pub disc_acc: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
}

impl TrainLog {
    pub const HEADER: &'static str = "epoch,lr,train_loss,val_acc,disc_acc";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.records {
            let disc = r.disc_acc.map(|d| format!("{d:.6}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{}",
                r.epoch, r.lr, r.train_loss, r.val_acc, disc
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation accuracy, ties
    /// broken by lower validation loss.
    pub model: Model,
    pub best_epoch: usize,
    pub best_val_acc: f64,
    pub log: TrainLog,
}

/// Initial parameters used by [`train`] for `train_cfg.seed`.
pub fn initial_params(g: &Graph, cfg: &EncoderConfig, train_cfg: &TrainConfig) -> Result<ModelParams> {
    ModelParams::init(
        cfg,
        g.feature_dim(),
        g.n_classes(),
        seed::derive(train_cfg.seed, &[INIT_STREAM]),
    )
}

/// Surrogate fit on the training nodes with a seed derived from the
/// training seed.
pub fn fit_surrogate(g: &Graph, masks: &SplitMasks, seed: u64) -> Result<SurrogateParams> {
    let opts = SurrogateTraining {
        seed: seed::derive(seed, &[SURROGATE_STREAM]),
        ..SurrogateTraining::default()
    };
    train_surrogate(g, masks, &opts)
}

/// Labels the generator attacks: ground truth on training nodes and
/// surrogate predictions everywhere else.
pub fn pseudo_labels(g: &Graph, masks: &SplitMasks, surrogate: &SurrogateParams) -> Result<Vec<usize>> {
    let logits = surrogate.logits(g)?;
    let mut labels: Vec<usize> = (0..g.node_count()).map(|v| argmax(logits.row(v))).collect();
    for &v in &masks.train {
        labels[v] = g.labels()[v];
    }
    Ok(labels)
}

fn grads_for(
    tape: &Tape,
    loss: crate::kernel::Var,
    vars: &[crate::kernel::Var],
    params: &ModelParams,
) -> Result<Vec<Tensor>> {
    let grads = tape.backward(loss)?;
    Ok(vars
        .iter()
        .zip(params.iter())
        .map(|(&v, p)| grads.get_or_zeros(v, p.shape()))
        .collect())
}

/// Supervised loss on the training nodes and its gradients.
pub fn plain_objective(
    params: &ModelParams,
    cfg: &EncoderConfig,
    g: &Graph,
    train_nodes: &[usize],
) -> Result<(f64, Vec<Tensor>)> {
    let mut tape = Tape::new();
    let vars = params.register(&mut tape)?;
    let out = encode(&mut tape, g, cfg, &vars)?;
    let loss = supervised_loss(&mut tape, out.logits, g.labels(), train_nodes)?;
    let list: Vec<_> = vars.iter().collect();
    Ok((tape.value(loss).scalar(), grads_for(&tape, loss, &list, params)?))
}

/// Supervised loss plus `λ` times the noise-contrastive loss on the
/// decoder outputs. The bottleneck embeddings are non-negative after the
/// final ReLU, so their inner products cannot separate negative pairs.
pub fn ncl_objective(
    params: &ModelParams,
    cfg: &EncoderConfig,
    g: &Graph,
    train_nodes: &[usize],
    sample: &NclSample,
    lambda: f64,
) -> Result<(f64, Vec<Tensor>)> {
    let mut tape = Tape::new();
    let vars = params.register(&mut tape)?;
    let out = encode(&mut tape, g, cfg, &vars)?;
    let sup = supervised_loss(&mut tape, out.logits, g.labels(), train_nodes)?;
    let ncl = ncl_loss(&mut tape, out.logits, sample)?;
    let ncl = tape.scale(ncl, lambda)?;
    let loss = tape.add(sup, ncl)?;
    let list: Vec<_> = vars.iter().collect();
    Ok((tape.value(loss).scalar(), grads_for(&tape, loss, &list, params)?))
}

/// Mean softmax cross-entropy of `logits` rows `nodes`.
pub fn mean_xent(logits: &Tensor, labels: &[usize], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let total: f64 = nodes
        .iter()
        .map(|&v| {
            let row = logits.row(v);
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
            lse - row[labels[v]]
        })
        .sum();
    total / nodes.len() as f64
}

fn diverged(epoch: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonFinite(op) => Error::Divergence {
            epoch,
            detail: format!("non-finite value in {op}"),
        },
        other => other,
    }
}

/// Trains with `mode`; adversarial training fits its own surrogate.
pub fn train(
    g: &Graph,
    masks: &SplitMasks,
    cfg: &EncoderConfig,
    train_cfg: &TrainConfig,
    mode: TrainMode,
) -> Result<TrainOutcome> {
    let surrogate = match mode {
        TrainMode::Acl => Some(fit_surrogate(g, masks, train_cfg.seed)?),
        _ => None,
    };
    train_with_surrogate(g, masks, cfg, train_cfg, mode, surrogate.as_ref())
}

/// [`train`] with a caller-provided surrogate for the adversarial
/// generator (ignored by the other modes).
pub fn train_with_surrogate(
    g: &Graph,
    masks: &SplitMasks,
    cfg: &EncoderConfig,
    train_cfg: &TrainConfig,
    mode: TrainMode,
    surrogate: Option<&SurrogateParams>,
) -> Result<TrainOutcome> {
    let mut errs = train_cfg.violations("");
    if mode == TrainMode::Acl {
        errs.extend(train_cfg.acl_violations(""));
    }
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    if masks.train.is_empty() || masks.val.is_empty() {
        return Err(Error::EmptyMask);
    }
    cfg.validate(g.feature_dim())?;

    let generator = match (mode, surrogate) {
        (TrainMode::Acl, Some(s)) => Some((SurrogateScores::new(g, s)?, pseudo_labels(g, masks, s)?)),
        (TrainMode::Acl, None) => return Err(Error::Other("adversarial training needs a surrogate".into())),
        _ => None,
    };
    let noise = (mode == TrainMode::Ncl).then(|| noise_weights(g));

    let mut model = Model::new(cfg.clone(), initial_params(g, cfg, train_cfg)?);
    let mut adam = Adam::new(model.params.iter());
    let mut log = TrainLog::default();
    // (val_acc, val_loss, epoch, params); ties on accuracy go to the lower loss
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, 0usize, model.params.clone());

    for epoch in 0..train_cfg.epochs {
        let lr = train_cfg.lr_at(epoch);
        let fail = diverged(epoch);
        let (loss, grads, disc_acc) = match mode {
            TrainMode::Plain => {
                let (l, gr) = plain_objective(&model.params, cfg, g, &masks.train).map_err(&fail)?;
                (l, gr, None)
            }
            TrainMode::Ncl => {
                let s = sample_ncl(
                    g,
                    train_cfg.neg_per_pos,
                    noise.as_deref().unwrap_or_default(),
                    seed::derive(train_cfg.seed, &[NOISE_STREAM, epoch as u64]),
                )?;
                let (l, gr) = ncl_objective(&model.params, cfg, g, &masks.train, &s, train_cfg.lambda_acl)
                    .map_err(&fail)?;
                (l, gr, None)
            }
            TrainMode::Acl => {
                let (scores, labels) = generator.as_ref().expect("generator built for ACL");
                let batch = sample_batch(
                    g.node_count(),
                    train_cfg.batch_size,
                    seed::derive(train_cfg.seed, &[BATCH_STREAM, epoch as u64]),
                );
                let (adv, _) = generate_negatives(g, scores, labels, train_cfg.gen_budget, &batch)?;
                let inputs = AclInputs {
                    graph: g,
                    adversarial: &adv,
                    train_nodes: &masks.train,
                    batch: &batch,
                    lambda: train_cfg.lambda_acl,
                    update: train_cfg.acl_update,
                };
                let e = acl_objective(&model.params, cfg, &inputs).map_err(&fail)?;
                (e.loss, e.grads, Some(e.disc_acc))
            }
        };
        if !loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                detail: format!("loss = {loss}"),
            });
        }
        let mut grads = grads;
        if train_cfg.weight_decay > 0.0 {
            for (gr, p) in grads.iter_mut().zip(model.params.iter()) {
                gr.add_assign(&p.scaled(train_cfg.weight_decay));
            }
        }
        adam.step(model.params.iter_mut(), &grads, lr);
        if model.params.iter().any(|t| !t.is_finite()) {
            return Err(Error::Divergence {
                epoch,
                detail: "non-finite parameter after update".into(),
            });
        }

        let logits = model.forward(g).map_err(&fail)?.logits;
        let val_acc = accuracy(&logits, g.labels(), &masks.val);
        let val_loss = mean_xent(&logits, g.labels(), &masks.val);
        log.records.push(EpochRecord {
            epoch,
            lr,
            train_loss: loss,
            val_acc,
            val_loss,
            disc_acc,
        });
        if val_acc > best.0 || (val_acc == best.0 && val_loss < best.1) {
            best = (val_acc, val_loss, epoch, model.params.clone());
        } else if epoch - best.2 >= train_cfg.patience {
            break;
        }
    }

    let (best_val_acc, _, best_epoch, params) = best;
    Ok(TrainOutcome {
        model: Model::new(cfg.clone(), params),
        best_epoch,
        best_val_acc,
        log,
    })
}
