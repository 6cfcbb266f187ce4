//! End-to-end experiment runs: train every defense, attack the shared
//! targets and aggregate accuracies over seeds.
//!
//! Layout of an output directory:
//!
//! ```text
//! config.toml                      normalized configuration
//! manifest.json                    promised files, completion flag, timestamps
//! summary.csv                      defense x attack accuracy averaged over seeds
//! seed-<s>/targets.json
//! seed-<s>/<attack>.trace.tsv      perturbations, shared by all defenses
//! seed-<s>/<defense>/checkpoint.json
//! seed-<s>/<defense>/train_log.csv
//! seed-<s>/<defense>/<attack>.report.jsonl
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{read_trace, write_trace, AttackKind, Perturbation, SurrogateScores};
use crate::config::{to_toml, AttackConfig, ExperimentConfig, ResolvedDefense};
use crate::encoder::{load_checkpoint, save_checkpoint, softmax_rows, Checkpoint, Model};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_perturbations, perturb_targets, select_targets, variant_sweep, AttackSetup, EvalReport,
    SweepResult, SweepSetup, TargetSet, VariantAxis,
};
use crate::graph::{split_nodes, Graph, SplitMasks};
use crate::seed;
use crate::train::{fit_surrogate, train_with_surrogate, TrainConfig, TrainLog, TrainMode};

const ATTACKER_STREAM: u64 = 0xA77A;
const DEFENDER_STREAM: u64 = 0xDEF0;
const TARGET_STREAM: u64 = 0x7A26;

pub const MANIFEST_FORMAT: &str = "robust-gnn/manifest";

/// Everything shared by the defenses of one seed.
pub struct SeedContext {
    pub seed: u64,
    pub graph: Graph,
    pub masks: SplitMasks,
    /// The attacker's surrogate scores on the clean graph.
    pub scores: SurrogateScores,
    pub targets: TargetSet,
}

/// Loads the graph, splits it, fits the attacker's surrogate and picks
/// targets from the surrogate's clean predictions.
pub fn prepare_seed(cfg: &ExperimentConfig, run_seed: u64) -> Result<SeedContext> {
    let graph = cfg.dataset.load(run_seed)?;
    let masks = split_nodes(&graph, run_seed)?;
    let attacker = fit_surrogate(&graph, &masks, seed::derive(run_seed, &[ATTACKER_STREAM]))?;
    let scores = SurrogateScores::new(&graph, &attacker)?;
    let probs = softmax_rows(&attacker.logits(&graph)?);
    let counts = cfg.eval.resolve(masks.test().len());
    let targets = select_targets(
        &probs,
        graph.labels(),
        &masks,
        counts,
        seed::derive(run_seed, &[TARGET_STREAM]),
    )?;
    Ok(SeedContext {
        seed: run_seed,
        graph,
        masks,
        scores,
        targets,
    })
}

/// Training settings for `run_seed`.
pub fn train_config_for(cfg: &ExperimentConfig, run_seed: u64) -> TrainConfig {
    TrainConfig {
        seed: seed::derive(cfg.training.seed, &[run_seed]),
        ..cfg.training.clone()
    }
}

/// Trains one defense. Adversarial training fits its own surrogate,
/// independent of the attacker's.
pub fn train_defense(
    ctx: &SeedContext,
    defense: &ResolvedDefense,
    train_cfg: &TrainConfig,
) -> Result<(Model, TrainLog)> {
    let generator = match defense.mode {
        TrainMode::Acl => Some(fit_surrogate(
            &ctx.graph,
            &ctx.masks,
            seed::derive(ctx.seed, &[DEFENDER_STREAM]),
        )?),
        _ => None,
    };
    let out = train_with_surrogate(
        &ctx.graph,
        &ctx.masks,
        &defense.encoder,
        train_cfg,
        defense.mode,
        generator.as_ref(),
    )?;
    Ok((out.model, out.log))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub complete: bool,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
    pub error: Option<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Other(format!("{}: {e}", path.display())))
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Other(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    /// Checks the run completed and every promised file exists.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        if self.format != MANIFEST_FORMAT {
            return Err(Error::Other(format!("unknown manifest format `{}`", self.format)));
        }
        if !self.complete {
            return Err(Error::Other(format!(
                "run incomplete: {}",
                self.error.as_deref().unwrap_or("no error recorded")
            )));
        }
        let missing: Vec<&str> = self
            .files
            .iter()
            .filter(|f| !dir.join(f).is_file())
            .map(String::as_str)
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Other(format!("missing artifacts: {}", missing.join(", "))))
        }
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn attack_slug(kind: AttackKind) -> String {
    kind.as_str().to_lowercase()
}

fn seed_files(cfg: &ExperimentConfig, s: u64) -> Vec<String> {
    let mut files = vec![format!("seed-{s}/targets.json")];
    for a in &cfg.attacks {
        files.push(format!("seed-{s}/{}.trace.tsv", attack_slug(a.kind)));
    }
    for d in cfg.resolved_defenses() {
        files.push(format!("seed-{s}/{}/checkpoint.json", d.name));
        files.push(format!("seed-{s}/{}/train_log.csv", d.name));
        for a in &cfg.attacks {
            files.push(format!(
                "seed-{s}/{}/{}.report.jsonl",
                d.name,
                attack_slug(a.kind)
            ));
        }
    }
    files
}

/// Files a run of `cfg` promises, relative to its output directory.
pub fn promised_files(cfg: &ExperimentConfig) -> Vec<String> {
    let mut files = vec!["config.toml".to_string(), "summary.csv".to_string()];
    for &s in &cfg.seeds {
        files.extend(seed_files(cfg, s));
    }
    files
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Other(e.to_string()))?;
    write_file(path, text + "\n")
}

fn seed_dir(out: &Path, s: u64) -> PathBuf {
    out.join(format!("seed-{s}"))
}

fn trace_path(out: &Path, s: u64, kind: AttackKind) -> PathBuf {
    seed_dir(out, s).join(format!("{}.trace.tsv", attack_slug(kind)))
}

fn attack_setup<'a>(ctx: &'a SeedContext, attack: &AttackConfig) -> AttackSetup<'a> {
    AttackSetup {
        graph: &ctx.graph,
        scores: &ctx.scores,
        kind: attack.kind,
        rule: attack.rule(),
        seed: ctx.seed,
    }
}

/// Attacks the shared targets of `ctx` with every configured attack and
/// writes `targets.json` plus one trace per attack.
pub fn attack_stage(cfg: &ExperimentConfig, ctx: &SeedContext, out: &Path) -> Result<Vec<Vec<Perturbation>>> {
    let dir = seed_dir(out, ctx.seed);
    write_json(&dir.join("targets.json"), &ctx.targets)?;
    let mut all = Vec::with_capacity(cfg.attacks.len());
    for a in &cfg.attacks {
        let ps = perturb_targets(&attack_setup(ctx, a), &ctx.targets);
        write_trace(&trace_path(out, ctx.seed, a.kind), &ps)?;
        all.push(ps);
    }
    Ok(all)
}

/// Trains one defense and writes its checkpoint and training log.
pub fn train_stage(
    cfg: &ExperimentConfig,
    ctx: &SeedContext,
    defense: &ResolvedDefense,
    out: &Path,
) -> Result<Model> {
    let ddir = seed_dir(out, ctx.seed).join(&defense.name);
    let (model, log) = train_defense(ctx, defense, &train_config_for(cfg, ctx.seed))?;
    fs::create_dir_all(&ddir).map_err(|e| Error::io(&ddir, e))?;
    save_checkpoint(
        &ddir.join("checkpoint.json"),
        &Checkpoint::new(&model, ctx.graph.feature_dim(), ctx.graph.n_classes()),
    )?;
    log.write_csv(&ddir.join("train_log.csv"))?;
    Ok(model)
}

/// Scores `model` against each attack's perturbations and writes one
/// report per attack.
fn evaluate_stage(
    cfg: &ExperimentConfig,
    ctx: &SeedContext,
    defense: &str,
    model: &Model,
    perturbations: &[Vec<Perturbation>],
    out: &Path,
) -> Result<Vec<EvalReport>> {
    let ddir = seed_dir(out, ctx.seed).join(defense);
    let mut reports = Vec::new();
    for (a, ps) in cfg.attacks.iter().zip(perturbations) {
        let report = evaluate_perturbations(model, defense, &attack_setup(ctx, a), &ctx.targets, ps)?;
        report.write_jsonl(&ddir.join(format!("{}.report.jsonl", attack_slug(a.kind))))?;
        reports.push(report);
    }
    Ok(reports)
}

/// Runs every defense and attack for one seed, writing its artifacts
/// under `out/seed-<s>/`.
pub fn run_seed(cfg: &ExperimentConfig, run_seed: u64, out: &Path) -> Result<Vec<EvalReport>> {
    let ctx = prepare_seed(cfg, run_seed)?;
    let perturbations = attack_stage(cfg, &ctx, out)?;
    let mut reports = Vec::new();
    for defense in cfg.resolved_defenses() {
        let model = train_stage(cfg, &ctx, &defense, out)?;
        reports.extend(evaluate_stage(
            cfg,
            &ctx,
            &defense.name,
            &model,
            &perturbations,
            out,
        )?);
    }
    Ok(reports)
}

/// Only the training half of [`run_seed`].
pub fn train_seed(cfg: &ExperimentConfig, run_seed: u64, out: &Path) -> Result<()> {
    let ctx = prepare_seed(cfg, run_seed)?;
    for defense in cfg.resolved_defenses() {
        train_stage(cfg, &ctx, &defense, out)?;
    }
    Ok(())
}

/// Only the attack half of [`run_seed`].
pub fn attack_seed(cfg: &ExperimentConfig, run_seed: u64, out: &Path) -> Result<Vec<Vec<Perturbation>>> {
    let ctx = prepare_seed(cfg, run_seed)?;
    attack_stage(cfg, &ctx, out)
}

/// Rebuilds one perturbation per target, in target order, from a trace.
/// Targets absent from the trace were left untouched by the attack.
pub fn align_trace(
    ctx: &SeedContext,
    attack: &AttackConfig,
    trace: Vec<Perturbation>,
) -> Result<Vec<Perturbation>> {
    let mut by_target: HashMap<usize, Perturbation> = HashMap::new();
    for p in trace {
        if by_target.insert(p.target, p).is_some() {
            return Err(Error::Other("trace lists a target in two separate runs".into()));
        }
    }
    let rule = attack.rule();
    let aligned: Vec<Perturbation> = ctx
        .targets
        .all()
        .into_iter()
        .map(|(v, _)| {
            let budget = rule.budget(&ctx.graph, v);
            match by_target.remove(&v) {
                Some(p) => Perturbation { budget, ..p },
                None => Perturbation::empty(v, budget),
            }
        })
        .collect();
    if let Some(&stray) = by_target.keys().min() {
        return Err(Error::Other(format!(
            "trace perturbs node {stray}, which is not a target"
        )));
    }
    Ok(aligned)
}

/// Scores saved checkpoints against saved traces, as written by
/// [`train_seed`] and [`attack_seed`], and writes the reports.
pub fn evaluate_seed(cfg: &ExperimentConfig, run_seed: u64, out: &Path) -> Result<Vec<EvalReport>> {
    let ctx = prepare_seed(cfg, run_seed)?;
    let perturbations: Vec<Vec<Perturbation>> = cfg
        .attacks
        .iter()
        .map(|a| align_trace(&ctx, a, read_trace(&trace_path(out, run_seed, a.kind))?))
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for defense in cfg.resolved_defenses() {
        let path = seed_dir(out, run_seed)
            .join(&defense.name)
            .join("checkpoint.json");
        let ckpt = load_checkpoint(&path)?;
        if ckpt.feature_dim != ctx.graph.feature_dim() || ckpt.n_classes != ctx.graph.n_classes() {
            return Err(Error::Checkpoint(format!(
                "{} was trained on a different dataset",
                path.display()
            )));
        }
        let model = ckpt.into_model();
        reports.extend(evaluate_stage(
            cfg,
            &ctx,
            &defense.name,
            &model,
            &perturbations,
            out,
        )?);
    }
    Ok(reports)
}

/// Variant study for one seed: every variant of the configured encoder
/// along `axes`, trained in the configured mode and attacked by the
/// first configured attack at each of `budgets`.
pub fn sweep_seed(
    cfg: &ExperimentConfig,
    run_seed: u64,
    axes: &[VariantAxis],
    budgets: &[usize],
) -> Result<SweepResult> {
    let ctx = prepare_seed(cfg, run_seed)?;
    let train = train_config_for(cfg, run_seed);
    let attack = cfg.attacks.first().map(|a| a.kind).unwrap_or(AttackKind::Nettack);
    variant_sweep(
        &SweepSetup {
            graph: &ctx.graph,
            masks: &ctx.masks,
            base: &cfg.encoder,
            train: &train,
            mode: cfg.defense,
            scores: &ctx.scores,
            targets: &ctx.targets,
            attack,
            seed: run_seed,
        },
        axes,
        budgets,
    )
}

/// Pointwise mean of sweeps that share axes, variants and budgets.
pub fn mean_sweep(results: &[SweepResult]) -> Result<SweepResult> {
    let first = results
        .first()
        .ok_or_else(|| Error::Other("no sweeps to average".into()))?;
    let mut points = first.points.clone();
    for r in &results[1..] {
        let same = r.points.len() == points.len()
            && r.points
                .iter()
                .zip(&points)
                .all(|(a, b)| a.axis == b.axis && a.variant == b.variant && a.budget == b.budget);
        if !same {
            return Err(Error::Other("sweeps cover different variants or budgets".into()));
        }
        for (acc, p) in points.iter_mut().zip(&r.points) {
            acc.mean_margin += p.mean_margin;
        }
    }
    let n = results.len() as f64;
    points.iter_mut().for_each(|p| p.mean_margin /= n);
    Ok(SweepResult {
        attack: first.attack,
        points,
    })
}

/// One `defense x attack` cell of the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub defense: String,
    pub attack: AttackKind,
    /// Number of per-seed reports averaged.
    pub reports: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_clean_accuracy: f64,
    pub failed: usize,
}

/// Averages reports per `(defense, attack)` in first-seen order.
pub fn summarize(reports: &[EvalReport]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, AttackKind)> = Vec::new();
    for r in reports {
        let k = (r.defense.clone(), r.attack);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(defense, attack)| {
            let cell: Vec<&EvalReport> = reports
                .iter()
                .filter(|r| r.defense == defense && r.attack == attack)
                .collect();
            let n = cell.len() as f64;
            let mean = cell.iter().map(|r| r.accuracy).sum::<f64>() / n;
            let var = cell.iter().map(|r| (r.accuracy - mean).powi(2)).sum::<f64>() / n;
            SummaryRow {
                defense,
                attack,
                reports: cell.len(),
                mean_accuracy: mean,
                std_accuracy: var.sqrt(),
                mean_clean_accuracy: cell.iter().map(|r| r.clean_accuracy()).sum::<f64>() / n,
                failed: cell.iter().map(|r| r.failed).sum(),
            }
        })
        .collect()
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut s =
        String::from("defense,attack,reports,mean_accuracy,std_accuracy,mean_clean_accuracy,failed\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.6},{:.6},{:.6},{}",
            r.defense,
            r.attack.as_str(),
            r.reports,
            r.mean_accuracy,
            r.std_accuracy,
            r.mean_clean_accuracy,
            r.failed
        );
    }
    s
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub output_dir: PathBuf,
    pub reports: Vec<EvalReport>,
    pub summary: Vec<SummaryRow>,
}

/// Runs the whole experiment into `out`. Seeds run in parallel on the
/// current rayon pool. On failure the manifest records the error and
/// lists the files promised so partial artifacts can be inspected.
pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path) -> Result<PipelineOutcome> {
    let errs = cfg.violations();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        complete: false,
        started_unix: now_unix(),
        finished_unix: None,
        files: promised_files(cfg),
        error: None,
    };
    manifest.write(out)?;

    let result = (|| -> Result<PipelineOutcome> {
        write_file(&out.join("config.toml"), to_toml(cfg)?)?;
        let per_seed: Vec<Vec<EvalReport>> = cfg
            .seeds
            .par_iter()
            .map(|&s| run_seed(cfg, s, out))
            .collect::<Result<_>>()?;
        let reports: Vec<EvalReport> = per_seed.into_iter().flatten().collect();
        let summary = summarize(&reports);
        write_file(&out.join("summary.csv"), summary_to_csv(&summary))?;
        Ok(PipelineOutcome {
            output_dir: out.to_path_buf(),
            reports,
            summary,
        })
    })();

    manifest.finished_unix = Some(now_unix());
    match &result {
        Ok(_) => manifest.complete = true,
        Err(e) => manifest.error = Some(e.to_string()),
    }
    manifest.write(out)?;
    result
}
