use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{apply, run_attack, AttackKind, Perturbation, SurrogateScores};
use crate::encoder::Model;
use crate::error::{Error, Result};
use crate::eval::margin::margin;
use crate::eval::targets::{Bucket, TargetSet};
use crate::graph::Graph;

/// Per-target perturbation budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetRule {
    /// Target degree plus the given slack.
    DegreePlus(usize),
    Fixed(usize),
}

impl Default for BudgetRule {
    fn default() -> Self {
        BudgetRule::DegreePlus(2)
    }
}

impl BudgetRule {
    pub fn budget(self, g: &Graph, v: usize) -> usize {
        match self {
            BudgetRule::DegreePlus(k) => g.degree(v) + k,
            BudgetRule::Fixed(k) => k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub node: usize,
    pub bucket: Bucket,
    pub attack: AttackKind,
    pub budget: usize,
    pub ops: usize,
    pub truncated: bool,
    pub clean_margin: f64,
    pub attacked_margin: f64,
    pub correct_before: bool,
    pub correct_after: bool,
    /// Set when the attack could not be evaluated; such records do not
    /// count towards the aggregate.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub defense: String,
    pub attack: AttackKind,
    pub seed: u64,
    pub config_fingerprint: u64,
    pub records: Vec<TargetRecord>,
    /// Fraction of evaluated targets with a positive attacked margin.
    pub accuracy: f64,
    pub failed: usize,
}

impl EvalReport {
    pub fn evaluated(&self) -> impl Iterator<Item = &TargetRecord> {
        self.records.iter().filter(|r| r.error.is_none())
    }

    pub fn bucket_accuracy(&self, bucket: Bucket) -> Option<f64> {
        let (mut n, mut hit) = (0usize, 0usize);
        for r in self.evaluated().filter(|r| r.bucket == bucket) {
            n += 1;
            hit += usize::from(r.correct_after);
        }
        (n > 0).then(|| hit as f64 / n as f64)
    }

    pub fn clean_accuracy(&self) -> f64 {
        let n = self.evaluated().count();
        if n == 0 {
            return 0.0;
        }
        self.evaluated().filter(|r| r.correct_before).count() as f64 / n as f64
    }

    /// One JSON object per target record.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut s = String::new();
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|e| Error::Other(e.to_string()))?;
            s.push_str(&line);
            s.push('\n');
        }
        Ok(s)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()?).map_err(|e| Error::io(path, e))
    }
}

fn accuracy_of(records: &[TargetRecord]) -> (f64, usize) {
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    let ok = records.len() - failed;
    let hits = records
        .iter()
        .filter(|r| r.error.is_none() && r.attacked_margin > 0.0)
        .count();
    let acc = if ok == 0 { 0.0 } else { hits as f64 / ok as f64 };
    (acc, failed)
}

/// Margin of node `v` under `model` on graph `g`.
pub fn node_margin(model: &Model, g: &Graph, v: usize) -> Result<f64> {
    let probs = model.predict_proba(g)?;
    margin(probs.row(v), g.labels()[v])
}

/// Context shared by every per-target evaluation.
pub struct AttackSetup<'a> {
    pub graph: &'a Graph,
    pub scores: &'a SurrogateScores,
    pub kind: AttackKind,
    pub rule: BudgetRule,
    pub seed: u64,
}

/// Perturbation for every target in `targets` order, computed in
/// parallel against the clean graph.
pub fn perturb_targets(setup: &AttackSetup<'_>, targets: &TargetSet) -> Vec<Perturbation> {
    targets
        .all()
        .par_iter()
        .map(|&(v, _)| {
            let budget = setup.rule.budget(setup.graph, v);
            run_attack(setup.kind, setup.graph, v, budget, setup.scores, setup.seed)
        })
        .collect()
}

/// Evasion evaluation: every target is attacked independently on the
/// clean graph and the frozen `model` is re-run on the perturbed graph.
pub fn evaluate_under_attack(
    model: &Model,
    defense: &str,
    setup: &AttackSetup<'_>,
    targets: &TargetSet,
) -> Result<(EvalReport, Vec<Perturbation>)> {
    let perturbations = perturb_targets(setup, targets);
    let report = evaluate_perturbations(model, defense, setup, targets, &perturbations)?;
    Ok((report, perturbations))
}

/// Scores precomputed perturbations (one per target, in `targets`
/// order) against `model`.
pub fn evaluate_perturbations(
    model: &Model,
    defense: &str,
    setup: &AttackSetup<'_>,
    targets: &TargetSet,
    perturbations: &[Perturbation],
) -> Result<EvalReport> {
    let g = setup.graph;
    let clean = model.predict_proba(g)?;
    let list = targets.all();
    if list.len() != perturbations.len() {
        return Err(Error::Other(format!(
            "{} perturbations for {} targets",
            perturbations.len(),
            list.len()
        )));
    }
    let records: Vec<TargetRecord> = list
        .par_iter()
        .zip(perturbations)
        .map(|(&(v, bucket), p)| -> Result<TargetRecord> {
            let clean_margin = margin(clean.row(v), g.labels()[v])?;
            let attacked = p
                .check()
                .and_then(|_| apply(g, p))
                .and_then(|ga| node_margin(model, &ga, v));
            let (attacked_margin, error) = match attacked {
                Ok(s) => (s, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            Ok(TargetRecord {
                node: v,
                bucket,
                attack: setup.kind,
                budget: p.budget,
                ops: p.ops.len(),
                truncated: p.truncated,
                clean_margin,
                attacked_margin,
                correct_before: clean_margin > 0.0,
                correct_after: attacked_margin > 0.0,
                error,
            })
        })
        .collect::<Result<_>>()?;
    let (accuracy, failed) = accuracy_of(&records);
    Ok(EvalReport {
        defense: defense.to_string(),
        attack: setup.kind,
        seed: setup.seed,
        config_fingerprint: model.params.fingerprint(),
        records,
        accuracy,
        failed,
    })
}

/// `defense,attack,accuracy,clean_accuracy,targets,failed` rows.
pub fn summary_csv(reports: &[EvalReport]) -> String {
    let mut s = String::from("defense,attack,accuracy,clean_accuracy,targets,failed\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{},{}",
            r.defense,
            r.attack.as_str(),
            r.accuracy,
            r.clean_accuracy(),
            r.records.len(),
            r.failed
        );
    }
    s
}
