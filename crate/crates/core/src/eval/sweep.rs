use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{AttackKind, Perturbation, SurrogateScores};
use crate::encoder::{DimProfile, EncoderConfig, InterAgg, IntraAgg, Model};
use crate::error::Result;
use crate::eval::report::{evaluate_perturbations, perturb_targets, AttackSetup, BudgetRule};
use crate::eval::targets::TargetSet;
use crate::graph::{Graph, SplitMasks};
use crate::train::{train, TrainConfig, TrainMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantAxis {
    Intra,
    Inter,
    Dim,
}

impl VariantAxis {
    pub const ALL: [VariantAxis; 3] = [VariantAxis::Intra, VariantAxis::Inter, VariantAxis::Dim];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantAxis::Intra => "intra",
            VariantAxis::Inter => "inter",
            VariantAxis::Dim => "dim",
        }
    }

    /// `(label, config)` for each setting of this axis, all other
    /// components taken from `base`.
    pub fn variants(self, base: &EncoderConfig) -> Vec<(String, EncoderConfig)> {
        let with = |f: &dyn Fn(&mut EncoderConfig)| {
            let mut c = base.clone();
            c.bottleneck_dim = None;
            c.hidden_dims = None;
            f(&mut c);
            c
        };
        match self {
            VariantAxis::Intra => [IntraAgg::Mean, IntraAgg::Sum, IntraAgg::Max]
                .into_iter()
                .map(|a| (a.as_str().to_string(), with(&|c| c.intra = a)))
                .collect(),
            VariantAxis::Inter => [InterAgg::None, InterAgg::Skip, InterAgg::Dense]
                .into_iter()
                .map(|a| (a.as_str().to_string(), with(&|c| c.inter = a)))
                .collect(),
            VariantAxis::Dim => [DimProfile::Low, DimProfile::Mid, DimProfile::High]
                .into_iter()
                .map(|a| (a.as_str().to_string(), with(&|c| c.profile = a)))
                .collect(),
        }
    }
}

impl std::str::FromStr for VariantAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantAxis::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown variant axis `{s}`, expected one of intra, inter, dim"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: VariantAxis,
    pub variant: String,
    pub budget: usize,
    pub mean_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub attack: AttackKind,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn curve(&self, axis: VariantAxis, variant: &str) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .filter(|p| p.axis == axis && p.variant == variant)
            .map(|p| (p.budget, p.mean_margin))
            .collect()
    }

    /// `axis,variant,budget,mean_margin` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("axis,variant,budget,mean_margin\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{:.6}",
                p.axis.as_str(),
                p.variant,
                p.budget,
                p.mean_margin
            );
        }
        s
    }
}

/// Inputs shared by every variant in a sweep.
pub struct SweepSetup<'a> {
    pub graph: &'a Graph,
    pub masks: &'a SplitMasks,
    pub base: &'a EncoderConfig,
    pub train: &'a TrainConfig,
    pub mode: TrainMode,
    pub scores: &'a SurrogateScores,
    pub targets: &'a TargetSet,
    pub attack: AttackKind,
    pub seed: u64,
}

/// Trains one model per variant of each axis (same seed for all) and
/// records the mean target margin at each budget. Perturbations are
/// computed once at the largest budget and truncated to each smaller one.
pub fn variant_sweep(setup: &SweepSetup<'_>, axes: &[VariantAxis], budgets: &[usize]) -> Result<SweepResult> {
    let max_budget = budgets.iter().copied().max().unwrap_or(0);
    let attack = AttackSetup {
        graph: setup.graph,
        scores: setup.scores,
        kind: setup.attack,
        rule: BudgetRule::Fixed(max_budget),
        seed: setup.seed,
    };
    let full = perturb_targets(&attack, setup.targets);

    let jobs: Vec<(VariantAxis, String, EncoderConfig)> = axes
        .iter()
        .flat_map(|&a| a.variants(setup.base).into_iter().map(move |(l, c)| (a, l, c)))
        .collect();
    let models: Vec<Model> = jobs
        .par_iter()
        .map(|(_, _, cfg)| train(setup.graph, setup.masks, cfg, setup.train, setup.mode).map(|o| o.model))
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    for ((axis, label, _), model) in jobs.iter().zip(&models) {
        for &b in budgets {
            let prefixes: Vec<Perturbation> = full.iter().map(|p| p.prefix(b)).collect();
            let rep = evaluate_perturbations(model, label, &attack, setup.targets, &prefixes)?;
            let margins: Vec<f64> = rep.evaluated().map(|r| r.attacked_margin).collect();
            let mean = if margins.is_empty() {
                f64::NAN
            } else {
                margins.iter().sum::<f64>() / margins.len() as f64
            };
            points.push(SweepPoint {
                axis: *axis,
                variant: label.clone(),
                budget: b,
                mean_margin: mean,
            });
        }
    }
    Ok(SweepResult {
        attack: setup.attack,
        points,
    })
}
