//! Margin metric, target selection and accuracy under attack.

mod chart;
mod margin;
mod report;
mod sweep;
mod targets;

pub use chart::{parse_series, render_series};
pub use margin::{margin, SUM_TOL};
pub use report::{
    evaluate_perturbations, evaluate_under_attack, node_margin, perturb_targets, summary_csv, AttackSetup,
    BudgetRule, EvalReport, TargetRecord,
};
pub use sweep::{variant_sweep, SweepPoint, SweepResult, SweepSetup, VariantAxis};
pub use targets::{select_targets, Bucket, TargetCounts, TargetSet};
