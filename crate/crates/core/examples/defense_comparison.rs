//! A GCN-style encoder against the adversarially trained one under
//! NETTACK with `degree + 2` flips. Pass a seed as the first argument.

use robust_gnn::attack::AttackKind;
use robust_gnn::config::{ExperimentConfig, ResolvedDefense};
use robust_gnn::encoder::EncoderConfig;
use robust_gnn::eval::{evaluate_under_attack, AttackSetup, BudgetRule};
use robust_gnn::pipeline::{prepare_seed, train_config_for, train_defense};
use robust_gnn::train::TrainMode;

fn main() -> robust_gnn::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = ExperimentConfig::default();
    let ctx = prepare_seed(&cfg, seed)?;
    let setup = AttackSetup {
        graph: &ctx.graph,
        scores: &ctx.scores,
        kind: AttackKind::Nettack,
        rule: BudgetRule::DegreePlus(2),
        seed,
    };
    let defenses = [
        ("GCN", TrainMode::Plain, EncoderConfig::gcn()),
        ("RGCN", TrainMode::Plain, EncoderConfig::refined()),
        ("RGCN_NCL", TrainMode::Ncl, EncoderConfig::refined()),
        ("RGCN_ACL", TrainMode::Acl, EncoderConfig::refined()),
    ];
    println!("seed {seed}, {} targets", ctx.targets.len());
    for (name, mode, encoder) in defenses {
        let d = ResolvedDefense {
            name: name.into(),
            mode,
            encoder,
        };
        let (model, _) = train_defense(&ctx, &d, &train_config_for(&cfg, seed))?;
        let (report, _) = evaluate_under_attack(&model, name, &setup, &ctx.targets)?;
        println!(
            "{name:9} clean {:.2}  attacked {:.2}",
            report.clean_accuracy(),
            report.accuracy
        );
    }
    Ok(())
}
