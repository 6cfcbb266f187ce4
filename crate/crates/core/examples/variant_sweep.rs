//! Mean target margin against attack budget for each encoder variant.

use robust_gnn::config::ExperimentConfig;
use robust_gnn::eval::VariantAxis;
use robust_gnn::pipeline::sweep_seed;

fn main() -> robust_gnn::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = ExperimentConfig::default();
    let budgets: Vec<usize> = (0..=8).collect();
    let res = sweep_seed(&cfg, seed, &VariantAxis::ALL, &budgets)?;
    println!(
        "budget      {}",
        budgets.iter().map(|b| format!("{b:>6}")).collect::<String>()
    );
    for axis in VariantAxis::ALL {
        for (label, _) in axis.variants(&cfg.encoder) {
            let curve: String = res
                .curve(axis, &label)
                .iter()
                .map(|(_, m)| format!("{m:>+6.2}"))
                .collect();
            println!("{:5} {:6} {curve}", axis.as_str(), label);
        }
    }
    Ok(())
}
