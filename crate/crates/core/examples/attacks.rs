//! Runs the three structure attacks against one target and shows how the
//! surrogate's margin moves.

use robust_gnn::attack::{apply, logit_margin, run_attack, AttackKind, SurrogateScores};
use robust_gnn::graph::split_nodes;
use robust_gnn::sbm::SbmSpec;
use robust_gnn::train::fit_surrogate;

fn main() -> robust_gnn::Result<()> {
    let g = SbmSpec::default().generate(3)?;
    let masks = split_nodes(&g, 3)?;
    let surrogate = fit_surrogate(&g, &masks, 3)?;
    let scores = SurrogateScores::new(&g, &surrogate)?;
    let target = masks.test()[0];
    let y = g.labels()[target];
    let budget = g.degree(target) + 2;
    let clean = logit_margin(surrogate.logits(&g)?.row(target), y);
    println!(
        "target {target} (degree {}, label {y}), budget {budget}, clean margin {clean:+.3}",
        g.degree(target)
    );
    for kind in AttackKind::ALL {
        let p = run_attack(kind, &g, target, budget, &scores, 3);
        let attacked = apply(&g, &p)?;
        let m = logit_margin(surrogate.logits(&attacked)?.row(target), y);
        let ops: Vec<String> = p.ops.iter().map(|op| format!("{op:?}")).collect();
        println!(
            "{kind:?}: margin {m:+.3} after {} ops{}",
            p.ops.len(),
            if p.truncated { " (stopped early)" } else { "" }
        );
        println!("  {}", ops.join(" "));
    }
    Ok(())
}
