//! Exhaustive single-flip oracle on a dense re-implementation of the
//! surrogate.

use robust_gnn::attack::{
    apply, attack_nettack, logit_margin, AttackKind, Perturbation, SurrogateScores, TIE_EPS,
};
use robust_gnn::encoder::SurrogateParams;
use robust_gnn::Graph;

use super::{random_graph, random_tensor, rng};

/// Dense `Â (Â X W1 W2)` with `Â = D̃⁻¹(A + I)`, built from an adjacency
/// matrix without touching the crate's sparse code.
pub fn dense_surrogate_logits(adj: &[Vec<bool>], z: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = adj.len();
    let prop = |m: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..n)
            .map(|v| {
                let nb: Vec<usize> = (0..n).filter(|&u| u == v || adj[v][u]).collect();
                (0..m[0].len())
                    .map(|c| nb.iter().map(|&u| m[u][c]).sum::<f64>() / nb.len() as f64)
                    .collect()
            })
            .collect()
    };
    prop(&prop(z))
}

pub fn dense_adj(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    (0..n)
        .map(|u| (0..n).map(|v| g.has_edge(u, v)).collect())
        .collect()
}

pub fn random_surrogate(g: &Graph, seed: u64) -> SurrogateParams {
    let mut r = rng(seed);
    SurrogateParams {
        w1: random_tensor(g.feature_dim(), 4, &mut r),
        w2: random_tensor(4, g.n_classes(), &mut r),
    }
}

/// Best single flip over every pair of the graph, scored by the dense
/// surrogate: `(current margin, best margin, pairs attaining it)`.
pub fn exhaustive_best(g: &Graph, s: &SurrogateParams, target: usize) -> (f64, f64, Vec<(usize, usize)>) {
    let z: Vec<Vec<f64>> = {
        let t = s.projected(g).unwrap();
        (0..t.rows()).map(|r| t.row(r).to_vec()).collect()
    };
    let y = g.labels()[target];
    let base = dense_adj(g);
    let current = logit_margin(&dense_surrogate_logits(&base, &z)[target], y);
    let n = g.node_count();
    let mut scored = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let mut adj = base.clone();
            if adj[a][b] {
                let deg = |x: usize| adj[x].iter().filter(|&&e| e).count();
                if deg(a) <= 1 || deg(b) <= 1 {
                    continue;
                }
            }
            adj[a][b] = !adj[a][b];
            adj[b][a] = !adj[b][a];
            scored.push(((a, b), logit_margin(&dense_surrogate_logits(&adj, &z)[target], y)));
        }
    }
    let best = scored.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min);
    let ties = scored
        .iter()
        .filter(|&&(_, m)| m <= best + TIE_EPS)
        .map(|&(p, _)| p)
        .collect();
    (current, best, ties)
}

/// Instance `seed` of the oracle comparison: a graph on 4 to 12 nodes and
/// a random surrogate. `Ok(true)` when a flip lowered the margin and the
/// search found the smallest optimal pair, `Ok(false)` when no flip
/// helps and the search correctly stopped.
pub fn single_flip_agrees(seed: u64) -> Result<bool, String> {
    let n = 4 + (seed as usize % 9);
    let g = random_graph(n, 0.35, 5, 2 + seed as usize % 2, seed);
    let s = random_surrogate(&g, seed + 1000);
    let scores = SurrogateScores::new(&g, &s).unwrap();
    let target = seed as usize % n;
    let p = attack_nettack(&g, target, 1, &scores);
    let (current, best, ties) = exhaustive_best(&g, &s, target);
    if best < current - TIE_EPS {
        if p.ops.len() != 1 {
            return Err(format!("seed {seed}: expected a flip"));
        }
        if p.ops[0].pair() != ties[0] {
            return Err(format!(
                "seed {seed}: {:?} is not the smallest optimal pair {:?}",
                p.ops[0].pair(),
                ties[0]
            ));
        }
        let logits = s.logits(&apply(&g, &p).unwrap()).unwrap();
        let got = logit_margin(logits.row(target), g.labels()[target]);
        if (got - best).abs() >= 1e-9 {
            return Err(format!("seed {seed}: margin {got} vs {best}"));
        }
        Ok(true)
    } else if p.ops.is_empty() && p.truncated {
        Ok(false)
    } else {
        Err(format!("seed {seed}: flipped without gain"))
    }
}

/// Budget and validity laws for one attack result.
pub fn check_laws(g: &Graph, p: &Perturbation, budget: usize, kind: AttackKind) -> Result<(), String> {
    let fail = |msg: String| Err(format!("{kind:?} on target {}: {msg}", p.target));
    if p.ops.len() > budget {
        return fail(format!("{} ops over budget {budget}", p.ops.len()));
    }
    if let Err(e) = p.check() {
        return fail(e.to_string());
    }
    if p.ops.len() < budget && !p.truncated {
        return fail("stopped short without the flag".into());
    }
    if kind != AttackKind::Nettack && !p.ops.iter().all(|op| op.touches(p.target)) {
        return fail("direct attack touched a foreign edge".into());
    }
    let after = apply(g, p).map_err(|e| e.to_string())?;
    if let Some(v) = (0..g.node_count()).find(|&v| g.degree(v) > 0 && after.degree(v) == 0) {
        return fail(format!("isolated node {v}"));
    }
    if after.features() != g.features() || after.labels() != g.labels() {
        return fail("features or labels changed".into());
    }
    Ok(())
}
