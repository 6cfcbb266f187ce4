//! Structure perturbation attacks against a single target node.
//!
//! All three attacks are evasion attacks on a fixed clean graph. The
//! gradient and search attacks work against the linearized surrogate
//! (see [`crate::encoder::SurrogateParams`]); the random attack uses
//! ground-truth labels.

mod fgsm;
mod nettack;
mod perturbation;
mod random;
mod view;

use serde::{Deserialize, Serialize};

pub use fgsm::attack_fgsm;
pub use nettack::{attack_nettack, influence_candidates, nettack_on_view, pick_best, TIE_EPS};
pub use perturbation::{apply, apply_ops, read_trace, write_trace, EdgeOp, Perturbation, WorkingGraph};
pub use random::attack_rand;
pub use view::{logit_margin, SurrogateScores, TargetView};

use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Rand,
    Fgsm,
    Nettack,
}

impl AttackKind {
    pub const ALL: [AttackKind; 3] = [AttackKind::Rand, AttackKind::Fgsm, AttackKind::Nettack];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::Rand => "RAND",
            AttackKind::Fgsm => "FGSM",
            AttackKind::Nettack => "NETTACK",
        }
    }
}

impl std::str::FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = AttackKind::ALL
                    .iter()
                    .map(|k| k.as_str().to_lowercase())
                    .collect();
                format!("unknown attack `{s}`, expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub budget: usize,
    pub seed: u64,
}

/// Runs `kind` against `target`.
pub fn run_attack(
    kind: AttackKind,
    g: &Graph,
    target: usize,
    budget: usize,
    scores: &SurrogateScores,
    seed: u64,
) -> Perturbation {
    match kind {
        AttackKind::Rand => attack_rand(g, target, budget, g.labels(), seed),
        AttackKind::Fgsm => attack_fgsm(g, target, budget, scores, seed),
        AttackKind::Nettack => attack_nettack(g, target, budget, scores),
    }
}
