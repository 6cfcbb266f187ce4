use serde::{Deserialize, Serialize};

/// How the contrastive term of the adversarial objective reaches the
/// encoder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AclUpdate {
    /// One loss for every parameter: real pairs labelled 1, fake pairs 0.
    Joint,
    /// The discriminator matrix minimizes the joint loss. The encoder sees
    /// only the supervised loss and the fake pairs labelled 1, so
    /// embeddings of perturbed graphs are pushed towards looking clean.
    #[default]
    Minimax,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    #[default]
    Plain,
    Ncl,
    Acl,
}

impl TrainMode {
    pub const ALL: [TrainMode; 3] = [TrainMode::Plain, TrainMode::Ncl, TrainMode::Acl];

    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::Plain => "plain",
            TrainMode::Ncl => "ncl",
            TrainMode::Acl => "acl",
        }
    }
}

impl std::str::FromStr for TrainMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TrainMode::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = TrainMode::ALL.iter().map(|k| k.as_str().to_lowercase()).collect();
                format!(
                    "unknown training mode `{s}`, expected one of {}",
                    names.join(", ")
                )
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub lr_decay: f64,
    pub decay_every: usize,
    pub lambda_acl: f64,
    pub neg_per_pos: usize,
    pub patience: usize,
    /// L2 penalty coefficient added to every parameter gradient.
    pub weight_decay: f64,
    /// Surrogate-greedy flips per sampled node when building the
    /// adversarial graph.
    pub gen_budget: usize,
    /// Nodes sampled per epoch for the contrastive term.
    pub batch_size: usize,
    pub acl_update: AclUpdate,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.01,
            lr_decay: 0.5,
            decay_every: 50,
            lambda_acl: 1.0,
            neg_per_pos: 5,
            patience: 30,
            weight_decay: 0.0,
            gen_budget: 2,
            batch_size: 64,
            acl_update: AclUpdate::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Step-decayed learning rate for zero-based `epoch`.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let steps = epoch.checked_div(self.decay_every).unwrap_or(0);
        self.lr * self.lr_decay.powi(steps as i32)
    }

    /// Every violated constraint, prefixed with `prefix`.
    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            errs.push(format!("{prefix}lr = {}: must be > 0", self.lr));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            errs.push(format!("{prefix}lr_decay = {}: must be in (0, 1]", self.lr_decay));
        }
        if self.decay_every == 0 {
            errs.push(format!("{prefix}decay_every = 0: must be >= 1"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            errs.push(format!(
                "{prefix}weight_decay = {}: must be >= 0",
                self.weight_decay
            ));
        }
        if self.neg_per_pos == 0 {
            errs.push(format!("{prefix}neg_per_pos = 0: must be >= 1"));
        }
        if !(self.lambda_acl >= 0.0 && self.lambda_acl.is_finite()) {
            errs.push(format!("{prefix}lambda_acl = {}: must be >= 0", self.lambda_acl));
        }
        if self.epochs == 0 {
            errs.push(format!("{prefix}epochs = 0: must be >= 1"));
        }
        if self.batch_size == 0 {
            errs.push(format!("{prefix}batch_size = 0: must be >= 1"));
        }
        errs
    }

    /// Constraints that only apply to adversarial training.
    pub fn acl_violations(&self, prefix: &str) -> Vec<String> {
        if self.gen_budget == 0 {
            vec![format!(
                "{prefix}gen_budget = 0: adversarial training needs at least one flip per sampled node"
            )]
        } else {
            Vec::new()
        }
    }
}
