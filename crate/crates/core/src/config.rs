//! TOML experiment files.
//!
//! Every section is optional; missing keys take their defaults, so an
//! empty file describes a one-seed plain run on the SBM fixture. Unknown
//! keys are rejected, and all problems found in a file are reported
//! together.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attack::AttackKind;
use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::eval::{BudgetRule, TargetCounts};
use crate::graph::{largest_connected_component, load_graph, Graph};
use crate::sbm::SbmSpec;
use crate::train::{TrainConfig, TrainMode};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Cora,
    Citeseer,
    Polblogs,
    #[default]
    Sbm,
    Custom,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 5] = [
        DatasetKind::Cora,
        DatasetKind::Citeseer,
        DatasetKind::Polblogs,
        DatasetKind::Sbm,
        DatasetKind::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Cora => "cora",
            DatasetKind::Citeseer => "citeseer",
            DatasetKind::Polblogs => "polblogs",
            DatasetKind::Sbm => "sbm",
            DatasetKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DatasetKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = DatasetKind::ALL
                    .iter()
                    .map(|k| k.as_str().to_lowercase())
                    .collect();
                format!("unknown dataset `{s}`, expected one of {}", names.join(", "))
            })
    }
}

/// Where the graph comes from. Named datasets read `edges.txt`,
/// `labels.txt` and, if present, `features.txt` from `dir`; `custom`
/// names the three files directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    pub dir: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// Keep only the largest connected component.
    pub lcc: bool,
    pub sbm: SbmSpec,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            kind: DatasetKind::Sbm,
            dir: None,
            edges: None,
            features: None,
            labels: None,
            lcc: true,
            sbm: SbmSpec::default(),
        }
    }
}

/// Resolved file paths `(edges, features, labels)` of a file-backed
/// dataset.
type DatasetFiles = (PathBuf, Option<PathBuf>, PathBuf);

impl DatasetConfig {
    fn files(&self) -> std::result::Result<Option<DatasetFiles>, String> {
        match self.kind {
            DatasetKind::Sbm => Ok(None),
            DatasetKind::Custom => match (&self.edges, &self.labels) {
                (Some(e), Some(l)) => Ok(Some((e.clone(), self.features.clone(), l.clone()))),
                _ => Err("dataset.kind = \"custom\" needs dataset.edges and dataset.labels".into()),
            },
            _ => match &self.dir {
                Some(d) => {
                    let f = d.join("features.txt");
                    let features = if self.features.is_some() {
                        self.features.clone()
                    } else {
                        f.exists().then_some(f)
                    };
                    Ok(Some((d.join("edges.txt"), features, d.join("labels.txt"))))
                }
                None => Err(format!(
                    "dataset.kind = \"{}\" needs dataset.dir",
                    self.kind.as_str()
                )),
            },
        }
    }

    /// Loads (or generates, for `sbm`) the graph. The SBM fixture is
    /// drawn from `seed`.
    pub fn load(&self, seed: u64) -> Result<Graph> {
        let g = match self.files().map_err(|e| Error::Config(vec![e]))? {
            None => self.sbm.generate(seed)?,
            Some((e, f, l)) => load_graph(&e, f.as_deref(), &l)?,
        };
        if self.lcc {
            largest_connected_component(&g)
        } else {
            Ok(g)
        }
    }

    /// Whether the graph differs per seed.
    pub fn is_seeded(&self) -> bool {
        self.kind == DatasetKind::Sbm
    }
}

/// One trained model to compare.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DefenseConfig {
    pub name: String,
    pub mode: TrainMode,
    /// Encoder for this defense; the top-level `[encoder]` when absent.
    pub encoder: Option<EncoderConfig>,
}

impl Default for DefenseConfig {
    fn default() -> Self {
        Self {
            name: String::new(),
            mode: TrainMode::Plain,
            encoder: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub kind: AttackKind,
    /// Fixed per-target budget; target degree plus `budget_slack` when
    /// absent.
    pub budget: Option<usize>,
    pub budget_slack: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            kind: AttackKind::Nettack,
            budget: None,
            budget_slack: 2,
        }
    }
}

impl AttackConfig {
    pub fn rule(&self) -> BudgetRule {
        match self.budget {
            Some(b) => BudgetRule::Fixed(b),
            None => BudgetRule::DegreePlus(self.budget_slack),
        }
    }
}

/// Target bucket sizes; any omitted count follows the scaled 1:1:2
/// protocol for the test-set size.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalCounts {
    pub high: Option<usize>,
    pub low: Option<usize>,
    pub random: Option<usize>,
}

impl EvalCounts {
    pub fn resolve(&self, test_size: usize) -> TargetCounts {
        let d = TargetCounts::scaled(test_size);
        TargetCounts {
            high: self.high.unwrap_or(d.high),
            low: self.low.unwrap_or(d.low),
            random: self.random.unwrap_or(d.random),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub encoder: EncoderConfig,
    pub training: TrainConfig,
    /// Training mode of the single default defense.
    pub defense: TrainMode,
    /// Several defenses to compare; replaces the single default one.
    pub defenses: Vec<DefenseConfig>,
    pub attacks: Vec<AttackConfig>,
    pub eval: EvalCounts,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            encoder: EncoderConfig::default(),
            training: TrainConfig::default(),
            defense: TrainMode::Plain,
            defenses: Vec::new(),
            attacks: vec![AttackConfig::default()],
            eval: EvalCounts::default(),
            seeds: vec![0],
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

/// A defense with its encoder resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedDefense {
    pub name: String,
    pub mode: TrainMode,
    pub encoder: EncoderConfig,
}

impl ExperimentConfig {
    /// Defenses in file order, or the single default defense.
    pub fn resolved_defenses(&self) -> Vec<ResolvedDefense> {
        if self.defenses.is_empty() {
            return vec![ResolvedDefense {
                name: self.defense.as_str().to_string(),
                mode: self.defense,
                encoder: self.encoder.clone(),
            }];
        }
        self.defenses
            .iter()
            .map(|d| ResolvedDefense {
                name: if d.name.is_empty() {
                    d.mode.as_str().to_string()
                } else {
                    d.name.clone()
                },
                mode: d.mode,
                encoder: d.encoder.clone().unwrap_or_else(|| self.encoder.clone()),
            })
            .collect()
    }

    /// Feature width of the configured dataset without loading it, when
    /// known up front.
    fn known_feature_dim(&self) -> Option<usize> {
        (self.dataset.kind == DatasetKind::Sbm).then_some(self.dataset.sbm.feature_dim)
    }

    /// Every semantic problem with the configuration.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.seeds.is_empty() {
            errs.push("seeds: must list at least one seed".into());
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            errs.push("seeds: duplicate seeds".into());
        }
        if self.attacks.is_empty() {
            errs.push("attacks: must list at least one attack".into());
        }
        errs.extend(self.training.violations("training."));

        match self.dataset.files() {
            Err(e) => errs.push(e),
            Ok(Some((e, f, l))) => {
                for (key, p) in [("edges", Some(e)), ("features", f), ("labels", Some(l))] {
                    if let Some(p) = p {
                        if !p.exists() {
                            errs.push(format!("dataset.{key}: {} does not exist", p.display()));
                        }
                    }
                }
            }
            Ok(None) => {
                let s = &self.dataset.sbm;
                if s.blocks.len() < 2 || s.blocks.contains(&0) {
                    errs.push("dataset.sbm.blocks: need at least two non-empty blocks".into());
                }
                if !(0.0..=1.0).contains(&s.p_in) || !(0.0..=1.0).contains(&s.p_out) || s.p_in <= s.p_out {
                    errs.push(format!(
                        "dataset.sbm: need 0 <= p_out < p_in <= 1, got p_in = {}, p_out = {}",
                        s.p_in, s.p_out
                    ));
                }
                if !(s.noise >= 0.0 && s.noise.is_finite()) {
                    errs.push(format!("dataset.sbm.noise = {}: must be >= 0", s.noise));
                }
                if s.feature_dim == 0 {
                    errs.push("dataset.sbm.feature_dim = 0: must be >= 1".into());
                }
                if !(0.0..=1.0).contains(&s.density) {
                    errs.push(format!("dataset.sbm.density = {}: must lie in [0, 1]", s.density));
                }
                if !s.signal.is_finite() {
                    errs.push(format!("dataset.sbm.signal = {}: must be finite", s.signal));
                }
            }
        }

        let defenses = self.resolved_defenses();
        let mut names: Vec<&str> = defenses.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != defenses.len() {
            errs.push("defenses: names must be unique".into());
        }
        for (i, d) in defenses.iter().enumerate() {
            let key = if self.defenses.is_empty() {
                "encoder".to_string()
            } else {
                format!("defenses[{i}].encoder")
            };
            let check = match self.known_feature_dim() {
                Some(dim) => d.encoder.validate(dim),
                None => d.encoder.layer_shapes(usize::MAX / 4).map(|_| ()),
            };
            if let Err(e) = check {
                errs.push(format!("{key}: {e}"));
            }
            if d.mode == TrainMode::Acl {
                errs.extend(self.training.acl_violations("training."));
            }
        }
        for (i, a) in self.attacks.iter().enumerate() {
            if a.budget == Some(0) {
                errs.push(format!("attacks[{i}].budget = 0: use at least one flip"));
            }
        }
        errs.sort();
        errs.dedup();
        errs
    }
}

fn parse_raw(text: &str) -> Result<(ExperimentConfig, Vec<String>)> {
    let mut unknown = Vec::new();
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
    let cfg = serde_ignored::deserialize(de, |path| unknown.push(format!("{path}: unknown key")))
        .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string().trim_end().to_string()]))?;
    Ok((cfg, unknown))
}

fn finish(cfg: ExperimentConfig, mut errs: Vec<String>) -> Result<ExperimentConfig> {
    errs.extend(cfg.violations());
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(errs))
    }
}

/// Parses TOML text, reporting every unknown key and every constraint
/// violation at once.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let (cfg, unknown) = parse_raw(text)?;
    finish(cfg, unknown)
}

/// Reads and validates an experiment file. Relative dataset paths are
/// resolved against the file's directory.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (mut cfg, unknown) = parse_raw(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let d = &mut cfg.dataset;
    for p in [&mut d.dir, &mut d.edges, &mut d.features, &mut d.labels]
        .into_iter()
        .flatten()
    {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    finish(cfg, unknown)
}

/// The configuration as TOML, with every default written out.
pub fn to_toml(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(|e| Error::Other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_the_default_sbm_run() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.dataset.kind, DatasetKind::Sbm);
        assert_eq!(cfg.encoder.layers, 3);
        assert_eq!(cfg.encoder.perceptron_depth, 2);
        assert_eq!(cfg.training.lr, 0.01);
        assert_eq!((cfg.training.lr_decay, cfg.training.decay_every), (0.5, 50));
    }

    #[test]
    fn negative_lr_names_field() {
        let e = errors("[training]\nlr = -1.0\n");
        assert_eq!(e.len(), 1);
        assert!(e[0].contains("training.lr") && e[0].contains("> 0"), "{e:?}");
    }

    #[test]
    fn unknown_keys_all_reported() {
        let e = errors("colour = 1\n[training]\nlearning_rate = 0.1\n[encoder]\nlayerz = 2\n");
        assert_eq!(e.len(), 3, "{e:?}");
        assert!(e.iter().any(|m| m.starts_with("training.learning_rate")));
    }

    #[test]
    fn several_violations_reported_together() {
        let e = errors("seeds = []\n[training]\nlr = 0.0\nneg_per_pos = 0\n");
        assert_eq!(e.len(), 3, "{e:?}");
    }

    #[test]
    fn wide_bottleneck_rejected_here() {
        let e = errors("[encoder]\nbottleneck_dim = 500\n");
        assert!(e.iter().any(|m| m.starts_with("encoder:")), "{e:?}");
    }

    #[test]
    fn acl_needs_generator_budget() {
        let e = errors("defense = \"acl\"\n[training]\ngen_budget = 0\n");
        assert!(e[0].contains("gen_budget"), "{e:?}");
    }

    #[test]
    fn missing_dataset_files_reported() {
        let e = errors("[dataset]\nkind = \"cora\"\ndir = \"/nonexistent/cora\"\n");
        assert_eq!(e.len(), 2, "{e:?}");
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        assert_eq!(parse_config(&to_toml(&cfg).unwrap()).unwrap(), cfg);
    }

    #[test]
    fn defenses_inherit_encoder() {
        let cfg = parse_config(
            "[[defenses]]\nname = \"GCN\"\n[defenses.encoder]\ninter = \"skip\"\nprofile = \"high\"\n[[defenses]]\nmode = \"acl\"\n",
        )
        .unwrap();
        let d = cfg.resolved_defenses();
        assert_eq!(d[0].name, "GCN");
        assert_eq!(d[1].name, "acl");
        assert_eq!(d[1].encoder, EncoderConfig::default());
    }
}
