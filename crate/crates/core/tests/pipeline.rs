//! Config handling and end-to-end runs on a small block model.

use std::fs;
use std::path::Path;

use robust_gnn::attack::{AttackKind, EdgeOp, Perturbation};
use robust_gnn::config::{parse_config, to_toml, AttackConfig, DefenseConfig, ExperimentConfig};
use robust_gnn::pipeline::{
    align_trace, attack_seed, evaluate_seed, prepare_seed, promised_files, run_pipeline, train_seed, Manifest,
};
use robust_gnn::sbm::SbmSpec;
use robust_gnn::train::TrainMode;
use robust_gnn::Error;

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.dataset.sbm = SbmSpec {
        blocks: vec![40, 40],
        p_in: 0.15,
        ..SbmSpec::default()
    };
    cfg.training.epochs = 30;
    cfg.training.batch_size = 16;
    cfg.seeds = vec![0, 1];
    cfg.defenses = vec![
        DefenseConfig {
            mode: TrainMode::Plain,
            ..DefenseConfig::default()
        },
        DefenseConfig {
            mode: TrainMode::Acl,
            ..DefenseConfig::default()
        },
    ];
    cfg.attacks = AttackKind::ALL
        .into_iter()
        .map(|kind| AttackConfig {
            kind,
            ..AttackConfig::default()
        })
        .collect();
    cfg
}

fn artifact_bytes(dir: &Path, cfg: &ExperimentConfig) -> Vec<(String, Vec<u8>)> {
    promised_files(cfg)
        .into_iter()
        .map(|f| {
            let bytes = fs::read(dir.join(&f)).unwrap();
            (f, bytes)
        })
        .collect()
}

#[test]
fn pipeline_is_byte_reproducible_and_verifiable() {
    let cfg = small_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out = run_pipeline(&cfg, a.path()).unwrap();
    run_pipeline(&cfg, b.path()).unwrap();
    Manifest::read(a.path()).unwrap().verify(a.path()).unwrap();
    assert_eq!(artifact_bytes(a.path(), &cfg), artifact_bytes(b.path(), &cfg));
    // 2 seeds x 2 defenses x 3 attacks
    assert_eq!(out.reports.len(), 12);
    assert_eq!(out.summary.len(), 6);
    assert!(out.summary.iter().all(|r| r.reports == 2 && r.failed == 0));
}

#[test]
fn staged_run_matches_the_pipeline() {
    let cfg = small_config();
    let (whole, staged) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out = run_pipeline(&cfg, whole.path()).unwrap();
    let mut reports = Vec::new();
    for &s in &cfg.seeds {
        train_seed(&cfg, s, staged.path()).unwrap();
        attack_seed(&cfg, s, staged.path()).unwrap();
        reports.extend(evaluate_seed(&cfg, s, staged.path()).unwrap());
    }
    assert_eq!(reports.len(), out.reports.len());
    for (a, b) in reports.iter().zip(&out.reports) {
        assert_eq!((&a.defense, a.attack, a.seed), (&b.defense, b.attack, b.seed));
        assert_eq!(a.accuracy, b.accuracy);
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!((x.node, x.ops, x.budget), (y.node, y.ops, y.budget));
            assert_eq!(x.attacked_margin, y.attacked_margin);
        }
    }
}

#[test]
fn evaluate_without_artifacts_is_a_runtime_error() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();
    let err = evaluate_seed(&cfg, 0, dir.path()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err}");
}

#[test]
fn manifest_reports_missing_artifacts() {
    let mut cfg = small_config();
    cfg.seeds = vec![3];
    cfg.defenses.truncate(1);
    cfg.attacks.truncate(1);
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&cfg, dir.path()).unwrap();
    let m = Manifest::read(dir.path()).unwrap();
    m.verify(dir.path()).unwrap();
    fs::remove_file(dir.path().join("seed-3/targets.json")).unwrap();
    let err = m.verify(dir.path()).unwrap_err().to_string();
    assert!(err.contains("seed-3/targets.json"), "{err}");
}

#[test]
fn invalid_config_stops_before_any_work() {
    let mut cfg = small_config();
    cfg.training.lr = 0.0;
    cfg.seeds.clear();
    let dir = tempfile::tempdir().unwrap();
    match run_pipeline(&cfg, dir.path()) {
        Err(Error::Config(errs)) => assert_eq!(errs.len(), 2, "{errs:?}"),
        other => panic!("expected config error, got {other:?}"),
    }
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn config_survives_a_toml_round_trip() {
    let cfg = small_config();
    assert_eq!(parse_config(&to_toml(&cfg).unwrap()).unwrap(), cfg);
}

#[test]
fn aligned_traces_follow_target_order() {
    let cfg = small_config();
    let ctx = prepare_seed(&cfg, 0).unwrap();
    let targets: Vec<usize> = ctx.targets.all().iter().map(|&(v, _)| v).collect();
    let attack = &cfg.attacks[0];
    // only the third and first targets appear, in reverse order
    let (t0, t2) = (targets[0], targets[2]);
    let other = (0..ctx.graph.node_count())
        .find(|&u| u != t2 && !ctx.graph.has_edge(t2, u))
        .unwrap();
    let trace = vec![
        Perturbation {
            ops: vec![EdgeOp::add(t2, other)],
            ..Perturbation::empty(t2, 1)
        },
        Perturbation::empty(t0, 0),
    ];
    let aligned = align_trace(&ctx, attack, trace).unwrap();
    assert_eq!(aligned.len(), targets.len());
    for (p, &v) in aligned.iter().zip(&targets) {
        assert_eq!(p.target, v);
        assert_eq!(p.budget, ctx.graph.degree(v) + attack.budget_slack);
        assert_eq!(p.ops.len(), usize::from(v == t2));
    }

    let stray = (0..ctx.graph.node_count())
        .find(|v| !targets.contains(v))
        .unwrap();
    let err = align_trace(&ctx, attack, vec![Perturbation::empty(stray, 0)]).unwrap_err();
    assert!(err.to_string().contains("not a target"));
}
