//! Loads a graph from plain-text edge, feature and label files and trains
//! on it.

use std::fmt::Write as _;
use std::fs;

use robust_gnn::config::{DatasetKind, ExperimentConfig};
use robust_gnn::encoder::{accuracy, EncoderConfig};
use robust_gnn::graph::split_nodes;
use robust_gnn::sbm::SbmSpec;
use robust_gnn::train::{train, TrainConfig, TrainMode};

fn main() -> robust_gnn::Result<()> {
    // write a block-model graph out in the text format, with sparse node ids
    let g = SbmSpec::default().generate(5)?;
    let dir = tempfile::tempdir().map_err(|e| robust_gnn::Error::Other(e.to_string()))?;
    let id = |v: usize| 1000 + 3 * v;
    let (mut edges, mut feats, mut labels) = (String::new(), String::new(), String::new());
    for (u, v) in g.adjacency().edges() {
        writeln!(edges, "{} {}", id(u), id(v)).unwrap();
    }
    for v in 0..g.node_count() {
        let row: Vec<String> = g.features().row(v).iter().map(|x| x.to_string()).collect();
        writeln!(feats, "{}\t{}", id(v), row.join(",")).unwrap();
        writeln!(labels, "{}\t{}", id(v), g.labels()[v]).unwrap();
    }
    let path = |name: &str| dir.path().join(name);
    for (name, body) in [
        ("edges.txt", &edges),
        ("features.txt", &feats),
        ("labels.txt", &labels),
    ] {
        fs::write(path(name), body).map_err(|e| robust_gnn::Error::Other(e.to_string()))?;
    }

    let mut cfg = ExperimentConfig::default();
    cfg.dataset.kind = DatasetKind::Custom;
    cfg.dataset.edges = Some(path("edges.txt"));
    cfg.dataset.features = Some(path("features.txt"));
    cfg.dataset.labels = Some(path("labels.txt"));
    let loaded = cfg.dataset.load(0)?;
    println!(
        "loaded {} nodes, {} edges, {} features",
        loaded.node_count(),
        loaded.edge_count(),
        loaded.feature_dim()
    );

    let masks = split_nodes(&loaded, 0)?;
    let out = train(
        &loaded,
        &masks,
        &EncoderConfig::refined(),
        &TrainConfig::default(),
        TrainMode::Plain,
    )?;
    let logits = out.model.forward(&loaded)?.logits;
    println!(
        "test accuracy {:.3}",
        accuracy(&logits, loaded.labels(), masks.test())
    );
    Ok(())
}
