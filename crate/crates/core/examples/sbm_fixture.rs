//! Draws the two-block fixture and reports its shape, homophily and split.

use robust_gnn::graph::{largest_connected_component, split_nodes};
use robust_gnn::sbm::SbmSpec;

fn main() -> robust_gnn::Result<()> {
    let spec = SbmSpec::default();
    for seed in 0..3 {
        let g = largest_connected_component(&spec.generate(seed)?)?;
        let edges: Vec<_> = g.adjacency().edges().collect();
        let same = edges
            .iter()
            .filter(|&&(u, v)| g.labels()[u] == g.labels()[v])
            .count();
        let masks = split_nodes(&g, seed)?;
        println!(
            "seed {seed}: {} nodes, {} edges, {} features, homophily {:.2}, split train/val/unlabeled/test = {}/{}/{}/{}",
            g.node_count(),
            g.edge_count(),
            g.feature_dim(),
            same as f64 / edges.len() as f64,
            masks.train.len(),
            masks.val.len(),
            masks.unlabeled.len(),
            masks.test().len(),
        );
    }
    Ok(())
}
