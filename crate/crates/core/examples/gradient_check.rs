//! Checks reverse-mode gradients of a two-layer graph convolution loss
//! against central differences.

use robust_gnn::kernel::{grad_check, Reduce};
use robust_gnn::sbm::SbmSpec;
use robust_gnn::Tensor;

fn main() -> robust_gnn::Result<()> {
    let g = SbmSpec {
        blocks: vec![10, 10],
        feature_dim: 8,
        p_in: 0.3,
        ..SbmSpec::default()
    }
    .generate(1)?;
    let adj = g.adjacency_arc();
    let rows: Vec<usize> = (0..g.node_count()).collect();
    // off-grid weights: with 0/1 features, grid values can put a ReLU input
    // exactly on its kink, where finite differences mean nothing
    let wave = |n: usize, f: f64| (0..n).map(|i| (i as f64 * f + 0.3).sin() * 0.5).collect();
    let w1 = Tensor::from_vec(8, 4, wave(32, 1.7))?;
    let w2 = Tensor::from_vec(4, 2, wave(8, 2.3))?;

    let report = grad_check(
        |t, p| {
            let x = t.constant(g.features().clone())?;
            let h = t.neighbor_rows(x, &adj, Reduce::MeanWithSelf)?;
            let h = t.matmul(h, p[0])?;
            let h = t.relu(h)?;
            let h = t.neighbor_rows(h, &adj, Reduce::MeanWithSelf)?;
            let z = t.matmul(h, p[1])?;
            t.softmax_xent(z, &rows, g.labels())
        },
        &[w1, w2],
        1e-5,
    )?;
    println!(
        "{} coordinates, max relative error {:.2e}, max absolute error {:.2e}, passes 1e-4: {}",
        report.coordinates,
        report.max_rel_err,
        report.max_abs_err,
        report.passes(1e-4)
    );
    Ok(())
}
