//! Stochastic block model fixtures with class-correlated binary features.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Csr, Graph};
use crate::kernel::Tensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SbmSpec {
    pub blocks: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_dim: usize,
    /// Fraction of prototype coordinates that carry the class signal.
    pub density: f64,
    /// Mean value of a signal coordinate before noise and thresholding.
    pub signal: f64,
    pub noise: f64,
}

impl Default for SbmSpec {
    fn default() -> Self {
        Self {
            blocks: vec![100, 100],
            p_in: 0.1,
            p_out: 0.01,
            feature_dim: 200,
            density: 0.1,
            signal: 0.4,
            noise: 0.3,
        }
    }
}

impl SbmSpec {
    pub fn generate(&self, seed: u64) -> Result<Graph> {
        if !(0.0..=1.0).contains(&self.density) || !self.signal.is_finite() {
            return Err(Error::InvalidGraph(format!(
                "need density in [0, 1] and finite signal, got {} and {}",
                self.density, self.signal
            )));
        }
        sample(self, seed)
    }
}

/// Samples a planted-partition graph. Node `i` of block `c` gets label
/// `c`; its features are the block's random binary prototype plus
/// Gaussian noise of standard deviation `noise`, thresholded at 0.5.
/// The result may be disconnected.
pub fn generate_sbm(
    blocks: &[usize],
    p_in: f64,
    p_out: f64,
    d: usize,
    noise: f64,
    seed: u64,
) -> Result<Graph> {
    let spec = SbmSpec {
        blocks: blocks.to_vec(),
        p_in,
        p_out,
        feature_dim: d,
        density: 0.5,
        signal: 1.0,
        noise,
    };
    sample(&spec, seed)
}

/// Class means are `signal` on a random `density` fraction of
/// coordinates and 0 elsewhere, so small signals give sparse, weakly
/// informative rows.
fn sample(spec: &SbmSpec, seed: u64) -> Result<Graph> {
    let SbmSpec {
        ref blocks,
        p_in,
        p_out,
        feature_dim: d,
        density,
        signal,
        noise,
    } = *spec;
    if blocks.is_empty() || blocks.contains(&0) {
        return Err(Error::InvalidGraph("block sizes must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_in <= p_out {
        return Err(Error::InvalidGraph(format!(
            "need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidGraph(format!("invalid noise level {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = blocks
        .iter()
        .enumerate()
        .flat_map(|(c, &size)| std::iter::repeat_n(c, size))
        .collect();
    let n = labels.len();

    let prototypes: Vec<Vec<f64>> = blocks
        .iter()
        .map(|_| {
            (0..d)
                .map(|_| if rng.random_bool(density) { signal } else { 0.0 })
                .collect()
        })
        .collect();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let gauss = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let mut x = Tensor::zeros(n, d);
    for (v, &c) in labels.iter().enumerate() {
        for (j, &mu) in prototypes[c].iter().enumerate() {
            let eps = if noise > 0.0 { gauss.sample(&mut rng) } else { 0.0 };
            x.set(v, j, if mu + eps > 0.5 { 1.0 } else { 0.0 });
        }
    }

    Graph::new(Csr::from_edges(n, edges)?, x, labels, blocks.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_block_ids() {
        let g = generate_sbm(&[3, 2], 0.5, 0.1, 4, 0.2, 1).unwrap();
        assert_eq!(g.labels(), &[0, 0, 0, 1, 1]);
        assert_eq!(g.n_classes(), 2);
    }

    #[test]
    fn zero_p_out_has_no_cross_edges() {
        let g = generate_sbm(&[30, 30], 0.3, 0.0, 4, 0.5, 7).unwrap();
        assert!(g.adjacency().edges().all(|(u, v)| g.labels()[u] == g.labels()[v]));
    }

    #[test]
    fn zero_noise_gives_identical_class_rows() {
        let g = generate_sbm(&[10, 10], 0.3, 0.05, 16, 0.0, 2).unwrap();
        for v in 1..10 {
            assert_eq!(g.features().row(v), g.features().row(0));
        }
        assert!(g.features().data().iter().all(|&x| x == 0.0 || x == 1.0));
    }

    #[test]
    fn expected_within_class_degree() {
        // E[within-class degree] = p_in * (n_c - 1) = 0.1 * 99 = 9.9
        let expected = 0.1 * 99.0;
        for seed in 0..10 {
            let g = generate_sbm(&[100, 100], 0.1, 0.005, 8, 0.3, seed).unwrap();
            let within: usize = (0..200)
                .map(|v| {
                    g.neighbors(v)
                        .iter()
                        .filter(|&&u| g.labels()[u] == g.labels()[v])
                        .count()
                })
                .sum();
            let mean = within as f64 / 200.0;
            assert!((mean - expected).abs() <= 0.2 * expected, "seed {seed}: {mean}");
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(generate_sbm(&[5, 5], 0.1, 0.2, 4, 0.1, 0).is_err());
        assert!(generate_sbm(&[5, 0], 0.3, 0.1, 4, 0.1, 0).is_err());
    }
}
