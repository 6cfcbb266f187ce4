#![allow(dead_code)]

pub mod exhaustive;
pub mod kernel_cases;
pub mod model_cases;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use robust_gnn::encoder::{DimProfile, EncoderConfig, InterAgg, IntraAgg, Model, ModelParams};
use robust_gnn::{Csr, Graph, SplitMasks, Tensor};

pub const INTRA: [IntraAgg; 3] = [IntraAgg::Mean, IntraAgg::Sum, IntraAgg::Max];
pub const INTER: [InterAgg; 3] = [InterAgg::None, InterAgg::Skip, InterAgg::Dense];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    Tensor::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

/// Erdős–Rényi edges on `n` nodes.
pub fn random_edges(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Random graph with real-valued features and labels cycling through
/// `classes`.
pub fn random_graph(n: usize, p: f64, d: usize, classes: usize, seed: u64) -> Graph {
    let mut r = rng(seed);
    let edges = random_edges(n, p, &mut r);
    let x = random_tensor(n, d, &mut r);
    Graph::new(
        Csr::from_edges(n, edges).unwrap(),
        x,
        (0..n).map(|v| v % classes).collect(),
        classes,
    )
    .unwrap()
}

/// Two triangles joined by the edge 2-3, labels 0 and 1 per triangle,
/// random features.
pub fn six_node(d: usize, seed: u64) -> Graph {
    let edges = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)];
    let x = random_tensor(6, d, &mut rng(seed));
    Graph::new(Csr::from_edges(6, edges).unwrap(), x, vec![0, 0, 0, 1, 1, 1], 2).unwrap()
}

pub fn six_node_masks() -> SplitMasks {
    SplitMasks {
        train: vec![0, 1, 4, 5],
        val: vec![2],
        unlabeled: vec![3],
    }
}

/// Three layers, two perceptron layers each, bottleneck 3.
pub fn tiny_encoder(intra: IntraAgg, inter: InterAgg) -> EncoderConfig {
    EncoderConfig {
        intra,
        inter,
        layers: 3,
        perceptron_depth: 2,
        profile: DimProfile::Low,
        bottleneck_dim: Some(3),
        hidden_dims: None,
    }
}

/// Central differences of `f` at `params`, coordinate by coordinate.
pub fn numeric_gradient(f: impl Fn(&[Tensor]) -> f64, params: &[Tensor], h: f64) -> Vec<Tensor> {
    let mut work = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let mut g = Tensor::zeros(params[i].rows(), params[i].cols());
        for k in 0..params[i].data().len() {
            let orig = work[i].data()[k];
            work[i].data_mut()[k] = orig + h;
            let plus = f(&work);
            work[i].data_mut()[k] = orig - h;
            let minus = f(&work);
            work[i].data_mut()[k] = orig;
            g.data_mut()[k] = (plus - minus) / (2.0 * h);
        }
        out.push(g);
    }
    out
}

/// Largest `|a − n| / max(|a|, |n|, floor)` over all coordinates.
pub fn max_rel_err(analytic: &[Tensor], numeric: &[Tensor], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .flat_map(|(a, n)| a.data().iter().zip(n.data()))
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

pub fn variant(intra: IntraAgg, inter: InterAgg, bottleneck: usize) -> EncoderConfig {
    EncoderConfig {
        intra,
        inter,
        bottleneck_dim: Some(bottleneck),
        ..EncoderConfig::refined()
    }
}

/// Relabels node `v` as `perm[v]`.
pub fn permuted(g: &Graph, perm: &[usize]) -> Graph {
    let n = g.node_count();
    let edges = g.adjacency().edges().map(|(u, v)| (perm[u], perm[v]));
    let mut x = Tensor::zeros(n, g.feature_dim());
    let mut labels = vec![0; n];
    for v in 0..n {
        x.row_mut(perm[v]).copy_from_slice(g.features().row(v));
        labels[perm[v]] = g.labels()[v];
    }
    Graph::new(Csr::from_edges(n, edges).unwrap(), x, labels, g.n_classes()).unwrap()
}

/// A hub joined to `k` identical leaves, non-negative weights so no ReLU
/// is ever inactive.
pub fn hub_embedding(intra: IntraAgg, k: usize) -> Vec<f64> {
    let d = 6;
    let n = k + 1;
    let x = Tensor::filled(n, d, 1.0);
    let g = Graph::new(
        Csr::from_edges(n, (1..n).map(|u| (0, u))).unwrap(),
        x,
        vec![0; n],
        2,
    )
    .unwrap();
    let cfg = variant(intra, InterAgg::Dense, 3);
    let mut params = ModelParams::init(&cfg, d, 2, 9).unwrap();
    for t in params.iter_mut() {
        *t = t.map(f64::abs);
    }
    Model::new(cfg, params).forward(&g).unwrap().h.row(0).to_vec()
}

/// Uniform draw from the probability simplex (normalized exponentials).
pub fn simplex(c: usize, r: &mut impl Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..c).map(|_| Exp1.sample(r)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Sorts a copy and reads off the best competitor.
pub fn brute_margin(p: &[f64], y: usize) -> f64 {
    let mut others: Vec<f64> = p
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != y)
        .map(|(_, &x)| x)
        .collect();
    others.sort_by(|a, b| b.total_cmp(a));
    p[y] - others[0]
}
