//! Undirected attributed graphs and their preprocessing.
//!
//! A [`Graph`] is immutable once built. Adjacency lives in a symmetric
//! [`Csr`] with sorted, duplicate-free neighbor lists and no self-loops;
//! features and labels are shared behind `Arc` so that perturbed copies
//! produced by attacks only allocate a new adjacency.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Tensor;

/// Symmetric compressed-sparse-row adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Csr {
    /// Builds the undirected adjacency of `n` nodes. Each pair is read in
    /// both directions; duplicates and self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                continue;
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        Ok(Self::from_lists(lists))
    }

    pub(crate) fn from_lists(mut lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in
    /// lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        (0..self.node_count())
            .map(|v| self.neighbors(v).to_vec())
            .collect()
    }

    /// Checks symmetry, index range and absence of self-loops/duplicates.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        for v in 0..n {
            let nb = self.neighbors(v);
            for w in nb.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidGraph(format!(
                        "neighbors of {v} not strictly sorted"
                    )));
                }
            }
            for &u in nb {
                if u >= n {
                    return Err(Error::InvalidGraph(format!("neighbor {u} of {v} out of range")));
                }
                if u == v {
                    return Err(Error::InvalidGraph(format!("self-loop at {v}")));
                }
                if !self.has_edge(u, v) {
                    return Err(Error::InvalidGraph(format!("edge ({v}, {u}) not symmetric")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Graph {
    adj: Arc<Csr>,
    features: Arc<Tensor>,
    labels: Arc<Vec<usize>>,
    n_classes: usize,
}

impl Graph {
    pub fn new(adj: Csr, features: Tensor, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let g = Self {
            adj: Arc::new(adj),
            features: Arc::new(features),
            labels: Arc::new(labels),
            n_classes,
        };
        g.validate()?;
        Ok(g)
    }

    /// Same nodes, features and labels over a different edge set.
    pub fn with_adjacency(&self, adj: Csr) -> Result<Self> {
        let g = Self {
            adj: Arc::new(adj),
            features: Arc::clone(&self.features),
            labels: Arc::clone(&self.labels),
            n_classes: self.n_classes,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.adj.node_count();
        self.adj.validate()?;
        if self.features.rows() != n {
            return Err(Error::InvalidGraph(format!(
                "feature matrix has {} rows for {n} nodes",
                self.features.rows()
            )));
        }
        if self.labels.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {n} nodes",
                self.labels.len()
            )));
        }
        if let Some((v, &y)) = self.labels.iter().enumerate().find(|(_, &y)| y >= self.n_classes) {
            return Err(Error::InvalidGraph(format!(
                "label {y} of node {v} out of range (classes = {})",
                self.n_classes
            )));
        }
        if !self.features.is_finite() {
            return Err(Error::InvalidGraph("non-finite features".into()));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.adj.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.edge_count()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn adjacency(&self) -> &Csr {
        &self.adj
    }

    pub fn adjacency_arc(&self) -> Arc<Csr> {
        Arc::clone(&self.adj)
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.adj.neighbors(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj.degree(v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.has_edge(u, v)
    }

    /// Induced subgraph on `keep` (must be sorted ascending); ids are
    /// remapped to positions in `keep`.
    pub fn induced(&self, keep: &[usize]) -> Result<Graph> {
        let mut remap = vec![usize::MAX; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let lists = keep
            .iter()
            .map(|&old| {
                self.neighbors(old)
                    .iter()
                    .filter_map(|&u| (remap[u] != usize::MAX).then_some(remap[u]))
                    .collect()
            })
            .collect();
        Graph::new(
            Csr::from_lists(lists),
            self.features.gather_rows(keep),
            keep.iter().map(|&v| self.labels[v]).collect(),
            self.n_classes,
        )
    }
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_id(path: &Path, line: usize, tok: &str, what: &str) -> Result<i64> {
    tok.parse::<i64>()
        .map_err(|_| parse_err(path, line, format!("invalid {what} `{tok}`")))
}

/// Loads a graph from an edge list, a label file and an optional feature
/// file. Node ids may be arbitrary non-negative integers; they are
/// remapped to `0..n` in ascending order. Without a feature file every
/// node gets a one-hot identity feature.
pub fn load_graph(
    edge_path: impl AsRef<Path>,
    feature_path: Option<&Path>,
    label_path: impl AsRef<Path>,
) -> Result<Graph> {
    load_graph_with_classes(edge_path, feature_path, label_path, None)
}

/// Like [`load_graph`], but rejects labels `>= n_classes` when a class
/// count is given.
pub fn load_graph_with_classes(
    edge_path: impl AsRef<Path>,
    feature_path: Option<&Path>,
    label_path: impl AsRef<Path>,
    n_classes: Option<usize>,
) -> Result<Graph> {
    let edge_path = edge_path.as_ref();
    let label_path = label_path.as_ref();

    let mut raw_edges = Vec::new();
    for (ln, line) in read_lines(edge_path)? {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(parse_err(edge_path, ln, "expected two node ids"));
        }
        let u = parse_id(edge_path, ln, toks[0], "node id")?;
        let v = parse_id(edge_path, ln, toks[1], "node id")?;
        if u < 0 || v < 0 {
            return Err(parse_err(edge_path, ln, "negative node id"));
        }
        raw_edges.push((u, v));
    }

    let mut raw_labels = BTreeMap::new();
    for (ln, line) in read_lines(label_path)? {
        let mut toks = line.split_whitespace();
        let (Some(id), Some(class)) = (toks.next(), toks.next()) else {
            return Err(parse_err(label_path, ln, "expected `node_id<TAB>class_id`"));
        };
        let id = parse_id(label_path, ln, id, "node id")?;
        let class = parse_id(label_path, ln, class, "class id")?;
        if class < 0 || n_classes.is_some_and(|y| class as usize >= y) {
            return Err(Error::InvalidGraph(format!(
                "{}:{ln}: label {class} out of range",
                label_path.display()
            )));
        }
        raw_labels.insert(id, class as usize);
    }

    let ids: BTreeSet<i64> = raw_edges
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .chain(raw_labels.keys().copied())
        .collect();
    let index: BTreeMap<i64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();

    let mut labels = vec![0; n];
    for (&id, &i) in &index {
        labels[i] = *raw_labels.get(&id).ok_or_else(|| {
            Error::InvalidGraph(format!("node {id} has no label in {}", label_path.display()))
        })?;
    }
    let y = n_classes.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));

    let features = match feature_path {
        None => Tensor::identity(n),
        Some(fp) => {
            let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
            let mut dim = None;
            for (ln, line) in read_lines(fp)? {
                let Some((id, values)) = line.split_once(char::is_whitespace) else {
                    return Err(parse_err(fp, ln, "expected `node_id<TAB>v1,v2,...`"));
                };
                let id = parse_id(fp, ln, id, "node id")?;
                let vals = values
                    .trim()
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| parse_err(fp, ln, format!("invalid value `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if *dim.get_or_insert(vals.len()) != vals.len() {
                    return Err(parse_err(fp, ln, "inconsistent feature dimension"));
                }
                if let Some(&i) = index.get(&id) {
                    rows[i] = Some(vals);
                }
            }
            let d = dim.unwrap_or(0);
            let mut data = Vec::with_capacity(n * d);
            for (i, row) in rows.into_iter().enumerate() {
                let row = row.ok_or_else(|| {
                    Error::InvalidGraph(format!("node {} has no features", ids.iter().nth(i).unwrap()))
                })?;
                data.extend(row);
            }
            Tensor::from_vec(n, d, data)?
        }
    };

    let adj = Csr::from_edges(n, raw_edges.iter().map(|(u, v)| (index[u], index[v])))?;
    Graph::new(adj, features, labels, y)
}

/// Connected components as sorted node lists, in order of their
/// smallest node id.
pub fn connected_components(adj: &Csr) -> Vec<Vec<usize>> {
    let n = adj.node_count();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in adj.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Keeps the largest connected component. Ties go to the component
/// containing the smallest node id; surviving ids keep their order.
pub fn largest_connected_component(g: &Graph) -> Result<Graph> {
    Ok(largest_connected_component_with_map(g)?.0)
}

/// [`largest_connected_component`] plus the original id of every kept node.
pub fn largest_connected_component_with_map(g: &Graph) -> Result<(Graph, Vec<usize>)> {
    if g.node_count() == 0 {
        return Err(Error::InvalidGraph("empty graph has no components".into()));
    }
    let mut best: Vec<usize> = Vec::new();
    for comp in connected_components(g.adjacency()) {
        if comp.len() > best.len() {
            best = comp;
        }
    }
    let sub = g.induced(&best)?;
    Ok((sub, best))
}

/// Train/validation/unlabeled node partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMasks {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub unlabeled: Vec<usize>,
}

impl SplitMasks {
    pub fn test(&self) -> &[usize] {
        &self.unlabeled
    }
}

/// Uniform random 80/20 labeled/unlabeled split, then a 50/50 split of the
/// labeled nodes into train and validation (odd counts round to train).
pub fn split_nodes(g: &Graph, seed: u64) -> Result<SplitMasks> {
    split_count(g.node_count(), seed)
}

pub(crate) fn split_count(n: usize, seed: u64) -> Result<SplitMasks> {
    if n < 5 {
        return Err(Error::InvalidGraph(format!(
            "cannot split {n} nodes (need at least 5)"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let labeled = (0.8 * n as f64).round() as usize;
    let n_train = labeled.div_ceil(2);
    let mut train = order[..n_train].to_vec();
    let mut val = order[n_train..labeled].to_vec();
    let mut unlabeled = order[labeled..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    unlabeled.sort_unstable();
    Ok(SplitMasks {
        train,
        val,
        unlabeled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::new(
            Csr::from_edges(n, edges.iter().copied()).unwrap(),
            Tensor::identity(n),
            vec![0; n],
            1,
        )
        .unwrap()
    }

    #[test]
    fn csr_dedups_and_symmetrizes() {
        let adj = Csr::from_edges(3, [(0, 1), (1, 0), (1, 2), (1, 1)]).unwrap();
        assert_eq!(adj.edge_count(), 2);
        assert_eq!(adj.neighbors(1), &[0, 2]);
        assert!(adj.has_edge(2, 1));
        adj.validate().unwrap();
    }

    #[test]
    fn out_of_range_edge_rejected() {
        assert!(Csr::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn label_out_of_range_rejected() {
        let adj = Csr::from_edges(2, [(0, 1)]).unwrap();
        assert!(Graph::new(adj, Tensor::identity(2), vec![0, 2], 2).is_err());
    }

    #[test]
    fn lcc_tie_prefers_smallest_id() {
        // triangles {0,1,2} and {3,4,5}, isolated 6
        let g = plain(7, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let (lcc, kept) = largest_connected_component_with_map(&g).unwrap();
        assert_eq!(kept, vec![0, 1, 2]);
        assert_eq!(lcc.edge_count(), 3);
    }

    #[test]
    fn lcc_path_beats_single_edge() {
        // edge {0,6} and path 1-2-3-4-5
        let g = plain(7, &[(0, 6), (1, 2), (2, 3), (3, 4), (4, 5)]);
        let (lcc, kept) = largest_connected_component_with_map(&g).unwrap();
        assert_eq!(kept, vec![1, 2, 3, 4, 5]);
        assert_eq!(lcc.edge_count(), 4);
        // brute-force component sizes by BFS
        let sizes: Vec<usize> = connected_components(g.adjacency()).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 5]);
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let g = plain(4, &[(0, 1), (1, 2), (2, 3)]);
        let lcc = largest_connected_component(&g).unwrap();
        assert_eq!(lcc.adjacency(), g.adjacency());
        assert_eq!(lcc.features(), g.features());
    }

    #[test]
    fn lcc_permutes_features_and_labels() {
        let adj = Csr::from_edges(4, [(1, 2), (2, 3)]).unwrap();
        let x = Tensor::from_rows(&[[0.0], [1.0], [2.0], [3.0]]);
        let g = Graph::new(adj, x, vec![0, 1, 0, 1], 2).unwrap();
        let lcc = largest_connected_component(&g).unwrap();
        assert_eq!(lcc.features().data(), &[1.0, 2.0, 3.0]);
        assert_eq!(lcc.labels(), &[1, 0, 1]);
    }

    #[test]
    fn empty_graph_lcc_errors() {
        let g = Graph::new(Csr::from_edges(0, []).unwrap(), Tensor::zeros(0, 0), vec![], 0).unwrap();
        assert!(largest_connected_component(&g).is_err());
    }

    #[test]
    fn split_sizes() {
        let s = split_count(10, 3).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.unlabeled.len()), (4, 4, 2));
        let cora = split_count(2810, 3).unwrap();
        assert_eq!(cora.unlabeled.len(), 562);
        assert_eq!(cora.train.len(), cora.val.len());
    }

    #[test]
    fn split_deterministic_and_seed_sensitive() {
        assert_eq!(split_count(50, 9).unwrap(), split_count(50, 9).unwrap());
        let a = split_count(50, 9).unwrap();
        let b = split_count(50, 10).unwrap();
        assert_ne!(a, b);
        assert_eq!(a.train.len(), b.train.len());
    }

    #[test]
    fn split_rejects_tiny_graphs() {
        assert!(split_count(4, 0).is_err());
    }
}
