use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Csr, Graph};

/// A single edge flip, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeOp {
    Add(usize, usize),
    Remove(usize, usize),
}

impl EdgeOp {
    pub fn add(u: usize, v: usize) -> Self {
        EdgeOp::Add(u.min(v), u.max(v))
    }

    pub fn remove(u: usize, v: usize) -> Self {
        EdgeOp::Remove(u.min(v), u.max(v))
    }

    pub fn pair(self) -> (usize, usize) {
        match self {
            EdgeOp::Add(u, v) | EdgeOp::Remove(u, v) => (u, v),
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            EdgeOp::Add(u, v) => EdgeOp::Remove(u, v),
            EdgeOp::Remove(u, v) => EdgeOp::Add(u, v),
        }
    }

    pub fn touches(self, node: usize) -> bool {
        let (u, v) = self.pair();
        u == node || v == node
    }
}

impl fmt::Display for EdgeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeOp::Add(u, v) => write!(f, "ADD({u}, {v})"),
            EdgeOp::Remove(u, v) => write!(f, "DEL({u}, {v})"),
        }
    }
}

/// Ordered edge flips aimed at one target node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub target: usize,
    pub ops: Vec<EdgeOp>,
    pub budget: usize,
    /// The attack ran out of useful or feasible flips before the budget.
    pub truncated: bool,
    /// Steps where a gradient attack fell back to a random flip.
    pub fallback_steps: usize,
}

impl Perturbation {
    pub fn empty(target: usize, budget: usize) -> Self {
        Self {
            target,
            ops: Vec::new(),
            budget,
            truncated: false,
            fallback_steps: 0,
        }
    }

    /// Budget law and no pair flipped twice (which also rules out undoing
    /// an earlier flip).
    pub fn check(&self) -> Result<()> {
        if self.ops.len() > self.budget {
            return Err(Error::Other(format!(
                "{} ops exceed budget {}",
                self.ops.len(),
                self.budget
            )));
        }
        let mut seen = HashSet::new();
        for (i, op) in self.ops.iter().enumerate() {
            let (u, v) = op.pair();
            if u == v {
                return Err(Error::IllegalOp {
                    index: i,
                    op: op.to_string(),
                });
            }
            if !seen.insert(op.pair()) {
                return Err(Error::IllegalOp {
                    index: i,
                    op: format!("{op} flips an already flipped pair"),
                });
            }
        }
        Ok(())
    }

    /// First `k` ops as a new perturbation.
    pub fn prefix(&self, k: usize) -> Perturbation {
        Perturbation {
            target: self.target,
            ops: self.ops[..k.min(self.ops.len())].to_vec(),
            budget: k,
            truncated: self.truncated && k >= self.ops.len(),
            fallback_steps: self.fallback_steps,
        }
    }

    /// Ops that undo this perturbation, in reverse order.
    pub fn inverse(&self) -> Perturbation {
        Perturbation {
            target: self.target,
            ops: self.ops.iter().rev().map(|op| op.inverse()).collect(),
            budget: self.ops.len(),
            truncated: false,
            fallback_steps: 0,
        }
    }
}

/// Mutable adjacency lists used while an attack searches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkingGraph {
    lists: Vec<Vec<usize>>,
}

impl WorkingGraph {
    pub fn from_graph(g: &Graph) -> Self {
        Self {
            lists: g.adjacency().to_lists(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.lists.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.lists[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.lists[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.lists[u].binary_search(&v).is_ok()
    }

    /// Op that flips `(u, v)` in the current state.
    pub fn flip_op(&self, u: usize, v: usize) -> EdgeOp {
        if self.has_edge(u, v) {
            EdgeOp::remove(u, v)
        } else {
            EdgeOp::add(u, v)
        }
    }

    /// Whether `op` is applicable: adds need an absent edge, removals a
    /// present one.
    pub fn is_applicable(&self, op: EdgeOp) -> bool {
        let (u, v) = op.pair();
        if u == v || v >= self.node_count() {
            return false;
        }
        match op {
            EdgeOp::Add(..) => !self.has_edge(u, v),
            EdgeOp::Remove(..) => self.has_edge(u, v),
        }
    }

    /// Attacks additionally refuse removals that would leave a node
    /// without neighbors.
    pub fn keeps_nodes_connected(&self, op: EdgeOp) -> bool {
        match op {
            EdgeOp::Add(..) => true,
            EdgeOp::Remove(u, v) => self.degree(u) > 1 && self.degree(v) > 1,
        }
    }

    pub fn apply(&mut self, op: EdgeOp) -> bool {
        if !self.is_applicable(op) {
            return false;
        }
        let (u, v) = op.pair();
        match op {
            EdgeOp::Add(..) => {
                let i = self.lists[u].binary_search(&v).unwrap_err();
                self.lists[u].insert(i, v);
                let j = self.lists[v].binary_search(&u).unwrap_err();
                self.lists[v].insert(j, u);
            }
            EdgeOp::Remove(..) => {
                let i = self.lists[u].binary_search(&v).unwrap();
                self.lists[u].remove(i);
                let j = self.lists[v].binary_search(&u).unwrap();
                self.lists[v].remove(j);
            }
        }
        true
    }

    pub fn to_csr(&self) -> Csr {
        Csr::from_lists(self.lists.clone())
    }
}

/// Applies `ops` in order to a copy of `g`. Node count, features and
/// labels are unchanged.
pub fn apply_ops(g: &Graph, ops: &[EdgeOp]) -> Result<Graph> {
    let mut work = WorkingGraph::from_graph(g);
    for (index, &op) in ops.iter().enumerate() {
        if !work.apply(op) {
            return Err(Error::IllegalOp {
                index,
                op: op.to_string(),
            });
        }
    }
    g.with_adjacency(work.to_csr())
}

pub fn apply(g: &Graph, p: &Perturbation) -> Result<Graph> {
    apply_ops(g, &p.ops)
}

/// Writes `target<TAB>ADD|DEL<TAB>u<TAB>v` lines.
pub fn write_trace(path: &Path, perturbations: &[Perturbation]) -> Result<()> {
    let mut out = Vec::new();
    for p in perturbations {
        for op in &p.ops {
            let (kind, (u, v)) = match op {
                EdgeOp::Add(..) => ("ADD", op.pair()),
                EdgeOp::Remove(..) => ("DEL", op.pair()),
            };
            writeln!(out, "{}\t{kind}\t{u}\t{v}", p.target).expect("in-memory write");
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a trace back, grouping consecutive lines by target.
pub fn read_trace(path: &Path) -> Result<Vec<Perturbation>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out: Vec<Perturbation> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let perr = |m: &str| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: m.to_string(),
        };
        let toks: Vec<&str> = line.split('\t').collect();
        if toks.len() != 4 {
            return Err(perr("expected target<TAB>ADD|DEL<TAB>u<TAB>v"));
        }
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| perr("invalid node id"));
        let (target, u, v) = (num(toks[0])?, num(toks[2])?, num(toks[3])?);
        let op = match toks[1] {
            "ADD" => EdgeOp::add(u, v),
            "DEL" => EdgeOp::remove(u, v),
            _ => return Err(perr("op must be ADD or DEL")),
        };
        match out.last_mut() {
            Some(p) if p.target == target => {
                p.ops.push(op);
                p.budget += 1;
            }
            _ => out.push(Perturbation {
                target,
                ops: vec![op],
                budget: 1,
                truncated: false,
                fallback_steps: 0,
            }),
        }
    }
    Ok(out)
}
