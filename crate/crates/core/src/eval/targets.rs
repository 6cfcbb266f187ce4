use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::argmax;
use crate::error::Result;
use crate::eval::margin::margin;
use crate::graph::SplitMasks;
use crate::kernel::Tensor;

/// Requested bucket sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetCounts {
    pub high: usize,
    pub low: usize,
    pub random: usize,
}

impl TargetCounts {
    /// 50/50/100 for test sets of 200 or more nodes, otherwise the same
    /// 1:1:2 split of the whole test set with at least 2 per bucket.
    pub fn scaled(test_size: usize) -> Self {
        let total = test_size.min(200);
        let high = (total / 4).max(2);
        Self {
            high,
            low: high,
            random: total.saturating_sub(2 * high).max(2),
        }
    }

    pub fn total(&self) -> usize {
        self.high + self.low + self.random
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    High,
    Low,
    Random,
}

impl Bucket {
    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::High => "high",
            Bucket::Low => "low",
            Bucket::Random => "random",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSet {
    pub high_conf: Vec<usize>,
    pub low_conf: Vec<usize>,
    pub random: Vec<usize>,
    /// Shortfalls against the requested counts.
    pub warnings: Vec<String>,
}

impl TargetSet {
    /// `(node, bucket)` for every target, high then low then random.
    pub fn all(&self) -> Vec<(usize, Bucket)> {
        let mut out = Vec::with_capacity(self.len());
        for (nodes, b) in [
            (&self.high_conf, Bucket::High),
            (&self.low_conf, Bucket::Low),
            (&self.random, Bucket::Random),
        ] {
            out.extend(nodes.iter().map(|&n| (n, b)));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.high_conf.len() + self.low_conf.len() + self.random.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Picks targets among the test nodes from clean class probabilities.
///
/// Correct test nodes are ranked by margin once (ties by node id): the
/// top `high` form the high-confidence bucket, the last `low` the
/// low-confidence one. `random` more are drawn uniformly from the rest
/// of the test set. With too few correct nodes the two ranked buckets
/// shrink in proportion and a warning is recorded.
pub fn select_targets(
    probs: &Tensor,
    labels: &[usize],
    masks: &SplitMasks,
    counts: TargetCounts,
    seed: u64,
) -> Result<TargetSet> {
    let mut warnings = Vec::new();
    let mut correct = Vec::new();
    for &v in masks.test() {
        let row = probs.row(v);
        if argmax(row) == labels[v] {
            let s = margin(row, labels[v])?;
            if s > 0.0 {
                correct.push((v, s));
            }
        }
    }
    correct.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let (mut high, mut low) = (counts.high, counts.low);
    if correct.len() < high + low {
        let want = high + low;
        high = (correct.len() * counts.high).checked_div(want).unwrap_or(0);
        low = correct.len() - high;
        warnings.push(format!(
            "only {} correctly classified test nodes; high/low buckets scaled from {}/{} to {high}/{low}",
            correct.len(),
            counts.high,
            counts.low
        ));
    }
    let high_conf: Vec<usize> = correct[..high].iter().map(|&(v, _)| v).collect();
    let low_conf: Vec<usize> = correct[correct.len() - low..].iter().map(|&(v, _)| v).collect();

    let mut rest: Vec<usize> = masks
        .test()
        .iter()
        .copied()
        .filter(|v| !high_conf.contains(v) && !low_conf.contains(v))
        .collect();
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    if rest.len() < counts.random {
        warnings.push(format!(
            "only {} test nodes left for the random bucket (wanted {})",
            rest.len(),
            counts.random
        ));
    }
    rest.truncate(counts.random);
    rest.sort_unstable();

    Ok(TargetSet {
        high_conf,
        low_conf,
        random: rest,
        warnings,
    })
}
