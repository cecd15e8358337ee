use std::sync::Arc;

use rand::Rng;
use streamlearn::learners::{HoeffdingTree, HtConfig, LeafPrediction, SplitTest, TreeEvent};
use streamlearn::{rng, AttributeSpec, Schema, Task};

const BINS: usize = 10;
const MIN_BRANCH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub at: u64,
    pub depth: usize,
    pub attribute: usize,
    /// `None` for a multiway nominal split.
    pub threshold: Option<f64>,
}

enum Node {
    Leaf(Vec<(Vec<f64>, usize)>),
    Split {
        attribute: usize,
        threshold: Option<f64>,
        children: Vec<Node>,
    },
}

/// Brute-force Hoeffding tree: leaves keep their raw rows and every split
/// evaluation recomputes all statistics from them.
pub struct OracleTree {
    rule: Rule,
    root: Node,
    seen: u64,
    pub decisions: Vec<Decision>,
}

fn entropy_bits(dist: &[f64]) -> f64 {
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    dist.iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

fn gain(pre: &[f64], post: &[Vec<f64>]) -> f64 {
    let weights: Vec<f64> = post.iter().map(|d| d.iter().sum()).collect();
    let total: f64 = weights.iter().sum();
    let big = weights.iter().filter(|&&w| w / total > MIN_BRANCH).count();
    if big < 2 {
        return f64::NEG_INFINITY;
    }
    let mut after = 0.0;
    for (d, w) in post.iter().zip(&weights) {
        after += w / total * entropy_bits(d);
    }
    entropy_bits(pre) - after
}

fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / 2f64.sqrt())
}

struct ClassColumn {
    n: f64,
    mean: f64,
    sd: f64,
    min: f64,
    max: f64,
}

impl ClassColumn {
    fn from_values(v: &[f64]) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Self {
            n,
            mean,
            sd: var.sqrt(),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    fn below(&self, t: f64) -> f64 {
        if t < self.min {
            0.0
        } else if t >= self.max {
            self.n
        } else if self.sd > 0.0 {
            self.n * phi((t - self.mean) / self.sd)
        } else if t >= self.mean {
            self.n
        } else {
            0.0
        }
    }
}

struct Rule {
    /// Cardinality per attribute; 0 for numeric.
    kinds: Vec<usize>,
    classes: usize,
    grace: usize,
    delta: f64,
    tie: f64,
}

impl Rule {
    /// Best (merit, threshold) for one attribute, or `None` when the
    /// attribute offers no candidate.
    fn attribute_merit(&self, rows: &[(Vec<f64>, usize)], a: usize, pre: &[f64]) -> Option<(f64, Option<f64>)> {
        if self.kinds[a] > 0 {
            let mut post = vec![vec![0.0; self.classes]; self.kinds[a]];
            for (x, y) in rows {
                post[x[a] as usize][*y] += 1.0;
            }
            return Some((gain(pre, &post), None));
        }
        let columns: Vec<Option<ClassColumn>> = (0..self.classes)
            .map(|c| {
                let v: Vec<f64> = rows.iter().filter(|r| r.1 == c).map(|r| r.0[a]).collect();
                ClassColumn::from_values(&v)
            })
            .collect();
        let lo = columns.iter().flatten().map(|c| c.min).fold(f64::INFINITY, f64::min);
        let hi = columns.iter().flatten().map(|c| c.max).fold(f64::NEG_INFINITY, f64::max);
        if !(lo < hi) {
            return None;
        }
        let mut best: Option<(f64, Option<f64>)> = None;
        for i in 1..=BINS {
            let t = lo + (hi - lo) * i as f64 / (BINS as f64 + 1.0);
            let mut left = vec![0.0; self.classes];
            let mut right = vec![0.0; self.classes];
            for (c, col) in columns.iter().enumerate() {
                if let Some(col) = col {
                    left[c] = col.below(t);
                    right[c] = col.n - left[c];
                }
            }
            let g = gain(pre, &[left, right]);
            if best.is_none_or(|(b, _)| g > b) {
                best = Some((g, Some(t)));
            }
        }
        best
    }

    fn evaluate(&self, rows: &[(Vec<f64>, usize)]) -> Option<(usize, Option<f64>)> {
        let mut pre = vec![0.0; self.classes];
        for (_, y) in rows {
            pre[*y] += 1.0;
        }
        if pre.iter().filter(|&&c| c > 0.0).count() < 2 {
            return None;
        }
        let merits: Vec<(usize, f64, Option<f64>)> = (0..self.kinds.len())
            .filter_map(|a| self.attribute_merit(rows, a, &pre).map(|(g, t)| (a, g, t)))
            .collect();
        let mut best = 0;
        for (i, m) in merits.iter().enumerate() {
            if m.1 > merits[best].1 {
                best = i;
            }
        }
        let (attribute, top, threshold) = *merits.get(best)?;
        if !(top > 0.0) {
            return None;
        }
        let runner_up = merits
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != best)
            .map(|(_, m)| m.1)
            .fold(0.0, f64::max);
        let range = (self.classes as f64).log2();
        let n = rows.len() as f64;
        let eps = (range * range * (1.0 / self.delta).ln() / (2.0 * n)).sqrt();
        (top - runner_up > eps || eps < self.tie).then_some((attribute, threshold))
    }
}

impl OracleTree {
    pub fn new(kinds: Vec<usize>, classes: usize, grace: usize, delta: f64, tie: f64) -> Self {
        Self {
            rule: Rule {
                kinds,
                classes,
                grace,
                delta,
                tie,
            },
            root: Node::Leaf(Vec::new()),
            seen: 0,
            decisions: Vec::new(),
        }
    }

    pub fn learn(&mut self, x: &[f64], y: usize) {
        let Self {
            rule,
            root,
            seen,
            decisions,
        } = self;
        *seen += 1;
        let at = *seen;
        let mut node = root;
        let mut depth = 0;
        while let Node::Split {
            attribute,
            threshold,
            children,
        } = node
        {
            let b = match threshold {
                Some(t) => usize::from(x[*attribute] > *t),
                None => x[*attribute] as usize,
            };
            node = &mut children[b];
            depth += 1;
        }
        let Node::Leaf(rows) = node else { unreachable!() };
        rows.push((x.to_vec(), y));
        if rows.len() % rule.grace != 0 {
            return;
        }
        let rows = std::mem::take(rows);
        let split = rule.evaluate(&rows);
        *node = match split {
            None => Node::Leaf(rows),
            Some((attribute, threshold)) => {
                decisions.push(Decision {
                    at,
                    depth,
                    attribute,
                    threshold,
                });
                let branches = threshold.map_or(rule.kinds[attribute], |_| 2);
                Node::Split {
                    attribute,
                    threshold,
                    children: (0..branches).map(|_| Node::Leaf(Vec::new())).collect(),
                }
            }
        };
    }
}

pub fn decisions_of(tree: &HoeffdingTree) -> Vec<Decision> {
    tree.events()
        .iter()
        .filter_map(|e| match *e {
            TreeEvent::Split { at, depth, test } => Some(match test {
                SplitTest::Numeric { attribute, threshold } => Decision {
                    at,
                    depth,
                    attribute,
                    threshold: Some(threshold),
                },
                SplitTest::Nominal { attribute } => Decision {
                    at,
                    depth,
                    attribute,
                    threshold: None,
                },
            }),
            TreeEvent::Revision { .. } => None,
        })
        .collect()
}

pub fn schema(kinds: &[usize], classes: usize) -> Arc<Schema> {
    let attrs = kinds
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            if k == 0 {
                AttributeSpec::numeric(format!("x{i}"))
            } else {
                AttributeSpec::nominal(format!("x{i}"), (0..k).map(|v| format!("v{v}"))).unwrap()
            }
        })
        .collect();
    let target = AttributeSpec::nominal("class", (0..classes).map(|c| format!("c{c}"))).unwrap();
    Arc::new(Schema::new(attrs, target, Task::Classification).unwrap())
}

/// Mixed numeric/nominal concept with three classes and 5% label noise.
pub fn mixed_sample(seed: u64, n: usize) -> Vec<(Vec<f64>, usize)> {
    let mut r = rng::seeded(seed);
    (0..n)
        .map(|_| {
            let a = r.random::<f64>();
            let b = r.random::<f64>() * 4.0;
            let c = r.random_range(0..3) as f64;
            let d = (r.random::<f64>() * 5.0).floor();
            let mut y = if c == 2.0 {
                2
            } else if a + 0.1 * b > 0.6 {
                1
            } else {
                0
            };
            if r.random::<f64>() < 0.05 {
                y = r.random_range(0..3);
            }
            (vec![a, b, c, d], y)
        })
        .collect()
}

/// Two-class oblique boundary over four numeric attributes.
pub fn oblique_sample(seed: u64, n: usize) -> Vec<(Vec<f64>, usize)> {
    let mut r = rng::seeded(seed);
    let w = [0.4, 0.3, 0.2, 0.1];
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..4).map(|_| r.random::<f64>()).collect();
            let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
            let mut y = usize::from(s > 0.5);
            if r.random::<f64>() < 0.1 {
                y = 1 - y;
            }
            (x, y)
        })
        .collect()
}

/// Trains the tree and the oracle on `data` and compares every split
/// decision. Returns the number of splits compared.
pub fn compare(
    kinds: &[usize],
    classes: usize,
    data: &[(Vec<f64>, usize)],
    grace: usize,
    delta: f64,
    tie: f64,
) -> Result<usize, String> {
    let cfg = HtConfig {
        grace_period: grace as f64,
        split_confidence: delta,
        tie_threshold: tie,
        leaf_prediction: LeafPrediction::MajorityClass,
        ..HtConfig::default()
    };
    let mut tree = HoeffdingTree::new(cfg, schema(kinds, classes)).map_err(|e| e.to_string())?;
    let mut oracle = OracleTree::new(kinds.to_vec(), classes, grace, delta, tie);
    for (x, y) in data {
        tree.learn(x, *y, 1.0);
        oracle.learn(x, *y);
    }
    let got = decisions_of(&tree);
    let want = &oracle.decisions;
    if got.len() != want.len() {
        return Err(format!("split count: got {got:?}, want {want:?}"));
    }
    for (g, w) in got.iter().zip(want) {
        let same_threshold = match (g.threshold, w.threshold) {
            (Some(a), Some(b)) => (a - b).abs() < 1e-9,
            (None, None) => true,
            _ => false,
        };
        if (g.at, g.depth, g.attribute) != (w.at, w.depth, w.attribute) || !same_threshold {
            return Err(format!("got {g:?}, want {w:?}"));
        }
    }
    Ok(want.len())
}

/// Mixed numeric/nominal attributes, three classes.
pub fn mixed_suite() -> Result<usize, String> {
    let kinds = [0, 0, 3, 0];
    let mut splits = 0;
    for seed in 1..=6 {
        let data = mixed_sample(seed, 2000);
        splits += compare(&kinds, 3, &data, 50, 0.01, 0.05)?;
        splits += compare(&kinds, 3, &data, 100, 1e-4, 0.05)?;
    }
    if splits < 20 {
        return Err(format!("only {splits} splits exercised"));
    }
    Ok(splits)
}

/// Oblique two-class boundary over four numeric attributes.
pub fn oblique_suite() -> Result<usize, String> {
    let kinds = [0; 4];
    let mut splits = 0;
    for seed in 10..16 {
        let data = oblique_sample(seed, 2000);
        splits += compare(&kinds, 2, &data, 40, 0.05, 0.05)?;
        splits += compare(&kinds, 2, &data, 200, 1e-7, 0.05)?;
    }
    if splits < 20 {
        return Err(format!("only {splits} splits exercised"));
    }
    Ok(splits)
}

/// Two identical attributes: splits can only happen through the tie rule.
pub fn tie_suite() -> Result<usize, String> {
    let mut r = rng::seeded(77);
    let data: Vec<(Vec<f64>, usize)> = (0..2000)
        .map(|_| {
            let a = r.random::<f64>();
            (vec![a, a], usize::from(a > 0.5))
        })
        .collect();
    let splits = compare(&[0, 0], 2, &data, 100, 0.01, 0.2)?;
    if splits == 0 {
        return Err("the tie rule never split".into());
    }
    Ok(splits)
}

pub fn all_suites() -> Result<usize, String> {
    Ok(mixed_suite()? + oblique_suite()? + tie_suite()?)
}
