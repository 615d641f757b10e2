//! Regression trees grown by exact greedy search over presorted features.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;

/// Regularized gain of splitting a node into left/right children:
///
/// ```text
/// ½ [G_L²/(H_L+λ) + G_R²/(H_R+λ) − (G_L+G_R)²/(H_L+H_R+λ)] − γ
/// ```
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    split_gain_l1(gl, hl, gr, hr, lambda, 0.0, gamma)
}

/// [`split_gain`] with gradient sums soft-thresholded by the L1 penalty, so
/// gains stay consistent with [`leaf_weight`] when `alpha > 0`.
pub fn split_gain_l1(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, alpha: f64, gamma: f64) -> f64 {
    0.5 * (score(gl, hl, lambda, alpha) + score(gr, hr, lambda, alpha)
        - score(gl + gr, hl + hr, lambda, alpha))
        - gamma
}

fn soft_threshold(g: f64, alpha: f64) -> f64 {
    g.signum() * (g.abs() - alpha).max(0.0)
}

fn score(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let d = h + lambda;
    if d > 0.0 {
        let t = soft_threshold(g, alpha);
        t * t / d
    } else {
        0.0
    }
}

/// Optimal leaf value `−soft(G, α)/(H + λ)`, before learning-rate scaling.
pub fn leaf_weight(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let d = h + lambda;
    if d > 0.0 {
        -soft_threshold(g, alpha) / d
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        /// Rows with `x < threshold` go left.
        threshold: f64,
        /// Direction for rows whose feature value is missing.
        default_left: bool,
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// Binary tree stored as an arena; the root is `nodes[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "NodeRecord", try_from = "NodeRecord")]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(weight: f64) -> Tree {
        Tree {
            nodes: vec![Node::Leaf { weight }],
        }
    }

    /// Builds a tree from an arena; children must point inside it.
    pub fn from_nodes(nodes: Vec<Node>) -> Tree {
        Tree { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Output for one row; `value(f)` returns feature `f` (`NaN` if missing).
    pub fn predict_with(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight } => return *weight,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let x = value(*feature);
                    let go_left = if x.is_nan() { *default_left } else { x < *threshold };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_row(&self, x: &DenseMatrix, row: usize) -> f64 {
        self.predict_with(|f| x.get(row, f))
    }

    /// Grows a tree on every row and feature of `x`.
    pub fn fit(x: &DenseMatrix, grad: &[f64], hess: &[f64], params: &TreeParams) -> Tree {
        let presorted = x.presort();
        let rows: Vec<u32> = (0..x.n_rows() as u32).collect();
        let features: Vec<usize> = (0..x.n_cols()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        grow(x, &presorted, &rows, grad, hess, &features, params, &mut rng)
    }
}

/// Per-tree growth controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Learning rate folded into the stored leaf weights.
    pub eta: f64,
    pub colsample_bylevel: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 6,
            lambda: 1.0,
            alpha: 0.0,
            gamma: 0.0,
            eta: 1.0,
            colsample_bylevel: 1.0,
        }
    }
}

/// Gains at or below this are treated as no improvement (absorbs round-off).
const MIN_GAIN: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
struct Candidate {
    feature: usize,
    threshold: f64,
    default_left: bool,
    gain: f64,
}

struct Pending {
    node: usize,
    rows: Vec<u32>,
    /// Non-missing rows of this node sorted by value, one list per tree feature.
    sorted: Vec<Vec<u32>>,
    g: f64,
    h: f64,
}

pub(crate) fn sample_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n.max(1))
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m > a {
        m
    } else {
        b
    }
}

/// Best split of one feature. `sorted` holds the node's non-missing rows in
/// ascending feature order.
#[allow(clippy::too_many_arguments)]
fn best_split_for_feature(
    x: &DenseMatrix,
    feature: usize,
    sorted: &[u32],
    g_node: f64,
    h_node: f64,
    n_node: usize,
    grad: &[f64],
    hess: &[f64],
    params: &TreeParams,
) -> Option<Candidate> {
    if sorted.len() < 2 {
        return None;
    }
    let (mut g_present, mut h_present) = (0.0, 0.0);
    for &r in sorted {
        g_present += grad[r as usize];
        h_present += hess[r as usize];
    }
    let has_missing = sorted.len() < n_node;
    let (g_miss, h_miss) = if has_missing {
        (g_node - g_present, h_node - h_present)
    } else {
        (0.0, 0.0)
    };
    let col = x.column(feature);
    let gain = |gl, hl, gr, hr| split_gain_l1(gl, hl, gr, hr, params.lambda, params.alpha, params.gamma);

    let mut best: Option<Candidate> = None;
    let (mut gl, mut hl) = (0.0, 0.0);
    for w in sorted.windows(2) {
        let (r, next) = (w[0] as usize, w[1] as usize);
        gl += grad[r];
        hl += hess[r];
        let (v, v_next) = (col[r], col[next]);
        if v == v_next {
            continue;
        }
        let (gr, hr) = (g_present - gl, h_present - hl);
        let (gain, default_left) = if has_missing {
            let left = gain(gl + g_miss, hl + h_miss, gr, hr);
            let right = gain(gl, hl, gr + g_miss, hr + h_miss);
            if left >= right {
                (left, true)
            } else {
                (right, false)
            }
        } else {
            (gain(gl, hl, gr, hr), true)
        };
        if best.is_none_or(|b| gain > b.gain) {
            best = Some(Candidate {
                feature,
                threshold: midpoint(v, v_next),
                default_left,
                gain,
            });
        }
    }
    best
}

/// Grows one tree. `rows` are the (sub)sampled training rows, `features` the
/// tree-level column sample; `presorted` holds every feature's non-missing
/// rows in ascending order.
#[allow(clippy::too_many_arguments)]
pub(crate) fn grow<R: Rng>(
    x: &DenseMatrix,
    presorted: &[Vec<u32>],
    rows: &[u32],
    grad: &[f64],
    hess: &[f64],
    features: &[usize],
    params: &TreeParams,
    rng: &mut R,
) -> Tree {
    let mut in_sample = vec![false; x.n_rows()];
    for &r in rows {
        in_sample[r as usize] = true;
    }
    let sorted = features
        .iter()
        .map(|&f| presorted[f].iter().copied().filter(|&r| in_sample[r as usize]).collect())
        .collect();
    let (g, h) = rows.iter().fold((0.0, 0.0), |(g, h), &r| (g + grad[r as usize], h + hess[r as usize]));

    let mut nodes = vec![Node::Leaf { weight: 0.0 }];
    let mut level = vec![Pending {
        node: 0,
        rows: rows.to_vec(),
        sorted,
        g,
        h,
    }];
    let mut goes_left = vec![false; x.n_rows()];
    let leaf = |p: &Pending| Node::Leaf {
        weight: params.eta * leaf_weight(p.g, p.h, params.lambda, params.alpha),
    };

    for _depth in 0..params.max_depth {
        if level.is_empty() {
            break;
        }
        // positions into `features` considered at this depth
        let mut active: Vec<usize> = if params.colsample_bylevel < 1.0 {
            index::sample(rng, features.len(), sample_count(params.colsample_bylevel, features.len())).into_vec()
        } else {
            (0..features.len()).collect()
        };
        active.sort_unstable();

        let mut next = Vec::new();
        for p in level {
            let search = |&j: &usize| {
                best_split_for_feature(x, features[j], &p.sorted[j], p.g, p.h, p.rows.len(), grad, hess, params)
            };
            let candidates: Vec<Option<Candidate>> = if p.rows.len() * active.len() >= 8192 {
                active.par_iter().map(search).collect()
            } else {
                active.iter().map(search).collect()
            };
            let best = candidates
                .into_iter()
                .flatten()
                .fold(None::<Candidate>, |acc, c| match acc {
                    Some(b) if b.gain >= c.gain => Some(b),
                    _ => Some(c),
                });
            let Some(split) = best.filter(|c| c.gain > MIN_GAIN) else {
                nodes[p.node] = leaf(&p);
                continue;
            };

            let col = x.column(split.feature);
            for &r in &p.rows {
                let v = col[r as usize];
                goes_left[r as usize] = if v.is_nan() { split.default_left } else { v < split.threshold };
            }
            let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
                p.rows.iter().partition(|&&r| goes_left[r as usize]);
            let mut left_sorted = Vec::with_capacity(p.sorted.len());
            let mut right_sorted = Vec::with_capacity(p.sorted.len());
            for list in p.sorted {
                let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&r| goes_left[r as usize]);
                left_sorted.push(l);
                right_sorted.push(r);
            }
            let sums = |rs: &[u32]| rs.iter().fold((0.0, 0.0), |(g, h), &r| (g + grad[r as usize], h + hess[r as usize]));
            let (gl, hl) = sums(&left_rows);
            let (gr, hr) = sums(&right_rows);

            let (li, ri) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf { weight: 0.0 });
            nodes.push(Node::Leaf { weight: 0.0 });
            nodes[p.node] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                default_left: split.default_left,
                gain: split.gain,
                left: li,
                right: ri,
            };
            next.push(Pending { node: li, rows: left_rows, sorted: left_sorted, g: gl, h: hl });
            next.push(Pending { node: ri, rows: right_rows, sorted: right_sorted, g: gr, h: hr });
        }
        level = next;
    }
    for p in &level {
        nodes[p.node] = leaf(p);
    }
    Tree { nodes: preorder(&nodes) }
}

/// Renumbers the arena depth-first, left before right, the order a
/// deserialized tree has.
fn preorder(nodes: &[Node]) -> Vec<Node> {
    fn visit(nodes: &[Node], i: usize, out: &mut Vec<Node>) -> usize {
        let at = out.len();
        out.push(nodes[i].clone());
        if let Node::Split { left, right, .. } = nodes[i] {
            let l = visit(nodes, left, out);
            let r = visit(nodes, right, out);
            if let Node::Split { left, right, .. } = &mut out[at] {
                *left = l;
                *right = r;
            }
        }
        at
    }
    let mut out = Vec::with_capacity(nodes.len());
    visit(nodes, 0, &mut out);
    out
}

/// Nested, self-describing form of a tree used for serialization. Thresholds
/// are written with 17 significant digits so they parse back exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum NodeRecord {
    Split {
        feature: usize,
        threshold: String,
        default: Direction,
        gain: f64,
        left: Box<NodeRecord>,
        right: Box<NodeRecord>,
    },
    Leaf {
        leaf: f64,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub(crate) enum Direction {
    Left,
    Right,
}

fn to_record(nodes: &[Node], i: usize) -> NodeRecord {
    match &nodes[i] {
        Node::Leaf { weight } => NodeRecord::Leaf { leaf: *weight },
        Node::Split {
            feature,
            threshold,
            default_left,
            gain,
            left,
            right,
        } => NodeRecord::Split {
            feature: *feature,
            threshold: format!("{threshold:.16e}"),
            default: if *default_left { Direction::Left } else { Direction::Right },
            gain: *gain,
            left: Box::new(to_record(nodes, *left)),
            right: Box::new(to_record(nodes, *right)),
        },
    }
}

fn from_record(rec: NodeRecord, nodes: &mut Vec<Node>) -> Result<usize, String> {
    let i = nodes.len();
    nodes.push(Node::Leaf { weight: 0.0 });
    nodes[i] = match rec {
        NodeRecord::Leaf { leaf } => Node::Leaf { weight: leaf },
        NodeRecord::Split {
            feature,
            threshold,
            default,
            gain,
            left,
            right,
        } => {
            let threshold: f64 = threshold
                .parse()
                .map_err(|_| format!("bad threshold {threshold:?}"))?;
            let left = from_record(*left, nodes)?;
            let right = from_record(*right, nodes)?;
            Node::Split {
                feature,
                threshold,
                default_left: matches!(default, Direction::Left),
                gain,
                left,
                right,
            }
        }
    };
    Ok(i)
}

impl From<Tree> for NodeRecord {
    fn from(t: Tree) -> Self {
        to_record(&t.nodes, 0)
    }
}

impl TryFrom<NodeRecord> for Tree {
    type Error = String;

    fn try_from(rec: NodeRecord) -> Result<Self, String> {
        let mut nodes = Vec::new();
        from_record(rec, &mut nodes)?;
        Ok(Tree { nodes })
    }
}
