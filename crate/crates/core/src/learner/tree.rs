use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Split quality measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
    Entropy,
    /// Entropy in natural-log units; picks the same splits as `Entropy`.
    LogLoss,
}

impl Criterion {
    fn impurity(self, pos: f64, total: f64) -> f64 {
        if total <= 0.0 {
            return 0.0;
        }
        let p = pos / total;
        let q = 1.0 - p;
        match self {
            Criterion::Gini => 1.0 - p * p - q * q,
            Criterion::Entropy | Criterion::LogLoss => {
                let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
                let bits = h(p) + h(q);
                if self == Criterion::LogLoss {
                    bits * std::f64::consts::LN_2
                } else {
                    bits
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Share of class-1 training samples reaching this leaf.
        value: f64,
        cover: f64,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
        cover: f64,
    },
}

impl Node {
    pub fn cover(&self) -> f64 {
        match self {
            Node::Leaf { cover, .. } | Node::Split { cover, .. } => *cover,
        }
    }
}

/// Binary classification tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    /// Features tried at each split; all when None.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub ccp_alpha: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            criterion: Criterion::Gini,
            max_depth: None,
            max_features: None,
            min_samples_split: 2,
            ccp_alpha: 0.0,
        }
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    params: TreeParams,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    /// Weighted impurity of every node, for pruning.
    impurity: Vec<f64>,
    n_features: usize,
}

impl Builder<'_> {
    fn leaf(&mut self, pos: f64, total: f64) -> usize {
        self.nodes.push(Node::Leaf { value: pos / total, cover: total });
        self.impurity.push(self.params.criterion.impurity(pos, total) * total);
        self.nodes.len() - 1
    }

    fn best_split(&mut self, rows: &[usize], pos: f64) -> Option<(usize, f64)> {
        let total = rows.len() as f64;
        let features: Vec<usize> = match self.params.max_features {
            Some(m) if m < self.n_features => {
                let mut f = sample(&mut self.rng, self.n_features, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.n_features).collect(),
        };
        let crit = self.params.criterion;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(rows.len());
        for f in features {
            pairs.clear();
            pairs.extend(rows.iter().map(|r| (self.x[*r][f], self.y[*r])));
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let (mut lp, mut ln) = (0.0, 0.0);
            for i in 0..pairs.len() - 1 {
                lp += pairs[i].1 as f64;
                ln += 1.0;
                if pairs[i].0 == pairs[i + 1].0 {
                    continue;
                }
                let rn = total - ln;
                let child = crit.impurity(lp, ln) * ln + crit.impurity(pos - lp, rn) * rn;
                if best.is_none_or(|b| child < b.0) {
                    best = Some((child, f, pairs[i].0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let total = rows.len() as f64;
        let pos: f64 = rows.iter().map(|r| self.y[*r] as f64).sum();
        let pure = pos == 0.0 || pos == total;
        let too_deep = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || too_deep || rows.len() < self.params.min_samples_split {
            return self.leaf(pos, total);
        }
        let Some((feature, threshold)) = self.best_split(&rows, pos) else {
            return self.leaf(pos, total);
        };
        let id = self.nodes.len();
        self.nodes.push(Node::Split { feature, threshold, left: 0, right: 0, cover: total });
        self.impurity.push(self.params.criterion.impurity(pos, total) * total);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|i| self.x[**i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        if let Node::Split { left: a, right: b, .. } = &mut self.nodes[id] {
            *a = left;
            *b = right;
        }
        id
    }
}

impl Tree {
    /// Fits on the given rows (duplicates act as weights). `y` is 0/1.
    pub fn fit(x: &[Vec<f64>], y: &[u8], rows: &[usize], params: TreeParams, seed: u64) -> Tree {
        let n_features = x.first().map_or(0, Vec::len);
        let mut b = Builder {
            x,
            y,
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            nodes: Vec::new(),
            impurity: Vec::new(),
            n_features,
        };
        b.grow(rows.to_vec(), 0);
        let mut tree = Tree { nodes: b.nodes };
        if params.ccp_alpha > 0.0 {
            tree.prune(&b.impurity, rows.len() as f64, params.ccp_alpha);
        }
        tree
    }

    /// Minimal cost-complexity pruning: collapse the weakest link while its
    /// effective alpha is at most `alpha`.
    fn prune(&mut self, impurity: &[f64], n: f64, alpha: f64) {
        loop {
            let mut weakest: Option<(f64, usize)> = None;
            for id in 0..self.nodes.len() {
                if !self.reachable(id) || matches!(self.nodes[id], Node::Leaf { .. }) {
                    continue;
                }
                let (leaf_risk, leaves) = self.subtree_risk(id, impurity);
                let g = (impurity[id] - leaf_risk) / n / (leaves as f64 - 1.0);
                if weakest.is_none_or(|w| g < w.0) {
                    weakest = Some((g, id));
                }
            }
            match weakest {
                Some((g, id)) if g <= alpha => {
                    let (pos, cover) = self.class_mass(id);
                    self.nodes[id] = Node::Leaf { value: pos / cover, cover };
                }
                _ => break,
            }
        }
        self.compact();
    }

    fn reachable(&self, target: usize) -> bool {
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            if id == target {
                return true;
            }
            if let Node::Split { left, right, .. } = self.nodes[id] {
                stack.push(left);
                stack.push(right);
            }
        }
        false
    }

    fn subtree_risk(&self, id: usize, impurity: &[f64]) -> (f64, usize) {
        match self.nodes[id] {
            Node::Leaf { .. } => (impurity[id], 1),
            Node::Split { left, right, .. } => {
                let (a, m) = self.subtree_risk(left, impurity);
                let (b, k) = self.subtree_risk(right, impurity);
                (a + b, m + k)
            }
        }
    }

    fn class_mass(&self, id: usize) -> (f64, f64) {
        match self.nodes[id] {
            Node::Leaf { value, cover } => (value * cover, cover),
            Node::Split { left, right, .. } => {
                let (a, m) = self.class_mass(left);
                let (b, k) = self.class_mass(right);
                (a + b, m + k)
            }
        }
    }

    /// Drops unreachable nodes, renumbering in depth-first order.
    fn compact(&mut self) {
        fn copy(old: &[Node], id: usize, out: &mut Vec<Node>) -> usize {
            let at = out.len();
            out.push(old[id].clone());
            if let Node::Split { left, right, .. } = old[id] {
                let l = copy(old, left, out);
                let r = copy(old, right, out);
                if let Node::Split { left, right, .. } = &mut out[at] {
                    *left = l;
                    *right = r;
                }
            }
            at
        }
        let mut out = Vec::new();
        copy(&self.nodes, 0, &mut out);
        self.nodes = out;
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value, .. } => return value,
                Node::Split { feature, threshold, left, right, .. } => {
                    id = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_feature_fits_exactly() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..10).map(|i| (i >= 6) as u8).collect();
        let rows: Vec<usize> = (0..10).collect();
        let t = Tree::fit(&x, &y, &rows, TreeParams::default(), 0);
        assert_eq!(t.depth(), 1);
        assert!(matches!(t.nodes[0], Node::Split { threshold, .. } if threshold == 5.0));
        for (r, l) in x.iter().zip(&y) {
            assert_eq!(t.predict_row(r), *l as f64);
        }
    }

    #[test]
    fn large_alpha_prunes_to_a_stump() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let y: Vec<u8> = (0..20).map(|i| (i % 4 == 0 || i > 14) as u8).collect();
        let rows: Vec<usize> = (0..20).collect();
        let full = Tree::fit(&x, &y, &rows, TreeParams::default(), 0);
        assert!(full.leaf_count() > 2);
        let pruned = Tree::fit(&x, &y, &rows, TreeParams { ccp_alpha: 0.5, ..TreeParams::default() }, 0);
        assert_eq!(pruned.nodes.len(), 1);
        assert!((pruned.predict_row(&[0.0, 0.0]) - 9.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_and_log_loss_choose_the_same_splits() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i * 7 % 11) as f64, (i * 5 % 13) as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| ((i * 3) % 5 < 2) as u8).collect();
        let rows: Vec<usize> = (0..30).collect();
        let e = Tree::fit(&x, &y, &rows, TreeParams { criterion: Criterion::Entropy, ..TreeParams::default() }, 0);
        let l = Tree::fit(&x, &y, &rows, TreeParams { criterion: Criterion::LogLoss, ..TreeParams::default() }, 0);
        assert_eq!(e, l);
    }
}
