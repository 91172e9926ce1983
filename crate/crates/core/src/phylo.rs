//! Joint leaf distributions of the general Markov model on trees, and
//! membership tests through edge flattenings and star-tensor border rank.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{flattening_witness, random_contraction_test, MinorWitness, TestConfig, Verdict};
use crate::error::{invalid, shape, Error, Result};
use crate::rng::{stream, task_rng, uniform_int};
use crate::scalar::{Rational, Scalar};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub label: Option<String>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Rooted tree; node 0 is the root and leaves are ordered left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    nodes: Vec<Node>,
    leaves: Vec<usize>,
}

struct NewickParser<'a> {
    text: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
}

impl NewickParser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn label(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && !b"(),:;".contains(&self.text[self.pos]) && !self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.text[start..self.pos]).into_owned())
    }

    fn length(&mut self) -> Result<()> {
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.text.len() && (self.text[self.pos].is_ascii_alphanumeric() || b".+-".contains(&self.text[self.pos])) {
                self.pos += 1;
            }
            let raw = std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("");
            if raw.parse::<f64>().is_err() {
                self.pos = start;
                return Err(self.error("expected a branch length"));
            }
        }
        Ok(())
    }

    fn subtree(&mut self, parent: Option<usize>) -> Result<usize> {
        let id = self.nodes.len();
        self.nodes.push(Node { label: None, parent, children: vec![] });
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                let child = self.subtree(Some(id))?;
                self.nodes[id].children.push(child);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
            self.nodes[id].label = self.label();
        } else {
            match self.label() {
                Some(l) => self.nodes[id].label = Some(l),
                None => return Err(self.error("leaf without a label")),
            }
        }
        self.length()?;
        Ok(id)
    }
}

/// Parses a Newick string. Leaf labels are required; branch lengths are
/// read and ignored.
pub fn parse_newick(text: &str) -> Result<Tree> {
    let mut parser = NewickParser { text: text.as_bytes(), pos: 0, nodes: vec![] };
    parser.subtree(None)?;
    if parser.peek() != Some(b';') {
        return Err(parser.error("expected `;`"));
    }
    parser.pos += 1;
    if parser.peek().is_some() {
        return Err(parser.error("trailing input after `;`"));
    }
    Tree::from_nodes(parser.nodes)
}

impl Tree {
    fn from_nodes(nodes: Vec<Node>) -> Result<Tree> {
        let mut tree = Tree { nodes, leaves: vec![] };
        tree.leaves = tree.preorder().into_iter().filter(|&v| tree.is_leaf(v)).collect();
        if tree.leaves.len() < 2 {
            return Err(invalid("a tree needs at least two leaves"));
        }
        let mut labels: Vec<&String> = tree.leaves.iter().filter_map(|&v| tree.nodes[v].label.as_ref()).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("leaf labels must be distinct"));
        }
        Ok(tree)
    }

    fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.nodes[v].children.iter().rev());
        }
        out
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].children.is_empty()
    }

    /// Leaf node ids, left to right; leaf `i` is mode `i` of model tensors.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn leaf_labels(&self) -> Vec<String> {
        self.leaves.iter().map(|&v| self.nodes[v].label.clone().unwrap_or_default()).collect()
    }

    /// Modes (leaf positions) below `v`, in order.
    pub fn leaf_modes_below(&self, v: usize) -> Vec<usize> {
        let mut stack = vec![v];
        let mut ids = vec![];
        while let Some(u) = stack.pop() {
            if self.is_leaf(u) {
                ids.push(u);
            }
            stack.extend(&self.nodes[u].children);
        }
        let mut modes: Vec<usize> = ids.iter().map(|id| self.leaves.iter().position(|l| l == id).unwrap()).collect();
        modes.sort_unstable();
        modes
    }

    /// Non-root, non-leaf nodes: the child ends of internal edges.
    pub fn internal_edges(&self) -> Vec<usize> {
        (1..self.nodes.len()).filter(|&v| !self.is_leaf(v)).collect()
    }

    /// Non-leaf nodes in preorder.
    pub fn internal_vertices(&self) -> Vec<usize> {
        self.preorder().into_iter().filter(|&v| !self.is_leaf(v)).collect()
    }

    /// The tree without the leaf at mode `mode`; a parent left with no
    /// children is removed too.
    pub fn remove_leaf(&self, mode: usize) -> Result<(Tree, Vec<Option<usize>>)> {
        let leaf = *self.leaves.get(mode).ok_or_else(|| invalid(format!("no leaf {mode}")))?;
        let mut removed = vec![false; self.nodes.len()];
        removed[leaf] = true;
        let mut v = leaf;
        while let Some(parent) = self.nodes[v].parent {
            if self.nodes[parent].children.iter().all(|c| removed[*c]) && parent != 0 {
                removed[parent] = true;
                v = parent;
            } else {
                break;
            }
        }
        let mut map = vec![None; self.nodes.len()];
        let mut next = 0;
        for (old, gone) in removed.iter().enumerate() {
            if !gone {
                map[old] = Some(next);
                next += 1;
            }
        }
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed[*i])
            .map(|(_, n)| Node {
                label: n.label.clone(),
                parent: n.parent.and_then(|p| map[p]),
                children: n.children.iter().filter_map(|c| map[*c]).collect(),
            })
            .collect();
        Ok((Tree::from_nodes(nodes)?, map))
    }
}

/// Parameters of the general Markov model: a root distribution over `k`
/// hidden states and one transition matrix per non-root node, `k x k` into
/// internal nodes and `k x m` into a leaf with `m` observed states.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<S> {
    pub root: Vec<S>,
    /// Indexed by node id; `None` for the root.
    pub edges: Vec<Option<Vec<Vec<S>>>>,
}

impl<S: Scalar> ModelParams<S> {
    fn check(&self, tree: &Tree) -> Result<usize> {
        let k = self.root.len();
        if k == 0 || self.edges.len() != tree.nodes.len() {
            return Err(shape("parameters do not match the tree"));
        }
        for (v, edge) in self.edges.iter().enumerate() {
            match (v, edge) {
                (0, None) => {}
                (0, Some(_)) => return Err(shape("the root has no incoming edge")),
                (_, None) => return Err(shape(format!("missing transition matrix for node {v}"))),
                (_, Some(m)) => {
                    let width = m.first().map_or(0, Vec::len);
                    if m.len() != k || width == 0 || m.iter().any(|row| row.len() != width) {
                        return Err(shape(format!("transition matrix of node {v} must be {k} x m")));
                    }
                    if !tree.is_leaf(v) && width != k {
                        return Err(shape(format!("internal node {v} needs a {k} x {k} matrix")));
                    }
                }
            }
        }
        Ok(k)
    }

    /// Observed states per leaf, in mode order.
    pub fn leaf_states(&self, tree: &Tree) -> Vec<usize> {
        tree.leaves.iter().map(|&v| self.edges[v].as_ref().map_or(0, |m| m[0].len())).collect()
    }

    /// Parameters for `tree.remove_leaf`, given its node map.
    pub fn restrict(&self, map: &[Option<usize>]) -> ModelParams<S> {
        let mut edges = vec![None; map.iter().flatten().count()];
        for (old, new) in map.iter().enumerate() {
            if let Some(new) = new {
                edges[*new] = self.edges[old].clone();
            }
        }
        ModelParams { root: self.root.clone(), edges }
    }
}

/// Random parameters with `k` hidden states. Stochastic parameters have
/// positive rows summing to 1; otherwise entries are integers in `[-10, 10]`.
pub fn random_params(tree: &Tree, k: usize, leaf_states: &[usize], stochastic: bool, seed: u64) -> Result<ModelParams<Rational>> {
    if k == 0 {
        return Err(invalid("the model needs at least one hidden state"));
    }
    if leaf_states.len() != tree.leaves.len() || leaf_states.contains(&0) {
        return Err(shape("one positive state count per leaf required"));
    }
    let mut rng = task_rng(seed, &[stream::PHYLO]);
    let mut row = |len: usize| -> Vec<Rational> {
        if stochastic {
            let raw: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=9)).collect();
            let total: i64 = raw.iter().sum();
            raw.iter().map(|&x| Rational::new(x.into(), total.into())).collect()
        } else {
            (0..len).map(|_| Rational::from_integer(uniform_int(&mut rng, 10).into())).collect()
        }
    };
    let root = row(k);
    let edges = (0..tree.nodes.len())
        .map(|v| {
            if v == 0 {
                return None;
            }
            let width = match tree.leaves.iter().position(|&l| l == v) {
                Some(mode) => leaf_states[mode],
                None => k,
            };
            Some((0..k).map(|_| row(width)).collect())
        })
        .collect();
    Ok(ModelParams { root, edges })
}

fn outer<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let dims: Vec<usize> = a.dims().iter().chain(b.dims()).copied().collect();
    let data = a.data().iter().flat_map(|x| b.data().iter().map(move |y| x.clone() * y.clone())).collect();
    Tensor::new(dims, data).expect("outer product shape")
}

/// Leaf distribution below `v` conditioned on each hidden state of `v`.
fn conditional<S: Scalar>(tree: &Tree, params: &ModelParams<S>, v: usize, k: usize) -> Vec<Tensor<S>> {
    (0..k)
        .map(|s| {
            tree.nodes[v].children.iter().fold(Tensor::scalar(S::one()), |acc, &c| {
                let m = params.edges[c].as_ref().expect("checked");
                let factor = if tree.is_leaf(c) {
                    Tensor::new(vec![m[s].len()], m[s].clone()).expect("row shape")
                } else {
                    let below = conditional(tree, params, c, k);
                    let mut sum = below[0].scale(&m[s][0]);
                    for (t, b) in below.iter().enumerate().skip(1) {
                        sum = sum.add(&b.scale(&m[s][t])).expect("equal shapes");
                    }
                    sum
                };
                outer(&acc, &factor)
            })
        })
        .collect()
}

/// Joint distribution of the leaf states: the sum over hidden states of the
/// root probability times the product of transition entries along the edges.
pub fn model_tensor<S: Scalar>(tree: &Tree, params: &ModelParams<S>) -> Result<Tensor<S>> {
    let k = params.check(tree)?;
    let below = conditional(tree, params, 0, k);
    let mut total = below[0].scale(&params.root[0]);
    for (s, b) in below.iter().enumerate().skip(1) {
        total = total.add(&b.scale(&params.root[s]))?;
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeCheck {
    /// Node id at the child end of the edge.
    pub node: usize,
    /// Leaf modes (0-based) below the edge.
    pub split: Vec<usize>,
    pub rank: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<MinorWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexCheck {
    pub node: usize,
    /// Leaf modes grouped into the branches at the vertex.
    pub branches: Vec<Vec<usize>>,
    pub verdict: Verdict,
    pub method: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhyloReport {
    pub verdict: Verdict,
    pub k: usize,
    pub leaves: Vec<String>,
    pub edges: Vec<EdgeCheck>,
    pub vertices: Vec<VertexCheck>,
}

/// Groups the modes of `t` into one mode per branch.
fn star_tensor<S: Scalar>(t: &Tensor<S>, branches: &[Vec<usize>]) -> Result<Tensor<S>> {
    let order: Vec<usize> = branches.iter().flatten().copied().collect();
    let mut perm = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    let moved = t.permute_modes(&perm)?;
    let dims: Vec<usize> = branches.iter().map(|b| b.iter().map(|&m| t.dims()[m]).product()).collect();
    moved.reshape(&dims)
}

/// Every internal edge flattening must have rank at most `k`, and the star
/// tensor at every internal vertex must pass the border-rank test.
pub fn check_membership<S: Scalar>(t: &Tensor<S>, tree: &Tree, cfg: &TestConfig) -> Result<PhyloReport> {
    let p = tree.leaves.len();
    if t.order() != p {
        return Err(shape(format!("tensor has {} modes but the tree has {p} leaves", t.order())));
    }
    let k = cfg.k;
    let mut splits: Vec<(usize, Vec<usize>)> = vec![];
    for v in tree.internal_edges() {
        let below = tree.leaf_modes_below(v);
        let complement: Vec<usize> = (0..p).filter(|m| !below.contains(m)).collect();
        if below.len() < 2 || complement.is_empty() || splits.iter().any(|(_, s)| *s == below || *s == complement) {
            continue;
        }
        splits.push((v, below));
    }
    let edges = splits
        .par_iter()
        .map(|(v, split)| {
            let (rank, witness) = flattening_witness(t, split, k, cfg.tol)?;
            Ok(EdgeCheck { node: *v, split: split.clone(), rank, passed: witness.is_none(), witness })
        })
        .collect::<Result<Vec<_>>>()?;
    let vertices = tree
        .internal_vertices()
        .par_iter()
        .map(|&v| {
            let mut branches: Vec<Vec<usize>> =
                tree.nodes[v].children.iter().map(|&c| tree.leaf_modes_below(c)).collect();
            let below = tree.leaf_modes_below(v);
            let rest: Vec<usize> = (0..p).filter(|m| !below.contains(m)).collect();
            if !rest.is_empty() {
                branches.push(rest);
            }
            let star = star_tensor(t, &branches)?;
            let report = random_contraction_test(&star, cfg)?;
            Ok(VertexCheck { node: v, branches, verdict: report.verdict, method: report.method })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdicts = edges
        .iter()
        .map(|e| if e.passed { Verdict::CertifiedLeK } else { Verdict::Violated })
        .chain(vertices.iter().map(|v| v.verdict));
    let verdict = verdicts.fold(Verdict::CertifiedLeK, |acc, v| match (acc, v) {
        (Verdict::Violated, _) | (_, Verdict::Violated) => Verdict::Violated,
        (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
        (Verdict::InconclusivePass, _) | (_, Verdict::InconclusivePass) => Verdict::InconclusivePass,
        _ => Verdict::CertifiedLeK,
    });
    Ok(PhyloReport { verdict, k, leaves: tree.leaf_labels(), edges, vertices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::test_rank_le_1;
    use crate::scalar::rat;
    use crate::tensor::random_rank;
    use num_traits::One;

    #[test]
    fn newick_shapes_and_errors() {
        let star = parse_newick("(a,b,c);").unwrap();
        assert_eq!(star.leaf_labels(), ["a", "b", "c"]);
        assert!(star.internal_edges().is_empty());
        let quartet = parse_newick("((a:0.1,b:2),(c,d)x:1e-3);").unwrap();
        assert_eq!(quartet.leaf_labels(), ["a", "b", "c", "d"]);
        assert_eq!(quartet.internal_edges().len(), 2);
        match parse_newick("((a,b);") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(parse_newick("(a,);").is_err());
        assert!(parse_newick("(a,a);").is_err());
        assert!(parse_newick("(a,b); x").is_err());
    }

    #[test]
    fn stochastic_model_sums_to_one() {
        let tree = parse_newick("((a,b),(c,d),e);").unwrap();
        let params = random_params(&tree, 2, &[2, 3, 2, 2, 4], true, 1).unwrap();
        let t = model_tensor(&tree, &params).unwrap();
        assert_eq!(t.dims(), [2, 3, 2, 2, 4]);
        let total: Rational = t.data().iter().cloned().sum();
        assert!(total.is_one());
    }

    #[test]
    fn star_model_has_rank_k_and_k1_is_pure() {
        let tree = parse_newick("(a,b,c);").unwrap();
        let params = random_params(&tree, 1, &[3, 3, 3], false, 2).unwrap();
        let t = model_tensor(&tree, &params).unwrap();
        assert_eq!(test_rank_le_1(&t, None).unwrap().verdict, Verdict::CertifiedLeK);
        let params = random_params(&tree, 2, &[3, 3, 3], false, 2).unwrap();
        let t = model_tensor(&tree, &params).unwrap();
        let report = check_membership(&t, &tree, &TestConfig::new(2)).unwrap();
        assert_eq!(report.verdict, Verdict::CertifiedLeK);
    }

    #[test]
    fn model_tensors_pass_and_generic_tensors_fail() {
        let tree = parse_newick("((a,b),(c,d));").unwrap();
        for seed in 0..3 {
            let params = random_params(&tree, 2, &[3, 3, 3, 3], seed % 2 == 0, seed).unwrap();
            let t = model_tensor(&tree, &params).unwrap();
            let report = check_membership(&t, &tree, &TestConfig::new(2)).unwrap();
            assert_eq!(report.edges.len(), 1);
            assert!(report.edges[0].rank <= 2);
            assert_ne!(report.verdict, Verdict::Violated);
        }
        let (generic, _) = random_rank(&[3, 3, 3, 3], 9, 4, 10).unwrap();
        let report = check_membership(&generic, &tree, &TestConfig::new(2)).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(report.edges[0].witness.is_some());
    }

    #[test]
    fn marginalizing_a_leaf_matches_the_reduced_tree() {
        for text in ["((a,b),(c,d));", "((a,b),(c,(d,e)));"] {
            let tree = parse_newick(text).unwrap();
            let p = tree.leaves().len();
            let params = random_params(&tree, 2, &vec![2; p], true, 3).unwrap();
            let t = model_tensor(&tree, &params).unwrap();
            for mode in 0..p {
                let marginal = t.contract(mode, &[rat(1), rat(1)]).unwrap();
                let (reduced, map) = tree.remove_leaf(mode).unwrap();
                let expected = model_tensor(&reduced, &params.restrict(&map)).unwrap();
                assert_eq!(marginal, expected, "{text} leaf {mode}");
            }
        }
    }
}
