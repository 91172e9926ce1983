//! Polynomial equations on tensors: flattening minors `det x[w; w']`, the
//! substitution action on them, the 2x2x2 hyperdeterminant with the rank
//! classification it drives, and Strassen's equation for `l x l x 3` tensors.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, shape, Result};
use crate::linalg::Matrix;
use crate::poly::{Monomial, SparsePoly};
use crate::scalar::{Rational, Scalar};
use crate::tensor::Tensor;
use crate::words::{SubsElement, Word};

/// Two tuples of words naming the matrix `x[w; w']` with entries `x_{w_i + w'_j}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MinorSpec {
    rows: Vec<Word>,
    cols: Vec<Word>,
}

impl MinorSpec {
    /// Requires nonempty tuples of pairwise distinct words over one alphabet,
    /// every row word disjoint in support from every column word.
    pub fn new(rows: Vec<Word>, cols: Vec<Word>) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(invalid("minor needs at least one row word and one column word"));
        }
        let n = rows[0].alphabet();
        if rows.iter().chain(&cols).any(|w| w.alphabet() != n) {
            return Err(invalid("minor words over different alphabets"));
        }
        for (side, words) in [("row", &rows), ("column", &cols)] {
            if words.iter().collect::<BTreeSet<_>>().len() != words.len() {
                return Err(invalid(format!("repeated {side} word")));
            }
        }
        for r in &rows {
            let rs: BTreeSet<usize> = r.support().into_iter().collect();
            for c in &cols {
                if let Some(p) = c.support().into_iter().find(|p| rs.contains(p)) {
                    return Err(invalid(format!("row word {r} and column word {c} share position {p}")));
                }
            }
        }
        Ok(MinorSpec { rows, cols })
    }

    pub fn rows(&self) -> &[Word] {
        &self.rows
    }

    pub fn cols(&self) -> &[Word] {
        &self.cols
    }

    pub fn alphabet(&self) -> usize {
        self.rows[0].alphabet()
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols.len()
    }

    /// Applies a substitution to every word of both tuples.
    pub fn act(&self, sigma: &SubsElement) -> Result<MinorSpec> {
        let map = |ws: &[Word]| ws.iter().map(|w| sigma.act(w)).collect::<Result<Vec<_>>>();
        MinorSpec::new(map(&self.rows)?, map(&self.cols)?)
    }
}

/// Words `w_i + w'_j` of the symbolic minor matrix.
pub fn minor_matrix(spec: &MinorSpec) -> Vec<Vec<Word>> {
    spec.rows
        .iter()
        .map(|r| {
            spec.cols
                .iter()
                .map(|c| r.disjoint_sum(c).expect("supports checked disjoint"))
                .collect()
        })
        .collect()
}

pub const MAX_SYMBOLIC_MINOR: usize = 6;

/// Determinant of `x[w; w']` expanded over all permutations.
pub fn minor_poly(spec: &MinorSpec) -> Result<SparsePoly> {
    let l = spec.rows.len();
    if !spec.is_square() {
        return Err(shape(format!("{l} x {} minor is not square", spec.cols.len())));
    }
    if l > MAX_SYMBOLIC_MINOR {
        return Err(invalid(format!("symbolic minors are limited to size {MAX_SYMBOLIC_MINOR}")));
    }
    let m = minor_matrix(spec);
    let terms = (0..l).permutations(l).map(|perm| {
        let sign = if permutation_parity(&perm) { -Rational::one() } else { Rational::one() };
        let mono = Monomial::from_factors(perm.iter().enumerate().map(|(i, &j)| (m[i][j].clone(), 1)));
        (mono, sign)
    });
    SparsePoly::from_terms(spec.alphabet(), terms)
}

/// True for odd permutations.
fn permutation_parity(perm: &[usize]) -> bool {
    let mut odd = false;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                odd = !odd;
            }
        }
    }
    odd
}

/// Numeric value of the minor on a tensor, through the coordinates `x_w`.
pub fn minor_value<S: Scalar>(spec: &MinorSpec, t: &Tensor<S>) -> Result<S> {
    if !spec.is_square() {
        return Err(shape("minor is not square"));
    }
    let l = spec.rows.len();
    let m = minor_matrix(spec);
    let data = m.iter().flatten().map(|w| t.coord(w)).collect::<Result<Vec<_>>>()?;
    Ok(S::determinant(l, &data))
}

/// A split of the modes `{0..p-1}` into row modes and the complementary
/// column modes. Enumerated with mode 0 on the row side.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Bipartition {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Bipartition {
    pub fn new(p: usize, rows: &[usize]) -> Result<Self> {
        let rows: Vec<usize> = rows.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if rows.is_empty() || rows.len() >= p || rows.iter().any(|&m| m >= p) {
            return Err(invalid(format!("{rows:?} is not a proper nonempty mode subset of {p} modes")));
        }
        let cols = (0..p).filter(|m| !rows.contains(m)).collect();
        Ok(Bipartition { rows, cols })
    }
}

/// All bipartitions `{I, J}` of `p` modes, each once, with mode 0 in `I`,
/// ordered by the bitmask of the other modes in `I`.
pub fn bipartitions(p: usize) -> Vec<Bipartition> {
    if p < 2 {
        return Vec::new();
    }
    (0u64..(1 << (p - 1)) - 1)
        .map(|mask| {
            let rows: Vec<usize> = std::iter::once(0).chain((1..p).filter(|m| mask >> (m - 1) & 1 == 1)).collect();
            Bipartition::new(p, &rows).expect("proper subset")
        })
        .collect()
}

/// The word at flattening index `index` over the given modes: the
/// multi-index, decoded row-major over `modes`, placed at positions `mode + 1`.
pub fn index_word(dims: &[usize], modes: &[usize], mut index: usize, alphabet: usize) -> Word {
    let mut pairs = Vec::with_capacity(modes.len());
    for &m in modes.iter().rev() {
        pairs.push((m + 1, index % dims[m]));
        index /= dims[m];
    }
    Word::from_pairs(alphabet, &pairs).expect("index within dims")
}

/// All `(k+1) x (k+1)` flattening minors of `n x .. x n` tensors with `p`
/// modes. Per bipartition the row words run over `(k+1)`-subsets of the
/// flattening's row indices in lexicographic order, then the column words
/// likewise; there are `C(n^|I|, k+1) * C(n^|J|, k+1)` of them.
pub fn enumerate_minors(p: usize, n: usize, k: usize) -> impl Iterator<Item = (Bipartition, MinorSpec)> {
    let dims = vec![n; p];
    bipartitions(p).into_iter().flat_map(move |bp| {
        let dims = dims.clone();
        let nr: usize = bp.rows.iter().map(|&m| dims[m]).product();
        let nc: usize = bp.cols.iter().map(|&m| dims[m]).product();
        let row_words: Vec<Word> = (0..nr).map(|i| index_word(&dims, &bp.rows, i, n)).collect();
        let col_words: Vec<Word> = (0..nc).map(|i| index_word(&dims, &bp.cols, i, n)).collect();
        let row_sets: Vec<Vec<usize>> = (0..nr).combinations(k + 1).collect();
        let col_sets: Vec<Vec<usize>> = (0..nc).combinations(k + 1).collect();
        row_sets
            .into_iter()
            .cartesian_product(col_sets)
            .map(move |(rs, cs)| {
                let spec = MinorSpec::new(
                    rs.iter().map(|&i| row_words[i].clone()).collect(),
                    cs.iter().map(|&j| col_words[j].clone()).collect(),
                )
                .expect("flattening words are distinct and disjoint");
                (bp.clone(), spec)
            })
            .collect::<Vec<_>>()
    })
}

/// Value of a polynomial at a tensor: `x_w` becomes the coordinate at `w`.
pub fn eval_poly<S: Scalar>(f: &SparsePoly, t: &Tensor<S>) -> Result<S> {
    f.eval(|w| t.coord(w))
}

/// `sigma x_w = x_{sigma w}`, extended to an algebra homomorphism.
pub fn subs_act_poly(sigma: &SubsElement, f: &SparsePoly) -> Result<SparsePoly> {
    f.map_words(|w| sigma.act(w))
}

fn check_222<S: Scalar>(t: &Tensor<S>) -> Result<()> {
    if t.dims() != [2, 2, 2] {
        return Err(shape(format!("expected a 2x2x2 tensor, got {:?}", t.dims())));
    }
    Ok(())
}

/// Discriminant `b^2 - 4ac` of `det(x1 A + x2 B) = a x1^2 + b x1 x2 + c x2^2`.
fn pencil_discriminant<S: Scalar>(a: [[S; 2]; 2], b: [[S; 2]; 2]) -> (S, S, S, S) {
    let det = |m: &[[S; 2]; 2]| m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone();
    let qa = det(&a);
    let qc = det(&b);
    let qb = a[0][0].clone() * b[1][1].clone() + b[0][0].clone() * a[1][1].clone()
        - a[0][1].clone() * b[1][0].clone()
        - b[0][1].clone() * a[1][0].clone();
    let four = S::from_i64(4);
    let disc = qb.clone() * qb.clone() - four * qa.clone() * qc.clone();
    (disc, qa, qb, qc)
}

/// Cayley's hyperdeterminant, computed as the discriminant of the pencil of
/// the two slices along the first mode.
pub fn hyperdet_222<S: Scalar>(t: &Tensor<S>) -> Result<S> {
    check_222(t)?;
    let slice = |i: usize| [[0, 1].map(|k| t.get(&[i, 0, k]).clone()), [0, 1].map(|k| t.get(&[i, 1, k]).clone())];
    Ok(pencil_discriminant(slice(0), slice(1)).0)
}

/// The hyperdeterminant as a quartic in the variables `x_w`, `w` ranging over
/// words supported in `{1, 2, 3}` over `{0, 1}`.
pub fn hyperdet_poly() -> SparsePoly {
    let x = |i: usize, j: usize, k: usize| SparsePoly::var(Word::from_symbols(2, &[i, j, k]).expect("binary word"));
    let det = |s: usize, t: usize| x(s, 0, 0).mul(&x(t, 1, 1)).sub(&x(s, 0, 1).mul(&x(t, 1, 0)));
    let qa = det(0, 0);
    let qc = det(1, 1);
    let qb = det(0, 1).add(&det(1, 0));
    qb.mul(&qb).sub(&qa.mul(&qc).scale(&Rational::from_i64(4)))
}

/// Ranks of a 2x2x2 tensor over an algebraically closed field and over the reals.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Rank222 {
    pub complex: usize,
    pub real: usize,
}

/// Rank of a rational 2x2x2 tensor from the pencil of slices
/// `x1 T(., ., 1) + x2 T(., ., 2)`.
///
/// Zero span gives rank 0; a one-dimensional span gives the rank of a
/// spanning matrix. For a two-dimensional span the determinant of the
/// pencil is a binary quadratic: distinct real roots give rank 2, complex
/// conjugate roots rank 2 over the complex numbers but 3 over the reals, a
/// double root rank 3, and an identically vanishing determinant rank 2.
pub fn rank_222_classify(t: &Tensor<Rational>) -> Result<Rank222> {
    check_222(t)?;
    let slice = |k: usize| [[0, 1].map(|j| t.get(&[0, j, k]).clone()), [0, 1].map(|j| t.get(&[1, j, k]).clone())];
    let (x1, x2) = (slice(0), slice(1));
    let flat = |m: &[[Rational; 2]; 2]| m.iter().flatten().cloned().collect::<Vec<_>>();
    let span: Vec<Rational> = flat(&x1).into_iter().chain(flat(&x2)).collect();
    let dim = Matrix::new(2, 4, span)?.rank(None);
    let both = |r| Ok(Rank222 { complex: r, real: r });
    match dim {
        0 => both(0),
        1 => {
            let m = if x1.iter().flatten().any(|v| !v.is_zero()) { &x1 } else { &x2 };
            both(Matrix::new(2, 2, flat(m))?.rank(None))
        }
        _ => {
            let (disc, qa, qb, qc) = pencil_discriminant(x1, x2);
            if disc.is_positive() {
                both(2)
            } else if disc.is_negative() {
                Ok(Rank222 { complex: 2, real: 3 })
            } else if qa.is_zero() && qb.is_zero() && qc.is_zero() {
                both(2)
            } else {
                both(3)
            }
        }
    }
}

/// Value of Strassen's equation, with a flag telling whether the
/// division by `det(X1)^(l-2)` was carried out.
#[derive(Clone, PartialEq, Debug)]
pub struct StrassenValue<S> {
    pub value: S,
    pub cancelled: bool,
}

/// Slices `X_1, X_2, X_3` of an `l x l x 3` tensor along its last mode.
pub fn strassen_slices<S: Scalar>(t: &Tensor<S>) -> Result<[Matrix<S>; 3]> {
    let d = t.dims();
    if d.len() != 3 || d[2] != 3 || d[0] != d[1] {
        return Err(shape(format!("expected an l x l x 3 tensor, got {d:?}")));
    }
    let l = d[0];
    let slice = |k: usize| Matrix::from_fn(l, l, |i, j| t.get(&[i, j, k]).clone());
    Ok([slice(0), slice(1), slice(2)])
}

fn strassen_matrix<S: Scalar>(x: &[Matrix<S>; 3]) -> Result<Matrix<S>> {
    let adj = x[0].adjugate()?;
    let a = x[1].mul(&adj)?.mul(&x[2])?;
    let b = x[2].mul(&adj)?.mul(&x[1])?;
    a.sub(&b)
}

/// `det(X2 adj(X1) X3 - X3 adj(X1) X2) / det(X1)^(l-2)`, a polynomial of
/// degree `3l` vanishing on tensors of border rank at most `(3l-1)/2`.
/// When `det(X1) = 0` the undivided numerator is returned.
pub fn strassen_eval<S: Scalar>(t: &Tensor<S>) -> Result<StrassenValue<S>> {
    let x = strassen_slices(t)?;
    let l = x[0].rows();
    let numer = strassen_matrix(&x)?.det()?;
    let d1 = x[0].det()?;
    if d1.is_zero() && l >= 2 {
        return Ok(StrassenValue { value: numer, cancelled: false });
    }
    let mut value = numer;
    for _ in 0..l.saturating_sub(2) {
        value = value / d1.clone();
    }
    Ok(StrassenValue { value, cancelled: true })
}

/// Lower bound `l + rank(X2 adj(X1) X3 - X3 adj(X1) X2) / 2` on the border
/// rank of an `l x l x 3` tensor; `None` when `X1` is singular.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct StrassenBound {
    pub numerator_rank: usize,
    pub half_units: usize,
    pub bound: usize,
}

impl StrassenBound {
    /// Bound as a rational `l + rank / 2`, rendered `a` or `a/2`.
    pub fn exact(&self) -> Rational {
        Rational::new(self.half_units.into(), 2.into())
    }
}

pub fn strassen_bound<S: Scalar>(t: &Tensor<S>, tol: Option<f64>) -> Result<Option<StrassenBound>> {
    let x = strassen_slices(t)?;
    let l = x[0].rows();
    if x[0].rank(tol) < l {
        return Ok(None);
    }
    let r = strassen_matrix(&x)?.rank(tol);
    let half_units = 2 * l + r;
    Ok(Some(StrassenBound { numerator_rank: r, half_units, bound: half_units.div_ceil(2) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::tensor::random_rank;

    fn w(n: usize, s: &str) -> Word {
        Word::parse(n, s).unwrap()
    }

    fn det_example() -> MinorSpec {
        MinorSpec::new(vec![w(3, "1"), w(3, "2")], vec![w(3, "01"), w(3, "02")]).unwrap()
    }

    #[test]
    fn minor_matrix_of_example() {
        let m = minor_matrix(&det_example());
        let names: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|w| w.to_string()).collect()).collect();
        assert_eq!(names, vec![vec!["11", "12"], vec!["21", "22"]]);
        let p = minor_poly(&det_example()).unwrap();
        let x = |s| SparsePoly::var(w(3, s));
        assert_eq!(p, x("11").mul(&x("22")).sub(&x("12").mul(&x("21"))));
        assert!(MinorSpec::new(vec![w(3, "1")], vec![w(3, "1")]).is_err());
        assert!(MinorSpec::new(vec![w(3, "1"), w(3, "1")], vec![w(3, "01")]).is_err());
    }

    #[test]
    fn one_by_one_minor_is_a_variable() {
        let spec = MinorSpec::new(vec![w(3, "2")], vec![w(3, "001")]).unwrap();
        assert_eq!(minor_poly(&spec).unwrap(), SparsePoly::var(w(3, "201")));
    }

    #[test]
    fn three_by_three_has_six_terms() {
        let spec = MinorSpec::new(vec![w(2, "1"), w(2, "01"), w(2, "11")], vec![w(2, "001"), w(2, "0001"), w(2, "0011")])
            .unwrap();
        let p = minor_poly(&spec).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.is_homogeneous() && p.degree() == 3);
        assert!(p.terms().all(|(_, c)| c.abs().is_one()));
    }

    #[test]
    fn minor_counts() {
        assert_eq!(enumerate_minors(2, 2, 1).count(), 1);
        assert_eq!(enumerate_minors(3, 2, 2).count(), 0);
        assert_eq!(enumerate_minors(3, 2, 1).count(), 18);
        assert_eq!(bipartitions(3).len(), 3);
        assert_eq!(bipartitions(4).len(), 7);
    }

    #[test]
    fn minors_match_flattening_submatrices() {
        let (t, _) = random_rank(&[2, 2, 2], 2, 3, 5).unwrap();
        for (bp, spec) in enumerate_minors(3, 2, 1) {
            let flat = t.flatten(&bp.rows).unwrap().as_matrix().unwrap();
            let find = |ws: &[Word], modes: &[usize], count: usize| -> Vec<usize> {
                ws.iter()
                    .map(|x| (0..count).find(|&i| index_word(&[2, 2, 2], modes, i, 2) == *x).unwrap())
                    .collect()
            };
            let rows = find(spec.rows(), &bp.rows, flat.rows());
            let cols = find(spec.cols(), &bp.cols, flat.cols());
            assert_eq!(flat.select(&rows, &cols).det().unwrap(), minor_value(&spec, &t).unwrap());
            assert_eq!(eval_poly(&minor_poly(&spec).unwrap(), &t).unwrap(), minor_value(&spec, &t).unwrap());
        }
    }

    /// Cayley's formula written out term by term.
    fn cayley(t: &Tensor<Rational>) -> Rational {
        let a = |i: usize, j: usize, k: usize| t.get(&[i, j, k]).clone();
        let sq = |x: Rational| x.clone() * x;
        sq(a(0, 0, 0) * a(1, 1, 1)) + sq(a(0, 0, 1) * a(1, 1, 0)) + sq(a(0, 1, 0) * a(1, 0, 1)) + sq(a(1, 0, 0) * a(0, 1, 1))
            - rat(2)
                * (a(0, 0, 0) * a(0, 0, 1) * a(1, 1, 0) * a(1, 1, 1)
                    + a(0, 0, 0) * a(0, 1, 0) * a(1, 0, 1) * a(1, 1, 1)
                    + a(0, 0, 0) * a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 1)
                    + a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 1) * a(1, 1, 0)
                    + a(0, 0, 1) * a(0, 1, 1) * a(1, 1, 0) * a(1, 0, 0)
                    + a(0, 1, 0) * a(0, 1, 1) * a(1, 0, 1) * a(1, 0, 0))
            + rat(4)
                * (a(0, 0, 0) * a(0, 1, 1) * a(1, 0, 1) * a(1, 1, 0) + a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 0) * a(1, 1, 1))
    }

    #[test]
    fn hyperdeterminant_matches_cayley() {
        for seed in 0..50 {
            let t = Tensor::from_fn(&[2, 2, 2], |i| rat(((seed * 31 + i[0] * 7 + i[1] * 5 + i[2] * 3) % 11) as i64 - 5));
            assert_eq!(hyperdet_222(&t).unwrap(), cayley(&t));
            assert_eq!(eval_poly(&hyperdet_poly(), &t).unwrap(), cayley(&t));
        }
        assert!(hyperdet_222(&Tensor::<Rational>::zeros(&[2, 2, 3])).is_err());
    }

    fn w_state() -> Tensor<Rational> {
        let e = |i: usize| if i == 0 { vec![rat(1), rat(0)] } else { vec![rat(0), rat(1)] };
        let p = |a, b, c| Tensor::pure(&[e(a), e(b), e(c)]).unwrap();
        p(0, 0, 1).add(&p(0, 1, 0)).unwrap().add(&p(1, 0, 0)).unwrap()
    }

    #[test]
    fn classifier_examples() {
        assert_eq!(hyperdet_222(&Tensor::<Rational>::zeros(&[2, 2, 2])).unwrap(), rat(0));
        assert_eq!(hyperdet_222(&w_state()).unwrap(), rat(0));
        assert_eq!(rank_222_classify(&w_state()).unwrap(), Rank222 { complex: 3, real: 3 });
        let pure = Tensor::pure(&[vec![rat(1), rat(2)], vec![rat(3), rat(-1)], vec![rat(2), rat(5)]]).unwrap();
        assert_eq!(rank_222_classify(&pure).unwrap().complex, 1);
        assert_eq!(rank_222_classify(&Tensor::zeros(&[2, 2, 2])).unwrap().complex, 0);
        // Slices I and the rotation J: det(x1 I + x2 J) = x1^2 + x2^2 has no real roots.
        let rot = Tensor::new(
            vec![2, 2, 2],
            [1, 0, 0, -1, 0, 1, 1, 0].iter().map(|&v| rat(v)).collect(),
        )
        .unwrap();
        assert!(hyperdet_222(&rot).unwrap() < rat(0));
        assert_eq!(rank_222_classify(&rot).unwrap(), Rank222 { complex: 2, real: 3 });
        // Matrix of rank 2 tensored with e_0: every pencil matrix is singular.
        let flat = Tensor::pure(&[vec![rat(1), rat(0)], vec![rat(1), rat(0)], vec![rat(1), rat(0)]])
            .unwrap()
            .add(&Tensor::pure(&[vec![rat(1), rat(0)], vec![rat(0), rat(1)], vec![rat(0), rat(1)]]).unwrap())
            .unwrap();
        assert_eq!(rank_222_classify(&flat).unwrap().complex, 2);
    }

    #[test]
    fn strassen_vanishes_on_rank_four() {
        for seed in 0..5 {
            let (t, _) = random_rank(&[3, 3, 3], 4, seed, 10).unwrap();
            assert!(strassen_eval(&t).unwrap().value.is_zero());
        }
        let (g, _) = random_rank(&[3, 3, 3], 5, 1, 10).unwrap();
        let v = strassen_eval(&g).unwrap();
        assert!(v.cancelled && !v.value.is_zero());
        assert_eq!(strassen_bound(&g, None).unwrap().unwrap().bound, 5);
        let pure = Tensor::pure(&[vec![rat(1); 3], vec![rat(2); 3], vec![rat(1), rat(0), rat(3)]]).unwrap();
        assert!(strassen_bound(&pure, None).unwrap().is_none());
    }
}
