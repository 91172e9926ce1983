//! Exact completion of a tensor with all flattenings of rank at most `k`
//! from its boundary slabs, once a `k x k` pivot minor is invertible.
//!
//! The boundary holds every coordinate `x_w` whose support has at most one
//! position beyond the prefix `[p]`. Each missing coordinate is the unique
//! value making a `(k+1) x (k+1)` minor through the pivot vanish.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;

use crate::error::{invalid, shape, Error, Result};
use crate::flattening::{enumerate_minors, minor_poly, minor_value, Bipartition, MinorSpec};
use crate::poly::SparsePoly;
use crate::scalar::{format_rational, Rational, Scalar};
use crate::tensor::Tensor;
use crate::words::Word;

/// One boundary coordinate. `slab` names the extra position the value was
/// recorded under; prefix words may be listed once per slab.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEntry {
    pub word: Word,
    pub value: Rational,
    pub slab: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    /// Prefix length.
    pub p: usize,
    pub n: usize,
    /// Order of the completed tensor.
    pub q: usize,
    pub entries: Vec<BoundaryEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A word outside the boundary, or listed under a slab it does not belong to.
    OutOfRange { word: String, slab: Option<usize> },
    Missing { word: String },
    /// Slabs disagree on a shared coordinate.
    Conflict { word: String, values: Vec<(Option<usize>, String)> },
}

/// Positions of `w` beyond the prefix carrying a nonzero symbol.
fn outer_support(w: &Word, p: usize) -> Vec<usize> {
    w.support().into_iter().filter(|&pos| pos > p).collect()
}

/// All words over `{0..n-1}` supported in `[len]`, in increasing order.
fn all_words(n: usize, len: usize) -> impl Iterator<Item = Word> {
    let total = n.pow(len as u32);
    (0..total).map(move |mut i| {
        let symbols: Vec<usize> = (0..len)
            .map(|_| {
                let s = i % n;
                i /= n;
                s
            })
            .collect();
        Word::from_symbols(n, &symbols).expect("symbols below n")
    })
}

impl BoundaryData {
    fn check_shape(&self) -> Result<()> {
        if self.n < 2 || self.n > 10 {
            return Err(invalid(format!("alphabet size {} outside 2..=10", self.n)));
        }
        if self.q < self.p {
            return Err(invalid(format!("target order {} below prefix length {}", self.q, self.p)));
        }
        Ok(())
    }

    /// The words a complete boundary must list.
    pub fn required_words(&self) -> impl Iterator<Item = Word> + '_ {
        all_words(self.n, self.q).filter(move |w| outer_support(w, self.p).len() <= 1)
    }

    /// Values per boundary word, after checking that the slabs agree.
    pub fn resolve(&self) -> Result<BTreeMap<Word, Rational>> {
        let violations = validate_boundary(self);
        if let Some(v) = violations.first() {
            return Err(Error::Data(format!(
                "incompatible boundary ({} violations, first: {})",
                violations.len(),
                serde_json::to_string(v)?
            )));
        }
        Ok(self.entries.iter().map(|e| (e.word.clone(), e.value.clone())).collect())
    }
}

/// Compatibility of the boundary slabs: every listed word lies in the
/// boundary (and in its slab), every required word is present, and all
/// values recorded for one word agree.
pub fn validate_boundary(b: &BoundaryData) -> Vec<Violation> {
    let mut out = Vec::new();
    if b.check_shape().is_err() {
        return vec![Violation::OutOfRange { word: format!("p={} n={} q={}", b.p, b.n, b.q), slab: None }];
    }
    let mut seen: BTreeMap<&Word, Vec<(Option<usize>, &Rational)>> = BTreeMap::new();
    for e in &b.entries {
        let outer = outer_support(&e.word, b.p);
        let in_slab = match e.slab {
            None => true,
            Some(s) => s > b.p && s <= b.q && outer.iter().all(|&pos| pos == s),
        };
        if e.word.alphabet() != b.n || e.word.max_support() > b.q || outer.len() > 1 || !in_slab {
            out.push(Violation::OutOfRange { word: e.word.to_digit_string(), slab: e.slab });
            continue;
        }
        seen.entry(&e.word).or_default().push((e.slab, &e.value));
    }
    for w in b.required_words() {
        match seen.get(&w) {
            None => out.push(Violation::Missing { word: w.to_digit_string() }),
            Some(values) if values.iter().any(|(_, v)| *v != values[0].1) => out.push(Violation::Conflict {
                word: w.to_digit_string(),
                values: values.iter().map(|(s, v)| (*s, format_rational(v))).collect(),
            }),
            Some(_) => {}
        }
    }
    out
}

/// Boundary coordinates of an order-`q` tensor with all modes of size `n`.
/// With `per_slab`, prefix words are repeated under every slab `p+1..=q`.
pub fn extract_boundary(t: &Tensor<Rational>, p: usize, per_slab: bool) -> Result<BoundaryData> {
    let q = t.order();
    let n = t.dims().first().copied().unwrap_or(2);
    if t.dims().iter().any(|&d| d != n) {
        return Err(shape(format!("boundary extraction needs equal mode sizes, got {:?}", t.dims())));
    }
    let b = BoundaryData { p, n, q, entries: vec![] };
    b.check_shape()?;
    let mut entries = Vec::new();
    for w in b.required_words() {
        let value = t.coord(&w)?;
        let outer = outer_support(&w, p);
        if per_slab && outer.is_empty() && q > p {
            for s in p + 1..=q {
                entries.push(BoundaryEntry { word: w.clone(), value: value.clone(), slab: Some(s) });
            }
        } else {
            entries.push(BoundaryEntry { word: w, value, slab: outer.first().copied() });
        }
    }
    Ok(BoundaryData { entries, ..b })
}

/// Pivot minor `x[rows; cols]` together with the split of the prefix
/// positions: rows are supported in `row_part`, columns in its complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pivot {
    pub rows: Vec<Word>,
    pub cols: Vec<Word>,
    /// Prefix positions (1-based) on the row side.
    pub row_part: BTreeSet<usize>,
}

impl Pivot {
    pub fn new(rows: Vec<Word>, cols: Vec<Word>, row_part: impl IntoIterator<Item = usize>) -> Result<Self> {
        MinorSpec::new(rows.clone(), cols.clone())?;
        let pivot = Pivot { rows, cols, row_part: row_part.into_iter().collect() };
        if pivot.rows.len() != pivot.cols.len() || pivot.rows.is_empty() {
            return Err(shape("pivot must be a nonempty square minor"));
        }
        if pivot.row_part.contains(&0) {
            return Err(invalid("positions are 1-based"));
        }
        Ok(pivot)
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// Checks the pivot against a prefix length `p`.
    pub fn check_prefix(&self, p: usize) -> Result<()> {
        if self.row_part.iter().any(|&i| i > p) {
            return Err(invalid(format!("row positions {:?} exceed the prefix length {p}", self.row_part)));
        }
        for w in &self.rows {
            if w.support().iter().any(|pos| !self.row_part.contains(pos)) {
                return Err(invalid(format!("row word {w} not supported in {:?}", self.row_part)));
            }
        }
        for w in &self.cols {
            if w.support().iter().any(|pos| *pos > p || self.row_part.contains(pos)) {
                return Err(invalid(format!("column word {w} not supported in the column part of [{p}]")));
            }
        }
        Ok(())
    }

    /// The `(k+1) x (k+1)` minor through the pivot used to solve for `x_w`:
    /// `w` splits into the part on the row side together with positions
    /// `p+1..q-1`, and the part on the column side together with `q = max supp(w)`.
    pub fn extended_minor(&self, p: usize, w: &Word) -> Result<MinorSpec> {
        let q = w.max_support();
        if q <= p {
            return Err(invalid(format!("word {w} is supported in the prefix [{p}]")));
        }
        let row_word = w.restrict(|pos| self.row_part.contains(&pos) || (pos > p && pos < q));
        let col_word = w.restrict(|pos| (pos <= p && !self.row_part.contains(&pos)) || pos == q);
        let mut rows = self.rows.clone();
        let mut cols = self.cols.clone();
        rows.push(row_word);
        cols.push(col_word);
        MinorSpec::new(rows, cols)
    }

    fn spec(&self) -> MinorSpec {
        MinorSpec::new(self.rows.clone(), self.cols.clone()).expect("validated on construction")
    }
}

fn lookup(values: &BTreeMap<Word, Rational>, w: &Word) -> Result<Rational> {
    values.get(w).cloned().ok_or_else(|| Error::MissingValue(w.to_digit_string()))
}

/// Value of `x_w` that makes the extended minor through the pivot vanish:
/// `-det(minor with x_w = 0) / det(pivot)`.
pub fn complete_entry(values: &BTreeMap<Word, Rational>, pivot: &Pivot, p: usize, w: &Word) -> Result<Rational> {
    let spec = pivot.extended_minor(p, w)?;
    let k = pivot.k();
    let l = k + 1;
    let mut data = Vec::with_capacity(l * l);
    for (i, r) in spec.rows().iter().enumerate() {
        for (j, c) in spec.cols().iter().enumerate() {
            data.push(if i == k && j == k { Rational::zero() } else { lookup(values, &r.disjoint_sum(c)?)? });
        }
    }
    let pivot_data: Vec<Rational> = (0..k).flat_map(|i| data[i * l..i * l + k].to_vec()).collect();
    let det = Rational::determinant(k, &pivot_data);
    if det.is_zero() {
        return Err(Error::ZeroPivot { word: w.to_digit_string() });
    }
    Ok(-Rational::determinant(l, &data) / det)
}

/// The completion formula as a fraction of polynomials in the coordinates:
/// `x_w = numerator / det(pivot)`.
pub fn completion_formula(pivot: &Pivot, p: usize, w: &Word) -> Result<(SparsePoly, SparsePoly)> {
    let spec = pivot.extended_minor(p, w)?;
    let full = minor_poly(&spec)?;
    let denominator = minor_poly(&pivot.spec())?;
    let numerator = denominator.mul(&SparsePoly::var(w.clone())).sub(&full);
    Ok((numerator, denominator))
}

/// Fills every coordinate supported in `[q]`, level by level in the number
/// of positions beyond the prefix, then by word order.
pub fn complete_tensor(b: &BoundaryData, pivot: &Pivot) -> Result<Tensor<Rational>> {
    b.check_shape()?;
    pivot.check_prefix(b.p)?;
    if pivot.rows.iter().chain(&pivot.cols).any(|w| w.alphabet() != b.n) {
        return Err(invalid("pivot words use a different alphabet"));
    }
    let mut values = b.resolve()?;
    let mut pending: Vec<(usize, Word)> = all_words(b.n, b.q)
        .filter_map(|w| {
            let level = outer_support(&w, b.p).len();
            (level > 1).then_some((level, w))
        })
        .collect();
    pending.sort();
    for (_, w) in pending {
        let v = complete_entry(&values, pivot, b.p, &w)?;
        values.insert(w, v);
    }
    let dims = vec![b.n; b.q];
    let mut missing = None;
    let t = Tensor::from_fn(&dims, |idx| {
        let w = Word::from_symbols(b.n, idx).expect("index below n");
        values.get(&w).cloned().unwrap_or_else(|| {
            missing.get_or_insert(w);
            Rational::zero()
        })
    });
    match missing {
        Some(w) => Err(Error::MissingValue(w.to_digit_string())),
        None => Ok(t),
    }
}

/// A flattening minor that does not vanish.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonzeroMinor<S> {
    pub bipartition: Bipartition,
    pub rows: Vec<Word>,
    pub cols: Vec<Word>,
    #[serde(skip)]
    pub value: S,
}

/// All `(k+1) x (k+1)` flattening minors of `t` that are not negligible
/// under `threshold` (ignored for exact scalars). Empty exactly when every
/// flattening has rank at most `k`.
pub fn verify_on_variety<S: Scalar>(t: &Tensor<S>, k: usize, threshold: f64) -> Result<Vec<NonzeroMinor<S>>> {
    let p = t.order();
    let n = t.dims().first().copied().unwrap_or(1);
    if t.dims().iter().any(|&d| d != n) {
        return Err(shape(format!("minor enumeration needs equal mode sizes, got {:?}", t.dims())));
    }
    let mut out = Vec::new();
    for (bipartition, spec) in enumerate_minors(p, n, k) {
        let value = minor_value(&spec, t)?;
        if !value.is_negligible(threshold) {
            out.push(NonzeroMinor { bipartition, rows: spec.rows().to_vec(), cols: spec.cols().to_vec(), value });
        }
    }
    Ok(out)
}
