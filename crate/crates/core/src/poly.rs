//! Sparse polynomials with rational coefficients in word-indexed variables `x_w`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use crate::linalg::rational_rank_info;
use crate::scalar::{format_rational, Rational, Scalar};
use crate::words::Word;

/// A product of variables, kept as `(word, exponent)` pairs sorted by word
/// with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Word, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(w: Word) -> Self {
        Monomial(vec![(w, 1)])
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (Word, u32)>) -> Self {
        let mut map: BTreeMap<Word, u32> = BTreeMap::new();
        for (w, e) in factors {
            if e > 0 {
                *map.entry(w).or_default() += e;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn factors(&self) -> &[(Word, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_factors(self.0.iter().chain(&other.0).cloned())
    }

    fn expanded(&self) -> impl Iterator<Item = &Word> {
        self.0.iter().rev().flat_map(|(w, e)| std::iter::repeat(w).take(*e as usize))
    }
}

impl Ord for Monomial {
    /// Graded, then lexicographic on the variables listed largest first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.expanded().cmp(other.expanded()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (w, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "x{w}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial over the rationals in variables `x_w` for words over `{0..n-1}`.
/// No zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparsePoly {
    n: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl SparsePoly {
    pub fn zero(n: usize) -> Self {
        SparsePoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = SparsePoly::zero(n);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(w: Word) -> Self {
        let n = w.alphabet();
        let mut p = SparsePoly::zero(n);
        p.add_term(Monomial::var(w), Rational::one());
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Result<Self> {
        let mut p = SparsePoly::zero(n);
        for (m, c) in terms {
            if m.0.iter().any(|(w, _)| w.alphabet() != n) {
                return Err(invalid("monomial word over a different alphabet"));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn alphabet(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    pub fn variables(&self) -> BTreeSet<Word> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(w, _)| w.clone())).collect()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.keys().next_back()
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> SparsePoly {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> SparsePoly {
        let mut out = SparsePoly::zero(self.n);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Substitutes a value for every variable.
    pub fn eval<S: Scalar>(&self, mut value: impl FnMut(&Word) -> Result<S>) -> Result<S> {
        let mut cache: BTreeMap<&Word, S> = BTreeMap::new();
        let mut total = S::zero();
        for (m, c) in &self.terms {
            let mut term = S::from_rational(c);
            for (w, e) in &m.0 {
                let v = match cache.get(w) {
                    Some(v) => v.clone(),
                    None => {
                        let v = value(w)?;
                        cache.insert(w, v.clone());
                        v
                    }
                };
                for _ in 0..*e {
                    term = term * v.clone();
                }
            }
            total = total + term;
        }
        Ok(total)
    }

    /// Renames every variable `x_w` to `x_f(w)`, merging terms that collide.
    pub fn map_words(&self, mut f: impl FnMut(&Word) -> Result<Word>) -> Result<SparsePoly> {
        let mut out = SparsePoly::zero(self.n);
        for (m, c) in &self.terms {
            let factors = m.0.iter().map(|(w, e)| Ok((f(w)?, *e))).collect::<Result<Vec<_>>>()?;
            out.add_term(Monomial::from_factors(factors), c.clone());
        }
        Ok(out)
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.0.is_empty() {
                f.write_str(&format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

/// Dimension of the rational span of a set of polynomials.
pub fn span_dimension(polys: &[SparsePoly]) -> usize {
    let monomials: BTreeSet<&Monomial> = polys.iter().flat_map(|p| p.terms.keys()).collect();
    let index: BTreeMap<&Monomial, usize> = monomials.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let cols = index.len();
    if cols == 0 {
        return 0;
    }
    let mut data = vec![Rational::zero(); polys.len() * cols];
    for (r, p) in polys.iter().enumerate() {
        for (m, c) in &p.terms {
            data[r * cols + index[m]] = c.clone();
        }
    }
    rational_rank_info(polys.len(), cols, &data).rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn x(s: &str) -> SparsePoly {
        SparsePoly::var(Word::parse(3, s).unwrap())
    }

    #[test]
    fn arithmetic_and_display() {
        let det = x("11").mul(&x("22")).sub(&x("12").mul(&x("21")));
        assert_eq!(det.to_string(), "x11*x22 - x21*x12");
        assert!(det.is_homogeneous());
        assert_eq!(det.degree(), 2);
        assert!(det.sub(&det).is_zero());
        let sq = x("1").mul(&x("1")).scale(&rat(-3));
        assert_eq!(sq.to_string(), "-3*x1^2");
        let c = SparsePoly::constant(3, rat(5));
        assert_eq!(c.eval::<Rational>(|_| unreachable!()).unwrap(), rat(5));
        assert!(!c.add(&x("1")).is_homogeneous());
    }

    #[test]
    fn evaluation() {
        let p = x("1").mul(&x("2")).add(&x("1").scale(&rat(2)));
        let v = p.eval(|w| Ok(rat(w.get(1) as i64 + 1))).unwrap();
        assert_eq!(v, rat(2 * 3 + 2 * 2));
    }

    #[test]
    fn renaming_merges_terms() {
        let p = x("1").add(&x("2"));
        let q = p.map_words(|_| Ok(Word::parse(3, "1").unwrap())).unwrap();
        assert_eq!(q, x("1").scale(&rat(2)));
    }

    #[test]
    fn span_of_dependent_polys() {
        let a = x("1").add(&x("2"));
        let b = x("1").sub(&x("2"));
        let c = x("1").scale(&rat(4));
        assert_eq!(span_dimension(&[a, b, c]), 2);
        assert_eq!(span_dimension(&[]), 0);
    }
}
