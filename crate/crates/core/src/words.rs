//! Finitely supported words over `{0..n-1}` and the monoids acting on them:
//! increasing maps (`Inc`) and substitutions (`Subs`), a substitution element
//! being a finite sequence of pairwise disjoint position sets.
//!
//! Positions are 1-based throughout this module.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{invalid, Error, Result};

/// A word over `{0..n-1}` with finitely many nonzero symbols.
///
/// Stored as the symbol sequence up to the last nonzero position, so two
/// words are equal exactly when they agree at every position.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word {
    n: usize,
    symbols: Vec<u8>,
}

impl Word {
    pub fn zero(n: usize) -> Self {
        Word { n, symbols: Vec::new() }
    }

    /// Word from its symbols at positions `1, 2, ...`; trailing zeros are dropped.
    pub fn from_symbols(n: usize, symbols: &[usize]) -> Result<Self> {
        if !(1..=256).contains(&n) {
            return Err(invalid(format!("alphabet size {n} must lie in 1..=256")));
        }
        let mut out = Vec::with_capacity(symbols.len());
        for (i, &s) in symbols.iter().enumerate() {
            if s >= n {
                return Err(Error::SymbolOutOfRange { position: i + 1, symbol: s, alphabet: n });
            }
            out.push(s as u8);
        }
        while out.last() == Some(&0) {
            out.pop();
        }
        Ok(Word { n, symbols: out })
    }

    /// Word from `(position, symbol)` pairs; zero symbols are allowed and ignored.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let len = pairs.iter().map(|&(p, _)| p).max().unwrap_or(0);
        let mut symbols = vec![0; len];
        let mut seen = BTreeSet::new();
        for &(pos, sym) in pairs {
            if pos == 0 {
                return Err(invalid("word positions start at 1"));
            }
            if !seen.insert(pos) {
                return Err(invalid(format!("position {pos} given twice")));
            }
            symbols[pos - 1] = sym;
        }
        Word::from_symbols(n, &symbols)
    }

    /// Digit-string form such as `"0012"`; `""` and `"0"` are the zero word.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        if n > 10 {
            return Err(invalid("digit-string words need an alphabet of at most 10 symbols"));
        }
        let symbols = text
            .trim()
            .chars()
            .enumerate()
            .map(|(i, c)| {
                c.to_digit(10).map(|d| d as usize).ok_or_else(|| Error::Parse {
                    offset: i,
                    message: format!("`{c}` is not a digit"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Word::from_symbols(n, &symbols)
    }

    pub fn alphabet(&self) -> usize {
        self.n
    }

    /// Symbol at a 1-based position; zero past the support.
    pub fn get(&self, pos: usize) -> usize {
        if pos == 0 {
            return 0;
        }
        self.symbols.get(pos - 1).map_or(0, |&s| s as usize)
    }

    /// Symbols at positions `1..=max_support()`.
    pub fn symbols(&self) -> Vec<usize> {
        self.symbols.iter().map(|&s| s as usize).collect()
    }

    /// Largest nonzero position, 0 for the zero word.
    pub fn max_support(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Sorted nonzero positions.
    pub fn support(&self) -> Vec<usize> {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.support().into_iter().map(|p| (p, self.get(p))).collect()
    }

    /// `sum_j w(j) n^j`, the value of the word read as an n-ary numeral
    /// with position `j` having weight `n^j`.
    pub fn order_key(&self) -> BigUint {
        let n = BigUint::from(self.n);
        self.symbols
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &s| (acc + BigUint::from(s)) * &n)
    }

    /// Union of two words with disjoint supports.
    pub fn disjoint_sum(&self, other: &Word) -> Result<Word> {
        if self.n != other.n {
            return Err(invalid("words over different alphabets"));
        }
        let len = self.max_support().max(other.max_support());
        let mut symbols = Vec::with_capacity(len);
        for pos in 1..=len {
            let (a, b) = (self.get(pos), other.get(pos));
            if a != 0 && b != 0 {
                return Err(invalid(format!("supports of {self} and {other} overlap at position {pos}")));
            }
            symbols.push(a + b);
        }
        Word::from_symbols(self.n, &symbols)
    }

    /// Same word with positions restricted to a set; others become zero.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Word {
        let symbols: Vec<usize> = (1..=self.max_support())
            .map(|p| if keep(p) { self.get(p) } else { 0 })
            .collect();
        Word::from_symbols(self.n, &symbols).expect("symbols already validated")
    }

    /// The word obtained by dropping positions `1..=k` and shifting the rest down.
    pub fn tail_after(&self, k: usize) -> Word {
        let symbols: Vec<usize> = (k + 1..=self.max_support()).map(|p| self.get(p)).collect();
        Word::from_symbols(self.n, &symbols).expect("symbols already validated")
    }

    /// Digit string with trailing zeros dropped (`"0"` for the zero word),
    /// falling back to `[(pos,sym),...]` for alphabets beyond ten symbols.
    pub fn to_digit_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        if self.n <= 10 {
            self.symbols.iter().map(|s| char::from(b'0' + s)).collect()
        } else {
            let parts: Vec<String> = self.pairs().iter().map(|(p, s)| format!("({p},{s})")).collect();
            format!("[{}]", parts.join(","))
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_digit_string())
    }
}

impl serde::Serialize for Word {
    /// JSON pair form `[[position, symbol], ...]` over the support.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let pairs = self.pairs();
        let mut seq = serializer.serialize_seq(Some(pairs.len()))?;
        for (p, s) in pairs {
            seq.serialize_element(&[p, s])?;
        }
        seq.end()
    }
}

impl Ord for Word {
    /// Numeric order of [`Word::order_key`], alphabet size breaking ties.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.n == other.n {
            self.symbols
                .len()
                .cmp(&other.symbols.len())
                .then_with(|| self.symbols.iter().rev().cmp(other.symbols.iter().rev()))
        } else {
            self.order_key().cmp(&other.order_key()).then(self.n.cmp(&other.n))
        }
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A strictly increasing map `[m] -> N`, the prefix of an `Inc` element.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IncMap(Vec<usize>);

impl IncMap {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        if values.first() == Some(&0) {
            return Err(invalid("increasing maps take positive values"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!("{values:?} is not strictly increasing")));
        }
        Ok(IncMap(values))
    }

    pub fn identity(m: usize) -> Self {
        IncMap((1..=m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    /// Image of position `j` (1-based).
    pub fn at(&self, j: usize) -> usize {
        self.0[j - 1]
    }

    /// Moves the symbol at position `j` to position `pi(j)`.
    pub fn act(&self, w: &Word) -> Result<Word> {
        if w.max_support() > self.len() {
            return Err(Error::SupportOverflow { support: w.max_support(), domain: self.len() });
        }
        let pairs: Vec<(usize, usize)> = w.pairs().into_iter().map(|(p, s)| (self.at(p), s)).collect();
        Word::from_pairs(w.alphabet(), &pairs)
    }
}

pub fn inc_act(pi: &IncMap, w: &Word) -> Result<Word> {
    pi.act(w)
}

/// Prefix `(sigma(1), .., sigma(m))` of a substitution: pairwise disjoint
/// finite sets of positive positions, possibly empty.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubsElement(Vec<BTreeSet<usize>>);

impl SubsElement {
    pub fn new(sets: Vec<BTreeSet<usize>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for set in &sets {
            for &x in set {
                if x == 0 {
                    return Err(invalid("substitution sets hold positive positions"));
                }
                if !seen.insert(x) {
                    return Err(invalid(format!("position {x} appears in two sets")));
                }
            }
        }
        Ok(SubsElement(sets))
    }

    pub fn from_lists(lists: &[Vec<usize>]) -> Result<Self> {
        SubsElement::new(lists.iter().map(|l| l.iter().copied().collect()).collect())
    }

    /// The unit `({1}, {2}, .., {m})`.
    pub fn identity(m: usize) -> Self {
        SubsElement((1..=m).map(|i| BTreeSet::from([i])).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.0
    }

    /// The set `sigma(q)` for a 1-based index.
    pub fn at(&self, q: usize) -> &BTreeSet<usize> {
        &self.0[q - 1]
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.0.iter().map(|s| s.iter().copied().collect()).collect()
    }

    /// Whether the element lies in `Subs_<`: every set nonempty and the
    /// set maxima strictly increasing.
    pub fn is_increasing(&self) -> bool {
        let mut prev = 0;
        for set in &self.0 {
            match set.last() {
                Some(&m) if m > prev => prev = m,
                _ => return false,
            }
        }
        true
    }

    /// Product `self * rhs`: `(sigma pi)(p) = union of sigma(q) over q in pi(p)`.
    pub fn mul(&self, rhs: &SubsElement) -> Result<SubsElement> {
        let sets = rhs
            .0
            .iter()
            .map(|pset| {
                let mut out = BTreeSet::new();
                for &q in pset {
                    if q > self.len() {
                        return Err(Error::SupportOverflow { support: q, domain: self.len() });
                    }
                    out.extend(self.at(q).iter().copied());
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        SubsElement::new(sets)
    }

    /// `(sigma w)(p) = w(q)` when `p` lies in `sigma(q)`, zero otherwise.
    pub fn act(&self, w: &Word) -> Result<Word> {
        if w.max_support() > self.len() {
            return Err(Error::SupportOverflow { support: w.max_support(), domain: self.len() });
        }
        let pairs: Vec<(usize, usize)> = self
            .0
            .iter()
            .enumerate()
            .flat_map(|(q, set)| {
                let s = w.get(q + 1);
                set.iter().map(move |&p| (p, s))
            })
            .collect();
        Word::from_pairs(w.alphabet(), &pairs)
    }
}

pub fn subs_mul(sigma: &SubsElement, pi: &SubsElement) -> Result<SubsElement> {
    sigma.mul(pi)
}

pub fn subs_act(sigma: &SubsElement, w: &Word) -> Result<Word> {
    sigma.act(w)
}

pub fn word_support(w: &Word) -> Vec<usize> {
    w.support()
}

pub fn word_order_key(w: &Word) -> BigUint {
    w.order_key()
}

/// Greedy leftmost increasing map sending every position `1..=max supp(w_a)`
/// (zeros included) to a position of `w_b` holding the same symbol.
pub fn higman_embed(w_a: &Word, w_b: &Word) -> Option<IncMap> {
    embed_prefix(w_a, w_b, w_a.max_support())
}

fn embed_prefix(w_a: &Word, w_b: &Word, len: usize) -> Option<IncMap> {
    let mut out = Vec::with_capacity(len);
    let mut next = 1;
    for j in 1..=len {
        let s = w_a.get(j);
        let pos = if s == 0 {
            (next..).find(|&i| w_b.get(i) == 0)?
        } else {
            (next..=w_b.max_support()).find(|&i| w_b.get(i) == s)?
        };
        out.push(pos);
        next = pos + 1;
    }
    Some(IncMap(out))
}

fn last_occurrence(w: &Word, s: usize) -> Option<usize> {
    (1..=w.max_support()).rev().find(|&p| w.get(p) == s)
}

/// An element `sigma` of `Subs_<` with `sigma w_a = w_b`, or `None` when
/// no such element exists.
///
/// Recursive construction: `s` is the nonzero symbol of `w_a` whose last
/// occurrence `j_a` comes first (smallest symbol on ties), `j_b` its last
/// occurrence in `w_b`. The head `w_a(1..j_a-1)` is matched into
/// `w_b(1..j_b-1)` by a greedy increasing map, the tails after `j_a` and
/// `j_b` are matched recursively, and the positions of `w_b` before `j_b`
/// missed by the head map are absorbed into `sigma(j_a)` and the first
/// tail occurrences of each symbol. The returned element has length
/// `max supp(w_a)`.
pub fn subs_witness(w_a: &Word, w_b: &Word) -> Option<SubsElement> {
    if w_a.alphabet() != w_b.alphabet() {
        return None;
    }
    if w_a.is_zero() {
        return w_b.is_zero().then(|| SubsElement(Vec::new()));
    }
    let (j_a, s) = w_a
        .support()
        .iter()
        .map(|&p| w_a.get(p))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|s| (last_occurrence(w_a, s).expect("symbol occurs"), s))
        .min()?;
    let j_b = last_occurrence(w_b, s)?;
    let pi = embed_prefix(w_a, w_b, j_a - 1)?;
    if j_a > 1 && pi.at(j_a - 1) >= j_b {
        return None;
    }
    let gamma = subs_witness(&w_a.tail_after(j_a), &w_b.tail_after(j_b))?;
    let sigma = subs_witness_from_parts(w_a, w_b, &pi, &gamma, j_a, j_b, w_a.max_support())?;
    (sigma.act(w_a).ok()? == *w_b && sigma.is_increasing()).then_some(sigma)
}

/// Assembles the substitution from its ingredients:
///
/// ```text
/// sigma(j) = {pi(j)}                                          j < j_a
///          = {j_b} + {i < j_b : w_b(i) = s, i not in pi[j_a-1]}    j = j_a
///          = (j_b + gamma(j - j_a)) + {i < j_b : w_b(i) = w_a(j), i not in pi[j_a-1]}
///                                   j > j_a, first occurrence of w_a(j) in the tail
///          = j_b + gamma(j - j_a)                             other j > j_a
/// ```
///
/// `pi` needs at least `j_a - 1` values and `gamma` at least
/// `len - j_a` sets. Returns `None` if a needed value is missing or a
/// symbol of the head gap has no first occurrence in the tail.
pub fn subs_witness_from_parts(
    w_a: &Word,
    w_b: &Word,
    pi: &IncMap,
    gamma: &SubsElement,
    j_a: usize,
    j_b: usize,
    len: usize,
) -> Option<SubsElement> {
    if j_a == 0 || j_a > len || pi.len() + 1 < j_a || gamma.len() + j_a < len {
        return None;
    }
    let head: BTreeSet<usize> = pi.values()[..j_a - 1].iter().copied().collect();
    let gap = |sym: usize| -> BTreeSet<usize> {
        (1..j_b).filter(|i| w_b.get(*i) == sym && !head.contains(i)).collect()
    };
    let tail_a = w_a.tail_after(j_a);
    let mut first_seen = BTreeSet::new();
    let mut sets = Vec::with_capacity(len);
    for j in 1..=len {
        let set: BTreeSet<usize> = match j.cmp(&j_a) {
            Ordering::Less => BTreeSet::from([pi.at(j)]),
            Ordering::Equal => {
                let mut set = gap(w_a.get(j_a));
                set.insert(j_b);
                set
            }
            Ordering::Greater => {
                let mut set: BTreeSet<usize> = gamma.at(j - j_a).iter().map(|i| j_b + i).collect();
                let sym = w_a.get(j);
                if first_seen.insert(sym) {
                    set.extend(gap(sym));
                }
                set
            }
        };
        sets.push(set);
    }
    // Every gap position must be absorbed somewhere.
    let s = w_a.get(j_a);
    for i in 1..j_b {
        let sym = w_b.get(i);
        if sym != 0 && !head.contains(&i) && sym != s && !(1..=tail_a.max_support()).any(|t| tail_a.get(t) == sym) {
            return None;
        }
    }
    SubsElement::new(sets).ok()
}

/// The canonical word tuples `(u, u')` whose `2k x N` table lists every
/// nonzero column starting or ending with `k` zeros exactly once.
///
/// Column order: first the columns whose lower block is zero, then those
/// whose upper block is zero; within each group by the n-ary value
/// `sum_i c_i n^(i-1)` of the nonzero block, from 1 to `n^k - 1`.
pub fn canonical_minor_words(k: usize, n: usize) -> Result<(Vec<Word>, Vec<Word>)> {
    if k == 0 || n < 2 {
        return Err(invalid("canonical minor words need k >= 1 and n >= 2"));
    }
    let count = n
        .checked_pow(k as u32)
        .filter(|c| *c <= 1 << 20)
        .ok_or_else(|| invalid("canonical table too large"))?
        - 1;
    let columns = 2 * count;
    let mut upper = vec![vec![0usize; columns]; k];
    let mut lower = vec![vec![0usize; columns]; k];
    for value in 1..=count {
        let mut v = value;
        for i in 0..k {
            upper[i][value - 1] = v % n;
            lower[i][count + value - 1] = v % n;
            v /= n;
        }
    }
    let words = |rows: Vec<Vec<usize>>| rows.iter().map(|r| Word::from_symbols(n, r)).collect::<Result<Vec<_>>>();
    Ok((words(upper)?, words(lower)?))
}

/// Column `j` of the table whose rows are the given words.
fn table_column(rows: &[&Word], j: usize) -> Vec<usize> {
    rows.iter().map(|w| w.get(j)).collect()
}

/// The substitution carrying the canonical tuples onto `(w, w')`:
/// `sigma(j)` collects the columns of the target table equal to column `j`
/// of the canonical table (empty for zero canonical columns).
pub fn orbit_element(canonical: (&[Word], &[Word]), target: (&[Word], &[Word])) -> Result<SubsElement> {
    let k = canonical.0.len();
    if canonical.1.len() != k || target.0.len() != k || target.1.len() != k {
        return Err(invalid("word tuples must all have the same length"));
    }
    let src: Vec<&Word> = canonical.0.iter().chain(canonical.1).collect();
    let dst: Vec<&Word> = target.0.iter().chain(target.1).collect();
    let src_len = src.iter().map(|w| w.max_support()).max().unwrap_or(0);
    let dst_len = dst.iter().map(|w| w.max_support()).max().unwrap_or(0);
    let dst_cols: Vec<Vec<usize>> = (1..=dst_len).map(|l| table_column(&dst, l)).collect();
    let sets = (1..=src_len)
        .map(|j| {
            let col = table_column(&src, j);
            if col.iter().all(|&x| x == 0) {
                return BTreeSet::new();
            }
            (1..=dst_len).filter(|&l| dst_cols[l - 1] == col).collect()
        })
        .collect();
    SubsElement::new(sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, s: &str) -> Word {
        Word::parse(n, s).unwrap()
    }

    #[test]
    fn support_and_trimming() {
        assert!(w(3, "").support().is_empty());
        assert_eq!(w(3, "0012").support(), vec![3, 4]);
        assert_eq!(w(3, "001200"), w(3, "0012"));
        assert_eq!(w(3, "0").max_support(), 0);
        assert_eq!(w(3, "0120").to_string(), "012");
        assert!(Word::parse(2, "3").is_err());
        assert!(matches!(Word::parse(3, "1x"), Err(Error::Parse { offset: 1, .. })));
    }

    #[test]
    fn order_key_values() {
        assert_eq!(w(3, "").order_key(), BigUint::zero());
        assert_eq!(w(3, "12").order_key(), BigUint::from(21u32));
        assert!(w(3, "12") > w(3, "21"));
        assert!(w(3, "001") > w(3, "22"));
    }

    #[test]
    fn inc_action() {
        let pi = IncMap::new(vec![2, 4, 6]).unwrap();
        assert_eq!(pi.act(&w(3, "12")).unwrap(), w(3, "0102"));
        assert_eq!(IncMap::identity(4).act(&w(3, "1202")).unwrap(), w(3, "1202"));
        assert!(pi.act(&w(3, "0001")).is_err());
        assert!(IncMap::new(vec![1, 1]).is_err());
    }

    #[test]
    fn subs_product_and_action() {
        let sigma = SubsElement::from_lists(&[vec![1, 2], vec![3]]).unwrap();
        let pi = SubsElement::from_lists(&[vec![1], vec![2]]).unwrap();
        assert_eq!(sigma.mul(&pi).unwrap(), sigma);
        assert_eq!(SubsElement::identity(3).mul(&sigma).unwrap(), sigma);
        assert!(SubsElement::from_lists(&[vec![1], vec![1]]).is_err());
        assert!(sigma.mul(&SubsElement::from_lists(&[vec![3]]).unwrap()).is_err());
    }

    fn paper_sigma() -> SubsElement {
        SubsElement::from_lists(&[
            vec![1],
            vec![2],
            vec![5],
            vec![6],
            vec![7],
            vec![9],
            vec![3, 10],
            vec![4, 8, 11, 12, 14],
            vec![15],
            vec![13, 16],
            vec![17],
            vec![18],
        ])
        .unwrap()
    }

    #[test]
    fn worked_example_action() {
        let sigma = paper_sigma();
        assert!(sigma.is_increasing());
        assert_eq!(sigma.act(&w(3, "0010212011")).unwrap().to_string(), "0020102012001011");
    }

    #[test]
    fn worked_example_from_parts() {
        let (wa, wb) = (w(3, "0010212011"), w(3, "0020102012001011"));
        let pi = IncMap::new(vec![1, 2, 5, 6, 7, 9, 10, 11, 13, 15, 17, 18]).unwrap();
        let gamma = SubsElement::from_lists(&[vec![1, 2, 4], vec![5], vec![3, 6], vec![7], vec![8]]).unwrap();
        assert_eq!(gamma.act(&w(3, "011")).unwrap(), w(3, "001011"));
        let sigma = subs_witness_from_parts(&wa, &wb, &pi, &gamma, 7, 10, 12).unwrap();
        assert_eq!(sigma, paper_sigma());
    }

    #[test]
    fn greedy_embedding() {
        let (wa, wb) = (w(3, "0010212011"), w(3, "0020102012001011"));
        let pi = higman_embed(&wa, &wb).unwrap();
        assert_eq!(pi.values(), &[1, 2, 5, 6, 7, 9, 10, 11, 13, 15]);
        for j in 1..=wa.max_support() {
            assert_eq!(wa.get(j), wb.get(pi.at(j)));
        }
        assert!(higman_embed(&w(3, "2"), &w(3, "1")).is_none());
        assert_eq!(higman_embed(&wa, &wa).unwrap(), IncMap::identity(10));
    }

    #[test]
    fn witness_for_worked_example() {
        let (wa, wb) = (w(3, "0010212011"), w(3, "0020102012001011"));
        let sigma = subs_witness(&wa, &wb).unwrap();
        assert_eq!(sigma.act(&wa).unwrap(), wb);
        assert!(sigma.is_increasing());
        assert!(subs_witness(&wa, &wa).is_some());
        assert!(subs_witness(&w(3, "1"), &w(3, "21")).is_none());
        assert!(subs_witness(&w(3, ""), &w(3, "")).is_some());
        assert!(subs_witness(&w(3, ""), &w(3, "1")).is_none());
    }

    #[test]
    fn canonical_words() {
        let (u, v) = canonical_minor_words(1, 2).unwrap();
        assert_eq!(u, vec![w(2, "1")]);
        assert_eq!(v, vec![w(2, "01")]);
        for k in 1..=2 {
            for n in 2..=3 {
                let (u, v) = canonical_minor_words(k, n).unwrap();
                let rows: Vec<&Word> = u.iter().chain(&v).collect();
                let len = rows.iter().map(|r| r.max_support()).max().unwrap();
                let cols: BTreeSet<Vec<usize>> = (1..=len).map(|j| table_column(&rows, j)).collect();
                assert_eq!(len, 2 * (n.pow(k as u32) - 1));
                assert_eq!(cols.len(), len);
                for a in &u {
                    for b in &v {
                        assert!(a.disjoint_sum(b).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_element_hits_target() {
        let (u, v) = canonical_minor_words(2, 2).unwrap();
        let target = (vec![w(2, "1"), w(2, "11")], vec![w(2, "001"), w(2, "0001")]);
        let sigma = orbit_element((&u, &v), (&target.0, &target.1)).unwrap();
        for (a, b) in u.iter().zip(&target.0).chain(v.iter().zip(&target.1)) {
            assert_eq!(&sigma.act(a).unwrap(), b);
        }
    }
}
