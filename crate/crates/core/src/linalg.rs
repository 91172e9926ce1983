//! Dense matrices plus the exact, modular and floating-point rank kernels.
//!
//! Exact rank uses fraction-free (Bareiss) elimination on rows cleared of
//! denominators. Elimination runs in checked `i128` first and restarts in
//! `BigInt` if any intermediate minor overflows.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{shape, Result};
use crate::scalar::{Rational, Scalar};

pub const DEFAULT_FLOAT_TOL: f64 = 1e-9;

/// Rank plus pivot rows/columns selecting a nonsingular square submatrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankInfo {
    pub rank: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape(format!(
                "matrix of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| S::zero())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Matrix<S>) -> Result<Matrix<S>> {
        if self.cols != other.rows {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = S::zero();
            for t in 0..self.cols {
                acc = acc + self.get(i, t).clone() * other.get(t, j).clone();
            }
            acc
        }))
    }

    pub fn sub(&self, other: &Matrix<S>) -> Result<Matrix<S>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape("matrix difference of unequal shapes"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: &S) -> Matrix<S> {
        let data = self.data.iter().map(|a| a.clone() * c.clone()).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn rank(&self, tol: Option<f64>) -> usize {
        S::rank_info(self.rows, self.cols, &self.data, tol).rank
    }

    pub fn rank_info(&self, tol: Option<f64>) -> RankInfo {
        S::rank_info(self.rows, self.cols, &self.data, tol)
    }

    pub fn det(&self) -> Result<S> {
        if self.rows != self.cols {
            return Err(shape("determinant of a non-square matrix"));
        }
        Ok(S::determinant(self.rows, &self.data))
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix<S> {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Classical adjugate by cofactors; defined for singular matrices too.
    pub fn adjugate(&self) -> Result<Matrix<S>> {
        if self.rows != self.cols {
            return Err(shape("adjugate of a non-square matrix"));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(Matrix::identity(1));
        }
        let mut adj = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                let minor = self.select(&rows, &cols).det()?;
                let v = if (i + j) % 2 == 0 { minor } else { -minor };
                adj.set(i, j, v);
            }
        }
        Ok(adj)
    }
}

// ---------------------------------------------------------------------------
// Fraction-free elimination
// ---------------------------------------------------------------------------

trait ElimInt: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// `(a*b - c*d) / prev`, exact.
    fn step(a: &Self, b: &Self, c: &Self, d: &Self, prev: &Self) -> Option<Self>;
}

impl ElimInt for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn step(a: &Self, b: &Self, c: &Self, d: &Self, prev: &Self) -> Option<Self> {
        let lhs = a.checked_mul(*b)?;
        let rhs = c.checked_mul(*d)?;
        Some(lhs.checked_sub(rhs)? / prev)
    }
}

impl ElimInt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn step(a: &Self, b: &Self, c: &Self, d: &Self, prev: &Self) -> Option<Self> {
        Some((a * b - c * d) / prev)
    }
}

struct Echelon<T> {
    info: RankInfo,
    last_pivot: T,
    swaps: usize,
}

fn bareiss<T: ElimInt>(mut m: Vec<Vec<T>>, ncols: usize) -> Option<Echelon<T>> {
    let nrows = m.len();
    let mut perm: Vec<usize> = (0..nrows).collect();
    let mut prev = T::one();
    let mut r = 0;
    let mut swaps = 0;
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(piv) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        if piv != r {
            m.swap(piv, r);
            perm.swap(piv, r);
            swaps += 1;
        }
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        for row in tail.iter_mut() {
            if row[c].is_zero() {
                // (p*x - 0*y)/prev still has to be applied to keep the invariant.
                for j in c + 1..ncols {
                    if !row[j].is_zero() {
                        row[j] = T::step(&pivot_row[c], &row[j], &T::zero(), &T::zero(), &prev)?;
                    }
                }
                continue;
            }
            for j in c + 1..ncols {
                row[j] = T::step(&pivot_row[c], &row[j], &row[c], &pivot_row[j], &prev)?;
            }
            row[c] = T::zero();
        }
        prev = pivot_row[c].clone();
        rows.push(perm[r]);
        cols.push(c);
        r += 1;
    }
    Some(Echelon {
        info: RankInfo { rank: r, rows, cols },
        last_pivot: prev,
        swaps,
    })
}

/// Integer rows obtained by clearing each row's denominators, plus the
/// per-row scale factors.
fn clear_denominators(rows: usize, cols: usize, data: &[Rational]) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut out = Vec::with_capacity(rows);
    let mut scales = Vec::with_capacity(rows);
    for i in 0..rows {
        let row = &data[i * cols..(i + 1) * cols];
        let l = row.iter().fold(<BigInt as One>::one(), |acc, q| acc.lcm(q.denom()));
        out.push(row.iter().map(|q| q.numer() * (&l / q.denom())).collect());
        scales.push(l);
    }
    (out, scales)
}

fn integer_echelon(m: Vec<Vec<BigInt>>, ncols: usize) -> Echelon<BigInt> {
    const SMALL: i128 = 1 << 62;
    let small: Option<Vec<Vec<i128>>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| x.to_i128().filter(|v| v.abs() < SMALL))
                .collect()
        })
        .collect();
    if let Some(small) = small {
        if let Some(e) = bareiss(small, ncols) {
            return Echelon {
                info: e.info,
                last_pivot: BigInt::from(e.last_pivot),
                swaps: e.swaps,
            };
        }
    }
    bareiss(m, ncols).expect("BigInt elimination cannot overflow")
}

/// Exact rank of an integer matrix.
pub fn integer_rank_info(m: Vec<Vec<BigInt>>, ncols: usize) -> RankInfo {
    integer_echelon(m, ncols).info
}

pub fn rational_rank_info(rows: usize, cols: usize, data: &[Rational]) -> RankInfo {
    let (m, _) = clear_denominators(rows, cols, data);
    integer_echelon(m, cols).info
}

pub fn rational_det(n: usize, data: &[Rational]) -> Rational {
    if n == 0 {
        return Rational::one();
    }
    let (m, scales) = clear_denominators(n, n, data);
    let e = integer_echelon(m, n);
    if e.info.rank < n {
        return Rational::zero();
    }
    let mut det = Rational::from_integer(e.last_pivot);
    if e.swaps % 2 == 1 {
        det = -det;
    }
    let denom = scales.iter().fold(<BigInt as One>::one(), |acc, s| acc * s);
    det / Rational::from_integer(denom)
}

/// Basis of the right kernel of a rational matrix, from its reduced row echelon form.
pub fn rational_nullspace(rows: usize, cols: usize, data: &[Rational]) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = (0..rows).map(|i| data[i * cols..(i + 1) * cols].to_vec()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(piv, r);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[i][f].clone();
            }
            v
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Prime fields
// ---------------------------------------------------------------------------

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Reduce a rational modulo `p`; `None` when `p` divides the denominator.
pub fn rational_mod_p(q: &Rational, p: u64) -> Option<u64> {
    let bp = BigInt::from(p);
    let num = q.numer().mod_floor(&bp).to_u64().expect("residue fits");
    let den = q.denom().mod_floor(&bp).to_u64().expect("residue fits");
    if den == 0 {
        return None;
    }
    Some(mul_mod(num, pow_mod(den, p - 2, p), p))
}

/// Rank over the prime field of order `p`; entries are reduced first.
pub fn rank_mod_p(mut m: Vec<Vec<u64>>, ncols: usize, p: u64) -> usize {
    let nrows = m.len();
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x %= p;
        }
    }
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(piv) = (r..nrows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(piv, r);
        let inv = pow_mod(m[r][c], p - 2, p);
        for j in c..ncols {
            m[r][j] = mul_mod(m[r][j], inv, p);
        }
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        for row in tail.iter_mut() {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for j in c..ncols {
                let t = mul_mod(f, pivot_row[j], p);
                row[j] = if row[j] >= t { row[j] - t } else { row[j] + p - t };
            }
        }
        r += 1;
    }
    r
}

// ---------------------------------------------------------------------------
// Floating point
// ---------------------------------------------------------------------------

/// Singular values above `tol * max(rows, cols) * sigma_max` are counted.
pub fn float_rank(rows: usize, cols: usize, data: &[f64], tol: f64) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    let m = DMatrix::from_row_slice(rows, cols, data);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tau = tol * rows.max(cols) as f64 * smax;
    sv.iter().filter(|&&s| s > tau).count()
}

pub fn float_rank_info(rows: usize, cols: usize, data: &[f64], tol: f64) -> RankInfo {
    let rank = float_rank(rows, cols, data, tol);
    // Complete pivoting picks a well-conditioned square submatrix of that size.
    let mut m = data.to_vec();
    let mut row_ids: Vec<usize> = (0..rows).collect();
    let mut col_ids: Vec<usize> = (0..cols).collect();
    for step in 0..rank {
        let (mut bi, mut bj, mut best) = (step, step, -1.0);
        for i in step..rows {
            for j in step..cols {
                let v = m[i * cols + j].abs();
                if v > best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if bi != step {
            for j in 0..cols {
                m.swap(bi * cols + j, step * cols + j);
            }
            row_ids.swap(bi, step);
        }
        if bj != step {
            for i in 0..rows {
                m.swap(i * cols + bj, i * cols + step);
            }
            col_ids.swap(bj, step);
        }
        let piv = m[step * cols + step];
        if piv == 0.0 {
            break;
        }
        for i in step + 1..rows {
            let f = m[i * cols + step] / piv;
            for j in step..cols {
                m[i * cols + j] -= f * m[step * cols + j];
            }
        }
    }
    let mut rows_sel = row_ids[..rank].to_vec();
    let mut cols_sel = col_ids[..rank].to_vec();
    rows_sel.sort_unstable();
    cols_sel.sort_unstable();
    RankInfo { rank, rows: rows_sel, cols: cols_sel }
}

pub fn float_det(n: usize, data: &[f64]) -> f64 {
    if n == 0 {
        return 1.0;
    }
    DMatrix::from_row_slice(n, n, data).determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    fn q(rows: &[&[i64]]) -> (usize, usize, Vec<Rational>) {
        let r = rows.len();
        let c = rows[0].len();
        (r, c, rows.iter().flat_map(|row| row.iter().map(|&v| rat(v))).collect())
    }

    #[test]
    fn rank_examples() {
        let (r, c, zero) = q(&[&[0, 0], &[0, 0]]);
        assert_eq!(rational_rank_info(r, c, &zero).rank, 0);
        let (r, c, id) = q(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(rational_rank_info(r, c, &id).rank, 3);
        let (r, c, m) = q(&[&[1, 2], &[2, 4]]);
        assert_eq!(rational_rank_info(r, c, &m).rank, 1);
    }

    #[test]
    fn pivots_select_nonsingular_submatrix() {
        let (r, c, m) = q(&[&[0, 0, 1, 2], &[0, 0, 2, 4], &[1, 1, 0, 5], &[2, 2, 1, 12]]);
        let info = rational_rank_info(r, c, &m);
        assert_eq!(info.rank, 2);
        let mat = Matrix::new(r, c, m).unwrap();
        let sub = mat.select(&info.rows, &info.cols);
        assert!(!sub.det().unwrap().is_zero());
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let data: Vec<Rational> = [3, -1, 2, 5, 0, 7, 1, 4, -6].iter().map(|&v| ratio(v, 3)).collect();
        let d = rational_det(3, &data);
        let a = |i: usize, j: usize| data[i * 3 + j].clone();
        let expected = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        assert_eq!(d, expected);
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = 1i64 << 61;
        let (r, c, m) = q(&[&[big, 3, 5], &[7, big, 11], &[13, 17, big]]);
        let info = rational_rank_info(r, c, &m);
        assert_eq!(info.rank, 3);
        let d = rational_det(3, &m);
        let a = |i: usize, j: usize| m[i * 3 + j].clone();
        let expected = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        assert_eq!(d, expected);
    }

    #[test]
    fn nullspace_vectors_are_annihilated() {
        let (r, c, m) = q(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let ker = rational_nullspace(r, c, &m);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            for i in 0..r {
                let s: Rational = (0..c).map(|j| &m[i * c + j] * &v[j]).sum();
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn modular_rank_and_primality() {
        assert!(is_prime(2_147_483_659));
        assert!(!is_prime(2_147_483_657 * 3));
        assert!(is_prime(4_294_967_291));
        let m = vec![vec![1, 2], vec![2, 4]];
        assert_eq!(rank_mod_p(m, 2, 7), 1);
        // 5 = 0 mod 5 collapses the rank.
        let m = vec![vec![1, 0], vec![0, 5]];
        assert_eq!(rank_mod_p(m, 2, 5), 1);
        assert_eq!(rational_mod_p(&ratio(1, 2), 7), Some(4));
        assert_eq!(rational_mod_p(&ratio(1, 7), 7), None);
    }

    #[test]
    fn float_rank_threshold() {
        let m = [1.0, 2.0, 2.0, 4.0 + 1e-14];
        assert_eq!(float_rank(2, 2, &m, DEFAULT_FLOAT_TOL), 1);
        let info = float_rank_info(2, 2, &[1.0, 0.0, 0.0, 2.0], DEFAULT_FLOAT_TOL);
        assert_eq!(info.rank, 2);
        assert!((float_det(2, &[1.0, 2.0, 3.0, 4.0]) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn adjugate_times_matrix_is_det_identity() {
        let data: Vec<Rational> = [2, 1, 0, 1, 3, 1, 0, 1, 4].iter().map(|&v| rat(v)).collect();
        let m = Matrix::new(3, 3, data).unwrap();
        let prod = m.mul(&m.adjugate().unwrap()).unwrap();
        let d = m.det().unwrap();
        assert_eq!(prod, Matrix::<Rational>::identity(3).scale(&d));
    }
}
