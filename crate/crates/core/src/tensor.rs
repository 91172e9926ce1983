//! Dense tensors and the operations that never increase (border) rank:
//! flattening, contraction, mode maps, factor permutation and the
//! embed/project pair between consecutive tensor powers.
//!
//! Layout is row-major with the last mode varying fastest. Modes are
//! 0-based in this API; word positions (see [`crate::words`]) are 1-based,
//! position `j` addressing mode `j - 1`.

use crate::error::{invalid, shape, Error, Result};
use crate::linalg::Matrix;
use crate::rng::{nonzero_int_vector, stream, task_rng};
use crate::scalar::{Field, Rational, Scalar};
use crate::words::Word;

/// A linear function on one mode, given by its coefficients.
pub type Covector<S> = Vec<S>;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    dims: Vec<usize>,
    data: Vec<S>,
}

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl<S: Scalar> Tensor<S> {
    pub fn new(dims: Vec<usize>, data: Vec<S>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(shape(format!("mode sizes must be positive, got {dims:?}")));
        }
        if data.len() != product(&dims) {
            return Err(shape(format!(
                "dims {dims:?} need {} entries, got {}",
                product(&dims),
                data.len()
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Tensor { dims: dims.to_vec(), data: vec![S::zero(); product(dims)] }
    }

    /// Order-0 tensor holding a single value.
    pub fn scalar(v: S) -> Self {
        Tensor { dims: vec![], data: vec![v] }
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> S) -> Self {
        let mut idx = vec![0; dims.len()];
        let n = product(dims);
        let mut data = Vec::with_capacity(n);
        for off in 0..n {
            if off > 0 {
                increment(&mut idx, dims);
            }
            data.push(f(&idx));
        }
        Tensor { dims: dims.to_vec(), data }
    }

    pub fn field(&self) -> Field {
        S::FIELD
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    /// Largest mode size; the size of the mode appended by [`Tensor::embed_tau`].
    pub fn ambient_size(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(1)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.data[self.offset(idx)]
    }

    pub fn multi_index(&self, mut off: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for m in (0..self.dims.len()).rev() {
            idx[m] = off % self.dims[m];
            off /= self.dims[m];
        }
        idx
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Tensor<T> {
        Tensor { dims: self.dims.clone(), data: self.data.iter().map(f).collect() }
    }

    pub fn to_float(&self) -> Tensor<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn add(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        if self.dims != other.dims {
            return Err(shape(format!("cannot add {:?} and {:?}", self.dims, other.dims)));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Tensor { dims: self.dims.clone(), data })
    }

    pub fn scale(&self, c: &S) -> Tensor<S> {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
    }

    /// Same entries, new shape with the same number of entries.
    pub fn reshape(&self, dims: &[usize]) -> Result<Tensor<S>> {
        Tensor::new(dims.to_vec(), self.data.clone())
    }

    /// Outer product of one vector per mode.
    pub fn pure(vectors: &[Vec<S>]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(invalid("pure tensor needs at least one vector"));
        }
        if vectors.iter().any(|v| v.is_empty()) {
            return Err(invalid("pure tensor factors must be non-empty"));
        }
        let dims: Vec<usize> = vectors.iter().map(Vec::len).collect();
        Ok(Tensor::from_fn(&dims, |idx| {
            idx.iter()
                .zip(vectors)
                .fold(S::one(), |acc, (&i, v)| acc * v[i].clone())
        }))
    }

    /// Matrix of shape `prod(dims[rows]) x prod(dims[rest])`.
    ///
    /// Row indices run row-major over the selected modes in ascending order,
    /// column indices row-major over the complementary modes.
    pub fn flatten(&self, row_modes: &[usize]) -> Result<Tensor<S>> {
        let p = self.order();
        let mut rows = row_modes.to_vec();
        rows.sort_unstable();
        rows.dedup();
        if rows.len() != row_modes.len() || rows.iter().any(|&m| m >= p) {
            return Err(invalid(format!("invalid mode set {row_modes:?} for order {p}")));
        }
        if rows.is_empty() || rows.len() == p {
            return Err(invalid("flattening needs a nonempty proper subset of modes"));
        }
        let cols: Vec<usize> = (0..p).filter(|m| !rows.contains(m)).collect();
        let (nr, nc) = (
            rows.iter().map(|&m| self.dims[m]).product::<usize>(),
            cols.iter().map(|&m| self.dims[m]).product::<usize>(),
        );
        let mut out = vec![S::zero(); nr * nc];
        let mut idx = vec![0; p];
        for off in 0..self.data.len() {
            if off > 0 {
                increment(&mut idx, &self.dims);
            }
            let r = rows.iter().fold(0, |acc, &m| acc * self.dims[m] + idx[m]);
            let c = cols.iter().fold(0, |acc, &m| acc * self.dims[m] + idx[m]);
            out[r * nc + c] = self.data[off].clone();
        }
        Ok(Tensor { dims: vec![nr, nc], data: out })
    }

    pub fn as_matrix(&self) -> Result<Matrix<S>> {
        if self.order() != 2 {
            return Err(shape(format!("expected a 2-mode tensor, got order {}", self.order())));
        }
        Matrix::new(self.dims[0], self.dims[1], self.data.clone())
    }

    /// Rank of a 2-mode tensor. Exact for rationals (the tolerance is
    /// ignored); for floats counts singular values above
    /// `tol * max(rows, cols) * sigma_max` with `tol` defaulting to `1e-9`.
    pub fn matrix_rank(&self, tol: Option<f64>) -> Result<usize> {
        if self.order() != 2 {
            return Err(shape(format!("matrix rank of an order-{} tensor", self.order())));
        }
        Ok(S::rank_info(self.dims[0], self.dims[1], &self.data, tol).rank)
    }

    /// Contraction of mode `j` along the linear function `phi`.
    pub fn contract(&self, j: usize, phi: &[S]) -> Result<Tensor<S>> {
        if j >= self.order() {
            return Err(invalid(format!("mode {j} out of range for order {}", self.order())));
        }
        let nj = self.dims[j];
        if phi.len() != nj {
            return Err(shape(format!("covector of length {} on mode of size {nj}", phi.len())));
        }
        let outer = product(&self.dims[..j]);
        let inner = product(&self.dims[j + 1..]);
        let mut data = vec![S::zero(); outer * inner];
        for o in 0..outer {
            for (i, c) in phi.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let base = (o * nj + i) * inner;
                for r in 0..inner {
                    let v = &self.data[base + r];
                    if !v.is_zero() {
                        let slot = &mut data[o * inner + r];
                        *slot = slot.clone() + c.clone() * v.clone();
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.remove(j);
        Ok(Tensor { dims, data })
    }

    /// Contraction along a pure tensor of covectors on distinct modes.
    pub fn contract_pure(&self, covectors: &[(usize, Covector<S>)]) -> Result<Tensor<S>> {
        let mut modes: Vec<usize> = covectors.iter().map(|(m, _)| *m).collect();
        modes.sort_unstable();
        modes.dedup();
        if modes.len() != covectors.len() {
            return Err(invalid("contraction modes must be distinct"));
        }
        let mut order: Vec<&(usize, Covector<S>)> = covectors.iter().collect();
        // Highest mode first keeps the remaining mode numbers valid.
        order.sort_by(|a, b| b.0.cmp(&a.0));
        let mut t = self.clone();
        for (m, phi) in order {
            t = t.contract(*m, phi)?;
        }
        Ok(t)
    }

    fn apply_mode(&self, j: usize, a: &Matrix<S>) -> Result<Tensor<S>> {
        let nj = self.dims[j];
        if a.cols() != nj {
            return Err(shape(format!(
                "map on mode {j} has {} columns, mode size is {nj}",
                a.cols()
            )));
        }
        let outer = product(&self.dims[..j]);
        let inner = product(&self.dims[j + 1..]);
        let m = a.rows();
        let mut data = vec![S::zero(); outer * m * inner];
        for o in 0..outer {
            for row in 0..m {
                for i in 0..nj {
                    let c = a.get(row, i);
                    if c.is_zero() {
                        continue;
                    }
                    let src = (o * nj + i) * inner;
                    let dst = (o * m + row) * inner;
                    for r in 0..inner {
                        let slot = &mut data[dst + r];
                        *slot = slot.clone() + c.clone() * self.data[src + r].clone();
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims[j] = m;
        Ok(Tensor { dims, data })
    }

    /// Multilinear action of one linear map per mode (`None` is the identity).
    pub fn mode_apply(&self, maps: &[Option<Matrix<S>>]) -> Result<Tensor<S>> {
        if maps.len() != self.order() {
            return Err(shape(format!("{} maps for an order-{} tensor", maps.len(), self.order())));
        }
        let mut t = self.clone();
        for (j, a) in maps.iter().enumerate() {
            if let Some(a) = a {
                t = t.apply_mode(j, a)?;
            }
        }
        Ok(t)
    }

    /// Moves the factor in mode `k` to mode `perm[k]`:
    /// `result(i_1..i_p) = self(i_perm[0], .., i_perm[p-1])`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Tensor<S>> {
        let p = self.order();
        let mut seen = vec![false; p];
        if perm.len() != p || perm.iter().any(|&x| x >= p || std::mem::replace(&mut seen[x], true)) {
            return Err(invalid(format!("{perm:?} is not a permutation of {p} modes")));
        }
        let mut dims = vec![0; p];
        for (k, &q) in perm.iter().enumerate() {
            dims[q] = self.dims[k];
        }
        let mut src = vec![0; p];
        Ok(Tensor::from_fn(&dims, |idx| {
            for k in 0..p {
                src[k] = idx[perm[k]];
            }
            self.get(&src).clone()
        }))
    }

    /// Tensor with `e_0` of the ambient size appended as a new last factor.
    pub fn embed_tau(&self) -> Tensor<S> {
        let n = self.ambient_size();
        let mut data = vec![S::zero(); self.data.len() * n];
        for (off, v) in self.data.iter().enumerate() {
            data[off * n] = v.clone();
        }
        let mut dims = self.dims.clone();
        dims.push(n);
        Tensor { dims, data }
    }

    /// Contraction of the last mode along `x_0 = (1, 0, .., 0)`.
    /// A 1-mode tensor projects to an order-0 scalar tensor.
    pub fn project_pi(&self) -> Result<Tensor<S>> {
        let p = self.order();
        if p == 0 {
            return Err(invalid("cannot project an order-0 tensor"));
        }
        let n = self.dims[p - 1];
        let data = self.data.iter().step_by(n).cloned().collect();
        Ok(Tensor { dims: self.dims[..p - 1].to_vec(), data })
    }

    /// Coordinate `x_w`, reading the tensor as embedded with trailing `e_0`
    /// factors when the word reaches past the last mode.
    pub fn coord(&self, w: &Word) -> Result<S> {
        let p = self.order();
        let n = self.ambient_size();
        let mut idx = Vec::with_capacity(p);
        for pos in 1..=p {
            let s = w.get(pos);
            if s >= self.dims[pos - 1] {
                return Err(Error::SymbolOutOfRange { position: pos, symbol: s, alphabet: self.dims[pos - 1] });
            }
            idx.push(s);
        }
        for pos in p + 1..=w.max_support() {
            let s = w.get(pos);
            if s >= n {
                return Err(Error::SymbolOutOfRange { position: pos, symbol: s, alphabet: n });
            }
            if s != 0 {
                return Ok(S::zero());
            }
        }
        Ok(self.get(&idx).clone())
    }
}

pub(crate) fn increment(idx: &mut [usize], dims: &[usize]) {
    for m in (0..dims.len()).rev() {
        idx[m] += 1;
        if idx[m] < dims[m] {
            return;
        }
        idx[m] = 0;
    }
}

/// A sum of pure tensors, each given by one vector per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct PureFactorization<S> {
    pub terms: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> PureFactorization<S> {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_tensor(&self, dims: &[usize]) -> Result<Tensor<S>> {
        let mut t = Tensor::zeros(dims);
        for term in &self.terms {
            let lens: Vec<usize> = term.iter().map(Vec::len).collect();
            if lens != dims {
                return Err(shape(format!("factor lengths {lens:?} do not match dims {dims:?}")));
            }
            t = t.add(&Tensor::pure(term)?)?;
        }
        Ok(t)
    }

    /// Image factorization under per-mode linear maps.
    pub fn mode_apply(&self, maps: &[Option<Matrix<S>>]) -> Result<PureFactorization<S>> {
        let terms = self
            .terms
            .iter()
            .map(|term| {
                term.iter()
                    .zip(maps)
                    .map(|(v, a)| match a {
                        None => Ok(v.clone()),
                        Some(a) => {
                            if a.cols() != v.len() {
                                return Err(shape("map does not match factor length"));
                            }
                            Ok((0..a.rows())
                                .map(|i| {
                                    v.iter()
                                        .enumerate()
                                        .fold(S::zero(), |acc, (j, x)| acc + a.get(i, j).clone() * x.clone())
                                })
                                .collect())
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PureFactorization { terms })
    }
}

/// A random integer tensor of rank at most `r`: the sum of `r` pure tensors
/// whose factor entries are uniform in `[-coeff_bound, coeff_bound]` and whose
/// factor vectors are all nonzero. Deterministic per seed.
pub fn random_rank(
    dims: &[usize],
    r: usize,
    seed: u64,
    coeff_bound: i64,
) -> Result<(Tensor<Rational>, PureFactorization<Rational>)> {
    if coeff_bound < 1 {
        return Err(invalid("coefficient bound must be at least 1"));
    }
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(shape(format!("invalid dims {dims:?}")));
    }
    let mut rng = task_rng(seed, &[stream::GENERATE]);
    let terms: Vec<Vec<Vec<Rational>>> = (0..r)
        .map(|_| {
            dims.iter()
                .map(|&d| nonzero_int_vector(&mut rng, d, coeff_bound).into_iter().map(Rational::from_i64).collect())
                .collect()
        })
        .collect();
    let f = PureFactorization { terms };
    Ok((f.to_tensor(dims)?, f))
}

/// Warning text for a tolerance that an exact field ignores.
pub fn tolerance_warning(field: Field, tol: Option<f64>) -> Option<&'static str> {
    match (field, tol) {
        (Field::Rational, Some(_)) => Some("tolerance ignored: exact rank is computed for rational tensors"),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::Zero;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn pure_examples() {
        let t = Tensor::pure(&[v(&[1, 0]), v(&[1, 0]), v(&[1, 0])]).unwrap();
        assert_eq!(t.get(&[0, 0, 0]), &rat(1));
        assert_eq!(t.data().iter().filter(|x| !x.is_zero()).count(), 1);

        let ones = Tensor::pure(&[v(&[1, 1]), v(&[1, 1])]).unwrap();
        assert!(ones.data().iter().all(|x| *x == rat(1)));

        let t = Tensor::pure(&[v(&[2, 3]), v(&[5, 7]), v(&[1, 1])]).unwrap();
        assert_eq!(t.get(&[0, 1, 1]), &rat(14));
        assert_eq!(t.get(&[1, 0, 0]), &rat(15));

        assert!(Tensor::<Rational>::pure(&[]).is_err());
        assert!(Tensor::<Rational>::pure(&[vec![]]).is_err());
    }

    #[test]
    fn flatten_layout_and_errors() {
        // Slices along the last mode: omega(i, j, 1) and omega(i, j, 2).
        let t = Tensor::from_fn(&[2, 2, 2], |i| rat((100 * i[0] + 10 * i[1] + i[2]) as i64));
        let m = t.flatten(&[0]).unwrap();
        assert_eq!(m.dims(), &[2, 4]);
        // Row i lists omega(i, j, k) with (j, k) row-major.
        assert_eq!(m.data()[..4], v(&[0, 1, 10, 11])[..]);
        assert_eq!(m.data()[4..], v(&[100, 101, 110, 111])[..]);
        let m = t.flatten(&[2, 0]).unwrap();
        assert_eq!(m.dims(), &[4, 2]);
        assert_eq!(m.get(&[1, 0]), &rat(1)); // rows over (mode0, mode2) = (0, 1), column mode1 = 0
        assert!(t.flatten(&[]).is_err());
        assert!(t.flatten(&[0, 1, 2]).is_err());
        assert!(t.flatten(&[3]).is_err());
    }

    #[test]
    fn matrix_rank_examples() {
        let z = Tensor::<Rational>::zeros(&[3, 4]);
        assert_eq!(z.matrix_rank(None).unwrap(), 0);
        let id = Tensor::from_fn(&[3, 3], |i| rat((i[0] == i[1]) as i64));
        assert_eq!(id.matrix_rank(None).unwrap(), 3);
        let m = Tensor::new(vec![2, 2], v(&[1, 2, 2, 4])).unwrap();
        assert_eq!(m.matrix_rank(None).unwrap(), 1);
        assert_eq!(m.matrix_rank(Some(0.5)).unwrap(), 1);
        assert!(tolerance_warning(Field::Rational, Some(1e-3)).is_some());
        assert!(tolerance_warning(Field::Float64, Some(1e-3)).is_none());
    }

    #[test]
    fn contraction_examples() {
        let vs = [v(&[1, 2]), v(&[3, -1, 4]), v(&[2, 5])];
        let t = Tensor::pure(&vs).unwrap();
        let phi = v(&[2, 0, 1]);
        let c = t.contract(1, &phi).unwrap();
        let factor = rat(3 * 2 + 4);
        assert_eq!(c, Tensor::pure(&[vs[0].clone(), vs[2].clone()]).unwrap().scale(&factor));

        let x0 = v(&[1, 0]);
        assert_eq!(t.contract(2, &x0).unwrap(), t.project_pi().unwrap());

        let full = t.contract_pure(&[(0, v(&[1, 1])), (1, v(&[1, 0, 0])), (2, v(&[0, 1]))]).unwrap();
        assert_eq!(full.order(), 0);
        assert_eq!(full.data()[0], rat(3 * 3 * 5));

        assert!(t.contract(1, &v(&[1, 2])).is_err());
        assert!(t.contract_pure(&[(0, v(&[1, 1])), (0, v(&[1, 1]))]).is_err());
    }

    #[test]
    fn mode_apply_identity_and_pure() {
        let (t, _) = random_rank(&[2, 3, 2], 2, 5, 4).unwrap();
        assert_eq!(t.mode_apply(&[None, None, None]).unwrap(), t);
        assert_eq!(
            t.mode_apply(&[Some(Matrix::identity(2)), None, Some(Matrix::identity(2))]).unwrap(),
            t
        );
        let vs = [v(&[1, 2]), v(&[3, 4])];
        let a = Matrix::new(3, 2, v(&[1, 0, 1, 1, 0, 2])).unwrap();
        let img = Tensor::pure(&vs).unwrap().mode_apply(&[Some(a), None]).unwrap();
        assert_eq!(img, Tensor::pure(&[v(&[1, 3, 4]), vs[1].clone()]).unwrap());
        assert!(t.mode_apply(&[None]).is_err());
    }

    #[test]
    fn permute_transposes_matrices() {
        let m = Tensor::new(vec![2, 3], v(&[1, 2, 3, 4, 5, 6])).unwrap();
        let t = m.permute_modes(&[1, 0]).unwrap();
        assert_eq!(t.dims(), &[3, 2]);
        assert_eq!(t.data(), &v(&[1, 4, 2, 5, 3, 6])[..]);
        assert_eq!(m.permute_modes(&[0, 1]).unwrap(), m);
        assert!(m.permute_modes(&[0, 0]).is_err());
    }

    #[test]
    fn embed_and_project() {
        let (t, _) = random_rank(&[2, 3], 2, 1, 5).unwrap();
        let e = t.embed_tau();
        assert_eq!(e.dims(), &[2, 3, 3]);
        assert_eq!(e.project_pi().unwrap(), t);
        let w = Word::from_symbols(3, &[1, 2]).unwrap();
        assert_eq!(e.coord(&w).unwrap(), t.coord(&w).unwrap());
        let vec1 = Tensor::new(vec![3], v(&[4, 5, 6])).unwrap();
        let s = vec1.project_pi().unwrap();
        assert_eq!(s.order(), 0);
        assert_eq!(s.data()[0], rat(4));
    }

    #[test]
    fn coord_reads_embedded_entries() {
        let t = Tensor::pure(&[v(&[1, 0]), v(&[1, 0])]).unwrap();
        assert_eq!(t.coord(&Word::zero(2)).unwrap(), rat(1));
        let beyond = Word::from_symbols(2, &[0, 0, 1]).unwrap();
        assert_eq!(t.coord(&beyond).unwrap(), rat(0));
        let bad = Word::from_symbols(3, &[2]).unwrap();
        assert!(matches!(t.coord(&bad), Err(Error::SymbolOutOfRange { .. })));
    }

    #[test]
    fn random_rank_is_deterministic() {
        let (a, fa) = random_rank(&[3, 3, 3], 2, 1, 10).unwrap();
        let (b, fb) = random_rank(&[3, 3, 3], 2, 1, 10).unwrap();
        assert_eq!(a, b);
        assert_eq!(fa, fb);
        let (z, f) = random_rank(&[2, 2, 2], 0, 9, 10).unwrap();
        assert!(z.is_zero() && f.is_empty());
        for term in &fa.terms {
            for vec in term {
                assert!(vec.iter().any(|x| !x.is_zero()));
                assert!(vec.iter().all(|x| x.numer().magnitude() <= &10u32.into() && x.denom() == &1.into()));
            }
        }
        assert!(random_rank(&[2], 1, 0, 0).is_err());
    }
}
