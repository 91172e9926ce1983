//! Alternating least squares for rank-`r` CP approximations in binary64,
//! used as a numeric upper-bound oracle.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::{stream, task_rng};
use crate::tensor::{increment, PureFactorization, Tensor};

#[derive(Clone, Debug, Serialize)]
pub struct CpAlsResult {
    #[serde(skip)]
    pub factors: PureFactorization<f64>,
    /// Frobenius distance between the tensor and the final model.
    pub residual: f64,
    /// Residual after each completed sweep.
    pub history: Vec<f64>,
}

fn model(factors: &[DMatrix<f64>], dims: &[usize], r: usize) -> Vec<f64> {
    let total: usize = dims.iter().product();
    let mut out = vec![0.0; total];
    let mut idx = vec![0; dims.len()];
    for (off, slot) in out.iter_mut().enumerate() {
        if off > 0 {
            increment(&mut idx, dims);
        }
        *slot = (0..r)
            .map(|c| idx.iter().enumerate().map(|(m, &i)| factors[m][(i, c)]).product::<f64>())
            .sum();
    }
    out
}

fn residual(t: &Tensor<f64>, factors: &[DMatrix<f64>], r: usize) -> f64 {
    let m = model(factors, t.dims(), r);
    t.data().iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// How the factor matrices are initialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    /// Leading left singular vectors of each mode's flattening, padded with
    /// random columns when `r` exceeds the mode size.
    Svd,
    Random,
}

fn initial_factor<R: Rng>(t: &Tensor<f64>, m: usize, r: usize, init: Init, rng: &mut R) -> Result<DMatrix<f64>> {
    let d = t.dims()[m];
    let mut a = DMatrix::from_fn(d, r, |_, _| rng.gen_range(-1.0..1.0));
    if init == Init::Svd && t.order() > 1 {
        let flat = t.flatten(&[m])?;
        let (rows, cols) = (flat.dims()[0], flat.dims()[1]);
        let svd = DMatrix::from_row_slice(rows, cols, flat.data()).svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        for (c, &k) in order.iter().take(r.min(d)).enumerate() {
            a.set_column(c, &u.column(k));
        }
    }
    Ok(a)
}

/// Runs `iterations` ALS sweeps from singular-vector starting factors.
/// Each sweep solves the least-squares problem for one factor matrix at a
/// time through the pseudo-inverse of the Hadamard product of Gram matrices.
pub fn cp_als(t: &Tensor<f64>, r: usize, iterations: usize, seed: u64) -> Result<CpAlsResult> {
    cp_als_from(t, r, iterations, seed, Init::Svd)
}

pub fn cp_als_from(t: &Tensor<f64>, r: usize, iterations: usize, seed: u64, init: Init) -> Result<CpAlsResult> {
    let dims = t.dims().to_vec();
    let p = dims.len();
    if p == 0 {
        return Err(invalid("CP decomposition needs at least one mode"));
    }
    if r == 0 {
        return Ok(CpAlsResult {
            factors: PureFactorization { terms: vec![] },
            residual: t.frobenius_norm(),
            history: vec![],
        });
    }
    let mut rng = task_rng(seed, &[stream::CP_ALS]);
    let mut factors: Vec<DMatrix<f64>> =
        (0..p).map(|m| initial_factor(t, m, r, init, &mut rng)).collect::<Result<_>>()?;
    let scale = t.frobenius_norm().max(1.0);
    let mut history = Vec::with_capacity(iterations);
    for sweep in 0..iterations {
        let previous = factors.clone();
        for m in 0..p {
            let mut gram = DMatrix::from_element(r, r, 1.0);
            for (j, a) in factors.iter().enumerate() {
                if j != m {
                    gram.component_mul_assign(&(a.transpose() * a));
                }
            }
            let mut mttkrp = DMatrix::<f64>::zeros(dims[m], r);
            let mut idx = vec![0; p];
            for (off, &v) in t.data().iter().enumerate() {
                if off > 0 {
                    increment(&mut idx, &dims);
                }
                if v == 0.0 {
                    continue;
                }
                for c in 0..r {
                    let prod: f64 = (0..p).filter(|&j| j != m).map(|j| factors[j][(idx[j], c)]).product();
                    mttkrp[(idx[m], c)] += v * prod;
                }
            }
            let pinv = gram.pseudo_inverse(1e-12).map_err(|e| invalid(e.to_string()))?;
            factors[m] = mttkrp * pinv;
        }
        let mut res = residual(t, &factors, r);
        // Extrapolate along the last update; kept only when it lowers the residual.
        if sweep > 0 {
            let step = ((sweep + 1) as f64).cbrt();
            let jumped: Vec<DMatrix<f64>> =
                factors.iter().zip(&previous).map(|(a, b)| a + (a - b) * step).collect();
            let jumped_res = residual(t, &jumped, r);
            if jumped_res < res {
                factors = jumped;
                res = jumped_res;
            }
        }
        history.push(res);
        if res <= 1e-13 * scale {
            break;
        }
    }
    let terms = (0..r)
        .map(|c| factors.iter().map(|a| a.column(c).iter().copied().collect()).collect())
        .collect();
    Ok(CpAlsResult { factors: PureFactorization { terms }, residual: residual(t, &factors, r), history })
}

/// Best of several runs: the singular-vector start, then random starts.
pub fn cp_als_best(t: &Tensor<f64>, r: usize, iterations: usize, seed: u64, restarts: usize) -> Result<CpAlsResult> {
    let mut best: Option<CpAlsResult> = None;
    for restart in 0..restarts.max(1) {
        let init = if restart == 0 { Init::Svd } else { Init::Random };
        let run = cp_als_from(t, r, iterations, crate::rng::derive_seed(seed, &[restart as u64]), init)?;
        if best.as_ref().is_none_or(|b| run.residual < b.residual) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random_rank;

    #[test]
    fn mostly_reaches_zero_within_two_hundred_sweeps() {
        let hits = (0..40)
            .filter(|&s| {
                let (t, _) = random_rank(&[3, 3, 3], 2, s, 10).unwrap();
                cp_als_best(&t.to_float(), 2, 200, 1, 3).unwrap().residual < 1e-6
            })
            .count();
        assert!(hits >= 36, "{hits} of 40 converged");
    }

    #[test]
    fn recovers_exact_low_rank() {
        let (t, _) = random_rank(&[3, 3, 3], 2, 3, 5).unwrap();
        let t = t.to_float();
        let res = cp_als_best(&t, 2, 200, 1, 3).unwrap();
        assert!(res.residual < 1e-6, "residual {}", res.residual);
        let rebuilt = res.factors.to_tensor(&[3, 3, 3]).unwrap();
        let diff: f64 = rebuilt.data().iter().zip(t.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-5);
    }

    #[test]
    fn zero_rank_model() {
        let (t, _) = random_rank(&[2, 2], 1, 5, 5).unwrap();
        let t = t.to_float();
        let res = cp_als(&t, 0, 10, 0).unwrap();
        assert_eq!(res.residual, t.frobenius_norm());
        assert!(res.factors.is_empty());
    }

    #[test]
    fn residual_never_increases() {
        let (t, _) = random_rank(&[3, 3, 3], 5, 2, 5).unwrap();
        let res = cp_als(&t.to_float(), 2, 50, 9).unwrap();
        for w in res.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
        }
    }
}

