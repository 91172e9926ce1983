//! Dimension of the degree-`d` part of the ideal of tensors of rank at most
//! `k`, estimated by evaluating every degree-`d` monomial at random rank-`k`
//! tensors and measuring the kernel of the evaluation matrix.

use itertools::Itertools;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::flattening::{eval_poly, index_word};
use crate::linalg::{is_prime, rank_mod_p, rational_nullspace, rational_rank_info};
use crate::poly::{Monomial, SparsePoly};
use crate::rng::{derive_seed, stream, task_rng};
use crate::scalar::Rational;
use crate::tensor::{random_rank, Tensor};

pub const MONOMIAL_GUARD: u128 = 1_000_000;

/// Arithmetic used for the evaluation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulus {
    /// Two random primes in `(2^31, 2^32)`, with exact confirmation on small cases.
    Auto,
    Prime(u64),
    /// Exact rational elimination.
    Exact,
}

impl std::str::FromStr for Modulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Modulus::Auto),
            "0" | "exact" => Ok(Modulus::Exact),
            other => other
                .parse::<u64>()
                .map(Modulus::Prime)
                .map_err(|_| invalid(format!("modulus must be auto, 0 or a prime, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub oversample: f64,
    pub seed: u64,
    pub modulus: Modulus,
    pub coeff_bound: i64,
    /// Compute a kernel basis (exact arithmetic only).
    pub kernel: bool,
    /// Largest monomial count confirmed with exact elimination in auto mode.
    pub exact_limit: usize,
    /// Resampling rounds allowed before giving up on agreement.
    pub max_rounds: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            oversample: 1.5,
            seed: 0,
            modulus: Modulus::Auto,
            coeff_bound: 10,
            kernel: false,
            exact_limit: 200,
            max_rounds: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub dims: Vec<usize>,
    pub k: usize,
    pub d: usize,
    pub monomials: usize,
    pub samples: usize,
    /// Estimated dimension of the degree-`d` part of the ideal.
    pub nullity: usize,
    /// Moduli of the agreeing runs, 0 standing for exact rationals.
    pub moduli: Vec<u64>,
    pub run_nullities: Vec<usize>,
    pub agreed: bool,
    pub rounds: u64,
    pub exact_nullity: Option<usize>,
    #[serde(skip)]
    pub kernel: Option<Vec<SparsePoly>>,
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of degree-`d` monomials in `N` variables, `C(N + d - 1, d)`.
pub fn monomial_count(n_vars: usize, d: usize) -> u128 {
    if n_vars == 0 {
        return u128::from(d == 0);
    }
    binomial((n_vars + d - 1) as u128, d as u128).unwrap_or(u128::MAX)
}

/// Degree-`d` monomials in the entries, each a nondecreasing list of entry offsets.
fn monomial_offsets(dims: &[usize], d: usize) -> Result<Vec<Vec<usize>>> {
    let n_vars: usize = dims.iter().product();
    let count = monomial_count(n_vars, d);
    if count > MONOMIAL_GUARD {
        return Err(Error::GuardExceeded { count, limit: MONOMIAL_GUARD });
    }
    let mut list: Vec<Vec<usize>> = (0..n_vars).combinations_with_replacement(d).collect();
    let words: Vec<Monomial> = list.iter().map(|m| offsets_to_monomial(dims, m)).collect();
    let mut order: Vec<usize> = (0..list.len()).collect();
    order.sort_by(|&a, &b| words[a].cmp(&words[b]));
    list = order.into_iter().map(|i| std::mem::take(&mut list[i])).collect();
    Ok(list)
}

fn offsets_to_monomial(dims: &[usize], offsets: &[usize]) -> Monomial {
    let all: Vec<usize> = (0..dims.len()).collect();
    let n = dims.iter().copied().max().unwrap_or(1);
    Monomial::from_factors(offsets.iter().map(|&o| (index_word(dims, &all, o, n), 1)))
}

/// All degree-`d` monomials in the entry variables `x_w` (`w` supported in
/// the first `p` positions), in increasing monomial order.
pub fn monomial_basis(dims: &[usize], d: usize) -> Result<Vec<Monomial>> {
    if d == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    Ok(monomial_offsets(dims, d)?.iter().map(|m| offsets_to_monomial(dims, m)).collect())
}

fn sample(dims: &[usize], k: usize, seed: u64, path: &[u64], bound: i64) -> Result<Tensor<Rational>> {
    Ok(random_rank(dims, k, derive_seed(seed, path), bound)?.0)
}

fn integer_entries(t: &Tensor<Rational>) -> Vec<i64> {
    t.data().iter().map(|q| q.to_integer().to_i64().expect("sample entries are small integers")).collect()
}

fn eval_rows_mod(samples: &[Vec<i64>], monos: &[Vec<usize>], p: u64) -> Vec<Vec<u64>> {
    samples
        .par_iter()
        .map(|entries| {
            let residues: Vec<u64> = entries.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect();
            monos
                .iter()
                .map(|m| m.iter().fold(1u64, |acc, &o| crate::linalg::mul_mod(acc, residues[o], p)))
                .collect()
        })
        .collect()
}

fn eval_rows_exact(samples: &[Vec<i64>], monos: &[Vec<usize>]) -> Vec<Rational> {
    samples
        .par_iter()
        .flat_map_iter(|entries| {
            monos.iter().map(move |m| {
                let v = m.iter().fold(num_bigint::BigInt::from(1), |acc, &o| acc * entries[o]);
                Rational::from_integer(v)
            })
        })
        .collect()
}

fn random_prime<R: Rng>(rng: &mut R, avoid: &[u64]) -> u64 {
    loop {
        let mut c = rng.gen_range((1u64 << 31) + 1..(1u64 << 32) - 1_000_000) | 1;
        while !is_prime(c) {
            c += 2;
        }
        if !avoid.contains(&c) {
            return c;
        }
    }
}

fn validate(dims: &[usize], k: usize, d: usize, cfg: &ProbeConfig) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&x| x == 0) {
        return Err(invalid(format!("invalid dims {dims:?}")));
    }
    if d == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    if cfg.oversample < 1.2 || !cfg.oversample.is_finite() {
        return Err(invalid("oversampling factor must be at least 1.2"));
    }
    if let Modulus::Prime(p) = cfg.modulus {
        if !is_prime(p) || p < 3 {
            return Err(invalid(format!("{p} is not an odd prime")));
        }
    }
    let _ = k;
    Ok(())
}

/// Nullity of the evaluation matrix of all degree-`d` monomials at random
/// rank-`k` samples.
///
/// Two independent sample sets are evaluated (over two random primes in
/// auto mode); the result is reported once both nullities agree,
/// resampling with fresh primes otherwise. In auto mode the nullity is
/// additionally confirmed over the rationals when the monomial count is at
/// most `exact_limit`.
pub fn ideal_degree_dim(dims: &[usize], k: usize, d: usize, cfg: &ProbeConfig) -> Result<ProbeResult> {
    validate(dims, k, d, cfg)?;
    let monos = monomial_offsets(dims, d)?;
    let m = monos.len();
    let samples = ((cfg.oversample * m as f64).ceil() as usize).max(1);
    let draw = |round: u64, set: u64| -> Result<Vec<Vec<i64>>> {
        (0..samples)
            .into_par_iter()
            .map(|j| {
                let t = sample(dims, k, cfg.seed, &[stream::PROBE_SAMPLE, round, set, j as u64], cfg.coeff_bound)?;
                Ok(integer_entries(&t))
            })
            .collect()
    };
    let exact_run = |set: &[Vec<i64>]| -> (usize, Vec<Rational>) {
        let data = eval_rows_exact(set, &monos);
        let rank = rational_rank_info(set.len(), m, &data).rank;
        (m - rank, data)
    };

    let mut result = ProbeResult {
        dims: dims.to_vec(),
        k,
        d,
        monomials: m,
        samples,
        nullity: 0,
        moduli: vec![],
        run_nullities: vec![],
        agreed: false,
        rounds: 0,
        exact_nullity: None,
        kernel: None,
    };
    let mut kernel_data: Option<Vec<Rational>> = None;
    let mut kernel_rows = 0;
    for round in 0..cfg.max_rounds.max(1) {
        let (set_a, set_b) = rayon::join(|| draw(round, 0), || draw(round, 1));
        let (set_a, set_b) = (set_a?, set_b?);
        let (moduli, nullities) = match cfg.modulus {
            Modulus::Exact => {
                let ((na, da), (nb, _)) = rayon::join(|| exact_run(&set_a), || exact_run(&set_b));
                kernel_data = Some(da);
                kernel_rows = set_a.len();
                (vec![0, 0], vec![na, nb])
            }
            Modulus::Prime(p) => {
                let (ra, rb) = rayon::join(
                    || rank_mod_p(eval_rows_mod(&set_a, &monos, p), m, p),
                    || rank_mod_p(eval_rows_mod(&set_b, &monos, p), m, p),
                );
                (vec![p, p], vec![m - ra, m - rb])
            }
            Modulus::Auto => {
                let mut rng = task_rng(cfg.seed, &[stream::PROBE_PRIME, round]);
                let p = random_prime(&mut rng, &[]);
                let q = random_prime(&mut rng, &[p]);
                let (ra, rb) = rayon::join(
                    || rank_mod_p(eval_rows_mod(&set_a, &monos, p), m, p),
                    || rank_mod_p(eval_rows_mod(&set_b, &monos, q), m, q),
                );
                (vec![p, q], vec![m - ra, m - rb])
            }
        };
        result.rounds = round + 1;
        result.moduli = moduli;
        result.run_nullities = nullities.clone();
        result.nullity = nullities.iter().copied().min().unwrap_or(0);
        if nullities[0] == nullities[1] {
            result.agreed = true;
            if cfg.modulus == Modulus::Auto && (m <= cfg.exact_limit || cfg.kernel) {
                let (n_exact, data) = exact_run(&set_a);
                result.exact_nullity = Some(n_exact);
                kernel_data = Some(data);
                kernel_rows = set_a.len();
            }
            break;
        }
    }
    if cfg.kernel {
        let data = kernel_data.ok_or(Error::ExactFieldRequired)?;
        let basis = rational_nullspace(kernel_rows, m, &data);
        let n = dims.iter().copied().max().unwrap_or(1);
        let polys = basis
            .into_iter()
            .map(|v| {
                SparsePoly::from_terms(
                    n,
                    v.into_iter()
                        .zip(&monos)
                        .filter(|(c, _)| !c.is_zero())
                        .map(|(c, mo)| (offsets_to_monomial(dims, mo), c)),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        result.kernel = Some(polys);
    }
    Ok(result)
}

/// Whether `f` vanishes at `samples` random tensors of rank at most `k`.
/// `false` certifies that `f` is not in the ideal.
pub fn membership_check(f: &SparsePoly, dims: &[usize], k: usize, samples: usize, seed: u64) -> Result<bool> {
    membership_check_with(|t| eval_poly(f, t), dims, k, samples, seed)
}

/// [`membership_check`] for any exactly evaluable function of the tensor.
pub fn membership_check_with(
    f: impl Fn(&Tensor<Rational>) -> Result<Rational> + Sync,
    dims: &[usize],
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let values = (0..samples)
        .into_par_iter()
        .map(|j| f(&sample(dims, k, seed, &[stream::MEMBERSHIP, j as u64], 10)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(values.iter().all(|v| v.is_zero()))
}
