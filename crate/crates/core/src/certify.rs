//! Border-rank tests. A reported violation always carries a witness that can
//! be re-evaluated on its own; passing is a proof only where the equation
//! set is complete (flattening minors for `k <= 2`).

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::flattening::{bipartitions, index_word, minor_value, strassen_bound, MinorSpec, StrassenBound};
use crate::linalg::{Matrix, RankInfo};
use crate::rng::{derive_seed, nonzero_int_vector, stream, task_rng, uniform_int};
use crate::scalar::{format_rational, Field, Scalar};
use crate::tensor::Tensor;
use crate::words::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Border rank at most `k`, proven by a complete set of equations.
    #[serde(rename = "certified_le_k")]
    CertifiedLeK,
    /// A nonvanishing equation: border rank exceeds `k`.
    #[serde(rename = "violated")]
    Violated,
    /// No equation found violated, but the equations used are not known to be complete.
    #[serde(rename = "inconclusive_pass")]
    InconclusivePass,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::CertifiedLeK => "certified_le_k",
            Verdict::Violated => "violated",
            Verdict::InconclusivePass => "inconclusive_pass",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Process exit status: 0 certified or passed, 1 violated, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::CertifiedLeK | Verdict::InconclusivePass => 0,
            Verdict::Violated => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// A nonvanishing `(k+1) x (k+1)` flattening minor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinorWitness {
    /// 1-based modes on the row side of the flattening.
    pub row_modes: Vec<usize>,
    pub col_modes: Vec<usize>,
    pub rows: Vec<Word>,
    pub cols: Vec<Word>,
    /// Rank of the whole flattening the minor was taken from.
    pub flattening_rank: usize,
    pub value: Value,
}

impl MinorWitness {
    pub fn spec(&self) -> Result<MinorSpec> {
        MinorSpec::new(self.rows.clone(), self.cols.clone())
    }
}

/// The random pure covector tensor a violation was found after.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionWitness {
    /// 1-based modes that were contracted.
    pub modes: Vec<usize>,
    pub covectors: Vec<Vec<i64>>,
    pub subset_index: usize,
    pub trial: usize,
}

/// Strassen's bound exceeding `k` on an `l x l x 3` arrangement of the tensor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrassenWitness {
    /// `permutation[m]` is the position mode `m` was moved to.
    pub permutation: Vec<usize>,
    /// Invertible integer map applied to the size-3 mode, if any.
    pub basis_change: Option<Vec<Vec<i64>>>,
    pub numerator_rank: usize,
    pub bound: usize,
    pub bound_exact: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub p: usize,
    pub p0: usize,
    pub subsets: usize,
    pub trials: usize,
    pub tasks: usize,
    /// Position of the violating task in the trial-major task order.
    pub violating_task: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertReport {
    pub verdict: Verdict,
    pub k: usize,
    pub field: Field,
    /// True in float mode, where ranks come from singular-value thresholds.
    pub numerical: bool,
    pub method: &'static str,
    /// Largest flattening rank seen by the direct test.
    pub flattening_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minor: Option<MinorWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strassen: Option<StrassenWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<TrialStats>,
    pub notes: Vec<String>,
}

impl CertReport {
    fn new<S: Scalar>(verdict: Verdict, k: usize, method: &'static str) -> Self {
        CertReport {
            verdict,
            k,
            field: S::FIELD,
            numerical: !S::FIELD.is_exact(),
            method,
            flattening_rank: None,
            minor: None,
            contraction: None,
            strassen: None,
            stats: None,
            notes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestConfig {
    pub k: usize,
    /// Number of modes left after contraction; defaults to [`default_p0`].
    pub p0: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Random covector and map entries are drawn from `[-bound, bound]`.
    pub coeff_bound: i64,
    /// Relative singular-value threshold for float ranks.
    pub tol: Option<f64>,
    /// Absolute threshold below which a float witness value counts as zero.
    pub threshold: f64,
}

impl TestConfig {
    pub fn new(k: usize) -> Self {
        TestConfig { k, p0: None, trials: 5, seed: 0, coeff_bound: 10, tol: None, threshold: 1e-9 }
    }
}

/// `2 (k+1) floor(log2(k+1))`, the number of remaining modes after which
/// contraction preserves membership in the flattening variety.
pub fn p0_formula(k: usize) -> usize {
    let m = k + 1;
    2 * m * (usize::BITS - 1 - m.leading_zeros()) as usize
}

/// [`p0_formula`] raised to at least 3.
pub fn default_p0(k: usize) -> usize {
    p0_formula(k).max(3)
}

/// Result of scanning all flattenings against a rank bound.
struct FlatCheck {
    max_rank: usize,
    witness: Option<MinorWitness>,
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn minor_witness<S: Scalar>(
    t: &Tensor<S>,
    row_modes: &[usize],
    col_modes: &[usize],
    flat: &Matrix<S>,
    info: &RankInfo,
    k: usize,
    tol: Option<f64>,
) -> Result<MinorWitness> {
    let rows = sorted(info.rows[..k + 1].to_vec());
    let sub = flat.select(&rows, &info.cols);
    let inner = S::rank_info(sub.rows(), sub.cols(), sub.data(), tol);
    let mut chosen: Vec<usize> = inner.cols.iter().map(|&c| info.cols[c]).collect();
    for &c in &info.cols {
        if chosen.len() > k {
            break;
        }
        if !chosen.contains(&c) {
            chosen.push(c);
        }
    }
    let cols = sorted(chosen[..k + 1].to_vec());
    let dims = t.dims();
    let n = t.ambient_size();
    let rw: Vec<Word> = rows.iter().map(|&i| index_word(dims, row_modes, i, n)).collect();
    let cw: Vec<Word> = cols.iter().map(|&j| index_word(dims, col_modes, j, n)).collect();
    let spec = MinorSpec::new(rw.clone(), cw.clone())?;
    let value = minor_value(&spec, t)?;
    Ok(MinorWitness {
        row_modes: row_modes.iter().map(|m| m + 1).collect(),
        col_modes: col_modes.iter().map(|m| m + 1).collect(),
        rows: rw,
        cols: cw,
        flattening_rank: info.rank,
        value: value.to_json(),
    })
}

fn flattening_check<S: Scalar>(t: &Tensor<S>, k: usize, tol: Option<f64>) -> Result<FlatCheck> {
    let p = t.order();
    if p < 2 {
        // A vector or scalar is a 1 x N matrix.
        let all: Vec<usize> = (0..p).collect();
        let info = S::rank_info(1, t.len(), t.data(), tol);
        let witness = if info.rank > k {
            let off = info.cols[0];
            let n = t.ambient_size();
            let row = index_word(t.dims(), &all, off, n);
            let spec = MinorSpec::new(vec![row.clone()], vec![Word::zero(n)])?;
            let value = minor_value(&spec, t)?;
            Some(MinorWitness {
                row_modes: all.iter().map(|m| m + 1).collect(),
                col_modes: vec![],
                rows: vec![row],
                cols: vec![Word::zero(n)],
                flattening_rank: info.rank,
                value: value.to_json(),
            })
        } else {
            None
        };
        return Ok(FlatCheck { max_rank: info.rank, witness });
    }
    let mut max_rank = 0;
    for bp in bipartitions(p) {
        let flat = t.flatten(&bp.rows)?.as_matrix()?;
        let info = S::rank_info(flat.rows(), flat.cols(), flat.data(), tol);
        max_rank = max_rank.max(info.rank);
        if info.rank > k {
            let w = minor_witness(t, &bp.rows, &bp.cols, &flat, &info, k, tol)?;
            return Ok(FlatCheck { max_rank, witness: Some(w) });
        }
    }
    Ok(FlatCheck { max_rank, witness: None })
}

/// Rank of the flattening with the given (0-based) row modes and, when it
/// exceeds `k`, a nonvanishing `(k+1) x (k+1)` minor.
pub fn flattening_witness<S: Scalar>(
    t: &Tensor<S>,
    row_modes: &[usize],
    k: usize,
    tol: Option<f64>,
) -> Result<(usize, Option<MinorWitness>)> {
    let row_modes = sorted(row_modes.to_vec());
    let col_modes: Vec<usize> = (0..t.order()).filter(|m| !row_modes.contains(m)).collect();
    let flat = t.flatten(&row_modes)?.as_matrix()?;
    let info = S::rank_info(flat.rows(), flat.cols(), flat.data(), tol);
    let witness = if info.rank > k {
        Some(minor_witness(t, &row_modes, &col_modes, &flat, &info, k, tol)?)
    } else {
        None
    };
    Ok((info.rank, witness))
}

/// Largest rank over all flattenings, a lower bound on border rank.
pub fn flattening_rank_bound<S: Scalar>(t: &Tensor<S>, tol: Option<f64>) -> Result<usize> {
    Ok(flattening_check(t, usize::MAX - 1, tol)?.max_rank)
}

/// `min_i prod_{j != i} n_j`, which every tensor's rank is at most.
pub fn generic_rank_ceiling(dims: &[usize]) -> usize {
    if dims.len() < 2 {
        return 1;
    }
    let total: usize = dims.iter().product();
    dims.iter().map(|&d| total / d).min().unwrap_or(1)
}

fn flattening_report<S: Scalar>(t: &Tensor<S>, k: usize, tol: Option<f64>) -> Result<CertReport> {
    let check = flattening_check(t, k, tol)?;
    let mut report = match check.witness {
        Some(w) => {
            let mut r = CertReport::new::<S>(Verdict::Violated, k, "flattening");
            r.minor = Some(w);
            r
        }
        None => CertReport::new::<S>(Verdict::CertifiedLeK, k, "flattening"),
    };
    report.flattening_rank = Some(check.max_rank);
    Ok(report)
}

/// Border rank at most 1: all 2 x 2 flattening minors vanish.
pub fn test_rank_le_1<S: Scalar>(t: &Tensor<S>, tol: Option<f64>) -> Result<CertReport> {
    flattening_report(t, 1, tol)
}

/// Border rank at most 2: all 3 x 3 flattening minors vanish.
pub fn test_brank_le_2<S: Scalar>(t: &Tensor<S>, tol: Option<f64>) -> Result<CertReport> {
    flattening_report(t, 2, tol)
}

/// Mode permutation moving a size-3 mode last when the tensor is
/// `l x l x 3` up to reordering (last mode preferred).
fn strassen_arrangement(dims: &[usize]) -> Option<Vec<usize>> {
    if dims.len() != 3 {
        return None;
    }
    (0..3).rev().find_map(|c| {
        let others: Vec<usize> = (0..3).filter(|&m| m != c).collect();
        (dims[c] == 3 && dims[others[0]] == dims[others[1]] && dims[others[0]] >= 2).then(|| {
            let mut perm = vec![0; 3];
            perm[others[0]] = 0;
            perm[others[1]] = 1;
            perm[c] = 2;
            perm
        })
    })
}

const STRASSEN_ATTEMPTS: u64 = 6;

fn strassen_check<S: Scalar>(t: &Tensor<S>, k: usize, seed: u64, tol: Option<f64>) -> Result<Option<StrassenWitness>> {
    let Some(perm) = strassen_arrangement(t.dims()) else {
        return Ok(None);
    };
    let arranged = t.permute_modes(&perm)?;
    for attempt in 0..STRASSEN_ATTEMPTS {
        let (candidate, change) = if attempt == 0 {
            (arranged.clone(), None)
        } else {
            let mut rng = task_rng(seed, &[stream::STRASSEN, attempt]);
            let g: Vec<Vec<i64>> = (0..3).map(|_| (0..3).map(|_| uniform_int(&mut rng, 3)).collect()).collect();
            let gm = Matrix::from_fn(3, 3, |i, j| S::from_i64(g[i][j]));
            if gm.rank(None) < 3 {
                continue;
            }
            (arranged.mode_apply(&[None, None, Some(gm)])?, Some(g))
        };
        if let Some(StrassenBound { numerator_rank, half_units, bound }) = strassen_bound(&candidate, tol)? {
            if bound > k {
                let exact = StrassenBound { numerator_rank, half_units, bound }.exact();
                return Ok(Some(StrassenWitness {
                    permutation: perm,
                    basis_change: change,
                    numerator_rank,
                    bound,
                    bound_exact: format_rational(&exact),
                }));
            }
            return Ok(None);
        }
    }
    Ok(None)
}

/// Equation test on the tensor itself.
///
/// Flattening minors first. For `k <= 2`, for matrices, for the zero tensor
/// and for `k` at least the generic rank ceiling, passing certifies. For
/// larger `k`, Strassen's bound is tried on `l x l x 3` tensors and passing
/// is inconclusive.
pub fn direct_test<S: Scalar>(t: &Tensor<S>, cfg: &TestConfig) -> Result<CertReport> {
    let k = cfg.k;
    let mut report = flattening_report(t, k, cfg.tol)?;
    if report.verdict == Verdict::Violated {
        return Ok(report);
    }
    let complete = k <= 2 || t.order() <= 2 || t.is_zero() || k >= generic_rank_ceiling(t.dims());
    if complete {
        return Ok(report);
    }
    if let Some(w) = strassen_check(t, k, cfg.seed, cfg.tol)? {
        report.verdict = Verdict::Violated;
        report.method = "strassen";
        report.strassen = Some(w);
        return Ok(report);
    }
    report.verdict = Verdict::InconclusivePass;
    report.method = if strassen_arrangement(t.dims()).is_some() { "flattening+strassen" } else { "flattening" };
    report.notes.push(format!("flattening equations are not known to be complete for k = {k}"));
    Ok(report)
}

/// Mode subsets of the given size in colexicographic order.
pub fn colex_subsets(p: usize, size: usize) -> Vec<Vec<usize>> {
    let mut subsets: Vec<Vec<usize>> = (0..p).combinations(size).collect();
    subsets.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    subsets
}

/// Randomized test: for every `(p - p0)`-subset `J` of modes and each trial,
/// contract `J` along a random pure tensor of integer covectors and test the
/// resulting `p0`-mode tensor directly. Tasks are ordered trial-major so
/// early trials cover every subset first; the reported violation is the
/// first one in that order regardless of scheduling.
///
/// With `p <= p0` the direct test runs on the tensor itself.
pub fn random_contraction_test<S: Scalar>(t: &Tensor<S>, cfg: &TestConfig) -> Result<CertReport> {
    if cfg.trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    if cfg.coeff_bound < 1 {
        return Err(invalid("coefficient bound must be at least 1"));
    }
    let p = t.order();
    let p0 = cfg.p0.unwrap_or_else(|| default_p0(cfg.k));
    if p <= p0 {
        let mut report = direct_test(t, cfg)?;
        report.stats = Some(TrialStats { p, p0, subsets: 0, trials: 0, tasks: 0, violating_task: None });
        report.notes.push(format!("order {p} <= p0 = {p0}: equations tested directly"));
        return Ok(report);
    }
    let subsets = colex_subsets(p, p - p0);
    let tasks: Vec<(usize, usize)> = (0..cfg.trials)
        .flat_map(|trial| (0..subsets.len()).map(move |j| (trial, j)))
        .collect();
    let dims = t.dims();
    let found = tasks
        .par_iter()
        .enumerate()
        .map(|(task, &(trial, j))| -> Result<Option<(usize, CertReport)>> {
            let modes = &subsets[j];
            let mut rng = task_rng(cfg.seed, &[stream::CONTRACT, j as u64, trial as u64]);
            let covectors: Vec<Vec<i64>> = modes
                .iter()
                .map(|&m| nonzero_int_vector(&mut rng, dims[m], cfg.coeff_bound))
                .collect();
            let pairs: Vec<(usize, Vec<S>)> = modes
                .iter()
                .zip(&covectors)
                .map(|(&m, c)| (m, c.iter().map(|&x| S::from_i64(x)).collect()))
                .collect();
            let reduced = t.contract_pure(&pairs)?;
            let inner_cfg = TestConfig { seed: derive_seed(cfg.seed, &[stream::STRASSEN, j as u64, trial as u64]), ..cfg.clone() };
            let mut report = direct_test(&reduced, &inner_cfg)?;
            if report.verdict != Verdict::Violated {
                return Ok(None);
            }
            report.contraction = Some(ContractionWitness {
                modes: modes.iter().map(|m| m + 1).collect(),
                covectors,
                subset_index: j,
                trial,
            });
            Ok(Some((task, report)))
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .transpose()?
        .flatten();
    let mut stats = TrialStats { p, p0, subsets: subsets.len(), trials: cfg.trials, tasks: tasks.len(), violating_task: None };
    match found {
        Some((task, mut report)) => {
            stats.violating_task = Some(task);
            report.method = "contraction";
            report.stats = Some(stats);
            report.flattening_rank = None;
            report.notes.push("witness minor refers to the contracted tensor".to_string());
            Ok(report)
        }
        None => {
            let mut report = CertReport::new::<S>(Verdict::InconclusivePass, cfg.k, "contraction");
            report.stats = Some(stats);
            report.notes.push("no contraction produced a violated equation; the test is one-sided".to_string());
            Ok(report)
        }
    }
}

/// Re-evaluates the witness of a violated report on the original tensor,
/// independently of the search that produced it.
pub fn verify_witness<S: Scalar>(t: &Tensor<S>, report: &CertReport, cfg: &TestConfig) -> Result<bool> {
    if report.verdict != Verdict::Violated {
        return Ok(false);
    }
    let target = match &report.contraction {
        None => t.clone(),
        Some(c) => {
            let pairs: Vec<(usize, Vec<S>)> = c
                .modes
                .iter()
                .zip(&c.covectors)
                .map(|(&m, v)| (m - 1, v.iter().map(|&x| S::from_i64(x)).collect()))
                .collect();
            t.contract_pure(&pairs)?
        }
    };
    if let Some(m) = &report.minor {
        if report.strassen.is_none() {
            let v = minor_value(&m.spec()?, &target)?;
            return Ok(!v.is_negligible(cfg.threshold));
        }
    }
    if let Some(s) = &report.strassen {
        let mut arranged = target.permute_modes(&s.permutation)?;
        if let Some(g) = &s.basis_change {
            let gm = Matrix::from_fn(3, 3, |i, j| S::from_i64(g[i][j]));
            arranged = arranged.mode_apply(&[None, None, Some(gm)])?;
        }
        return Ok(strassen_bound(&arranged, cfg.tol)?.is_some_and(|b| b.bound > report.k));
    }
    Ok(false)
}

/// Images of the tensor under random integer maps of every mode to
/// `K^n_target`; each image has border rank at most that of the tensor.
pub fn reduce_all_same<S: Scalar>(t: &Tensor<S>, n_target: usize, trials: usize, seed: u64, coeff_bound: i64) -> Result<Vec<Tensor<S>>> {
    if n_target < 2 {
        return Err(invalid("target mode size must be at least 2"));
    }
    (0..trials)
        .map(|trial| {
            let maps: Vec<Option<Matrix<S>>> = t
                .dims()
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let mut rng = task_rng(seed, &[stream::REDUCE, trial as u64, i as u64]);
                    Some(Matrix::from_fn(n_target, d, |_, _| S::from_i64(uniform_int(&mut rng, coeff_bound))))
                })
                .collect();
            t.mode_apply(&maps)
        })
        .collect()
}
