use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use brank::certify::{
    direct_test, flattening_witness, random_contraction_test, CertReport, TestConfig,
};
use brank::completion::{completion_formula, complete_tensor, extract_boundary, validate_boundary};
use brank::cpals::cp_als_best;
use brank::flattening::bipartitions;
use brank::io::{self, AnyTensor};
use brank::phylo::{check_membership, model_tensor, parse_newick, random_params, Tree};
use brank::probe::{ideal_degree_dim, Modulus, ProbeConfig};
use brank::tensor::{random_rank, tolerance_warning};
use brank::words::{canonical_minor_words, higman_embed, orbit_element, subs_witness};
use brank::{Error, Field, Rational, Result, Scalar, SubsElement, Tensor, Word};

use crate::render;
use crate::Cli;

/// What a command produced: a JSON result, optional hand-written text, and
/// the process exit status.
pub struct Outcome {
    pub result: Value,
    pub text: Option<String>,
    pub exit: u8,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome { result, text: None, exit: 0 }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// Mode sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, default_value_t = 10)]
    pub bound: i64,
    /// Write the tensor here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Direct test for K <= 2, random contractions otherwise.
    Auto,
    /// Flattening minors, then Strassen's equation on l x l x 3 arrangements.
    Direct,
    /// Random contractions down to P0 modes, each tested directly.
    Contraction,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    /// Border-rank bound to test.
    #[arg(long)]
    pub k: usize,
    /// Modes kept by each contraction (default: max(3, 2(K+1) floor(log2(K+1)))).
    #[arg(long)]
    pub p0: Option<usize>,
    /// Random covector draws per mode subset.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Relative singular-value threshold for float ranks.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: Method,
    /// Also fit a rank-K CP model by alternating least squares and report the residual.
    #[arg(long)]
    pub cp_als: bool,
    pub file: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FlattenArgs {
    /// Row modes (1-based, comma separated); all bipartitions when omitted.
    #[arg(long, value_delimiter = ',')]
    pub rows: Option<Vec<usize>>,
    #[arg(long)]
    pub tol: Option<f64>,
    pub file: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub degree: usize,
    /// `auto` (two random primes), a fixed prime, or `0` for exact rationals.
    #[arg(long, default_value = "auto")]
    pub modulus: String,
    /// Samples per monomial.
    #[arg(long, default_value_t = 1.5)]
    pub oversample: f64,
    /// Write a basis of the kernel as polynomials (exact arithmetic).
    #[arg(long)]
    pub kernel_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum CompleteCommand {
    /// Boundary coordinates (at most one position beyond the prefix) of a tensor.
    Extract {
        /// Prefix length p.
        #[arg(long)]
        prefix: usize,
        /// Repeat prefix coordinates under every slab.
        #[arg(long)]
        per_slab: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        tensor: PathBuf,
    },
    /// Check that the boundary slabs agree and cover every required word.
    Validate { boundary: PathBuf },
    /// Fill all coordinates level by level, each from the vanishing of a
    /// (k+1) x (k+1) minor through the pivot.
    Fill {
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long)]
        pivot: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The completion formula for one coordinate as numerator / pivot determinant.
    Formula {
        #[arg(long)]
        pivot: PathBuf,
        #[arg(long)]
        prefix: usize,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum OrbitCommand {
    /// An element sigma with increasing set maxima and sigma(wa) = wb, if one exists.
    Witness {
        #[arg(long)]
        wa: String,
        #[arg(long)]
        wb: String,
        /// Alphabet size (default: one more than the largest symbol, at least 2).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Apply sigma, given as a JSON list of position lists, to a word.
    Act {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        word: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Canonical row and column words whose table lists every nonzero
    /// column with a zero upper or lower block exactly once.
    Canonical {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Greedy leftmost increasing embedding of wa into wb.
    Embed {
        #[arg(long)]
        wa: String,
        #[arg(long)]
        wb: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// The element carrying the canonical words onto the given minor's
    /// row and column words.
    Minor {
        #[arg(long, value_delimiter = ',', required = true)]
        rows: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        cols: Vec<String>,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum PhyloCommand {
    /// Internal-edge flattening ranks at most K and star tensors of border rank at most K.
    Check {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p0: Option<usize>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        tensor: PathBuf,
    },
    /// Joint leaf distribution for random K-state model parameters.
    Simulate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        k: usize,
        /// Observed states per leaf (default K).
        #[arg(long)]
        states: Option<usize>,
        /// Positive parameters with rows summing to one.
        #[arg(long)]
        stochastic: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    use crate::Command::*;
    match &cli.command {
        Gen(a) => gen(cli, a),
        Certify(a) => certify(cli, a),
        Flatten(a) => flatten(cli, a),
        Probe(a) => probe(cli, a),
        Complete(c) => complete(cli, c),
        Orbit(c) => orbit(c),
        Phylo(c) => phylo(cli, c),
    }
}

fn emit_tensor(tensor: Value, output: &Option<PathBuf>) -> Result<Outcome> {
    match output {
        Some(path) => {
            io::write_json(path, &tensor)?;
            Ok(Outcome::ok(json!({ "output": path, "dims": tensor["dims"] })))
        }
        None => Ok(Outcome::ok(tensor)),
    }
}

fn load_tensor(cli: &Cli, path: &Path) -> Result<AnyTensor> {
    io::read_tensor(path)?.into_field(cli.field)
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<Outcome> {
    let (t, _) = random_rank(&a.dims, a.rank, cli.seed, a.bound)?;
    let t = AnyTensor::Rational(t).into_field(cli.field)?;
    emit_tensor(t.to_json(), &a.output)
}

fn test_config(cli: &Cli, k: usize, p0: Option<usize>, trials: usize, tol: Option<f64>) -> Result<TestConfig> {
    if trials == 0 {
        return Err(invalid("--trials must be positive"));
    }
    Ok(TestConfig { p0, trials, seed: cli.seed, tol, ..TestConfig::new(k) })
}

fn certify_tensor<S: Scalar>(t: &Tensor<S>, a: &CertifyArgs, cfg: &TestConfig) -> Result<(CertReport, Option<Value>)> {
    let mut report = match (a.method, a.k <= 2) {
        (Method::Direct, _) | (Method::Auto, true) => direct_test(t, cfg)?,
        _ => random_contraction_test(t, cfg)?,
    };
    if let Some(w) = tolerance_warning(S::FIELD, a.tol) {
        report.notes.push(w.to_string());
    }
    let fit = if a.cp_als {
        let res = cp_als_best(&t.to_float(), a.k, 200, cfg.seed, 3)?;
        Some(json!({ "rank": a.k, "residual": res.residual, "sweeps": res.history.len() }))
    } else {
        None
    };
    Ok((report, fit))
}

fn certify(cli: &Cli, a: &CertifyArgs) -> Result<Outcome> {
    let cfg = test_config(cli, a.k, a.p0, a.trials, a.tol)?;
    let (report, fit) = match load_tensor(cli, &a.file)? {
        AnyTensor::Rational(t) => certify_tensor(&t, a, &cfg)?,
        AnyTensor::Float64(t) => certify_tensor(&t, a, &cfg)?,
    };
    let mut result = serde_json::to_value(&report)?;
    if let Some(fit) = fit {
        result["cp_als"] = fit;
    }
    let text = render::cert_text(&report, result.get("cp_als"));
    Ok(Outcome { result, text: Some(text), exit: report.verdict.exit_code() as u8 })
}

fn flatten_tensor<S: Scalar>(t: &Tensor<S>, a: &FlattenArgs) -> Result<Value> {
    let p = t.order();
    match &a.rows {
        Some(rows) => {
            if rows.iter().any(|&m| m == 0 || m > p) {
                return Err(invalid(format!("row modes must lie in 1..={p}")));
            }
            let modes: Vec<usize> = rows.iter().map(|m| m - 1).collect();
            let flat = t.flatten(&modes)?;
            let (rank, _) = flattening_witness(t, &modes, usize::MAX - 1, a.tol)?;
            let col_modes: Vec<usize> = (1..=p).filter(|m| !rows.contains(m)).collect();
            let entries: Vec<Vec<Value>> = flat
                .data()
                .chunks(flat.dims()[1])
                .map(|row| row.iter().map(Scalar::to_json).collect())
                .collect();
            Ok(json!({
                "row_modes": rows,
                "col_modes": col_modes,
                "shape": flat.dims(),
                "rank": rank,
                "entries": entries,
            }))
        }
        None => {
            let ranks = bipartitions(p)
                .iter()
                .map(|bp| {
                    let (rank, _) = flattening_witness(t, &bp.rows, usize::MAX - 1, a.tol)?;
                    Ok(json!({
                        "row_modes": bp.rows.iter().map(|m| m + 1).collect::<Vec<_>>(),
                        "col_modes": bp.cols.iter().map(|m| m + 1).collect::<Vec<_>>(),
                        "rank": rank,
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            let bound = ranks.iter().filter_map(|r| r["rank"].as_u64()).max().unwrap_or(0);
            Ok(json!({ "flattenings": ranks, "lower_bound": bound }))
        }
    }
}

fn flatten(cli: &Cli, a: &FlattenArgs) -> Result<Outcome> {
    let result = match load_tensor(cli, &a.file)? {
        AnyTensor::Rational(t) => flatten_tensor(&t, a)?,
        AnyTensor::Float64(t) => flatten_tensor(&t, a)?,
    };
    Ok(Outcome::ok(result))
}

fn probe(cli: &Cli, a: &ProbeArgs) -> Result<Outcome> {
    let modulus: Modulus = a.modulus.parse()?;
    let cfg = ProbeConfig {
        oversample: a.oversample,
        seed: cli.seed,
        modulus,
        kernel: a.kernel_out.is_some(),
        ..ProbeConfig::default()
    };
    let r = ideal_degree_dim(&a.dims, a.k, a.degree, &cfg)?;
    let mut result = serde_json::to_value(&r)?;
    if let (Some(path), Some(kernel)) = (&a.kernel_out, &r.kernel) {
        io::write_json(path, &Value::Array(kernel.iter().map(io::poly_to_json).collect()))?;
        result["kernel_out"] = json!(path);
        result["kernel_text"] = json!(kernel.iter().map(|f| f.to_string()).collect::<Vec<_>>());
    }
    let exit = if r.agreed { 0 } else { 2 };
    Ok(Outcome { result, text: None, exit })
}

fn complete(cli: &Cli, c: &CompleteCommand) -> Result<Outcome> {
    match c {
        CompleteCommand::Extract { prefix, per_slab, output, tensor } => {
            let t = match io::read_tensor(tensor)? {
                AnyTensor::Rational(t) => t,
                AnyTensor::Float64(_) => return Err(Error::ExactFieldRequired),
            };
            let b = extract_boundary(&t, *prefix, *per_slab)?;
            let v = io::boundary_to_json(&b);
            match output {
                Some(path) => {
                    io::write_json(path, &v)?;
                    Ok(Outcome::ok(json!({ "output": path, "values": b.entries.len() })))
                }
                None => Ok(Outcome::ok(v)),
            }
        }
        CompleteCommand::Validate { boundary } => {
            let b = io::boundary_from_json(&io::read_json(boundary)?)?;
            let violations = validate_boundary(&b);
            let exit = u8::from(!violations.is_empty());
            Ok(Outcome { result: json!({ "compatible": violations.is_empty(), "violations": violations }), text: None, exit })
        }
        CompleteCommand::Fill { boundary, pivot, output } => {
            if cli.field != Field::Rational {
                return Err(Error::ExactFieldRequired);
            }
            let b = io::boundary_from_json(&io::read_json(boundary)?)?;
            let pivot = io::pivot_from_json(&io::read_json(pivot)?, b.n)?;
            let t = complete_tensor(&b, &pivot)?;
            emit_tensor(io::tensor_to_json(&t), output)
        }
        CompleteCommand::Formula { pivot, prefix, word, n } => {
            let pivot = io::pivot_from_json(&io::read_json(pivot)?, *n)?;
            let w = Word::parse(*n, word)?;
            let (num, den) = completion_formula(&pivot, *prefix, &w)?;
            let result = json!({
                "word": w.to_digit_string(),
                "numerator": io::poly_to_json(&num),
                "denominator": io::poly_to_json(&den),
                "formula": format!("x{} = ({num}) / ({den})", w.to_digit_string()),
            });
            let text = format!("x{} = ({num}) / ({den})\n", w.to_digit_string());
            Ok(Outcome { result, text: Some(text), exit: 0 })
        }
    }
}

/// Alphabet size for digit-string words: as given, or one more than the largest digit.
fn alphabet(n: Option<usize>, words: &[&str]) -> Result<usize> {
    if let Some(n) = n {
        return Ok(n);
    }
    let max = words
        .iter()
        .flat_map(|w| w.chars())
        .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| invalid(format!("`{c}` is not a digit"))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    Ok((max + 1).max(2))
}

fn orbit(c: &OrbitCommand) -> Result<Outcome> {
    match c {
        OrbitCommand::Witness { wa, wb, n } => {
            let n = alphabet(*n, &[wa, wb])?;
            let (a, b) = (Word::parse(n, wa)?, Word::parse(n, wb)?);
            let sigma = subs_witness(&a, &b);
            let result = json!({
                "wa": a.to_digit_string(),
                "wb": b.to_digit_string(),
                "exists": sigma.is_some(),
                "sigma": sigma.as_ref().map(io::subs_to_json),
                "image": sigma.as_ref().map(|s| s.act(&a).map(|w| w.to_digit_string())).transpose()?,
                "increasing": sigma.as_ref().map(SubsElement::is_increasing),
            });
            let text = match &sigma {
                Some(s) => format!("sigma = {}\nsigma({}) = {}\n", render::sets(s), a, s.act(&a)?),
                None => format!("no increasing substitution maps {a} to {b}\n"),
            };
            Ok(Outcome { result, text: Some(text), exit: if sigma.is_some() { 0 } else { 1 } })
        }
        OrbitCommand::Act { sigma, word, n } => {
            let n = alphabet(*n, &[word])?;
            let s = io::subs_from_json(&serde_json::from_str(sigma)?)?;
            let w = Word::parse(n, word)?;
            let image = s.act(&w)?;
            Ok(Outcome {
                result: json!({ "word": w.to_digit_string(), "sigma": io::subs_to_json(&s), "image": image.to_digit_string() }),
                text: Some(format!("{image}\n")),
                exit: 0,
            })
        }
        OrbitCommand::Canonical { k, n } => {
            let (rows, cols) = canonical_minor_words(*k, *n)?;
            let digits = |ws: &[Word]| ws.iter().map(Word::to_digit_string).collect::<Vec<_>>();
            let text = format!("rows: {}\ncols: {}\n", digits(&rows).join(" "), digits(&cols).join(" "));
            Ok(Outcome { result: json!({ "rows": digits(&rows), "cols": digits(&cols) }), text: Some(text), exit: 0 })
        }
        OrbitCommand::Embed { wa, wb, n } => {
            let n = alphabet(*n, &[wa, wb])?;
            let (a, b) = (Word::parse(n, wa)?, Word::parse(n, wb)?);
            let pi = higman_embed(&a, &b);
            let values = pi.as_ref().map(|p| p.values().to_vec());
            Ok(Outcome { result: json!({ "wa": a.to_digit_string(), "wb": b.to_digit_string(), "map": values }), text: None, exit: u8::from(pi.is_none()) })
        }
        OrbitCommand::Minor { rows, cols, n } => {
            if rows.len() != cols.len() {
                return Err(invalid("a minor needs as many row words as column words"));
            }
            let all: Vec<&str> = rows.iter().chain(cols).map(String::as_str).collect();
            let n = alphabet(*n, &all)?;
            let parse = |ws: &[String]| ws.iter().map(|w| Word::parse(n, w)).collect::<Result<Vec<_>>>();
            let (r, c) = (parse(rows)?, parse(cols)?);
            brank::flattening::MinorSpec::new(r.clone(), c.clone())?;
            let canonical = canonical_minor_words(r.len(), n)?;
            let sigma = orbit_element((&canonical.0, &canonical.1), (&r, &c))?;
            Ok(Outcome {
                result: json!({ "sigma": io::subs_to_json(&sigma) }),
                text: Some(format!("sigma = {}\n", render::sets(&sigma))),
                exit: 0,
            })
        }
    }
}

fn read_tree(path: &Path) -> Result<Tree> {
    parse_newick(&std::fs::read_to_string(path)?)
}

fn phylo(cli: &Cli, c: &PhyloCommand) -> Result<Outcome> {
    match c {
        PhyloCommand::Check { tree, k, p0, trials, tensor } => {
            let tree = read_tree(tree)?;
            let cfg = test_config(cli, *k, *p0, *trials, None)?;
            let report = match load_tensor(cli, tensor)? {
                AnyTensor::Rational(t) => check_membership(&t, &tree, &cfg)?,
                AnyTensor::Float64(t) => check_membership(&t, &tree, &cfg)?,
            };
            let exit = report.verdict.exit_code() as u8;
            Ok(Outcome { result: serde_json::to_value(&report)?, text: None, exit })
        }
        PhyloCommand::Simulate { tree, k, states, stochastic, output } => {
            let tree = read_tree(tree)?;
            let states = vec![states.unwrap_or(*k); tree.leaves().len()];
            let params = random_params(&tree, *k, &states, *stochastic, cli.seed)?;
            let t: Tensor<Rational> = model_tensor(&tree, &params)?;
            emit_tensor(AnyTensor::Rational(t).into_field(cli.field)?.to_json(), output)
        }
    }
}
