use std::fmt::Write;

use serde_json::{json, Value};

use brank::certify::CertReport;
use brank::SubsElement;

use crate::commands::Outcome;
use crate::{Cli, Format};

/// The printed form of an outcome, newline terminated.
pub fn envelope(cli: &Cli, outcome: &Outcome) -> String {
    match cli.format {
        Format::Json => {
            let v = if cli.quiet {
                outcome.result.clone()
            } else {
                json!({ "config": cli, "result": outcome.result })
            };
            let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let body = outcome.text.clone().unwrap_or_else(|| {
                let mut s = String::new();
                lines(&mut s, "", &outcome.result);
                s
            });
            if cli.quiet {
                body
            } else {
                let config = serde_json::to_string(cli).expect("configuration serializes");
                format!("# {config}\n{body}")
            }
        }
    }
}

/// Flattened `path: value` lines.
fn lines(out: &mut String, path: &str, v: &Value) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                lines(out, &p, x);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in xs.iter().enumerate() {
                lines(out, &format!("{path}[{i}]"), x);
            }
        }
        Value::String(s) => {
            let _ = writeln!(out, "{path}: {s}");
        }
        _ => {
            let _ = writeln!(out, "{path}: {v}");
        }
    }
}

/// `({1,2}, {4}, ...)`.
pub fn sets(s: &SubsElement) -> String {
    let parts: Vec<String> = s
        .sets()
        .iter()
        .map(|set| format!("{{{}}}", set.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    format!("({})", parts.join(", "))
}

pub fn cert_text(r: &CertReport, cp_als: Option<&Value>) -> String {
    let mut s = format!("verdict: {} (k = {}, method {})\n", r.verdict.name(), r.k, r.method);
    if let Some(rank) = r.flattening_rank {
        let _ = writeln!(s, "largest flattening rank: {rank}");
    }
    if let Some(m) = &r.minor {
        let words = |ws: &[brank::Word]| ws.iter().map(|w| w.to_digit_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "nonzero minor on row modes {:?}: rows {} / cols {} = {}", m.row_modes, words(&m.rows), words(&m.cols), m.value.as_str().map_or_else(|| m.value.to_string(), str::to_string));
    }
    if let Some(w) = &r.strassen {
        let _ = writeln!(s, "Strassen bound {} exceeds k", w.bound_exact);
    }
    if let Some(c) = &r.contraction {
        let _ = writeln!(s, "after contracting modes {:?} (trial {})", c.modes, c.trial);
    }
    if let Some(st) = &r.stats {
        let _ = writeln!(s, "{} subsets x {} trials, p0 = {}", st.subsets, st.trials, st.p0);
    }
    if let Some(fit) = cp_als {
        let _ = writeln!(s, "cp-als residual: {}", fit["residual"]);
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}
