//! JSON encodings of tensors, words, polynomials, monoid elements and
//! completion inputs.

use std::path::Path;

use serde_json::{json, Value};

use crate::completion::{BoundaryData, BoundaryEntry, Pivot};
use crate::error::{Error, Result};
use crate::poly::{Monomial, SparsePoly};
use crate::scalar::{format_rational, Field, Rational, Scalar};
use crate::tensor::Tensor;
use crate::words::{SubsElement, Word};

fn data(msg: impl Into<String>) -> Error {
    Error::Data(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| data(format!("missing field `{key}`")))
}

fn usize_of(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| data(format!("{what} must be a nonnegative integer")))
}

fn usize_list(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| data(format!("{what} must be a list")))?
        .iter()
        .map(|x| usize_of(x, what))
        .collect()
}

/// A tensor read from a file, in whichever field it declares.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTensor {
    Rational(Tensor<Rational>),
    Float64(Tensor<f64>),
}

impl AnyTensor {
    pub fn field(&self) -> Field {
        match self {
            AnyTensor::Rational(_) => Field::Rational,
            AnyTensor::Float64(_) => Field::Float64,
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            AnyTensor::Rational(t) => t.dims(),
            AnyTensor::Float64(t) => t.dims(),
        }
    }

    /// Converts to `field`; rationals become floats, never the reverse.
    pub fn into_field(self, field: Field) -> Result<AnyTensor> {
        match (self, field) {
            (AnyTensor::Rational(t), Field::Float64) => Ok(AnyTensor::Float64(t.to_float())),
            (AnyTensor::Float64(_), Field::Rational) => Err(Error::ExactFieldRequired),
            (t, _) => Ok(t),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyTensor::Rational(t) => tensor_to_json(t),
            AnyTensor::Float64(t) => tensor_to_json(t),
        }
    }
}

/// `{"dims", "field", "entries"}` with entries dense and row-major.
pub fn tensor_to_json<S: Scalar>(t: &Tensor<S>) -> Value {
    json!({
        "dims": t.dims(),
        "field": t.field().name(),
        "entries": t.data().iter().map(Scalar::to_json).collect::<Vec<_>>(),
    })
}

fn tensor_in<S: Scalar>(v: &Value, dims: Vec<usize>) -> Result<Tensor<S>> {
    if let Some(entries) = v.get("entries") {
        let entries = entries.as_array().ok_or_else(|| data("`entries` must be a list"))?;
        let values = entries.iter().map(S::from_json).collect::<Result<Vec<_>>>()?;
        return Tensor::new(dims, values);
    }
    let sparse = field(v, "sparse")?.as_array().ok_or_else(|| data("`sparse` must be a list"))?;
    let mut t = Tensor::<S>::zeros(&dims);
    let mut values = t.data().to_vec();
    for item in sparse {
        let index = usize_list(field(item, "index")?, "index")?;
        if index.len() != dims.len() || index.iter().zip(&dims).any(|(i, d)| i >= d) {
            return Err(data(format!("sparse index {index:?} outside dims {dims:?}")));
        }
        values[t.offset(&index)] = S::from_json(field(item, "value")?)?;
    }
    t = Tensor::new(dims, values)?;
    Ok(t)
}

/// Reads the dense or sparse tensor format. Without a `field` key the
/// entries decide: any non-integer number means binary64.
pub fn tensor_from_json(v: &Value) -> Result<AnyTensor> {
    let dims = usize_list(field(v, "dims")?, "dims")?;
    let declared = match v.get("field") {
        Some(f) => f.as_str().ok_or_else(|| data("`field` must be a string"))?.parse::<Field>()?,
        None => {
            let values = v.get("entries").and_then(Value::as_array);
            let floaty = values.is_some_and(|xs| xs.iter().any(|x| x.is_f64()));
            if floaty { Field::Float64 } else { Field::Rational }
        }
    };
    Ok(match declared {
        Field::Rational => AnyTensor::Rational(tensor_in(v, dims)?),
        Field::Float64 => AnyTensor::Float64(tensor_in(v, dims)?),
    })
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_tensor(path: &Path) -> Result<AnyTensor> {
    tensor_from_json(&read_json(path)?)
}

/// Pretty JSON followed by a newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_pretty(v))?;
    Ok(())
}

/// A word as a digit string or in the pair form `[[pos, symbol], ...]`.
pub fn word_from_json(v: &Value, n: usize) -> Result<Word> {
    match v {
        Value::String(s) => Word::parse(n, s),
        Value::Array(pairs) => {
            let pairs = pairs
                .iter()
                .map(|p| match p.as_array().map(Vec::as_slice) {
                    Some([pos, sym]) => Ok((usize_of(pos, "position")?, usize_of(sym, "symbol")?)),
                    _ => Err(data("word pairs must be [position, symbol]")),
                })
                .collect::<Result<Vec<_>>>()?;
            Word::from_pairs(n, &pairs)
        }
        _ => Err(data("a word is a digit string or a list of [position, symbol] pairs")),
    }
}

pub fn word_to_json(w: &Word) -> Value {
    serde_json::to_value(w).expect("words serialize")
}

/// `[{"coeff": "a/b", "monomial": [[word, exp], ...]}, ...]`, terms in
/// decreasing monomial order.
pub fn poly_to_json(f: &SparsePoly) -> Value {
    Value::Array(
        f.terms()
            .rev()
            .map(|(m, c)| {
                json!({
                    "coeff": format_rational(c),
                    "monomial": m.factors().iter().map(|(w, e)| json!([word_to_json(w), e])).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

pub fn poly_from_json(v: &Value, n: usize) -> Result<SparsePoly> {
    let terms = v.as_array().ok_or_else(|| data("a polynomial is a list of terms"))?;
    let terms = terms
        .iter()
        .map(|term| {
            let c = Rational::from_json(field(term, "coeff")?)?;
            let factors = field(term, "monomial")?
                .as_array()
                .ok_or_else(|| data("`monomial` must be a list"))?
                .iter()
                .map(|f| match f.as_array().map(Vec::as_slice) {
                    Some([w, e]) => Ok((word_from_json(w, n)?, usize_of(e, "exponent")? as u32)),
                    _ => Err(data("monomial factors are [word, exponent]")),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((Monomial::from_factors(factors), c))
        })
        .collect::<Result<Vec<_>>>()?;
    SparsePoly::from_terms(n, terms)
}

pub fn subs_to_json(sigma: &SubsElement) -> Value {
    json!(sigma.to_lists())
}

pub fn subs_from_json(v: &Value) -> Result<SubsElement> {
    let lists = v
        .as_array()
        .ok_or_else(|| data("a monoid element is a list of integer lists"))?
        .iter()
        .map(|l| usize_list(l, "set"))
        .collect::<Result<Vec<_>>>()?;
    SubsElement::from_lists(&lists)
}

/// `{"p", "n", "q", "values": [[word, "num/den"(, slab)], ...]}`.
pub fn boundary_to_json(b: &BoundaryData) -> Value {
    let values: Vec<Value> = b
        .entries
        .iter()
        .map(|e| {
            let mut item = vec![json!(e.word.to_digit_string()), json!(format_rational(&e.value))];
            if let Some(s) = e.slab {
                if e.word.max_support() <= b.p {
                    item.push(json!(s));
                }
            }
            Value::Array(item)
        })
        .collect();
    json!({ "p": b.p, "n": b.n, "q": b.q, "values": values })
}

pub fn boundary_from_json(v: &Value) -> Result<BoundaryData> {
    let p = usize_of(field(v, "p")?, "p")?;
    let n = usize_of(field(v, "n")?, "n")?;
    let q = usize_of(field(v, "q")?, "q")?;
    let entries = field(v, "values")?
        .as_array()
        .ok_or_else(|| data("`values` must be a list"))?
        .iter()
        .map(|item| {
            let (w, value, slab) = match item.as_array().map(Vec::as_slice) {
                Some([w, value]) => (w, value, None),
                Some([w, value, slab]) => (w, value, Some(usize_of(slab, "slab")?)),
                _ => return Err(data("boundary values are [word, value] or [word, value, slab]")),
            };
            let word = word_from_json(w, n)?;
            let slab = slab.or_else(|| word.support().into_iter().find(|&pos| pos > p));
            Ok(BoundaryEntry { word, value: Rational::from_json(value)?, slab })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryData { p, n, q, entries })
}

/// `{"rows": [words], "cols": [words], "row_part": [positions]}`.
pub fn pivot_to_json(pivot: &Pivot) -> Value {
    let words = |ws: &[Word]| ws.iter().map(|w| json!(w.to_digit_string())).collect::<Vec<_>>();
    json!({
        "rows": words(&pivot.rows),
        "cols": words(&pivot.cols),
        "row_part": pivot.row_part,
    })
}

pub fn pivot_from_json(v: &Value, n: usize) -> Result<Pivot> {
    let words = |key: &str| -> Result<Vec<Word>> {
        field(v, key)?
            .as_array()
            .ok_or_else(|| data(format!("`{key}` must be a list of words")))?
            .iter()
            .map(|w| word_from_json(w, n))
            .collect()
    };
    Pivot::new(words("rows")?, words("cols")?, usize_list(field(v, "row_part")?, "row_part")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::extract_boundary;
    use crate::scalar::ratio;
    use crate::tensor::random_rank;

    #[test]
    fn tensor_round_trip_and_sparse_input() {
        let t = Tensor::new(vec![2, 2], vec![ratio(1, 2), ratio(-3, 1), ratio(0, 1), ratio(7, 3)]).unwrap();
        let v = tensor_to_json(&t);
        assert_eq!(v["entries"], json!(["1/2", "-3", "0", "7/3"]));
        assert_eq!(tensor_from_json(&v).unwrap(), AnyTensor::Rational(t.clone()));
        let sparse = json!({"dims": [2, 2], "field": "rational",
            "sparse": [{"index": [0, 0], "value": "1/2"}, {"index": [0, 1], "value": -3}, {"index": [1, 1], "value": "7/3"}]});
        assert_eq!(tensor_from_json(&sparse).unwrap(), AnyTensor::Rational(t));
        let f = json!({"dims": [2], "entries": [0.5, 1]});
        assert_eq!(tensor_from_json(&f).unwrap().field(), Field::Float64);
        assert!(tensor_from_json(&json!({"dims": [2], "sparse": [{"index": [2], "value": 1}]})).is_err());
        assert!(tensor_from_json(&json!({"dims": [3], "entries": [1, 2]})).is_err());
    }

    #[test]
    fn words_polys_and_monoid_elements() {
        let w = word_from_json(&json!("0102"), 3).unwrap();
        assert_eq!(word_from_json(&word_to_json(&w), 3).unwrap(), w);
        let f = SparsePoly::var(Word::parse(3, "11").unwrap())
            .mul(&SparsePoly::var(Word::parse(3, "22").unwrap()))
            .sub(&SparsePoly::var(Word::parse(3, "12").unwrap()).scale(&ratio(1, 2)));
        assert_eq!(poly_from_json(&poly_to_json(&f), 3).unwrap(), f);
        let sigma = SubsElement::from_lists(&[vec![1, 3], vec![2]]).unwrap();
        assert_eq!(subs_from_json(&subs_to_json(&sigma)).unwrap(), sigma);
    }

    #[test]
    fn boundary_and_pivot_round_trip() {
        let (t, _) = random_rank(&[2, 2, 2, 2], 1, 3, 10).unwrap();
        for per_slab in [false, true] {
            let b = extract_boundary(&t, 2, per_slab).unwrap();
            assert_eq!(boundary_from_json(&boundary_to_json(&b)).unwrap(), b);
        }
        let pivot = Pivot::new(vec![Word::parse(2, "1").unwrap()], vec![Word::parse(2, "01").unwrap()], [1]).unwrap();
        assert_eq!(pivot_from_json(&pivot_to_json(&pivot), 2).unwrap(), pivot);
    }
}
