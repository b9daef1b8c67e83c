//! JSON encoding of exact values.
//!
//! Rationals are strings `"p/q"`, Gaussian rationals `{"re", "im"}`, multi-
//! indices integer arrays and delta vectors `{"n", "terms"}` with terms in
//! graded-lex order.

use onshell_core::deltaspace::{DeltaVector, MultiIndex};
use onshell_core::linalg::UniPoly;
use onshell_core::scalar::{Gaussian, Rational, Scalar};
use onshell_core::spectral::RestrictionMatrix;
use serde_json::{json, Map, Value};

use crate::parse::parse_rational;

pub fn rational(q: &Rational) -> Value {
    Value::String(q.to_string())
}

pub fn scalar(c: &Gaussian) -> Value {
    let (re, im) = c.parts();
    json!({"re": re.to_string(), "im": im.to_string()})
}

pub fn multi_index(a: &MultiIndex) -> Value {
    Value::Array(a.exponents().iter().map(|&e| Value::from(e)).collect())
}

pub fn delta(v: &DeltaVector<Gaussian>) -> Value {
    let terms: Vec<Value> = v
        .terms()
        .map(|(a, c)| json!({"alpha": multi_index(a), "coeff": scalar(c)}))
        .collect();
    json!({"n": v.dim(), "terms": terms, "text": v.to_string()})
}

pub fn unipoly(p: &UniPoly<Gaussian>) -> Value {
    json!({
        "coeffs": p.coeffs().iter().map(scalar).collect::<Vec<_>>(),
        "degree": p.degree(),
        "text": p.to_string(),
    })
}

pub fn restriction(m: &RestrictionMatrix<Gaussian>) -> Value {
    let basis = |b: Vec<MultiIndex>| b.iter().map(multi_index).collect::<Vec<_>>();
    let rows: Vec<Value> = m
        .matrix
        .to_rows()
        .iter()
        .map(|r| Value::Array(r.iter().map(scalar).collect()))
        .collect();
    json!({
        "n": m.n,
        "domain_degree": m.r_domain,
        "codomain_degree": m.r_codomain,
        "domain_basis": basis(m.domain_basis()),
        "codomain_basis": basis(m.codomain_basis()),
        "rows": rows,
        "provenance": m.provenance,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeError(pub String);

impl std::fmt::Display for DecodeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, DecodeError> {
    Err(DecodeError(msg.into()))
}

fn decode_rational(v: &Value) -> Result<Rational, DecodeError> {
    match v {
        Value::String(s) => {
            parse_rational(s.trim()).map_err(|e| DecodeError(format!("{s:?}: {e}")))
        }
        Value::Number(n) => match n.as_i64() {
            Some(k) => Ok(Rational::from_integer(k.into())),
            None => err(format!("{n} is not an integer; write fractions as \"p/q\"")),
        },
        _ => err(format!("expected a rational, found {v}")),
    }
}

pub fn decode_scalar(v: &Value) -> Result<Gaussian, DecodeError> {
    match v {
        Value::Object(m) => {
            let part = |k: &str| {
                m.get(k)
                    .map_or(Ok(Rational::from_integer(0.into())), decode_rational)
            };
            for k in m.keys() {
                if k != "re" && k != "im" {
                    return err(format!("unexpected key {k:?} in scalar"));
                }
            }
            Ok(Gaussian::new(part("re")?, part("im")?))
        }
        _ => decode_rational(v).map(Gaussian::from_rational),
    }
}

fn decode_alpha(v: &Value, n: Option<usize>) -> Result<MultiIndex, DecodeError> {
    let Value::Array(xs) = v else {
        return err(format!("alpha must be an array, found {v}"));
    };
    let e = xs
        .iter()
        .map(|x| {
            x.as_u64()
                .and_then(|k| u32::try_from(k).ok())
                .ok_or_else(|| DecodeError(format!("bad exponent {x}")))
        })
        .collect::<Result<Vec<u32>, _>>()?;
    if let Some(n) = n {
        if e.len() != n {
            return err(format!("alpha {v} has length {}, expected {n}", e.len()));
        }
    }
    Ok(MultiIndex::new(e))
}

fn decode_term(v: &Value, n: Option<usize>) -> Result<(MultiIndex, Gaussian), DecodeError> {
    let Value::Object(m) = v else {
        return err(format!("expected a term object, found {v}"));
    };
    let alpha = decode_alpha(
        m.get("alpha")
            .ok_or(DecodeError("term without alpha".into()))?,
        n,
    )?;
    let coeff = m
        .get("coeff")
        .map_or(Ok(Gaussian::from_integer(1)), decode_scalar)?;
    Ok((alpha, coeff))
}

/// Accepts a full `{"n", "terms"}` object, a bare list of terms or a single
/// `{"alpha", "coeff"}` term. `n` is the expected dimension.
pub fn decode_delta(v: &Value, n: usize) -> Result<DeltaVector<Gaussian>, DecodeError> {
    let terms: Vec<(MultiIndex, Gaussian)> = match v {
        Value::Object(m) if m.contains_key("terms") => {
            if let Some(k) = m.get("n") {
                if k.as_u64() != Some(n as u64) {
                    return err(format!("vector has n = {k}, expected {n}"));
                }
            }
            let Some(Value::Array(ts)) = m.get("terms") else {
                return err("terms must be an array");
            };
            ts.iter()
                .map(|t| decode_term(t, Some(n)))
                .collect::<Result<_, _>>()?
        }
        Value::Object(_) => vec![decode_term(v, Some(n))?],
        Value::Array(ts) => ts
            .iter()
            .map(|t| decode_term(t, Some(n)))
            .collect::<Result<_, _>>()?,
        _ => return err(format!("expected a delta vector, found {v}")),
    };
    Ok(DeltaVector::from_terms(n, terms))
}

/// Sorted-key object from pairs.
pub fn object<I: IntoIterator<Item = (&'static str, Value)>>(items: I) -> Value {
    Value::Object(
        items
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}
