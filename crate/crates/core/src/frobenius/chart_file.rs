//! JSON chart files.
//!
//! ```json
//! {"n": 1, "eta": [[1, 0]], "potential": [[0.1666, 0, [3]]],
//!  "unit_index": 0, "euler": {"d": [1], "r": [0]}, "weight_D": 2}
//! ```
//! Complex entries are either plain numbers or `[re, im]` pairs.

use num_complex::Complex64 as C;
use serde::Deserialize;

use super::{CMat, Euler, FrobeniusChart, FrobeniusError, Multiplication};
use crate::poly::Poly;

#[derive(Deserialize, Clone, Copy)]
#[serde(untagged)]
enum Num {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Num> for C {
    fn from(n: Num) -> C {
        match n {
            Num::Real(x) => C::new(x, 0.0),
            Num::Pair([re, im]) => C::new(re, im),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EulerFile {
    d: Vec<Num>,
    #[serde(default)]
    r: Option<Vec<Num>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartFile {
    n: usize,
    eta: Vec<Num>,
    potential: Vec<(f64, f64, Vec<u32>)>,
    unit_index: usize,
    euler: EulerFile,
    #[serde(rename = "weight_D")]
    weight_d: Num,
    #[serde(default)]
    sample_center: Option<Vec<Num>>,
    #[serde(default)]
    sample_radius: Option<f64>,
}

fn field(name: &str, msg: String) -> FrobeniusError {
    FrobeniusError::Format(format!("field `{name}`: {msg}"))
}

/// Parses a chart; errors carry the line/column or the offending field.
pub fn parse_chart(text: &str) -> Result<FrobeniusChart, FrobeniusError> {
    let raw: ChartFile = serde_json::from_str(text)
        .map_err(|e| FrobeniusError::Format(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let n = raw.n;
    if n == 0 {
        return Err(field("n", "must be ≥ 1".into()));
    }
    if raw.eta.len() != n * n {
        return Err(field("eta", format!("expected {} entries, got {}", n * n, raw.eta.len())));
    }
    let eta = CMat::from_fn(n, n, |i, j| raw.eta[i * n + j].into());
    if (&eta - eta.transpose()).iter().any(|z| z.norm() > 0.0) {
        return Err(field("eta", "not symmetric".into()));
    }
    let mut terms = Vec::with_capacity(raw.potential.len());
    for (k, (re, im, e)) in raw.potential.into_iter().enumerate() {
        if e.len() != n {
            return Err(field("potential", format!("term {k}: exponent vector has length {}, expected {n}", e.len())));
        }
        terms.push((C::new(re, im), e));
    }
    let d: Vec<C> = raw.euler.d.into_iter().map(C::from).collect();
    let r: Vec<C> = match raw.euler.r {
        Some(r) => r.into_iter().map(C::from).collect(),
        None => vec![C::new(0.0, 0.0); n],
    };
    if d.len() != n || r.len() != n {
        return Err(field("euler", format!("expected {n} entries in d and r")));
    }
    if raw.unit_index >= n {
        return Err(field("unit_index", format!("{} out of range", raw.unit_index)));
    }
    let mut chart = FrobeniusChart::new(eta, Multiplication::Potential(Poly::from_terms(n, terms)), raw.unit_index, Euler { d, r }, raw.weight_d.into())?;
    if let Some(c) = raw.sample_center {
        if c.len() != n {
            return Err(field("sample_center", format!("expected {n} entries")));
        }
        let radius = raw.sample_radius.unwrap_or(chart.sample_radius);
        chart = chart.with_sample_box(c.into_iter().map(C::from).collect(), radius);
    } else if let Some(r) = raw.sample_radius {
        chart.sample_radius = r;
    }
    Ok(chart)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_one_dimensional_chart() {
        let c = parse_chart(r#"{"n":1,"eta":[[1,0]],"potential":[[0.5,0,[3]]],"unit_index":0,"euler":{"d":[1]},"weight_D":2}"#).unwrap();
        assert_eq!(c.n, 1);
        assert_eq!(c.potential().unwrap().degree(), 3);
    }

    #[test]
    fn reports_location_and_field() {
        let e = parse_chart("{\"n\": 1,\n \"eta\": [1, }").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_chart(r#"{"n":2,"eta":[1,0,0],"potential":[],"unit_index":0,"euler":{"d":[1,1]},"weight_D":2}"#).unwrap_err();
        assert!(e.to_string().contains("eta"), "{e}");
    }
}
