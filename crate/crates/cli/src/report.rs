//! JSON report with byte-stable number formatting.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use tlsub_core::C64;

/// A float written with 17 significant digits; non-finite values become `null`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Real(pub f64);

impl Real {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            // normalize -0 so that reports do not depend on the sign of zero
            let x = if self.0 == 0.0 { 0.0 } else { self.0 };
            format!("{x:.16e}")
        } else {
            "null".into()
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn complex(z: C64) -> [Real; 2] {
    [Real(z.re), Real(z.im)]
}

pub fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Real,
    pub threshold: Real,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value <= threshold`; NaN fails.
    pub fn residual(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value: Real(value),
            threshold: Real(threshold),
            pass: value <= threshold,
            detail: None,
        }
    }

    /// An exact check, recorded as value 0 (holds) or 1 (fails) against threshold 0.
    pub fn exact(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            value: Real(if ok { 0.0 } else { 1.0 }),
            threshold: Real(0.0),
            pass: ok,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct InputEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<[Real; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncate: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub tol: Real,
}

#[derive(Clone, Debug, Serialize)]
pub struct Parameters {
    pub m: usize,
    pub lambda: Real,
    pub q: Real,
    pub t: Real,
    /// `+1`, `-1`, or `null` when the sign is undefined.
    pub tau: Option<i8>,
}

/// One row of a decay table: `(n, value, value / q^n)`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub value: Real,
    pub ratio: Real,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayTable {
    pub name: String,
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    pub fn new(name: &str, q: f64, values: impl IntoIterator<Item = (usize, f64)>) -> Self {
        DecayTable {
            name: name.into(),
            rows: values
                .into_iter()
                .map(|(n, v)| DecayRow {
                    n,
                    value: Real(v),
                    ratio: Real(v / q.powi(n as i32)),
                })
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value,value/q^n\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, r.value.text(), r.ratio.text()));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: Real,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub input: InputEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Parameters>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<DecayTable>,
    /// Command-specific results, pre-serialized so that floats keep their formatting.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub data: BTreeMap<String, Box<RawValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<Timing>>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, input: InputEcho) -> Self {
        Report {
            command: command.into(),
            input,
            parameters: None,
            checks: Vec::new(),
            tables: Vec::new(),
            data: BTreeMap::new(),
            timings: None,
            pass: false,
        }
    }

    pub fn put(&mut self, key: &str, value: &impl Serialize) {
        let raw = serde_json::value::to_raw_value(value).expect("data serializes");
        self.data.insert(key.into(), raw);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
