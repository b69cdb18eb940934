//! Machine-readable reports. Key order is fixed by struct declaration order
//! and `BTreeMap`; floats are written with 17 significant digits.

use std::collections::BTreeMap;

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = "wdvv";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A float written as `d.dddddddddddddddde±x`; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(pub f64);

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(format!("{:.16e}", self.0))
            .map_err(S::Error::custom)?
            .serialize(s)
    }
}

pub fn floats(v: &[f64]) -> Vec<Float> {
    v.iter().copied().map(Float).collect()
}

pub fn float_rows(rows: &[Vec<f64>]) -> Vec<Vec<Float>> {
    rows.iter().map(|r| floats(r)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub max_abs: Float,
    pub threshold: Float,
    pub pass: bool,
    pub worst_point: Option<Vec<Float>>,
    pub worst_indices: Option<Vec<usize>>,
    /// Signed value at the worst location, where one is meaningful.
    pub worst_value: Option<Float>,
}

/// Running maximum of a residual over sample points.
#[derive(Debug, Clone, Default)]
pub struct Tracker {
    max_abs: f64,
    point: Option<Vec<f64>>,
    indices: Option<Vec<usize>>,
    value: Option<f64>,
}

impl Tracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `|value|` at `point`; NaN counts as infinite.
    pub fn observe(&mut self, magnitude: f64, point: &[f64], indices: Option<Vec<usize>>, value: Option<f64>) {
        let m = if magnitude.is_nan() { f64::INFINITY } else { magnitude.abs() };
        if self.point.is_none() || m > self.max_abs {
            self.max_abs = m;
            self.point = Some(point.to_vec());
            self.indices = indices;
            self.value = value;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn finish(self, threshold: f64) -> CheckRecord {
        CheckRecord {
            max_abs: Float(self.max_abs),
            threshold: Float(threshold),
            pass: self.max_abs <= threshold,
            worst_point: self.point.map(|p| floats(&p)),
            worst_indices: self.indices,
            worst_value: self.value.map(Float),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RealizeDetails {
    pub rows: usize,
    pub ambient_dim: usize,
    pub affine_rank: usize,
    pub diagonalized: bool,
    /// `[positive, negative]` of the ambient metric.
    pub ambient_signature: [usize; 2],
    pub step: Float,
    pub path_end: Vec<Float>,
    pub points_file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HydroSample {
    pub point: Vec<Float>,
    pub abc: Vec<Float>,
    pub w2: Vec<Vec<Float>>,
    pub w3: Vec<Vec<Float>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub sample_count: usize,
    pub pass: bool,
    pub checks: BTreeMap<String, CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realize: Option<RealizeDetails>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hydro: Option<Vec<HydroSample>>,
}

impl Report {
    pub fn new(command: &'static str, config_digest: String, seed: Option<u64>, sample_count: usize) -> Self {
        Self {
            schema: SCHEMA,
            tool: TOOL,
            version: VERSION,
            command,
            config_digest,
            seed,
            sample_count,
            pass: true,
            checks: BTreeMap::new(),
            realize: None,
            hydro: None,
        }
    }

    pub fn insert(&mut self, name: &str, record: CheckRecord) {
        self.pass &= record.pass;
        let previous = self.checks.insert(name.to_string(), record);
        debug_assert!(previous.is_none(), "check {name} reported twice");
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(serde_json::to_string(&Float(1e-10)).unwrap(), "1.0000000000000000e-10");
        assert_eq!(serde_json::to_string(&Float(-36.0)).unwrap(), "-3.6000000000000000e1");
        assert_eq!(serde_json::to_string(&Float(f64::NAN)).unwrap(), "null");
        let x = 0.1 + 0.2;
        let back: f64 = serde_json::from_str(&serde_json::to_string(&Float(x)).unwrap()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn tracker_keeps_first_maximum() {
        let mut t = Tracker::new();
        t.observe(1.0, &[0.0], None, Some(-1.0));
        t.observe(1.0, &[1.0], None, Some(1.0));
        t.observe(f64::NAN, &[2.0], None, None);
        let r = t.finish(1.0);
        assert!(!r.pass);
        assert_eq!(r.worst_point.unwrap(), vec![Float(2.0)]);
    }
}
