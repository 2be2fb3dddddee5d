use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::numeric::pmf_moments;

/// Header line carried by every CSV this crate writes.
pub const SCHEMA_HEADER: &str = "# degreenet-schema v1";

/// How a degree pmf was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactDp,
    Quadrature,
    ParetoClosedForm,
    SmoothRepro,
    SparseBeta,
    SparseGamma,
    ExtremeLimit,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ExactDp => "exact_dp",
            Provenance::Quadrature => "quadrature",
            Provenance::ParetoClosedForm => "pareto_closed_form",
            Provenance::SmoothRepro => "smooth_repro",
            Provenance::SparseBeta => "sparse_beta",
            Provenance::SparseGamma => "sparse_gamma",
            Provenance::ExtremeLimit => "extreme_limit",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Provenance::ExactDp | Provenance::Quadrature)
    }
}

/// An extra per-`k` column carried alongside the pmf (comparison curves,
/// error bounds, intermediate arguments).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// A pmf over `k = 0, 1, ...` with its provenance and moment summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeLaw {
    pub pmf: Vec<f64>,
    pub provenance: Provenance,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// Total mass; differs from one for approximations.
    pub mass: f64,
    pub columns: Vec<Column>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl DegreeLaw {
    pub fn new(pmf: Vec<f64>, provenance: Provenance, n: usize) -> Self {
        let mass = crate::numeric::kahan_sum(pmf.iter().copied());
        let (mean, variance) = if mass > 0.0 {
            pmf_moments(&pmf)
        } else {
            (f64::NAN, f64::NAN)
        };
        Self {
            pmf,
            provenance,
            n,
            mean,
            variance,
            mass,
            columns: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.columns.push(Column {
            name: name.into(),
            values,
        });
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.metadata.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
        self
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Variance-to-mean ratio.
    pub fn dispersion(&self) -> f64 {
        self.variance / self.mean
    }

    /// CSV with columns `k,pmf,provenance,n` followed by any extra columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(SCHEMA_HEADER);
        out.push('\n');
        out.push_str("k,pmf,provenance,n");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push('\n');
        for (k, p) in self.pmf.iter().enumerate() {
            let _ = write!(out, "{k},{p},{},{}", self.provenance.as_str(), self.n);
            for c in &self.columns {
                match c.values.get(k) {
                    Some(v) if v.is_finite() => {
                        let _ = write!(out, ",{v}");
                    }
                    _ => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let law = DegreeLaw::new(vec![0.25, 0.5, 0.25], Provenance::ExactDp, 3)
            .with_column("approx", vec![0.2, f64::NAN, 0.3]);
        let csv = law.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SCHEMA_HEADER);
        assert_eq!(lines[1], "k,pmf,provenance,n,approx");
        assert_eq!(lines[2], "0,0.25,exact_dp,3,0.2");
        assert_eq!(lines[3], "1,0.5,exact_dp,3,");
        assert!((law.mean - 1.0).abs() < 1e-15);
        assert!((law.variance - 0.5).abs() < 1e-15);
    }

    #[test]
    fn json_carries_provenance() {
        let law = DegreeLaw::new(vec![1.0, 0.0], Provenance::SparseGamma, 2).with_meta("regime", "gamma");
        let v: serde_json::Value = serde_json::from_str(&law.to_json().unwrap()).unwrap();
        assert_eq!(v["provenance"], "sparse_gamma");
        assert_eq!(v["metadata"]["regime"], "gamma");
    }
}
