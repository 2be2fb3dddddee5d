//! Moment estimators of the weights from an observed degree vector.
//!
//! `π̂_i = d_i / √‖d‖₁` and `p̂_ij = d_i d_j / ‖d‖₁`. Under power-law weights
//! `π̂_i` is asymptotically Normal around `π_i` with variance `π_i / ‖π‖₁`,
//! which [`clt_report`] turns into plug-in intervals.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{linear_fit, LinearFit};
use crate::specfun::std_normal_quantile;

/// Degrees below this make the Normal approximation doubtful.
pub const MIN_NORMAL_DEGREE: u64 = 10;

/// Ranks with degree below this are dropped by [`fit_exponent`].
pub const FIT_MIN_DEGREE: u64 = 10;

/// [`fit_exponent`] needs at least this many ranks after trimming.
pub const FIT_MIN_POINTS: usize = 10;

fn degree_sum(degrees: &[u64]) -> Result<u64> {
    let s: u64 = degrees.iter().sum();
    if s == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(s)
}

/// `d_i / √‖d‖₁` for every node.
///
/// ```
/// use degreenet::estimate::pi_hat;
/// let p = pi_hat(&[3, 1, 1, 1]).unwrap();
/// assert!((p[0] - 3.0 / 6f64.sqrt()).abs() < 1e-15);
/// ```
pub fn pi_hat(degrees: &[u64]) -> Result<Vec<f64>> {
    let root = (degree_sum(degrees)? as f64).sqrt();
    Ok(degrees.iter().map(|&d| d as f64 / root).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PHat {
    /// Estimate clamped to `[0, 1]`.
    pub value: f64,
    /// Unclamped `d_i d_j / ‖d‖₁`.
    pub raw: f64,
    pub clamped: bool,
}

fn make_p_hat(di: u64, dj: u64, sum: u64) -> PHat {
    let raw = di as f64 * dj as f64 / sum as f64;
    PHat {
        value: raw.min(1.0),
        raw,
        clamped: raw > 1.0,
    }
}

/// `d_i d_j / ‖d‖₁`, clamped to one with a flag.
pub fn p_hat(degrees: &[u64], i: usize, j: usize) -> Result<PHat> {
    for idx in [i, j] {
        if idx >= degrees.len() {
            return Err(Error::Index {
                index: idx,
                len: degrees.len(),
            });
        }
    }
    if i == j {
        return Err(Error::domain("p_hat", "need distinct nodes"));
    }
    Ok(make_p_hat(degrees[i], degrees[j], degree_sum(degrees)?))
}

/// Point estimates, plug-in standard errors and Normal intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub pi_hat: Vec<f64>,
    /// `√(π̂_i / √‖d‖₁)`.
    pub std_errors: Vec<f64>,
    pub intervals: Vec<(f64, f64)>,
    pub degree_sum: u64,
    pub level: f64,
    pub z: f64,
    /// Number of nodes with degree below [`MIN_NORMAL_DEGREE`].
    pub low_degree_count: usize,
    pub low_degree_warning: bool,
    #[serde(skip)]
    degrees: Vec<u64>,
}

impl EstimateReport {
    /// `p̂_ij`.
    pub fn p_hat(&self, i: usize, j: usize) -> Result<PHat> {
        p_hat(&self.degrees, i, j)
    }

    /// CSV with columns `node,degree,pi_hat,std_error,lo,hi`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from(crate::degree_laws::SCHEMA_HEADER);
        out.push_str("\nnode,degree,pi_hat,std_error,lo,hi\n");
        for i in 0..self.pi_hat.len() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{}",
                self.degrees[i], self.pi_hat[i], self.std_errors[i], self.intervals[i].0, self.intervals[i].1
            );
        }
        out
    }
}

/// Estimates with `level` two-sided Normal intervals.
pub fn clt_report(degrees: &[u64], level: f64) -> Result<EstimateReport> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain("clt_report", format!("need level in (0, 1), got {level}")));
    }
    let sum = degree_sum(degrees)?;
    let root = (sum as f64).sqrt();
    let z = std_normal_quantile(0.5 + 0.5 * level);
    let pi_hat: Vec<f64> = degrees.iter().map(|&d| d as f64 / root).collect();
    let std_errors: Vec<f64> = pi_hat.iter().map(|&p| (p / root).sqrt()).collect();
    let intervals = pi_hat
        .iter()
        .zip(&std_errors)
        .map(|(&p, &s)| (p - z * s, p + z * s))
        .collect();
    let low = degrees.iter().filter(|&&d| d < MIN_NORMAL_DEGREE).count();
    Ok(EstimateReport {
        pi_hat,
        std_errors,
        intervals,
        degree_sum: sum,
        level,
        z,
        low_degree_count: low,
        low_degree_warning: low > 0,
        degrees: degrees.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub gamma_hat: f64,
    pub theta_hat: f64,
    /// Ranks used, after dropping degrees below [`FIT_MIN_DEGREE`].
    pub points: usize,
    pub fit: LinearFit,
}

/// Least-squares fit of `ln π̂_(i) = ln θ - γ ln i` over ranks with
/// `d_(i) ≥ 10`.
pub fn fit_exponent(degrees: &[u64]) -> Result<ExponentFit> {
    if degrees.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "need at least 10 nodes, got {}",
            degrees.len()
        )));
    }
    let nonzero = degrees.iter().filter(|&&d| d > 0).count();
    if nonzero < 10 {
        return Err(Error::InsufficientData(format!("need at least 10 nonzero degrees, got {nonzero}")));
    }
    let root = (degree_sum(degrees)? as f64).sqrt();
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let (xs, ys): (Vec<f64>, Vec<f64>) = sorted
        .iter()
        .enumerate()
        .take_while(|(_, &d)| d >= FIT_MIN_DEGREE)
        .map(|(r, &d)| (((r + 1) as f64).ln(), (d as f64 / root).ln()))
        .unzip();
    if xs.len() < FIT_MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "only {} ranks have degree >= {FIT_MIN_DEGREE}",
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys).ok_or_else(|| Error::InsufficientData("degenerate regression".into()))?;
    Ok(ExponentFit {
        gamma_hat: -fit.slope,
        theta_hat: fit.intercept.exp(),
        points: xs.len(),
        fit,
    })
}

/// Degree vector from a whitespace-separated edge list.
///
/// Lines starting with `#` and blank lines are skipped. Indices are 0-based
/// unless `one_indexed`. `n`, if given, fixes the number of nodes; otherwise
/// it is one more than the largest index. Self-loops are rejected.
pub fn parse_edge_list(text: &str, one_indexed: bool, n: Option<usize>) -> Result<Vec<u64>> {
    let mut degrees: Vec<u64> = vec![0; n.unwrap_or(0)];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = || format!("line {}", lineno + 1);
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<usize> {
            let tok = parts
                .next()
                .ok_or_else(|| Error::config(loc(), "expected two node indices"))?;
            let v: usize = tok
                .parse()
                .map_err(|_| Error::config(loc(), format!("`{tok}` is not a node index")))?;
            if one_indexed {
                v.checked_sub(1)
                    .ok_or_else(|| Error::config(loc(), "index 0 in a 1-indexed edge list"))
            } else {
                Ok(v)
            }
        };
        let (a, b) = (next()?, next()?);
        if parts.next().is_some() {
            return Err(Error::config(loc(), "expected exactly two columns"));
        }
        if a == b {
            return Err(Error::config(loc(), format!("self-loop at node {a}")));
        }
        let hi = a.max(b);
        if hi >= degrees.len() {
            if n.is_some() {
                return Err(Error::config(loc(), format!("node {hi} outside 0..{}", degrees.len())));
            }
            degrees.resize(hi + 1, 0);
        }
        degrees[a] += 1;
        degrees[b] += 1;
    }
    Ok(degrees)
}

/// One nonnegative integer per line; `#` comments and blank lines skipped.
pub fn parse_degrees(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.parse::<u64>().map_err(|_| {
            Error::config(format!("line {}", lineno + 1), format!("`{line}` is not a degree"))
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_laws::conditional_moments;
    use crate::weights::{materialize_power_law, PowerLawModel, WeightVector};
    use proptest::prelude::*;

    #[test]
    fn triangle_and_star() {
        let t = pi_hat(&[2, 2, 2]).unwrap();
        assert!((t[0] - 2.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((p_hat(&[2, 2, 2], 0, 1).unwrap().value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p_hat(&[3, 1, 1, 1], 0, 1).unwrap().value, 0.5);
        assert!(matches!(pi_hat(&[0, 0]), Err(Error::EmptyGraph)));
        assert!(p_hat(&[1, 1], 0, 0).is_err());
        assert!(matches!(p_hat(&[1, 1], 0, 4), Err(Error::Index { .. })));
    }

    #[test]
    fn clamp_flag() {
        let p = p_hat(&[10, 10, 0], 0, 1).unwrap();
        assert!(p.clamped);
        assert_eq!(p.value, 1.0);
        assert_eq!(p.raw, 5.0);
    }

    #[test]
    fn equal_degrees_equal_intervals() {
        let r = clt_report(&[20; 30], 0.95).unwrap();
        assert!(r.intervals.windows(2).all(|w| w[0] == w[1]));
        assert!((r.z - 1.959_963_984_540_054).abs() < 1e-9);
        assert!(!r.low_degree_warning);
        assert!(clt_report(&[3; 30], 0.95).unwrap().low_degree_warning);
    }

    #[test]
    fn edge_list_parsing() {
        let d = parse_edge_list("# triangle\n1 2\n2 3\n\n3 1\n", true, None).unwrap();
        assert_eq!(d, vec![2, 2, 2]);
        let e = parse_edge_list("0 1\n1 1\n", false, None).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_edge_list("0 x\n", false, None).is_err());
        assert_eq!(parse_edge_list("0 1\n", false, Some(4)).unwrap(), vec![1, 1, 0, 0]);
        assert_eq!(parse_degrees("3\n# c\n1\n1\n1\n").unwrap(), vec![3, 1, 1, 1]);
    }

    #[test]
    fn noiseless_exponent() {
        let pi = materialize_power_law(&PowerLawModel::new(0.4, 1.0).unwrap(), 5000).unwrap();
        let d: Vec<u64> = (0..5000)
            .map(|i| conditional_moments(&pi, i).unwrap().mean.round() as u64)
            .collect();
        let fit = fit_exponent(&d).unwrap();
        assert!((fit.gamma_hat - 0.4).abs() < 0.02, "{}", fit.gamma_hat);
    }

    #[test]
    fn flat_exponent() {
        let pi = WeightVector::homogeneous(0.3, 400).unwrap();
        let d: Vec<u64> = (0..400)
            .map(|i| conditional_moments(&pi, i).unwrap().mean.round() as u64)
            .collect();
        assert!(fit_exponent(&d).unwrap().gamma_hat.abs() < 0.02);
        assert!(fit_exponent(&[1; 50]).is_err());
    }

    proptest! {
        #[test]
        fn p_hat_is_product(d in prop::collection::vec(0u64..500, 2..40), i in 0usize..40, j in 0usize..40) {
            prop_assume!(d.iter().sum::<u64>() > 0);
            let (i, j) = (i % d.len(), j % d.len());
            prop_assume!(i != j);
            let p = pi_hat(&d).unwrap();
            let raw = p_hat(&d, i, j).unwrap().raw;
            prop_assert!((raw - p[i] * p[j]).abs() <= 1e-12 * raw.max(1.0));
        }

        #[test]
        fn intervals_centered(d in prop::collection::vec(0u64..500, 2..40), level in 0.5f64..0.999) {
            prop_assume!(d.iter().sum::<u64>() > 0);
            let r = clt_report(&d, level).unwrap();
            for i in 0..d.len() {
                let (lo, hi) = r.intervals[i];
                prop_assert!(lo <= r.pi_hat[i] && r.pi_hat[i] <= hi);
                prop_assert!(((hi - lo) - 2.0 * r.z * r.std_errors[i]).abs() < 1e-12);
            }
        }
    }
}
