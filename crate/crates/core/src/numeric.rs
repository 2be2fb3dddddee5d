//! Small numerical helpers shared across modules.

/// Neumaier's variant of Kahan summation.
///
/// The reduction order is the insertion order, so results are reproducible
/// whenever the inputs arrive in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for KahanSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of a sequence.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Mean and (population) variance of a pmf indexed by `k = 0, 1, ...`.
pub fn pmf_moments(pmf: &[f64]) -> (f64, f64) {
    let mass = kahan_sum(pmf.iter().copied());
    let mean = kahan_sum(pmf.iter().enumerate().map(|(k, p)| k as f64 * p)) / mass;
    let var = kahan_sum(
        pmf.iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p),
    ) / mass;
    (mean, var)
}

/// Sample mean and unbiased sample variance.
pub fn sample_mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = kahan_sum(xs.iter().copied()) / n;
    let var = if xs.len() > 1 {
        kahan_sum(xs.iter().map(|x| (x - mean).powi(2))) / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_sd: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = kahan_sum(xs.iter().copied()) / n;
    let my = kahan_sum(ys.iter().copied()) / n;
    let sxx = kahan_sum(xs.iter().map(|x| (x - mx).powi(2)));
    if sxx == 0.0 {
        return None;
    }
    let sxy = kahan_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let syy = kahan_sum(ys.iter().map(|y| (y - my).powi(2)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = kahan_sum(
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2)),
    );
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        residual_sd: (sse / dof).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..10_000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-12)).abs() < 1e-18);
    }

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-13);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
