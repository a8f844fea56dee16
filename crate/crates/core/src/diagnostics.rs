//! Error and efficiency measurement: squared bias of moment estimates,
//! integrated autocorrelation time, bias curves and the gradient count needed
//! to reach a bias threshold.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::target::{GroundTruth, Observable};
use crate::{Error, Result};

/// How per-coordinate squared biases are combined into one number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    Max,
    Avg,
}

impl std::str::FromStr for Reduction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Reduction::Max),
            "avg" => Ok(Reduction::Avg),
            other => Err(Error::config(format!("unknown reduction `{other}`"))),
        }
    }
}

/// Squared error of an expectation, in units of the observable's variance.
/// A value of 0.01 corresponds to the accuracy of 100 independent samples.
pub fn b_squared(est: f64, truth: f64, var_truth: f64) -> Result<f64> {
    if !(var_truth > 0.0) {
        return Err(Error::Domain(format!("observable variance {var_truth} is not positive")));
    }
    let e = est - truth;
    Ok(e * e / var_truth)
}

/// Running per-coordinate means of an observable along a chain.
#[derive(Debug, Clone)]
pub struct MomentTracker {
    observable: Observable,
    means: Vec<f64>,
    count: u64,
}

impl MomentTracker {
    pub fn new(observable: Observable, dim: usize) -> Self {
        MomentTracker { observable, means: vec![0.0; dim], count: 0 }
    }

    pub fn for_truth(truth: &GroundTruth) -> Self {
        Self::new(truth.observable, truth.mean.len())
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.means.len());
        self.count += 1;
        let w = 1.0 / self.count as f64;
        for (m, &xi) in self.means.iter_mut().zip(x) {
            *m += (self.observable.eval(xi) - *m) * w;
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Per-coordinate squared bias against `truth`.
    pub fn b2_per_coordinate(&self, truth: &GroundTruth) -> Result<Vec<f64>> {
        if truth.mean.len() != self.means.len() || truth.variance.len() != self.means.len() {
            return Err(Error::config("ground truth dimension does not match the tracker"));
        }
        self.means
            .iter()
            .zip(truth.mean.iter().zip(&truth.variance))
            .map(|(&m, (&t, &v))| b_squared(m, t, v))
            .collect()
    }

    /// `(b²_max, b²_avg)`.
    pub fn b2(&self, truth: &GroundTruth) -> Result<(f64, f64)> {
        let b = self.b2_per_coordinate(truth)?;
        let max = b.iter().copied().fold(0.0, f64::max);
        let avg = b.iter().sum::<f64>() / b.len() as f64;
        Ok((max, avg))
    }
}

pub fn reduce(b2_max: f64, b2_avg: f64, reduction: Reduction) -> f64 {
    match reduction {
        Reduction::Max => b2_max,
        Reduction::Avg => b2_avg,
    }
}

/// Integrated autocorrelation time `1 + 2 Σ ρ_t`, truncated with Geyer's
/// initial positive sequence rule.
pub fn tau_int(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 100 {
        return Err(Error::DegenerateSeries(format!("series of length {n} is shorter than 100")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSeries("series contains non-finite values".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if !(c0 > 0.0) || c0 <= f64::EPSILON * f64::EPSILON * mean * mean {
        return Err(Error::DegenerateSeries("series has zero variance".into()));
    }
    let rho = |t: usize| -> f64 {
        let s: f64 = centered[..n - t].iter().zip(&centered[t..]).map(|(a, b)| a * b).sum();
        s / n as f64 / c0
    };
    // Sum of pairs Γ_k = ρ_{2k} + ρ_{2k+1} while positive; τ = -1 + 2 Σ Γ_k.
    let mut tau = -1.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let gamma = if k == 0 { 1.0 + rho(1) } else { rho(2 * k) + rho(2 * k + 1) };
        if gamma <= 0.0 {
            break;
        }
        tau += 2.0 * gamma;
        k += 1;
    }
    Ok(tau.max(1e-6))
}

/// Effective sample size `n / τ_int`.
pub fn effective_sample_size(series: &[f64]) -> Result<f64> {
    Ok(series.len() as f64 / tau_int(series)?)
}

pub fn harmonic_mean_tau(taus: &[f64]) -> Result<f64> {
    if taus.is_empty() {
        return Err(Error::Domain("harmonic mean of an empty set".into()));
    }
    if taus.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Domain("autocorrelation times must be positive".into()));
    }
    Ok(taus.len() as f64 / taus.iter().map(|t| 1.0 / t).sum::<f64>())
}

/// Squared bias as a function of gradient calls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCurve {
    pub reduction: Reduction,
    pub points: Vec<(u64, f64)>,
}

impl BiasCurve {
    pub fn new(reduction: Reduction) -> Self {
        BiasCurve { reduction, points: Vec::new() }
    }

    /// Appends a point; gradient counts must be strictly increasing.
    pub fn push(&mut self, grads: u64, b2: f64) -> Result<()> {
        if let Some(&(last, _)) = self.points.last() {
            if grads <= last {
                return Err(Error::Alignment(format!("gradient count {grads} does not exceed {last}")));
            }
        }
        self.points.push((grads, b2));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Geometric grid of gradient counts from `start` up to `end` inclusive,
/// successive points differing by at least one.
pub fn geometric_grid(start: u64, end: u64, ratio: f64) -> Vec<u64> {
    assert!(ratio > 1.0, "grid ratio must exceed one");
    let mut grid = Vec::new();
    let mut g = start.max(1) as f64;
    let mut last = 0u64;
    while (g as u64) <= end {
        let v = g.round() as u64;
        if v > last && v <= end {
            grid.push(v);
            last = v;
        }
        g *= ratio;
    }
    if last < end && end >= start.max(1) {
        grid.push(end);
    }
    grid
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median across chains of the bias at each grid point.
pub fn median_curve(curves: &[BiasCurve]) -> Result<Vec<(u64, f64)>> {
    let first = curves.first().ok_or_else(|| Error::Alignment("no chains".into()))?;
    for c in curves {
        if c.points.len() != first.points.len()
            || c.points.iter().zip(&first.points).any(|(a, b)| a.0 != b.0)
        {
            return Err(Error::Alignment("chains were recorded on different gradient grids".into()));
        }
    }
    let mut column = vec![0.0; curves.len()];
    Ok((0..first.points.len())
        .map(|i| {
            for (slot, c) in column.iter_mut().zip(curves) {
                *slot = c.points[i].1;
            }
            (first.points[i].0, median(&mut column))
        })
        .collect())
}

/// First gradient count after which the across-chain median bias stays below
/// `threshold` until the end of the recording. `None` if never reached.
pub fn gradients_to_threshold(curves: &[BiasCurve], threshold: f64) -> Result<Option<u64>> {
    let med = median_curve(curves)?;
    let mut hit = None;
    for &(g, b) in med.iter().rev() {
        if b < threshold {
            hit = Some(g);
        } else {
            break;
        }
    }
    Ok(hit)
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic `d` for `n` samples.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// KS statistic of `samples` against the standard normal. For a correlated
/// chain, pass the effective sample size to [`ks_pvalue`].
pub fn ks_standard_normal(samples: &[f64]) -> f64 {
    let normal = Normal::standard();
    ks_statistic(samples, |x| normal.cdf(x))
}

/// Mean and standard error of the mean, assuming independent values.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and standard error of a correlated series, with the error inflated
/// by its integrated autocorrelation time.
pub fn mean_and_se_correlated(values: &[f64]) -> Result<(f64, f64)> {
    let (mean, se) = mean_and_se(values);
    let tau = tau_int(values)?;
    Ok((mean, se * tau.max(1.0).sqrt()))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
        let z = normals(n, seed);
        let mut x = 0.0;
        z.iter()
            .map(|e| {
                x = phi * x + e;
                x
            })
            .collect()
    }

    #[test]
    fn b_squared_values() {
        assert_eq!(b_squared(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert!((b_squared(1.1, 1.0, 2.0).unwrap() - 0.005).abs() < 1e-15);
        assert!(matches!(b_squared(1.0, 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn b_squared_affine_invariant() {
        let (a, c) = (-3.5, 7.0);
        let plain = b_squared(1.3, 1.0, 2.0).unwrap();
        let moved = b_squared(a * 1.3 + c, a * 1.0 + c, a * a * 2.0).unwrap();
        assert!((plain - moved).abs() < 1e-12);
    }

    #[test]
    fn tracker_matches_batch() {
        let xs: Vec<Vec<f64>> = (0..1000).map(|i| normals(3, i)).collect();
        let mut t = MomentTracker::new(Observable::Square, 3);
        for x in &xs {
            t.push(x);
        }
        for j in 0..3 {
            let batch = xs.iter().map(|x| x[j] * x[j]).sum::<f64>() / xs.len() as f64;
            assert!((t.means()[j] - batch).abs() <= 1e-12 * batch.abs());
        }
    }

    #[test]
    fn tau_of_iid_is_one() {
        let tau = tau_int(&normals(100_000, 1)).unwrap();
        assert!((tau - 1.0).abs() < 0.1, "{tau}");
    }

    #[test]
    fn tau_of_ar1() {
        let tau = tau_int(&ar1(200_000, 0.5, 2)).unwrap();
        assert!((tau - 3.0).abs() < 0.3, "{tau}");
    }

    #[test]
    fn tau_degenerate_inputs() {
        assert!(matches!(tau_int(&[2.0; 500]), Err(Error::DegenerateSeries(_))));
        assert!(tau_int(&[1.0; 10]).is_err());
        let alternating: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let tau = tau_int(&alternating).unwrap();
        assert!(tau.is_finite() && tau <= 1.0);
        let noisy: Vec<f64> = normals(1000, 3).iter().map(|z| 5.0 + 1e-9 * z).collect();
        assert!(tau_int(&noisy).unwrap().is_finite());
    }

    #[test]
    fn harmonic_mean_values() {
        assert_eq!(harmonic_mean_tau(&[2.0, 2.0]).unwrap(), 2.0);
        assert!((harmonic_mean_tau(&[1.0, 3.0]).unwrap() - 1.5).abs() < 1e-15);
        assert!(harmonic_mean_tau(&[]).is_err());
    }

    proptest! {
        #[test]
        fn harmonic_below_arithmetic(v in proptest::collection::vec(0.01f64..100.0, 1..20)) {
            let h = harmonic_mean_tau(&v).unwrap();
            let a = v.iter().sum::<f64>() / v.len() as f64;
            prop_assert!(h <= a * (1.0 + 1e-12));
        }
    }

    fn curve(points: &[(u64, f64)]) -> BiasCurve {
        let mut c = BiasCurve::new(Reduction::Max);
        for &(g, b) in points {
            c.push(g, b).unwrap();
        }
        c
    }

    #[test]
    fn threshold_crossing() {
        let zero = curve(&[(10, 0.0), (20, 0.0)]);
        assert_eq!(gradients_to_threshold(&[zero], 0.01).unwrap(), Some(10));
        let c = curve(&[(10, 0.5), (20, 0.005), (30, 0.02), (40, 0.009), (50, 0.001)]);
        assert_eq!(gradients_to_threshold(&[c.clone()], 0.01).unwrap(), Some(40));
        let never = curve(&[(10, 0.5), (20, 0.5)]);
        assert_eq!(gradients_to_threshold(&[never], 0.01).unwrap(), None);
        let other = curve(&[(10, 0.5), (21, 0.5), (30, 0.1), (40, 0.1), (50, 0.1)]);
        assert!(matches!(gradients_to_threshold(&[c, other], 0.01), Err(Error::Alignment(_))));
    }

    #[test]
    fn adding_median_chain_keeps_crossing() {
        let a = curve(&[(1, 0.5), (2, 0.02), (3, 0.001)]);
        let b = curve(&[(1, 0.1), (2, 0.005), (3, 0.003)]);
        let c = curve(&[(1, 0.9), (2, 0.5), (3, 0.2)]);
        let set = vec![a, b, c];
        let before = gradients_to_threshold(&set, 0.01).unwrap();
        let med = median_curve(&set).unwrap();
        let mut more = set.clone();
        more.push(curve(&med));
        assert_eq!(gradients_to_threshold(&more, 0.01).unwrap(), before);
    }

    #[test]
    fn curve_rejects_non_increasing() {
        let mut c = BiasCurve::new(Reduction::Avg);
        c.push(5, 1.0).unwrap();
        assert!(c.push(5, 1.0).is_err());
    }

    #[test]
    fn grid_is_increasing_and_ends() {
        let g = geometric_grid(1, 10_000, 1.05);
        assert_eq!(g[0], 1);
        assert_eq!(*g.last().unwrap(), 10_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.len() < 250);
        assert!(geometric_grid(5, 1, 1.05).is_empty());
    }

    #[test]
    fn ks_detects_shift() {
        let z = normals(20_000, 4);
        assert!(ks_pvalue(ks_standard_normal(&z), z.len()) > 0.01);
        let shifted: Vec<f64> = z.iter().map(|v| v + 0.05).collect();
        assert!(ks_pvalue(ks_standard_normal(&shifted), shifted.len()) < 0.01);
        assert!((ks_pvalue(1.36 / (1e6f64).sqrt(), 1_000_000) - 0.05).abs() < 0.003);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.25)).collect();
        assert!((log_log_slope(&x, &y) - 0.25).abs() < 1e-12);
    }
}
