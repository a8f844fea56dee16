//! Synthetic benchmark targets with exact ground truth.
//!
//! Every model here also ships an exact sampler, used both to cross-check
//! the declared ground-truth moments and to draw stationary starting points.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::Reduction;
use crate::target::{GroundTruth, Observable, Target};
use crate::{Error, Result};

/// Draws one exact sample from the model's distribution.
pub trait ExactSampler {
    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenLayout {
    /// Eigenvalues geometrically spaced in `[1, κ]`, ascending along coordinates.
    #[default]
    LogUniform,
    /// Two eigenvalues equal `κ`, the rest equal 1.
    Outlier,
}

fn normal(rng: &mut dyn RngCore) -> f64 {
    StandardNormal.sample(rng)
}

/// Diagonal-covariance Gaussian.
#[derive(Debug, Clone)]
pub struct Gaussian {
    variances: Vec<f64>,
    precisions: Vec<f64>,
    truth: GroundTruth,
}

impl Gaussian {
    pub fn with_variances(variances: Vec<f64>) -> Result<Self> {
        if variances.len() < 2 {
            return Err(Error::config("targets need at least two dimensions"));
        }
        if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::config("Gaussian variances must be positive"));
        }
        let truth = GroundTruth {
            observable: Observable::Square,
            mean: variances.clone(),
            variance: variances.iter().map(|v| 2.0 * v * v).collect(),
        };
        let precisions = variances.iter().map(|v| 1.0 / v).collect();
        Ok(Gaussian { variances, precisions, truth })
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Self::with_variances(vec![1.0; dim])
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }
}

/// Builds a diagonal Gaussian with condition number `kappa`.
pub fn build_gaussian(dim: usize, kappa: f64, layout: EigenLayout) -> Result<Gaussian> {
    if dim < 2 {
        return Err(Error::config(format!("dimension {dim} < 2")));
    }
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::config(format!("condition number {kappa} < 1")));
    }
    let variances = match layout {
        EigenLayout::LogUniform => (0..dim)
            .map(|i| kappa.powf(i as f64 / (dim - 1) as f64))
            .collect(),
        EigenLayout::Outlier => (0..dim).map(|i| if i < 2 { kappa } else { 1.0 }).collect(),
    };
    Gaussian::with_variances(variances)
}

impl Target for Gaussian {
    fn dim(&self) -> usize {
        self.variances.len()
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().zip(&self.precisions).map(|(x, p)| x * x * p).sum::<f64>()
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut value = 0.0;
        for ((g, x), p) in grad.iter_mut().zip(x).zip(&self.precisions) {
            *g = x * p;
            value += x * *g;
        }
        0.5 * value
    }

    fn ground_truth(&self) -> Option<&GroundTruth> {
        Some(&self.truth)
    }
}

impl ExactSampler for Gaussian {
    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(&self.variances) {
            *o = v.sqrt() * normal(rng);
        }
    }
}

/// `(1 − a) N(0, I) + a N(μ, σ² I)` with `μ = (shift, 0, …, 0)`.
#[derive(Debug, Clone)]
pub struct Bimodal {
    dim: usize,
    weight: f64,
    shift: f64,
    sigma: f64,
    truth: GroundTruth,
}

impl Bimodal {
    pub fn new(dim: usize, weight: f64, shift: f64, sigma: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::config(format!("dimension {dim} < 2")));
        }
        if !(0.0..1.0).contains(&weight) {
            return Err(Error::config(format!("mixture weight {weight} outside [0, 1)")));
        }
        if !(sigma > 0.0) {
            return Err(Error::config("mixture scale must be positive"));
        }
        let second = |m: f64| (1.0 - weight) + weight * (m * m + sigma * sigma);
        let fourth = |m: f64| {
            let s2 = sigma * sigma;
            3.0 * (1.0 - weight) + weight * (m.powi(4) + 6.0 * m * m * s2 + 3.0 * s2 * s2)
        };
        let mut mean = vec![second(0.0); dim];
        let mut variance = vec![fourth(0.0) - second(0.0).powi(2); dim];
        mean[0] = second(shift);
        variance[0] = fourth(shift) - second(shift).powi(2);
        Ok(Bimodal {
            dim,
            weight,
            shift,
            sigma,
            truth: GroundTruth { observable: Observable::Square, mean, variance },
        })
    }

    /// Log weights of the two components, without the shared `(2π)^{-d/2}`.
    fn component_logs(&self, x: &[f64]) -> (f64, f64) {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let d1 = x[0] - self.shift;
        let r2_shifted = r2 - x[0] * x[0] + d1 * d1;
        let l0 = (1.0 - self.weight).ln() - 0.5 * r2;
        let l1 = self.weight.ln()
            - self.dim as f64 * self.sigma.ln()
            - 0.5 * r2_shifted / (self.sigma * self.sigma);
        (l0, l1)
    }
}

/// The 50-dimensional two-component mixture benchmark.
pub fn build_bimodal() -> Bimodal {
    Bimodal::new(50, 0.25, 4.0, 0.6).expect("valid default parameters")
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl Target for Bimodal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        let (l0, l1) = self.component_logs(x);
        -log_sum_exp(l0, l1)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (l0, l1) = self.component_logs(x);
        let lse = log_sum_exp(l0, l1);
        let r1 = (l1 - lse).exp();
        let r0 = 1.0 - r1;
        let inv_s2 = 1.0 / (self.sigma * self.sigma);
        for (i, (g, xi)) in grad.iter_mut().zip(x).enumerate() {
            let mu = if i == 0 { self.shift } else { 0.0 };
            *g = r0 * xi + r1 * (xi - mu) * inv_s2;
        }
        -lse
    }

    fn ground_truth(&self) -> Option<&GroundTruth> {
        Some(&self.truth)
    }
}

impl ExactSampler for Bimodal {
    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        let shifted = rng.random::<f64>() < self.weight;
        for (i, o) in out.iter_mut().enumerate() {
            let z = normal(rng);
            *o = if shifted {
                let mu = if i == 0 { self.shift } else { 0.0 };
                mu + self.sigma * z
            } else {
                z
            };
        }
    }
}

/// Independent Rosenbrock pairs: `x ~ N(1, 1)`, `y | x ~ N(x², q)` with `q` a variance.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    pairs: usize,
    q: f64,
    truth: GroundTruth,
}

impl Rosenbrock {
    pub fn new(pairs: usize, q: f64) -> Result<Self> {
        if pairs == 0 {
            return Err(Error::config("Rosenbrock needs at least one pair"));
        }
        if !(q > 0.0) {
            return Err(Error::config("Rosenbrock q must be positive"));
        }
        // Moments of N(1, 1): E[x²] = 2, E[x⁴] = 10, E[x⁸] = 764.
        let (ex2, ex4, ex8) = (2.0, 10.0, 764.0);
        let ey2 = ex4 + q;
        let ey4 = ex8 + 6.0 * q * ex4 + 3.0 * q * q;
        let mut mean = Vec::with_capacity(2 * pairs);
        let mut variance = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            mean.extend([ex2, ey2]);
            variance.extend([ex4 - ex2 * ex2, ey4 - ey2 * ey2]);
        }
        Ok(Rosenbrock { pairs, q, truth: GroundTruth { observable: Observable::Square, mean, variance } })
    }
}

/// 36-dimensional Rosenbrock benchmark: 18 pairs with `q = 0.1`.
pub fn build_rosenbrock() -> Rosenbrock {
    Rosenbrock::new(18, 0.1).expect("valid default parameters")
}

/// Two-dimensional banana: a single Rosenbrock pair.
pub fn build_banana() -> Rosenbrock {
    Rosenbrock::new(1, 0.1).expect("valid default parameters")
}

impl Target for Rosenbrock {
    fn dim(&self) -> usize {
        2 * self.pairs
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        x.chunks_exact(2)
            .map(|p| {
                let r = p[1] - p[0] * p[0];
                0.5 * (p[0] - 1.0).powi(2) + 0.5 * r * r / self.q
            })
            .sum()
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut value = 0.0;
        for (p, g) in x.chunks_exact(2).zip(grad.chunks_exact_mut(2)) {
            let r = p[1] - p[0] * p[0];
            value += 0.5 * (p[0] - 1.0).powi(2) + 0.5 * r * r / self.q;
            g[0] = (p[0] - 1.0) - 2.0 * p[0] * r / self.q;
            g[1] = r / self.q;
        }
        value
    }

    fn ground_truth(&self) -> Option<&GroundTruth> {
        Some(&self.truth)
    }
}

impl ExactSampler for Rosenbrock {
    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        let sq = self.q.sqrt();
        for p in out.chunks_exact_mut(2) {
            let x = 1.0 + normal(rng);
            p[0] = x;
            p[1] = x * x + sq * normal(rng);
        }
    }
}

/// Product of independent standard Cauchy factors.
///
/// Second moments diverge, so the tracked observable is `-log p(x_i)`.
#[derive(Debug, Clone)]
pub struct Cauchy {
    dim: usize,
    truth: GroundTruth,
}

impl Cauchy {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::config(format!("dimension {dim} < 2")));
        }
        let pi = std::f64::consts::PI;
        Ok(Cauchy {
            dim,
            truth: GroundTruth {
                observable: Observable::CauchyNegLogDensity,
                // E[log(1 + x²)] = 2 log 2 and Var[log(1 + x²)] = π²/3 under a standard Cauchy.
                mean: vec![(4.0 * pi).ln(); dim],
                variance: vec![pi * pi / 3.0; dim],
            },
        })
    }
}

pub fn build_cauchy() -> Cauchy {
    Cauchy::new(100).expect("valid default parameters")
}

impl Target for Cauchy {
    fn dim(&self) -> usize {
        self.dim
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v.mul_add(*v, 1.0).ln()).sum()
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut value = 0.0;
        for (g, v) in grad.iter_mut().zip(x) {
            let s = v.mul_add(*v, 1.0);
            value += s.ln();
            *g = 2.0 * v / s;
        }
        value
    }

    fn ground_truth(&self) -> Option<&GroundTruth> {
        Some(&self.truth)
    }
}

impl ExactSampler for Cauchy {
    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        for o in out.iter_mut() {
            *o = normal(rng) / normal(rng);
        }
    }
}

/// Neal's funnel: `z1 ~ N(0, s²)`, `z_i | z1 ~ N(0, e^{z1})` for `i ≥ 2`.
///
/// The conditional scale `e^{z1/2}` is read as a standard deviation.
#[derive(Debug, Clone)]
pub struct Funnel {
    dim: usize,
    scale: f64,
    truth: GroundTruth,
}

impl Funnel {
    pub fn new(dim: usize, scale: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::config(format!("dimension {dim} < 2")));
        }
        if !(scale > 0.0) {
            return Err(Error::config("funnel scale must be positive"));
        }
        let s2 = scale * scale;
        let mut mean = vec![(0.5 * s2).exp(); dim];
        let mut variance = vec![3.0 * (2.0 * s2).exp() - s2.exp(); dim];
        mean[0] = s2;
        variance[0] = 2.0 * s2 * s2;
        Ok(Funnel { dim, scale, truth: GroundTruth { observable: Observable::Square, mean, variance } })
    }
}

pub fn build_funnel() -> Funnel {
    Funnel::new(20, 3.0).expect("valid default parameters")
}

impl Target for Funnel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn neg_log_density(&self, x: &[f64]) -> f64 {
        let z1 = x[0];
        let inv = (-z1).exp();
        let rest: f64 = x[1..].iter().map(|z| 0.5 * z * z * inv + 0.5 * z1).sum();
        0.5 * z1 * z1 / (self.scale * self.scale) + rest
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let z1 = x[0];
        let inv = (-z1).exp();
        let mut value = 0.5 * z1 * z1 / (self.scale * self.scale);
        let mut g1 = z1 / (self.scale * self.scale);
        for (g, z) in grad[1..].iter_mut().zip(&x[1..]) {
            let q = 0.5 * z * z * inv;
            value += q + 0.5 * z1;
            g1 += 0.5 - q;
            *g = z * inv;
        }
        grad[0] = g1;
        value
    }

    fn ground_truth(&self) -> Option<&GroundTruth> {
        Some(&self.truth)
    }
}

impl ExactSampler for Funnel {
    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        let z1 = self.scale * normal(rng);
        out[0] = z1;
        let sd = (0.5 * z1).exp();
        for o in out[1..].iter_mut() {
            *o = sd * normal(rng);
        }
    }
}

/// Serializable model description used by the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    IllConditionedGaussian {
        dim: usize,
        kappa: f64,
    },
    OutlierGaussian {
        dim: usize,
        kappa: f64,
    },
    StandardGaussian {
        dim: usize,
    },
    Banana,
    Bimodal {
        #[serde(default = "defaults::bimodal_dim")]
        dim: usize,
        #[serde(default = "defaults::bimodal_weight")]
        a: f64,
        #[serde(default = "defaults::bimodal_shift")]
        shift: f64,
        #[serde(default = "defaults::bimodal_sigma")]
        sigma: f64,
    },
    Rosenbrock {
        #[serde(default = "defaults::rosenbrock_pairs")]
        pairs: usize,
        #[serde(default = "defaults::rosenbrock_q")]
        q: f64,
    },
    Cauchy {
        #[serde(default = "defaults::cauchy_dim")]
        dim: usize,
    },
    Funnel {
        #[serde(default = "defaults::funnel_dim")]
        dim: usize,
        #[serde(default = "defaults::funnel_scale")]
        scale: f64,
    },
}

mod defaults {
    pub fn bimodal_dim() -> usize {
        50
    }
    pub fn bimodal_weight() -> f64 {
        0.25
    }
    pub fn bimodal_shift() -> f64 {
        4.0
    }
    pub fn bimodal_sigma() -> f64 {
        0.6
    }
    pub fn rosenbrock_pairs() -> usize {
        18
    }
    pub fn rosenbrock_q() -> f64 {
        0.1
    }
    pub fn cauchy_dim() -> usize {
        100
    }
    pub fn funnel_dim() -> usize {
        20
    }
    pub fn funnel_scale() -> f64 {
        3.0
    }
}

impl ModelSpec {
    /// The benchmark suite: κ = 100 Gaussian, Rosenbrock, bimodal, Cauchy and funnel.
    pub fn benchmark_suite() -> Vec<ModelSpec> {
        vec![
            ModelSpec::IllConditionedGaussian { dim: 100, kappa: 100.0 },
            ModelSpec::Rosenbrock { pairs: defaults::rosenbrock_pairs(), q: defaults::rosenbrock_q() },
            ModelSpec::Bimodal {
                dim: defaults::bimodal_dim(),
                a: defaults::bimodal_weight(),
                shift: defaults::bimodal_shift(),
                sigma: defaults::bimodal_sigma(),
            },
            ModelSpec::Cauchy { dim: defaults::cauchy_dim() },
            ModelSpec::Funnel { dim: defaults::funnel_dim(), scale: defaults::funnel_scale() },
        ]
    }

    pub fn build(&self) -> Result<Model> {
        Ok(match *self {
            ModelSpec::IllConditionedGaussian { dim, kappa } => {
                Model::Gaussian(build_gaussian(dim, kappa, EigenLayout::LogUniform)?)
            }
            ModelSpec::OutlierGaussian { dim, kappa } => {
                Model::Gaussian(build_gaussian(dim, kappa, EigenLayout::Outlier)?)
            }
            ModelSpec::StandardGaussian { dim } => Model::Gaussian(Gaussian::standard(dim)?),
            ModelSpec::Banana => Model::Rosenbrock(build_banana()),
            ModelSpec::Bimodal { dim, a, shift, sigma } => {
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::config(format!("mixture weight {a} outside (0, 1)")));
                }
                Model::Bimodal(Bimodal::new(dim, a, shift, sigma)?)
            }
            ModelSpec::Rosenbrock { pairs, q } => Model::Rosenbrock(Rosenbrock::new(pairs, q)?),
            ModelSpec::Cauchy { dim } => Model::Cauchy(Cauchy::new(dim)?),
            ModelSpec::Funnel { dim, scale } => Model::Funnel(Funnel::new(dim, scale)?),
        })
    }

    /// Short identifier used in CSV output.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::IllConditionedGaussian { dim, kappa } => format!("gaussian_d{dim}_k{kappa}"),
            ModelSpec::OutlierGaussian { dim, kappa } => format!("outlier_gaussian_d{dim}_k{kappa}"),
            ModelSpec::StandardGaussian { dim } => format!("standard_gaussian_d{dim}"),
            ModelSpec::Banana => "banana".into(),
            ModelSpec::Bimodal { dim, .. } => format!("bimodal_d{dim}"),
            ModelSpec::Rosenbrock { pairs, .. } => format!("rosenbrock_d{}", 2 * pairs),
            ModelSpec::Cauchy { dim } => format!("cauchy_d{dim}"),
            ModelSpec::Funnel { dim, .. } => format!("funnel_d{dim}"),
        }
    }

    /// Averaged error for products of identical factors, worst-case otherwise.
    pub fn default_reduction(&self) -> Reduction {
        match self {
            ModelSpec::StandardGaussian { .. }
            | ModelSpec::Rosenbrock { .. }
            | ModelSpec::Cauchy { .. } => Reduction::Avg,
            _ => Reduction::Max,
        }
    }
}

/// A built benchmark model.
#[derive(Debug, Clone)]
pub enum Model {
    Gaussian(Gaussian),
    Bimodal(Bimodal),
    Rosenbrock(Rosenbrock),
    Cauchy(Cauchy),
    Funnel(Funnel),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Gaussian($m) => $e,
            Model::Bimodal($m) => $e,
            Model::Rosenbrock($m) => $e,
            Model::Cauchy($m) => $e,
            Model::Funnel($m) => $e,
        }
    };
}

impl Target for Model {
    fn dim(&self) -> usize {
        dispatch!(self, m => m.dim())
    }
    fn neg_log_density(&self, x: &[f64]) -> f64 {
        dispatch!(self, m => m.neg_log_density(x))
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        dispatch!(self, m => m.value_and_gradient(x, grad))
    }
    fn ground_truth(&self) -> Option<&GroundTruth> {
        dispatch!(self, m => m.ground_truth())
    }
}

impl ExactSampler for Model {
    fn sample_exact(&self, rng: &mut dyn RngCore, out: &mut [f64]) {
        dispatch!(self, m => m.sample_exact(rng, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_models() -> Vec<(&'static str, Model)> {
        vec![
            ("gaussian", Model::Gaussian(build_gaussian(10, 100.0, EigenLayout::LogUniform).unwrap())),
            ("bimodal", Model::Bimodal(build_bimodal())),
            ("rosenbrock", Model::Rosenbrock(build_rosenbrock())),
            ("banana", Model::Rosenbrock(build_banana())),
            ("cauchy", Model::Cauchy(build_cauchy())),
            ("funnel", Model::Funnel(build_funnel())),
        ]
    }

    #[test]
    fn log_uniform_eigenvalues() {
        let g = build_gaussian(100, 100.0, EigenLayout::LogUniform).unwrap();
        for (i, v) in g.variances().iter().enumerate() {
            let expected = 10f64.powf(2.0 * i as f64 / 99.0);
            assert!((v - expected).abs() < 1e-12 * expected);
        }
        let ones = build_gaussian(100, 1.0, EigenLayout::LogUniform).unwrap();
        assert!(ones.ground_truth().unwrap().mean.iter().all(|m| *m == 1.0));
    }

    #[test]
    fn outlier_eigenvalues() {
        let g = build_gaussian(4, 9.0, EigenLayout::Outlier).unwrap();
        let mut v = g.variances().to_vec();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(v, vec![9.0, 9.0, 1.0, 1.0]);
        assert_eq!(g.ground_truth().unwrap().variance[0], 162.0);
    }

    #[test]
    fn invalid_configurations() {
        assert!(build_gaussian(1, 2.0, EigenLayout::LogUniform).is_err());
        assert!(build_gaussian(5, 0.5, EigenLayout::LogUniform).is_err());
        assert!(ModelSpec::Bimodal { dim: 50, a: 1.0, shift: 4.0, sigma: 0.6 }.build().is_err());
        assert!(ModelSpec::Bimodal { dim: 50, a: 0.0, shift: 4.0, sigma: 0.6 }.build().is_err());
    }

    #[test]
    fn bimodal_second_moments() {
        let b = build_bimodal();
        let t = b.ground_truth().unwrap();
        assert!((t.mean[0] - 4.84).abs() < 1e-12);
        assert!((t.mean[1] - 0.84).abs() < 1e-12);
        let degenerate = Bimodal::new(5, 0.0, 4.0, 0.6).unwrap();
        let t = degenerate.ground_truth().unwrap();
        assert!(t.mean.iter().all(|m| (m - 1.0).abs() < 1e-15));
        let x = [0.3, -0.2, 0.5, 1.0, 0.0];
        let std = Gaussian::standard(5).unwrap();
        let shift = degenerate.neg_log_density(&x) - std.neg_log_density(&x);
        let x2 = [1.3, 0.2, -0.5, 0.0, 2.0];
        let shift2 = degenerate.neg_log_density(&x2) - std.neg_log_density(&x2);
        assert!((shift - shift2).abs() < 1e-12);
    }

    #[test]
    fn funnel_hierarchical_variance() {
        let f = build_funnel();
        assert_eq!(f.ground_truth().unwrap().mean[0], 9.0);
    }

    #[test]
    fn cauchy_truth_matches_quadrature() {
        // Integrate log(1+x²)/(π(1+x²)) with x = tan θ: the density becomes uniform on (-π/2, π/2).
        let n = 200_000;
        let pi = std::f64::consts::PI;
        let (mut m1, mut m2) = (0.0, 0.0);
        for k in 0..n {
            let theta = -pi / 2.0 + pi * (k as f64 + 0.5) / n as f64;
            let f = pi.ln() + (1.0 + theta.tan().powi(2)).ln();
            m1 += f / n as f64;
            m2 += f * f / n as f64;
        }
        let c = build_cauchy();
        let t = c.ground_truth().unwrap();
        assert!((m1 - 2.5310242469692907).abs() < 1e-4, "{m1}");
        assert!((t.mean[0] - m1).abs() < 1e-4);
        assert!((t.variance[0] - (m2 - m1 * m1)).abs() < 1e-3);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (name, model) in all_models() {
            let d = model.dim();
            let mut x = vec![0.0; d];
            let mut grad = vec![0.0; d];
            for _ in 0..100 {
                model.sample_exact(&mut rng, &mut x);
                let value = model.value_and_gradient(&x, &mut grad);
                assert!((value - model.neg_log_density(&x)).abs() <= 1e-12 * value.abs().max(1.0));
                let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                for i in 0..d {
                    let h = 1e-5 * x[i].abs().max(1.0);
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (model.neg_log_density(&xp) - model.neg_log_density(&xm)) / (2.0 * h);
                    let err = (fd - grad[i]).abs();
                    assert!(
                        err <= 1e-5 * grad[i].abs().max(gnorm).max(1.0),
                        "{name}: coordinate {i}: fd {fd} vs analytic {}",
                        grad[i]
                    );
                }
            }
        }
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = ModelSpec::Bimodal { dim: 50, a: 0.25, shift: 4.0, sigma: 0.6 };
        let s = toml::to_string(&spec).unwrap();
        let back: ModelSpec = toml::from_str(&s).unwrap();
        assert_eq!(spec, back);
        let parsed: ModelSpec = toml::from_str("name = \"rosenbrock\"").unwrap();
        assert_eq!(parsed, ModelSpec::Rosenbrock { pairs: 18, q: 0.1 });
    }
}
