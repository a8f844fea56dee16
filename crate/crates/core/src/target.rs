//! The target-density interface.
//!
//! A target is described by its negative log density `L(x)` (up to an
//! additive constant) and the gradient of `L`. Samplers only ever see these
//! two functions.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Per-coordinate observable whose expectation is compared against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `f(x_i) = x_i^2`.
    Square,
    /// `f(x_i) = -log p(x_i)` for a standard Cauchy factor.
    CauchyNegLogDensity,
}

impl Observable {
    #[inline]
    pub fn eval(self, xi: f64) -> f64 {
        match self {
            Observable::Square => xi * xi,
            Observable::CauchyNegLogDensity => std::f64::consts::PI.ln() + xi.mul_add(xi, 1.0).ln(),
        }
    }
}

/// Exact expectations `E[f(x_i)]` and variances `Var[f(x_i)]` of an observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub observable: Observable,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

pub trait Target: Send + Sync {
    fn dim(&self) -> usize;

    /// Negative log density `L(x)`, up to a constant.
    fn neg_log_density(&self, x: &[f64]) -> f64;

    /// Writes `∇L(x)` into `grad` and returns `L(x)`.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn ground_truth(&self) -> Option<&GroundTruth> {
        None
    }
}

impl<T: Target + ?Sized> Target for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn neg_log_density(&self, x: &[f64]) -> f64 {
        (**self).neg_log_density(x)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_and_gradient(x, grad)
    }
    fn ground_truth(&self) -> Option<&GroundTruth> {
        (**self).ground_truth()
    }
}

impl<T: Target + ?Sized> Target for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn neg_log_density(&self, x: &[f64]) -> f64 {
        (**self).neg_log_density(x)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_and_gradient(x, grad)
    }
    fn ground_truth(&self) -> Option<&GroundTruth> {
        (**self).ground_truth()
    }
}

impl<T: Target + ?Sized> Target for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn neg_log_density(&self, x: &[f64]) -> f64 {
        (**self).neg_log_density(x)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_and_gradient(x, grad)
    }
    fn ground_truth(&self) -> Option<&GroundTruth> {
        (**self).ground_truth()
    }
}

/// Wraps a target and counts gradient evaluations across all threads.
#[derive(Debug)]
pub struct CountingTarget<T> {
    inner: T,
    calls: AtomicU64,
}

impl<T: Target> CountingTarget<T> {
    pub fn new(inner: T) -> Self {
        CountingTarget { inner, calls: AtomicU64::new(0) }
    }

    pub fn gradient_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: Target> Target for CountingTarget<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn neg_log_density(&self, x: &[f64]) -> f64 {
        self.inner.neg_log_density(x)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.value_and_gradient(x, grad)
    }
    fn ground_truth(&self) -> Option<&GroundTruth> {
        self.inner.ground_truth()
    }
}

/// A target with constant density. Useful for checking free flight.
#[derive(Debug, Clone)]
pub struct Flat {
    pub dim: usize,
}

impl Target for Flat {
    fn dim(&self) -> usize {
        self.dim
    }
    fn neg_log_density(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn value_and_gradient(&self, _x: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        0.0
    }
}

/// The target reparameterized as `x = diag(scales) · x̃`.
///
/// Samplers operate on `x̃`; [`Preconditioned::to_original`] maps samples back.
#[derive(Debug, Clone)]
pub struct Preconditioned<T> {
    inner: T,
    scales: Vec<f64>,
}

impl<T: Target> Preconditioned<T> {
    pub fn new(inner: T, scales: Vec<f64>) -> crate::Result<Self> {
        if scales.len() != inner.dim() {
            return Err(crate::Error::config(format!(
                "preconditioner has {} scales for a {}-dimensional target",
                scales.len(),
                inner.dim()
            )));
        }
        if let Some(s) = scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(crate::Error::config(format!("preconditioner scale {s} is not positive")));
        }
        Ok(Preconditioned { inner, scales })
    }

    pub fn identity(inner: T) -> Self {
        let scales = vec![1.0; inner.dim()];
        Preconditioned { inner, scales }
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }

    pub fn to_original(&self, xt: &[f64], out: &mut [f64]) {
        for ((o, x), s) in out.iter_mut().zip(xt).zip(&self.scales) {
            *o = x * s;
        }
    }

    pub fn to_transformed(&self, x: &[f64], out: &mut [f64]) {
        for ((o, x), s) in out.iter_mut().zip(x).zip(&self.scales) {
            *o = x / s;
        }
    }
}

/// Reparameterizes `target` by `x = diag(scales) · x̃`.
pub fn precondition<T: Target>(target: T, scales: Vec<f64>) -> crate::Result<Preconditioned<T>> {
    Preconditioned::new(target, scales)
}

impl<T: Target> Target for Preconditioned<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn neg_log_density(&self, xt: &[f64]) -> f64 {
        let x: Vec<f64> = xt.iter().zip(&self.scales).map(|(a, s)| a * s).collect();
        self.inner.neg_log_density(&x)
    }

    fn value_and_gradient(&self, xt: &[f64], grad: &mut [f64]) -> f64 {
        let x: Vec<f64> = xt.iter().zip(&self.scales).map(|(a, s)| a * s).collect();
        let value = self.inner.value_and_gradient(&x, grad);
        for (g, s) in grad.iter_mut().zip(&self.scales) {
            *g *= s;
        }
        value
    }
}
