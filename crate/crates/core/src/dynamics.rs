//! Closed-form position and velocity updates for microcanonical and
//! canonical dynamics, and the leapfrog composition built from them.

use serde::{Deserialize, Serialize};

use crate::target::Target;
use crate::{Error, Result};

/// Below this gradient norm the microcanonical velocity update is skipped.
pub const ZERO_GRADIENT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// Unit-norm velocity, isokinetic velocity update.
    Microcanonical,
    /// Unconstrained velocity, Hamiltonian velocity update.
    Canonical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, u: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), u.len());
        PhasePoint { x, u }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Potential and kinetic energy changes of an update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyDelta {
    pub delta_v: f64,
    pub delta_k: f64,
}

impl EnergyDelta {
    pub fn total(&self) -> f64 {
        self.delta_v + self.delta_k
    }

    pub fn is_finite(&self) -> bool {
        self.delta_v.is_finite() && self.delta_k.is_finite()
    }
}

impl std::ops::AddAssign for EnergyDelta {
    fn add_assign(&mut self, rhs: Self) {
        self.delta_v += rhs.delta_v;
        self.delta_k += rhs.delta_k;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|v| *v /= n);
}

fn check_finite(grad: &[f64]) -> Result<()> {
    if grad.iter().all(|g| g.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence("non-finite gradient".into()))
    }
}

/// `x ← x + ε u`.
pub fn position_update(z: &mut PhasePoint, eps: f64) {
    for (x, u) in z.x.iter_mut().zip(&z.u) {
        *x += eps * u;
    }
}

/// Exact solution of the isokinetic velocity equation at fixed position.
///
/// Returns the kinetic energy change `(d−1) log(cosh δ + e·u sinh δ)`.
/// The velocity is renormalized afterwards.
pub fn velocity_update_micro(u: &mut [f64], grad: &[f64], eps: f64) -> Result<f64> {
    check_finite(grad)?;
    let d = u.len();
    let g_norm = norm(grad);
    if g_norm < ZERO_GRADIENT || eps == 0.0 {
        return Ok(0.0);
    }
    let delta = eps * g_norm / (d - 1) as f64;
    // e = -grad / |grad|, u = c e + u⊥
    let c = -dot(grad, u) / g_norm;
    let mut perp2 = 0.0;
    for (ui, gi) in u.iter_mut().zip(grad) {
        *ui -= c * (-gi / g_norm);
        perp2 += *ui * *ui;
    }
    // Work with a = |δ| and c' = sign(δ) c so every exponential is bounded by 1.
    let sign = delta.signum();
    let a = delta.abs();
    let cs = sign * c;
    // 1 + c' without cancellation when u is nearly anti-aligned.
    let w = if cs > 0.0 { 1.0 + cs } else { perp2 / (1.0 - cs) };
    let e2a = (-2.0 * a).exp();
    // (cosh δ + c sinh δ) e^{-a} = w/2 + (1 - c')/2 e^{-2a}, and the e
    // component of the unnormalized new velocity.
    let ln_denominator = log_add_exp((0.5 * w).ln(), (0.5 * (1.0 - cs)).ln() - 2.0 * a);
    let coef_e = sign * 0.5 * (w - (1.0 - cs) * e2a);
    let coef_perp = (-a).exp();
    let mut norm2 = 0.0;
    for (ui, gi) in u.iter_mut().zip(grad) {
        *ui = coef_perp * *ui + coef_e * (-gi / g_norm);
        norm2 += *ui * *ui;
    }
    if norm2 > 0.0 {
        normalize(u);
    } else {
        // Exactly anti-aligned with the force beyond underflow: u stays at -sign·e.
        for (ui, gi) in u.iter_mut().zip(grad) {
            *ui = sign * gi / g_norm;
        }
    }
    Ok((d - 1) as f64 * (a + ln_denominator))
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `u ← u − ε ∇L`, returning `½|u'|² − ½|u|²`.
pub fn velocity_update_hmc(u: &mut [f64], grad: &[f64], eps: f64) -> Result<f64> {
    check_finite(grad)?;
    let before = 0.5 * dot(u, u);
    for (ui, gi) in u.iter_mut().zip(grad) {
        *ui -= eps * gi;
    }
    Ok(0.5 * dot(u, u) - before)
}

pub fn velocity_update(flavor: Flavor, u: &mut [f64], grad: &[f64], eps: f64) -> Result<f64> {
    match flavor {
        Flavor::Microcanonical => velocity_update_micro(u, grad, eps),
        Flavor::Canonical => velocity_update_hmc(u, grad, eps),
    }
}

/// `(x, u) ↦ (x, −u)`.
pub fn time_reverse(z: &mut PhasePoint) {
    z.u.iter_mut().for_each(|u| *u = -*u);
}

/// Phase-space divergence `−|∇L| e·u` of the isokinetic velocity field.
pub fn micro_divergence(u: &[f64], grad: &[f64]) -> f64 {
    dot(grad, u)
}

/// A phase point together with the potential and gradient at its position.
///
/// Adjacent leapfrog steps share the gradient evaluated between them.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub z: PhasePoint,
    pub potential: f64,
    pub grad: Vec<f64>,
}

impl ChainState {
    /// Evaluates the target once at `x`.
    pub fn new<T: Target + ?Sized>(target: &T, x: Vec<f64>, u: Vec<f64>) -> Self {
        let mut grad = vec![0.0; x.len()];
        let potential = target.value_and_gradient(&x, &mut grad);
        ChainState { z: PhasePoint::new(x, u), potential, grad }
    }

    pub fn x(&self) -> &[f64] {
        &self.z.x
    }

    pub fn u(&self) -> &[f64] {
        &self.z.u
    }

    /// Replaces the position and refreshes the cached potential and gradient.
    pub fn set_position<T: Target + ?Sized>(&mut self, target: &T, x: &[f64]) {
        self.z.x.copy_from_slice(x);
        self.potential = target.value_and_gradient(&self.z.x, &mut self.grad);
    }
}

/// One `B_{ε/2} A_ε B_{ε/2}` step. Costs exactly one gradient evaluation.
pub fn leapfrog_step<T: Target + ?Sized>(
    state: &mut ChainState,
    eps: f64,
    target: &T,
    flavor: Flavor,
) -> Result<EnergyDelta> {
    let mut delta_k = velocity_update(flavor, &mut state.z.u, &state.grad, 0.5 * eps)?;
    position_update(&mut state.z, eps);
    let new_potential = target.value_and_gradient(&state.z.x, &mut state.grad);
    let delta_v = new_potential - state.potential;
    state.potential = new_potential;
    delta_k += velocity_update(flavor, &mut state.z.u, &state.grad, 0.5 * eps)?;
    Ok(EnergyDelta { delta_v, delta_k })
}
