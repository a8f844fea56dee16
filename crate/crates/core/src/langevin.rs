//! MAMS with Langevin noise.
//!
//! Each sample draws a fresh velocity on the sphere, runs a fixed number of
//! OBABO steps with normalized partial refreshment, and accepts the end
//! position with probability `min(1, e^{-δ})`. `δ` sums only the energy
//! error of the deterministic BAB segments; the O updates do not change the
//! energy.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{leapfrog_step, normalize, ChainState, Flavor};
use crate::proposal::{accept_probability, is_divergent, refresh_velocity_into, StepInfo};
use crate::target::Target;
use crate::{Error, Result};

/// Ratio of the partial-refresh scale to the trajectory length.
pub const L_PARTIAL_RATIO: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    pub step_size: f64,
    pub steps_per_sample: usize,
    pub l_partial: f64,
}

impl LangevinConfig {
    pub fn new(step_size: f64, steps_per_sample: usize, l_partial: f64) -> Result<Self> {
        if steps_per_sample == 0 {
            return Err(Error::config("steps per sample must be at least 1"));
        }
        if !(l_partial > 0.0) {
            return Err(Error::config("partial refresh scale must be positive"));
        }
        if !(step_size.is_finite() && step_size > 0.0) {
            return Err(Error::config("step size must be positive"));
        }
        Ok(LangevinConfig { step_size, steps_per_sample, l_partial })
    }

    /// Uses `l_partial = 1.25 · L` with `L = ε · steps`.
    pub fn with_default_partial(step_size: f64, steps_per_sample: usize) -> Result<Self> {
        let l = step_size * steps_per_sample as f64;
        Self::new(step_size, steps_per_sample, L_PARTIAL_RATIO * l)
    }

    pub fn trajectory_length(&self) -> f64 {
        self.step_size * self.steps_per_sample as f64
    }
}

/// `u ← (c₁u + c₂Z/√d) / |c₁u + c₂Z/√d|` with `c₁ = e^{−ε/L_partial}`.
///
/// No random numbers are drawn when `c₂ = 0`.
pub fn partial_refresh<R: Rng + ?Sized>(u: &mut [f64], eps: f64, l_partial: f64, rng: &mut R) {
    let ratio = eps / l_partial;
    let c1 = (-ratio).exp();
    let c2 = (-(-2.0 * ratio).exp_m1()).sqrt();
    if c2 == 0.0 {
        return;
    }
    let scale = c2 / (u.len() as f64).sqrt();
    for ui in u.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *ui = c1 * *ui + scale * z;
    }
    normalize(u);
}

/// O, then the deterministic BAB step, then O. Returns the BAB energy error.
pub fn obabo_step<T: Target + ?Sized, R: Rng + ?Sized>(
    state: &mut ChainState,
    cfg: &LangevinConfig,
    target: &T,
    rng: &mut R,
) -> Result<f64> {
    partial_refresh(&mut state.z.u, cfg.step_size, cfg.l_partial, rng);
    let e = leapfrog_step(state, cfg.step_size, target, Flavor::Microcanonical)?;
    if is_divergent(&e) {
        return Err(Error::Divergence(format!("energy change {e:?}")));
    }
    partial_refresh(&mut state.z.u, cfg.step_size, cfg.l_partial, rng);
    Ok(e.total())
}

/// One sample of the Langevin variant.
///
/// Random numbers are consumed in the order: velocity refresh, per-step
/// O noise (twice), accept uniform. On rejection the state returns to its
/// starting position.
pub fn malt_sample_step<T: Target + ?Sized, R: Rng + ?Sized>(
    state: &mut ChainState,
    cfg: &LangevinConfig,
    target: &T,
    rng: &mut R,
) -> StepInfo {
    refresh_velocity_into(&mut state.z.u, rng);
    let start = state.clone();
    let mut delta = 0.0;
    let mut grad_calls = 0;
    let mut divergent = false;
    for _ in 0..cfg.steps_per_sample {
        grad_calls += 1;
        match obabo_step(state, cfg, target, rng) {
            Ok(d) => delta += d,
            Err(_) => {
                divergent = true;
                break;
            }
        }
    }
    let work = if divergent || !delta.is_finite() { f64::INFINITY } else { delta };
    let p = accept_probability(work);
    let uniform: f64 = rng.random();
    let accepted = uniform < p;
    if !accepted {
        state.clone_from(&start);
    }
    StepInfo {
        work,
        accept_prob: p,
        accepted,
        steps: cfg.steps_per_sample,
        grad_calls,
        divergent: work.is_infinite(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{norm, EnergyDelta};
    use crate::models::Gaussian;
    use crate::proposal::refresh_velocity;
    use crate::target::Flat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn infinite_partial_scale_keeps_velocity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u0 = refresh_velocity(4, &mut rng);
        let mut u = u0.clone();
        partial_refresh(&mut u, 0.1, f64::INFINITY, &mut rng);
        assert_eq!(u, u0);
    }

    #[test]
    fn vanishing_partial_scale_gives_fresh_direction() {
        let mut r1 = ChaCha8Rng::seed_from_u64(4);
        let mut r2 = r1.clone();
        let mut u = vec![1.0, 0.0, 0.0];
        partial_refresh(&mut u, 1.0, 1e-6, &mut r1);
        let mut z: Vec<f64> = (0..3).map(|_| r2.sample(StandardNormal)).collect();
        normalize(&mut z);
        for (a, b) in u.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_refresh_equilibrates_to_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = 4;
        let mut u = vec![1.0, 0.0, 0.0, 0.0];
        let n = 10_000;
        let mut second = vec![0.0; d];
        for _ in 0..n {
            partial_refresh(&mut u, 1.0, 1.0, &mut rng);
            assert!((norm(&u) - 1.0).abs() < 1e-12);
            for i in 0..d {
                second[i] += u[i] * u[i] / n as f64;
            }
        }
        // Var[u_i²] on S^{d-1}; successive refreshes are correlated, so allow a
        // generous multiple of the iid standard error.
        let var_sq = 2.0 * (d - 1) as f64 / ((d * d) as f64 * (d + 2) as f64);
        let se = (var_sq / n as f64).sqrt();
        for s in second {
            assert!((s - 0.25).abs() < 4.0 * 3.0 * se, "{s}");
        }
    }

    #[test]
    fn obabo_without_noise_is_a_leapfrog_step() {
        let g = Gaussian::standard(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = refresh_velocity(3, &mut rng);
        let mut a = ChainState::new(&g, vec![0.3, -0.2, 1.0], u);
        let mut b = a.clone();
        let cfg = LangevinConfig::new(0.4, 1, f64::INFINITY).unwrap();
        let delta = obabo_step(&mut a, &cfg, &g, &mut rng).unwrap();
        let e: EnergyDelta = leapfrog_step(&mut b, 0.4, &g, Flavor::Microcanonical).unwrap();
        assert_eq!(delta, e.total());
        assert_eq!(a.z, b.z);
    }

    #[test]
    fn flat_target_always_accepts() {
        let t = Flat { dim: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = ChainState::new(&t, vec![0.0; 3], refresh_velocity(3, &mut rng));
        let cfg = LangevinConfig::with_default_partial(0.5, 4).unwrap();
        for _ in 0..50 {
            let info = malt_sample_step(&mut s, &cfg, &t, &mut rng);
            assert_eq!(info.work, 0.0);
            assert!(info.accepted);
            assert_eq!(info.grad_calls, 4);
        }
    }

    #[test]
    fn norm_is_preserved_over_many_steps() {
        let g = crate::models::build_rosenbrock();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = ChainState::new(&g, vec![1.0; 36], refresh_velocity(36, &mut rng));
        let cfg = LangevinConfig::with_default_partial(0.05, 10).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..100_000 {
            let _ = obabo_step(&mut s, &cfg, &g, &mut rng);
            worst = worst.max((norm(s.u()) - 1.0).abs());
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn default_partial_ratio() {
        let cfg = LangevinConfig::with_default_partial(0.2, 10).unwrap();
        assert!((cfg.l_partial - 2.5).abs() < 1e-12);
        assert!(LangevinConfig::new(0.1, 0, 1.0).is_err());
        assert!(LangevinConfig::new(0.1, 2, 0.0).is_err());
    }
}
