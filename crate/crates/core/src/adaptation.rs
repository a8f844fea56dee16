//! Automatic tuning: dual averaging of the step size, diagonal
//! preconditioning from estimated variances and the autocorrelation-based
//! trajectory-length rule. Also the continuous-time analysis of the
//! Langevin refresh rate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{harmonic_mean_tau, tau_int};
use crate::dynamics::{leapfrog_step, ChainState};
use crate::kernel::{Chain, KernelConfig, Sampler};
use crate::proposal::{is_divergent, refresh_for};
use crate::schedule::SequenceKind;
use crate::target::{Preconditioned, Target};
use crate::{Error, Result};

const EPS_FLOOR: f64 = 1e-10;
const EPS_CEIL: f64 = 1e10;

/// Step-size adaptation by dual averaging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualAveraging {
    pub log_eps: f64,
    pub log_eps_avg: f64,
    pub h_avg: f64,
    pub iteration: u64,
    pub target_accept: f64,
    pub mu: f64,
    pub gamma: f64,
    pub t0: f64,
    pub kappa: f64,
}

impl DualAveraging {
    pub fn new(eps0: f64, target_accept: f64) -> Self {
        DualAveraging {
            log_eps: eps0.ln(),
            log_eps_avg: eps0.ln(),
            h_avg: 0.0,
            iteration: 0,
            target_accept,
            mu: (10.0 * eps0).ln(),
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
        }
    }

    /// Feeds the acceptance probability `min(1, e^{-W})` of the last proposal.
    pub fn update(&mut self, accept_prob: f64) {
        self.iteration += 1;
        let t = self.iteration as f64;
        let w = 1.0 / (t + self.t0);
        self.h_avg = (1.0 - w) * self.h_avg + w * (self.target_accept - accept_prob);
        self.log_eps = (self.mu - t.sqrt() / self.gamma * self.h_avg).clamp(EPS_FLOOR.ln(), EPS_CEIL.ln());
        let eta = t.powf(-self.kappa);
        self.log_eps_avg = eta * self.log_eps + (1.0 - eta) * self.log_eps_avg;
    }

    /// Step size to use for the next proposal while adapting.
    pub fn current_step_size(&self) -> f64 {
        self.log_eps.exp()
    }

    /// Step size to freeze once adaptation ends.
    pub fn final_step_size(&self) -> f64 {
        self.log_eps_avg.exp()
    }

    fn at_floor(&self) -> bool {
        self.log_eps <= EPS_FLOOR.ln() + 1e-9
    }
}

/// Per-coordinate standard deviations, floored at `1e-10`.
pub fn estimate_preconditioner(samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    if samples.len() < 100 {
        return Err(Error::config(format!(
            "{} samples are too few to estimate a preconditioner (need 100)",
            samples.len()
        )));
    }
    let d = samples[0].len();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x / n;
        }
    }
    let mut var = vec![0.0; d];
    for s in samples {
        for ((v, x), m) in var.iter_mut().zip(s).zip(&mean) {
            *v += (x - m) * (x - m) / (n - 1.0);
        }
    }
    Ok(var.into_iter().map(|v| if v.is_finite() { v.sqrt().max(1e-10) } else { 1e-10 }).collect())
}

/// Trajectory-length state for the rule `L ← c · L · τ̄_int`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlbaState {
    pub length: f64,
    pub c: f64,
}

impl AlbaState {
    pub fn new(dim: usize, c: f64) -> Self {
        AlbaState { length: (dim as f64).sqrt(), c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlbaUpdate {
    pub tau: f64,
    pub old_length: f64,
    pub new_length: f64,
    /// The window looked non-stationary and `L` was kept.
    pub held: bool,
}

/// One trajectory-length update from a window of samples (rows are draws).
pub fn alba_update(state: &mut AlbaState, window: &[Vec<f64>]) -> Result<AlbaUpdate> {
    if window.len() < 200 {
        return Err(Error::config(format!("window of {} samples is shorter than 200", window.len())));
    }
    let d = window[0].len();
    let mut column = vec![0.0; window.len()];
    let mut taus = Vec::with_capacity(d);
    for i in 0..d {
        for (c, s) in column.iter_mut().zip(window) {
            *c = s[i];
        }
        match tau_int(&column) {
            Ok(t) => taus.push(t),
            Err(Error::DegenerateSeries(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let old = state.length;
    if taus.is_empty() {
        return Ok(AlbaUpdate { tau: f64::NAN, old_length: old, new_length: old, held: true });
    }
    let tau = harmonic_mean_tau(&taus)?;
    Ok(apply_tau(state, tau, window.len()))
}

/// `L ← c · L · τ`, holding `L` when `τ` exceeds a tenth of the window.
pub fn apply_tau(state: &mut AlbaState, tau: f64, window_len: usize) -> AlbaUpdate {
    let old = state.length;
    if tau > window_len as f64 / 10.0 {
        return AlbaUpdate { tau, old_length: old, new_length: old, held: true };
    }
    state.length = (state.c * old * tau).max(f64::MIN_POSITIVE);
    AlbaUpdate { tau, old_length: old, new_length: state.length, held: false }
}

fn default_fractions() -> [f64; 3] {
    [0.1, 0.1, 0.1]
}

pub(crate) fn default_rounds() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// Gradient budget for the three tuning stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSchedule {
    /// Gradient calls for the whole run, tuning and sampling.
    pub total_budget: u64,
    /// Fractions of the total spent on step size, preconditioning and
    /// trajectory length.
    #[serde(default = "default_fractions")]
    pub fractions: [f64; 3],
    /// Trajectory-length updates in stage 3. Repeating the update
    /// `L <- c L tau` overshoots, so more than one round tends to oscillate.
    #[serde(default = "default_rounds")]
    pub alba_rounds: usize,
    #[serde(default = "yes")]
    pub precondition: bool,
    /// Overrides the sampler's default acceptance target.
    #[serde(default)]
    pub target_accept: Option<f64>,
    #[serde(default)]
    pub sequence: SequenceKind,
    /// Keeps the trajectory length fixed; stage 3 then only adapts the step size.
    #[serde(default)]
    pub fixed_length: Option<f64>,
}

impl TuningSchedule {
    pub fn new(total_budget: u64) -> Self {
        TuningSchedule {
            total_budget,
            fractions: default_fractions(),
            alba_rounds: default_rounds(),
            precondition: true,
            target_accept: None,
            sequence: SequenceKind::Halton,
            fixed_length: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.iter().any(|f| !(*f >= 0.0)) || self.fractions.iter().sum::<f64>() >= 1.0 {
            return Err(Error::config("tuning fractions must be non-negative and sum to less than one"));
        }
        if let Some(l) = self.fixed_length {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::config(format!("fixed trajectory length {l} is not positive")));
            }
        }
        if let Some(a) = self.target_accept {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::config("target acceptance must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    pub fn stage_budgets(&self) -> [u64; 3] {
        self.fractions.map(|f| (f * self.total_budget as f64).floor() as u64)
    }

    pub fn tuning_budget(&self) -> u64 {
        self.stage_budgets().iter().sum()
    }

    /// Gradient calls left for sampling after tuning.
    pub fn sampling_budget(&self) -> u64 {
        self.total_budget - self.tuning_budget()
    }
}

/// Hyperparameters produced by tuning, frozen for sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedConfig {
    pub sampler: Sampler,
    pub kernel: KernelConfig,
    /// Preconditioner standard deviations; all ones without preconditioning.
    pub scales: Vec<f64>,
    pub initial_step_size: f64,
    pub tuning_grad_calls: u64,
    pub alba_history: Vec<AlbaUpdate>,
}

#[derive(Debug, Clone)]
pub struct TuningResult {
    pub config: TunedConfig,
    /// Final tuning position in the target's original coordinates.
    pub position: Vec<f64>,
}

/// Initial trajectory length: `√d` for the microcanonical samplers, one for HMC.
pub fn initial_length(sampler: Sampler, dim: usize) -> f64 {
    match sampler {
        Sampler::Mams | Sampler::MamsLangevin => (dim as f64).sqrt(),
        Sampler::Hmc => 1.0,
    }
}

type TuneChain<'a, T, R> = Chain<Preconditioned<&'a T>, &'a mut R>;

/// Steps `chain` until the next transition could overrun `budget` gradient
/// calls (counted from the chain's creation). Adapts the step size when `da`
/// is given. Returns the mean acceptance probability of the second half.
fn run_stage<T: Target, R: Rng>(
    chain: &mut TuneChain<'_, T, R>,
    budget: u64,
    mut da: Option<&mut DualAveraging>,
    mut record: impl FnMut(&[f64]),
) -> Result<Option<f64>> {
    let mut probs = Vec::new();
    while chain.stats().grad_calls + chain.max_next_steps() as u64 <= budget {
        let info = chain.step();
        probs.push(info.accept_prob);
        if let Some(da) = da.as_deref_mut() {
            da.update(info.accept_prob);
            chain.set_step_size(da.current_step_size())?;
        }
        record(chain.position());
    }
    if let Some(da) = da {
        if da.iteration > 0 {
            chain.set_step_size(da.final_step_size())?;
            let tail = &probs[probs.len() / 2..];
            let mean = if tail.is_empty() { 1.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 };
            if mean < 0.1 && da.at_floor() {
                return Err(Error::TuningFailure(format!(
                    "acceptance {mean:.3} at the minimum step size {EPS_FLOOR:e}"
                )));
            }
        }
    }
    Ok((!probs.is_empty()).then(|| {
        let tail = &probs[probs.len() / 2..];
        tail.iter().sum::<f64>() / tail.len() as f64
    }))
}

/// Halves the step size from one until a single leapfrog step from `x0` is
/// not divergent. Returns the step size and the gradient calls spent.
pub fn initial_step_size<T: Target + ?Sized, R: Rng + ?Sized>(
    target: &T,
    sampler: Sampler,
    x0: &[f64],
    budget: u64,
    rng: &mut R,
) -> Result<(f64, u64)> {
    let mut eps = 1.0;
    if budget < 2 {
        return Ok((eps, 0));
    }
    let mut u = vec![0.0; x0.len()];
    refresh_for(sampler.flavor(), &mut u, rng);
    let start = ChainState::new(target, x0.to_vec(), u);
    let mut used = 1;
    while used < budget && eps > EPS_FLOOR {
        let mut s = start.clone();
        used += 1;
        match leapfrog_step(&mut s, eps, target, sampler.flavor()) {
            Ok(e) if !is_divergent(&e) => break,
            _ => eps *= 0.5,
        }
    }
    if eps <= EPS_FLOOR {
        return Err(Error::TuningFailure(format!("every step size down to {EPS_FLOOR:e} diverges")));
    }
    Ok((eps, used))
}

/// Tunes step size, preconditioner and trajectory length on a single chain
/// started at `x0`, within the schedule's gradient budget.
pub fn run_tuning<T: Target, R: Rng>(
    target: &T,
    sampler: Sampler,
    schedule: &TuningSchedule,
    x0: Vec<f64>,
    rng: &mut R,
) -> Result<TuningResult> {
    schedule.validate()?;
    let d = target.dim();
    if x0.len() != d {
        return Err(Error::config("initial position has the wrong dimension"));
    }
    let target_accept = schedule.target_accept.unwrap_or(sampler.default_target_accept());
    let [b1, b2, b3] = schedule.stage_budgets();
    let mut alba = AlbaState::new(d, sampler.alba_constant());
    alba.length = schedule.fixed_length.unwrap_or_else(|| initial_length(sampler, d));

    let (eps0, heuristic_calls) = initial_step_size(target, sampler, &x0, b1, rng)?;
    let mut used = heuristic_calls;
    let mut kernel = KernelConfig::new(eps0, alba.length);
    kernel.target_accept = target_accept;
    kernel.sequence = schedule.sequence;
    if sampler == Sampler::MamsLangevin {
        kernel.l_partial = Some(crate::langevin::L_PARTIAL_RATIO * alba.length);
    }
    let mut scales = vec![1.0; d];
    let mut position = x0;
    let mut history = Vec::new();

    // Stage 1: step size at the initial trajectory length.
    let mut stage1 = Vec::new();
    if b1 > used + 1 {
        let mut chain = Chain::new(Preconditioned::identity(target), sampler, kernel.clone(), position.clone(), &mut *rng)?;
        let mut da = DualAveraging::new(eps0, target_accept);
        run_stage(&mut chain, b1 - used, Some(&mut da), |x| stage1.push(x.to_vec()))?;
        kernel = chain.config().clone();
        used += chain.stats().grad_calls;
        position = chain.position().to_vec();
    }

    // Stage 2: preconditioner from the second half of stage 1, then step size again.
    let budget2 = b1 + b2 - used;
    let burned = &stage1[stage1.len() / 2..];
    if schedule.precondition && burned.len() >= 100 {
        scales = estimate_preconditioner(burned)?;
    }
    drop(stage1);
    let pre = Preconditioned::new(target, scales.clone())?;
    let mut xt = vec![0.0; d];
    pre.to_transformed(&position, &mut xt);
    let s_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
    kernel.step_size = (kernel.step_size / s_min).clamp(EPS_FLOOR, EPS_CEIL);
    if budget2 + b3 <= 1 {
        return Ok(finish(sampler, kernel, scales, eps0, used, history, position));
    }
    let mut chain = Chain::new(pre, sampler, kernel.clone(), xt, &mut *rng)?;
    let mut da = DualAveraging::new(kernel.step_size, target_accept);
    run_stage(&mut chain, budget2, Some(&mut da), |_| {})?;
    let mut spent = chain.stats().grad_calls;

    // Stage 3: trajectory length, with a step-size burst after each change.
    let rounds = if schedule.fixed_length.is_some() { 0 } else { schedule.alba_rounds.max(1) as u64 };
    if rounds == 0 {
        let mut da = DualAveraging::new(chain.config().step_size, target_accept);
        run_stage(&mut chain, budget2 + b3, Some(&mut da), |_| {})?;
        spent = chain.stats().grad_calls;
    }
    let per_round = b3.checked_div(rounds).unwrap_or(0);
    let mut ceiling = budget2;
    for _ in 0..rounds {
        ceiling += per_round;
        let window_budget = spent + (per_round * 2) / 3;
        let mut window = Vec::new();
        run_stage(&mut chain, window_budget, None, |x| window.push(x.to_vec()))?;
        if window.len() >= 200 {
            alba.length = chain.time_per_sample();
            let update = alba_update(&mut alba, &window)?;
            history.push(update);
            if !update.held {
                chain.set_trajectory_length(alba.length)?;
            }
        }
        let mut da = DualAveraging::new(chain.config().step_size, target_accept);
        run_stage(&mut chain, ceiling, Some(&mut da), |_| {})?;
        spent = chain.stats().grad_calls;
    }
    used += spent;
    debug_assert!(used <= schedule.tuning_budget());
    let kernel = chain.config().clone();
    let (pre, state, _, _) = chain.into_parts();
    let mut position = vec![0.0; d];
    pre.to_original(state.x(), &mut position);
    Ok(finish(sampler, kernel, scales, eps0, used, history, position))
}

fn finish(
    sampler: Sampler,
    kernel: KernelConfig,
    scales: Vec<f64>,
    eps0: f64,
    used: u64,
    alba_history: Vec<AlbaUpdate>,
    position: Vec<f64>,
) -> TuningResult {
    TuningResult {
        config: TunedConfig {
            sampler,
            kernel,
            scales,
            initial_step_size: eps0,
            tuning_grad_calls: used,
            alba_history,
        },
        position,
    }
}

/// Effective samples per sample of the continuous-time Langevin-refreshed
/// dynamics on a one-dimensional Gaussian of standard deviation `sigma`, with
/// damping `beta` and trajectory time `t`.
pub fn continuous_malt_ess(beta: f64, t: f64, sigma: f64) -> Result<f64> {
    if !(t > 0.0 && sigma > 0.0 && beta >= 0.0) {
        return Err(Error::Domain("need t > 0, sigma > 0 and beta >= 0".into()));
    }
    if beta * sigma >= 1.0 {
        return Err(Error::Domain(format!("beta = {beta} is overdamped for sigma = {sigma}")));
    }
    let omega = (1.0 / (sigma * sigma) - beta * beta).sqrt();
    Ok(ess_from_omega(beta, t, omega))
}

fn ess_from_omega(beta: f64, t: f64, omega: f64) -> f64 {
    let rho = (-beta * t).exp() * ((omega * t).cos() + beta / omega * (omega * t).sin());
    (1.0 - rho * rho) / (1.0 + rho * rho)
}

/// Smallest ESS over directions with standard deviation in `(0, 1]`.
///
/// Small `sigma` corresponds to large `ω`, where `ρ` oscillates with envelope
/// `e^{-βT}`; the grid runs over `ωT` up to many periods and the envelope
/// limit is included.
pub fn worst_direction_ess(beta: f64, t: f64) -> f64 {
    let omega_min = (1.0 - beta * beta).sqrt();
    let r = (-beta * t).exp();
    let mut worst = (1.0 - r * r) / (1.0 + r * r);
    let phase_max = omega_min * t + 40.0 * std::f64::consts::PI;
    let n = 4000;
    for k in 0..=n {
        let omega = (omega_min * t + (phase_max - omega_min * t) * k as f64 / n as f64) / t;
        worst = worst.min(ess_from_omega(beta, t, omega));
    }
    worst
}

/// Damping and trajectory time, in units of the largest standard deviation,
/// that maximize the worst-direction ESS per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaltOptimum {
    pub beta: f64,
    pub t: f64,
    pub ess_per_time: f64,
}

impl MaltOptimum {
    /// Ratio of the refresh time `1/β` to the trajectory time.
    pub fn ratio(&self) -> f64 {
        1.0 / (self.beta * self.t)
    }
}

/// Coarse grid followed by a refined grid around the best point.
pub fn optimize_malt() -> MaltOptimum {
    let search = |b_lo: f64, b_hi: f64, t_lo: f64, t_hi: f64, n: usize| {
        let mut best = MaltOptimum { beta: 0.0, t: 0.0, ess_per_time: f64::NEG_INFINITY };
        for i in 0..=n {
            let beta = b_lo + (b_hi - b_lo) * i as f64 / n as f64;
            if !(0.0..1.0).contains(&beta) {
                continue;
            }
            for j in 0..=n {
                let t = t_lo + (t_hi - t_lo) * j as f64 / n as f64;
                if t <= 0.0 {
                    continue;
                }
                let v = worst_direction_ess(beta, t) / t;
                if v > best.ess_per_time {
                    best = MaltOptimum { beta, t, ess_per_time: v };
                }
            }
        }
        best
    };
    let coarse = search(0.02, 0.98, 0.05, 4.0, 48);
    let db = 0.96 / 48.0;
    let dt = 3.95 / 48.0;
    search(coarse.beta - db, coarse.beta + db, coarse.t - dt, coarse.t + dt, 80)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_gaussian, EigenLayout, ExactSampler, Gaussian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn da_without_error_stays_put() {
        let mut da = DualAveraging::new(0.5, 0.9);
        for _ in 0..1000 {
            da.update(0.9);
        }
        assert_eq!(da.h_avg, 0.0);
        assert!((da.current_step_size() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn da_shrinks_on_rejection() {
        let mut da = DualAveraging::new(1.0, 0.9);
        let mut last = f64::INFINITY;
        for _ in 0..50 {
            da.update(0.0);
            assert!(da.log_eps < last || da.at_floor());
            last = da.log_eps;
        }
    }

    #[test]
    fn preconditioner_recovers_scales() {
        let g = build_gaussian(10, 100.0, EigenLayout::LogUniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let samples: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut x = vec![0.0; 10];
                g.sample_exact(&mut rng, &mut x);
                x
            })
            .collect();
        let s = estimate_preconditioner(&samples).unwrap();
        for (si, v) in s.iter().zip(g.variances()) {
            // sd of the sample sd is about σ/√(2n)
            let truth = v.sqrt();
            assert!((si - truth).abs() < 4.0 * truth / (2.0 * n as f64).sqrt(), "{si} vs {truth}");
        }
    }

    #[test]
    fn preconditioner_degenerate_and_short() {
        let samples = vec![vec![1.0, 2.0]; 150];
        let s = estimate_preconditioner(&samples).unwrap();
        assert_eq!(s, vec![1e-10, 1e-10]);
        assert!(estimate_preconditioner(&samples[..50]).is_err());
    }

    #[test]
    fn alba_iid_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Gaussian::standard(5).unwrap();
        let window: Vec<Vec<f64>> = (0..20_000)
            .map(|_| {
                let mut x = vec![0.0; 5];
                g.sample_exact(&mut rng, &mut x);
                x
            })
            .collect();
        let mut s = AlbaState { length: 2.0, c: 0.3 };
        let u = alba_update(&mut s, &window).unwrap();
        assert!((u.new_length - 0.6).abs() < 0.03, "{u:?}");
        assert!(alba_update(&mut s, &window[..100]).is_err());
    }

    #[test]
    fn alba_monotone_and_holds() {
        let mut prev = 0.0;
        for tau in [0.5, 1.0, 2.0, 7.0] {
            let mut s = AlbaState { length: 3.0, c: 0.23 };
            let u = apply_tau(&mut s, tau, 1000);
            assert!(u.new_length >= prev);
            prev = u.new_length;
        }
        let mut s = AlbaState { length: 3.0, c: 0.3 };
        let u = apply_tau(&mut s, 150.0, 1000);
        assert!(u.held && s.length == 3.0);
    }

    #[test]
    fn constants() {
        assert_eq!(Sampler::Mams.alba_constant(), 0.3);
        assert_eq!(Sampler::MamsLangevin.alba_constant(), 0.23);
        assert_eq!(AlbaState::new(100, 0.3).length, 10.0);
    }

    #[test]
    fn zero_budget_keeps_defaults() {
        let g = Gaussian::standard(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sched = TuningSchedule::new(0);
        sched.fractions = [0.1, 0.1, 0.1];
        let r = run_tuning(&g, Sampler::Mams, &sched, vec![0.0; 16], &mut rng).unwrap();
        assert_eq!(r.config.kernel.step_size, 1.0);
        assert_eq!(r.config.kernel.trajectory_length, 4.0);
        assert_eq!(r.config.tuning_grad_calls, 0);
    }

    #[test]
    fn tuning_respects_budget() {
        let g = build_gaussian(20, 10.0, EigenLayout::LogUniform).unwrap();
        for sampler in [Sampler::Mams, Sampler::MamsLangevin, Sampler::Hmc] {
            let counted = crate::target::CountingTarget::new(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let sched = TuningSchedule::new(60_000);
            let r = run_tuning(&counted, sampler, &sched, vec![0.5; 20], &mut rng).unwrap();
            assert!(r.config.tuning_grad_calls <= sched.tuning_budget());
            assert_eq!(r.config.tuning_grad_calls, counted.gradient_calls());
            assert!(r.config.kernel.step_size > 0.0 && r.config.kernel.trajectory_length > 0.0);
        }
    }

    #[test]
    fn nan_target_fails_tuning() {
        struct Broken;
        impl Target for Broken {
            fn dim(&self) -> usize {
                4
            }
            fn neg_log_density(&self, _: &[f64]) -> f64 {
                f64::NAN
            }
            fn value_and_gradient(&self, _: &[f64], g: &mut [f64]) -> f64 {
                g.fill(f64::NAN);
                f64::NAN
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = run_tuning(&Broken, Sampler::Mams, &TuningSchedule::new(20_000), vec![0.0; 4], &mut rng);
        assert!(matches!(r, Err(Error::TuningFailure(_))), "{r:?}");
    }

    #[test]
    fn malt_ess_cases() {
        let pi = std::f64::consts::PI;
        assert!(continuous_malt_ess(0.0, pi * 2.0, 2.0).unwrap().abs() < 1e-12);
        assert!(matches!(continuous_malt_ess(1.0, 1.0, 1.0), Err(Error::Domain(_))));
        for (t, s) in [(0.7, 1.0), (2.3, 0.4)] {
            let a = continuous_malt_ess(0.0, t, s).unwrap();
            let b = continuous_malt_ess(0.0, t + 2.0 * pi * s, s).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
