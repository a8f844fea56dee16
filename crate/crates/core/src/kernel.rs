//! Sampler selection, frozen kernel configuration, and a single-chain driver.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ChainState, Flavor};
use crate::hmc::hmc_step;
use crate::langevin::{malt_sample_step, LangevinConfig, L_PARTIAL_RATIO};
use crate::proposal::{metropolis_step, refresh_for, StepInfo};
use crate::schedule::{SequenceKind, TrajectorySchedule};
use crate::target::Target;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sampler {
    #[serde(rename = "mams")]
    Mams,
    #[serde(rename = "mams-langevin")]
    MamsLangevin,
    #[serde(rename = "hmc")]
    Hmc,
}

impl Sampler {
    pub fn flavor(self) -> Flavor {
        match self {
            Sampler::Mams | Sampler::MamsLangevin => Flavor::Microcanonical,
            Sampler::Hmc => Flavor::Canonical,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sampler::Mams => "mams",
            Sampler::MamsLangevin => "mams-langevin",
            Sampler::Hmc => "hmc",
        }
    }

    /// Default acceptance-rate target for step-size adaptation.
    pub fn default_target_accept(self) -> f64 {
        match self {
            Sampler::Mams | Sampler::MamsLangevin => 0.9,
            Sampler::Hmc => 0.8,
        }
    }

    /// Multiplier in `L ← c · L · τ_int`.
    pub fn alba_constant(self) -> f64 {
        match self {
            Sampler::Mams | Sampler::Hmc => 0.3,
            Sampler::MamsLangevin => 0.23,
        }
    }
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mams" => Ok(Sampler::Mams),
            "mams-langevin" => Ok(Sampler::MamsLangevin),
            "hmc" => Ok(Sampler::Hmc),
            other => Err(Error::config(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub step_size: f64,
    pub trajectory_length: f64,
    /// Partial refresh scale, only used by the Langevin variant.
    pub l_partial: Option<f64>,
    #[serde(default)]
    pub sequence: SequenceKind,
    pub target_accept: f64,
    /// Disable to run the unadjusted sampler.
    #[serde(default = "yes")]
    pub metropolis: bool,
}

fn yes() -> bool {
    true
}

impl KernelConfig {
    pub fn new(step_size: f64, trajectory_length: f64) -> Self {
        KernelConfig {
            step_size,
            trajectory_length,
            l_partial: None,
            sequence: SequenceKind::Halton,
            target_accept: 0.9,
            metropolis: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::config(format!("step size {} is not positive", self.step_size)));
        }
        if !(self.trajectory_length.is_finite() && self.trajectory_length > 0.0) {
            return Err(Error::config(format!(
                "trajectory length {} is not positive",
                self.trajectory_length
            )));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::config("target acceptance must lie in (0, 1)"));
        }
        if let Some(l) = self.l_partial {
            if !(l > 0.0) {
                return Err(Error::config("partial refresh scale must be positive"));
            }
        }
        Ok(())
    }

    pub fn avg_steps(&self) -> f64 {
        (self.trajectory_length / self.step_size).max(1.0)
    }

    fn langevin(&self) -> Result<LangevinConfig> {
        let steps = self.avg_steps().round().max(1.0) as usize;
        let l_partial = self.l_partial.unwrap_or(L_PARTIAL_RATIO * self.trajectory_length);
        LangevinConfig::new(self.step_size, steps, l_partial)
    }
}

/// Running acceptance and cost counters for one chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub steps: u64,
    pub accepted: u64,
    pub divergences: u64,
    pub grad_calls: u64,
    pub accept_prob_sum: f64,
}

impl ChainStats {
    pub fn accept_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }

    pub fn mean_accept_prob(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accept_prob_sum / self.steps as f64
        }
    }

    fn record(&mut self, info: &StepInfo) {
        self.steps += 1;
        self.accepted += info.accepted as u64;
        self.divergences += info.divergent as u64;
        self.grad_calls += info.grad_calls;
        self.accept_prob_sum += info.accept_prob;
    }
}

/// One Markov chain: target, kernel configuration, state and random stream.
pub struct Chain<T, R> {
    target: T,
    sampler: Sampler,
    cfg: KernelConfig,
    schedule: TrajectorySchedule,
    langevin: Option<LangevinConfig>,
    state: ChainState,
    rng: R,
    stats: ChainStats,
}

impl<T: Target, R: Rng> Chain<T, R> {
    /// Starts a chain at `x0`. The initial velocity is the first draw from
    /// `rng`, except for the Langevin variant whose transitions begin with a
    /// full refresh. The initial gradient evaluation is counted.
    pub fn new(target: T, sampler: Sampler, cfg: KernelConfig, x0: Vec<f64>, mut rng: R) -> Result<Self> {
        cfg.validate()?;
        if x0.len() != target.dim() {
            return Err(Error::config("initial position has the wrong dimension"));
        }
        if target.dim() < 2 {
            return Err(Error::config("targets need at least two dimensions"));
        }
        let mut u = vec![0.0; x0.len()];
        if sampler == Sampler::MamsLangevin {
            u[0] = 1.0;
        } else {
            refresh_for(sampler.flavor(), &mut u, &mut rng);
        }
        let state = ChainState::new(&target, x0, u);
        let schedule = TrajectorySchedule::new(cfg.avg_steps(), cfg.sequence)?;
        let langevin = match sampler {
            Sampler::MamsLangevin => Some(cfg.langevin()?),
            _ => None,
        };
        let stats = ChainStats { grad_calls: 1, ..Default::default() };
        Ok(Chain { target, sampler, cfg, schedule, langevin, state, rng, stats })
    }

    pub fn step(&mut self) -> StepInfo {
        let info = match self.sampler {
            Sampler::Mams => metropolis_step(
                &mut self.state,
                self.cfg.step_size,
                &mut self.schedule,
                self.cfg.metropolis,
                &self.target,
                Flavor::Microcanonical,
                &mut self.rng,
            )
            .info(),
            Sampler::Hmc => {
                if self.cfg.metropolis {
                    hmc_step(&mut self.state, self.cfg.step_size, &mut self.schedule, &self.target, &mut self.rng)
                        .info()
                } else {
                    metropolis_step(
                        &mut self.state,
                        self.cfg.step_size,
                        &mut self.schedule,
                        false,
                        &self.target,
                        Flavor::Canonical,
                        &mut self.rng,
                    )
                    .info()
                }
            }
            Sampler::MamsLangevin => {
                let cfg = self.langevin.as_ref().expect("langevin config");
                malt_sample_step(&mut self.state, cfg, &self.target, &mut self.rng)
            }
        };
        self.stats.record(&info);
        info
    }

    /// Number of leapfrog steps the next transition may use at most.
    pub fn max_next_steps(&self) -> usize {
        match self.sampler {
            Sampler::MamsLangevin => self.langevin.as_ref().map_or(1, |c| c.steps_per_sample),
            _ => match self.cfg.sequence {
                SequenceKind::Fixed => self.cfg.avg_steps().round().max(1.0) as usize,
                _ => self.schedule.scale().ceil() as usize,
            },
        }
    }

    /// Average integration time per transition, `ε · E[n]`. Differs from the
    /// configured trajectory length when fewer than one step is requested.
    pub fn time_per_sample(&self) -> f64 {
        match &self.langevin {
            Some(c) => c.trajectory_length(),
            None => self.cfg.step_size * self.schedule.avg_steps(),
        }
    }

    pub fn set_step_size(&mut self, eps: f64) -> Result<()> {
        self.cfg.step_size = eps;
        self.reconfigure()
    }

    pub fn set_trajectory_length(&mut self, l: f64) -> Result<()> {
        self.cfg.trajectory_length = l;
        if self.sampler == Sampler::MamsLangevin {
            self.cfg.l_partial = Some(L_PARTIAL_RATIO * l);
        }
        self.reconfigure()
    }

    fn reconfigure(&mut self) -> Result<()> {
        self.cfg.validate()?;
        self.schedule.set_avg_steps(self.cfg.avg_steps())?;
        if self.sampler == Sampler::MamsLangevin {
            self.langevin = Some(self.cfg.langevin()?);
        }
        Ok(())
    }

    /// Moves the chain to `x` and refreshes the cached gradient (one call).
    pub fn set_position(&mut self, x: &[f64]) {
        self.state.set_position(&self.target, x);
        self.stats.grad_calls += 1;
    }

    pub fn position(&self) -> &[f64] {
        self.state.x()
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    pub fn sampler(&self) -> Sampler {
        self.sampler
    }

    pub fn stats(&self) -> &ChainStats {
        &self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = ChainStats::default();
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    pub fn target_mut(&mut self) -> &mut T {
        &mut self.target
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }

    pub fn into_parts(self) -> (T, ChainState, R, ChainStats) {
        (self.target, self.state, self.rng, self.stats)
    }
}
