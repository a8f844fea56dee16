//! Experiment orchestration: tune once, run seeded chains in parallel, record
//! bias curves on a shared gradient grid and write CSV and manifest files.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptation::{run_tuning, TunedConfig, TuningSchedule};
use crate::diagnostics::{geometric_grid, gradients_to_threshold, median_curve, reduce, BiasCurve, MomentTracker, Reduction};
use crate::kernel::{Chain, ChainStats, KernelConfig, Sampler};
use crate::models::ModelSpec;
use crate::schedule::SequenceKind;
use crate::target::{CountingTarget, Preconditioned, Target};
use crate::{Error, Result};

/// Stream reserved for the tuning chain so it never overlaps a sampling chain.
const TUNING_STREAM: u64 = u64::MAX;

fn default_chains() -> usize {
    32
}
fn default_fractions() -> [f64; 3] {
    [0.1, 0.1, 0.1]
}
fn default_threshold() -> f64 {
    0.01
}
fn default_grid_ratio() -> f64 {
    1.05
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn yes() -> bool {
    true
}

/// One experiment: a model, a sampler and the budget to spend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub sampler: Sampler,
    #[serde(default = "default_chains")]
    pub chains: usize,
    /// Gradient calls per run: tuning takes its fractions, each chain gets the rest.
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Defaults to the model's customary reduction.
    #[serde(default)]
    pub reduction: Option<Reduction>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_grid_ratio")]
    pub grid_ratio: f64,
    #[serde(default)]
    pub target_accept: Option<f64>,
    #[serde(default = "default_fractions")]
    pub tuning_fractions: [f64; 3],
    #[serde(default = "crate::adaptation::default_rounds")]
    pub alba_rounds: usize,
    #[serde(default = "yes")]
    pub precondition: bool,
    #[serde(default)]
    pub sequence: SequenceKind,
    /// Fixes the step size; requires `trajectory_length` and skips tuning.
    #[serde(default)]
    pub step_size: Option<f64>,
    /// Fixes the trajectory length; the step size is still tuned unless given.
    #[serde(default)]
    pub trajectory_length: Option<f64>,
    #[serde(default = "yes")]
    pub metropolis: bool,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, sampler: Sampler, budget: u64) -> Self {
        ExperimentConfig {
            model,
            sampler,
            chains: default_chains(),
            budget,
            seed: 0,
            out: default_out(),
            reduction: None,
            threshold: default_threshold(),
            grid_ratio: default_grid_ratio(),
            target_accept: None,
            tuning_fractions: default_fractions(),
            alba_rounds: crate::adaptation::default_rounds(),
            precondition: true,
            sequence: SequenceKind::Halton,
            step_size: None,
            trajectory_length: None,
            metropolis: true,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::config("at least one chain is required"));
        }
        if !(self.grid_ratio > 1.0) {
            return Err(Error::config("grid ratio must exceed one"));
        }
        if self.step_size.is_some() && self.trajectory_length.is_none() {
            return Err(Error::config("a fixed step size needs a fixed trajectory length"));
        }
        self.schedule().validate()
    }

    pub fn reduction(&self) -> Reduction {
        self.reduction.unwrap_or_else(|| self.model.default_reduction())
    }

    /// Fully fixed kernels skip tuning.
    pub fn is_fixed(&self) -> bool {
        self.step_size.is_some()
    }

    pub fn schedule(&self) -> TuningSchedule {
        TuningSchedule {
            total_budget: self.budget,
            fractions: if self.is_fixed() { [0.0; 3] } else { self.tuning_fractions },
            alba_rounds: self.alba_rounds,
            precondition: self.precondition,
            target_accept: self.target_accept,
            sequence: self.sequence,
            fixed_length: self.trajectory_length,
        }
    }

    pub fn chain_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub tuned: Option<TunedConfig>,
    pub chain_seeds: Vec<u64>,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// One trace CSV row: a chain's state at a grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub model: String,
    pub sampler: String,
    pub chain: usize,
    pub gradient_calls: u64,
    pub b2_max: f64,
    pub b2_avg: f64,
    pub accept_rate: f64,
    pub divergences: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub sampler: String,
    pub chains: usize,
    pub reduction: Reduction,
    pub gradients_to_threshold: Option<u64>,
    pub final_median_b2: Option<f64>,
    pub accept_rate: f64,
    pub divergences: u64,
    pub step_size: f64,
    pub trajectory_length: f64,
    pub tuning_grad_calls: u64,
}

#[derive(Debug, Clone)]
pub struct ChainResult {
    pub seed: u64,
    pub stats: ChainStats,
    pub curve: BiasCurve,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub tuned: TunedConfig,
    pub chains: Vec<ChainResult>,
    /// Median bias across chains on the shared grid.
    pub median: Vec<(u64, f64)>,
    pub gradients_to_threshold: Option<u64>,
    /// Every gradient evaluation of the run, tuning included.
    pub total_grad_calls: u64,
    pub summary: SummaryRow,
}

impl RunSummary {
    pub fn sampling_grad_calls(&self) -> u64 {
        self.chains.iter().map(|c| c.stats.grad_calls).sum()
    }
}

fn initial_position(dim: usize, seed: u64) -> (Vec<f64>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TUNING_STREAM);
    let x = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    (x, rng)
}

/// Tunes (unless the kernel is fixed) on a single chain. Returns the frozen
/// configuration and the warm position in original coordinates.
pub fn tune<T: Target>(cfg: &ExperimentConfig, target: &T) -> Result<(TunedConfig, Vec<f64>)> {
    cfg.validate()?;
    let d = target.dim();
    let (x0, mut rng) = initial_position(d, cfg.seed);
    if let (Some(eps), Some(l)) = (cfg.step_size, cfg.trajectory_length) {
        let mut kernel = KernelConfig::new(eps, l);
        kernel.sequence = cfg.sequence;
        kernel.metropolis = cfg.metropolis;
        kernel.target_accept = cfg.target_accept.unwrap_or(cfg.sampler.default_target_accept());
        kernel.validate()?;
        let tuned = TunedConfig {
            sampler: cfg.sampler,
            kernel,
            scales: vec![1.0; d],
            initial_step_size: eps,
            tuning_grad_calls: 0,
            alba_history: Vec::new(),
        };
        return Ok((tuned, x0));
    }
    let mut r = run_tuning(target, cfg.sampler, &cfg.schedule(), x0, &mut rng)?;
    r.config.kernel.metropolis = cfg.metropolis;
    Ok((r.config, r.position))
}

fn run_chain<T: Target>(
    cfg: &ExperimentConfig,
    target: &T,
    tuned: &TunedConfig,
    start: &[f64],
    index: usize,
    grid: &[u64],
    budget: u64,
) -> Result<ChainResult> {
    let seed = cfg.chain_seed(index);
    let pre = Preconditioned::new(target, tuned.scales.clone())?;
    let mut xt = vec![0.0; start.len()];
    pre.to_transformed(start, &mut xt);
    let reduction = cfg.reduction();
    let mut result = ChainResult { seed, stats: ChainStats::default(), curve: BiasCurve::new(reduction), trace: Vec::new() };
    if budget == 0 {
        return Ok(result);
    }
    let truth = target.ground_truth().cloned();
    let mut tracker = truth.as_ref().map(MomentTracker::for_truth);
    let mut chain = Chain::new(pre, cfg.sampler, tuned.kernel.clone(), xt, ChaCha8Rng::seed_from_u64(seed))?;
    let mut x = vec![0.0; start.len()];
    let mut next = 0;
    let label = cfg.model.label();
    while chain.stats().grad_calls + chain.max_next_steps() as u64 <= budget {
        chain.step();
        chain.target().to_original(chain.position(), &mut x);
        let (Some(tracker), Some(truth)) = (tracker.as_mut(), truth.as_ref()) else {
            continue;
        };
        tracker.push(&x);
        let grads = chain.stats().grad_calls;
        if next < grid.len() && grads >= grid[next] {
            let (b2_max, b2_avg) = tracker.b2(truth)?;
            let stats = chain.stats();
            while next < grid.len() && grads >= grid[next] {
                result.curve.push(grid[next], reduce(b2_max, b2_avg, reduction))?;
                result.trace.push(TraceRow {
                    model: label.clone(),
                    sampler: cfg.sampler.name().to_string(),
                    chain: index,
                    gradient_calls: grid[next],
                    b2_max,
                    b2_avg,
                    accept_rate: stats.accept_rate(),
                    divergences: stats.divergences,
                });
                next += 1;
            }
        }
    }
    result.stats = *chain.stats();
    Ok(result)
}

/// Runs tuning and all chains without touching the file system.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let model = cfg.model.build()?;
    let counted = CountingTarget::new(&model);
    let (tuned, start) = tune(cfg, &counted)?;
    let budget = cfg.schedule().sampling_budget();
    let grid = geometric_grid(1, budget, cfg.grid_ratio);
    let mut chains = (0..cfg.chains)
        .into_par_iter()
        .map(|i| run_chain(cfg, &counted, &tuned, &start, i, &grid, budget))
        .collect::<Result<Vec<_>>>()?;

    // Chains stop at slightly different gradient counts; keep the common prefix.
    let common = chains.iter().map(|c| c.curve.len()).min().unwrap_or(0);
    for c in &mut chains {
        c.curve.points.truncate(common);
        c.trace.truncate(common);
    }
    let curves: Vec<BiasCurve> = chains.iter().map(|c| c.curve.clone()).collect();
    let (median, gtt) = if common == 0 {
        (Vec::new(), None)
    } else {
        (median_curve(&curves)?, gradients_to_threshold(&curves, cfg.threshold)?)
    };
    let steps: u64 = chains.iter().map(|c| c.stats.steps).sum();
    let accepted: u64 = chains.iter().map(|c| c.stats.accepted).sum();
    let summary = SummaryRow {
        model: cfg.model.label(),
        sampler: cfg.sampler.name().to_string(),
        chains: cfg.chains,
        reduction: cfg.reduction(),
        gradients_to_threshold: gtt,
        final_median_b2: median.last().map(|p| p.1),
        accept_rate: if steps == 0 { 0.0 } else { accepted as f64 / steps as f64 },
        divergences: chains.iter().map(|c| c.stats.divergences).sum(),
        step_size: tuned.kernel.step_size,
        trajectory_length: tuned.kernel.trajectory_length,
        tuning_grad_calls: tuned.tuning_grad_calls,
    };
    Ok(RunSummary {
        tuned,
        chains,
        median,
        gradients_to_threshold: gtt,
        total_grad_calls: counted.gradient_calls(),
        summary,
    })
}

fn manifest(cfg: &ExperimentConfig, tuned: Option<TunedConfig>, error: Option<String>) -> RunManifest {
    RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        tuned,
        chain_seeds: (0..cfg.chains).map(|i| cfg.chain_seed(i)).collect(),
        error,
    }
}

fn write_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    let text = toml::to_string(m).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(dir.join("manifest.toml"), text)?;
    Ok(())
}

pub fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs an experiment and writes `trace.csv`, `summary.csv` and
/// `manifest.toml` into `cfg.out`. On failure the manifest records the error.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    fs::create_dir_all(&cfg.out)?;
    match run(cfg) {
        Ok(summary) => {
            let trace: Vec<&TraceRow> = summary.chains.iter().flat_map(|c| &c.trace).collect();
            write_csv(&cfg.out.join("trace.csv"), &trace)?;
            write_csv(&cfg.out.join("summary.csv"), std::slice::from_ref(&summary.summary))?;
            write_manifest(&cfg.out, &manifest(cfg, Some(summary.tuned.clone()), None))?;
            Ok(summary)
        }
        Err(e) => {
            write_manifest(&cfg.out, &manifest(cfg, None, Some(e.to_string())))?;
            Err(e)
        }
    }
}

/// Tunes and writes the frozen configuration to `cfg.out/tuned.toml`.
pub fn tune_to_file(cfg: &ExperimentConfig) -> Result<TunedConfig> {
    let model = cfg.model.build()?;
    let (tuned, _) = tune(cfg, &model)?;
    fs::create_dir_all(&cfg.out)?;
    let text = toml::to_string(&tuned).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(cfg.out.join("tuned.toml"), text)?;
    Ok(tuned)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub trajectory_length: f64,
    pub step_size: f64,
    pub accept_rate: f64,
    pub gradients_to_threshold: Option<u64>,
}

/// Runs the experiment at each fixed trajectory length, with the step size
/// tuned by dual averaging.
pub fn grid_search_l(cfg: &ExperimentConfig, lengths: &[f64]) -> Result<Vec<GridPoint>> {
    if lengths.is_empty() {
        return Err(Error::config("empty trajectory-length grid"));
    }
    lengths
        .iter()
        .map(|&l| {
            let mut c = cfg.clone();
            c.trajectory_length = Some(l);
            c.step_size = None;
            let s = run(&c)?;
            Ok(GridPoint {
                trajectory_length: l,
                step_size: s.tuned.kernel.step_size,
                accept_rate: s.summary.accept_rate,
                gradients_to_threshold: s.gradients_to_threshold,
            })
        })
        .collect()
}

/// Runs every (model, sampler) pair of `base` and collects the summary rows.
pub fn benchmark(base: &ExperimentConfig, models: &[ModelSpec], samplers: &[Sampler]) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for m in models {
        for &s in samplers {
            let mut c = base.clone();
            c.model = m.clone();
            c.sampler = s;
            c.reduction = None;
            rows.push(run(&c)?.summary);
        }
    }
    Ok(rows)
}
