//! Seeded Monte Carlo harness for screening and post-screening inference.
//!
//! Replications are reproducible and embarrassingly parallel: replication
//! `i` of an experiment draws its data from a ChaCha8 stream with the
//! experiment seed as key and `i` as the stream number, so serial and
//! parallel execution produce bit-identical reports.
//!
//! Per replication the harness records, at each requested checkpoint, the
//! survivor count, the Jaccard overlap with the true top-m set, and the
//! false coverage proportion of the adjusted intervals; across replications
//! it aggregates these into estimated false coverage rates, coverage-failure
//! rates, and identification rates. A data-dependent stopping time (first
//! time the survivor set has been stable for a configured window) exercises
//! the stopped versions of the same quantities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confseq::BoundPair;
use crate::error::{invalid, Result};
use crate::psi::{bonferroni_level, psi_level};
use crate::screening::{scs_step, ObservationStream, ScreeningConfig, ScreeningState};

// ---------------------------------------------------------------------------
// Data-generating models
// ---------------------------------------------------------------------------

/// Ground-truth data model for simulated arms; `truth()` is the parameter
/// vector the screening targets (means, or quantiles for the shifted
/// uniform).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ArmModel {
    Bernoulli {
        means: Vec<f64>,
    },
    Gaussian {
        means: Vec<f64>,
        sigma: f64,
    },
    /// `loc + (U - q)` with `U` uniform on (0,1): the q-th quantile of arm
    /// `i` is exactly `locs[i]`.
    ShiftedUniform {
        locs: Vec<f64>,
        q: f64,
    },
}

impl ArmModel {
    /// The grid design `theta_i = 1 - i/k`, `i = 1..k`.
    pub fn bernoulli_grid(k: usize) -> Self {
        ArmModel::Bernoulli {
            means: (1..=k).map(|i| 1.0 - i as f64 / k as f64).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.truth().len()
    }

    pub fn truth(&self) -> &[f64] {
        match self {
            ArmModel::Bernoulli { means } => means,
            ArmModel::Gaussian { means, .. } => means,
            ArmModel::ShiftedUniform { locs, .. } => locs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k() == 0 {
            return Err(invalid("model must have at least one arm"));
        }
        if self.truth().iter().any(|t| !t.is_finite()) {
            return Err(invalid("arm parameters must be finite"));
        }
        match self {
            ArmModel::Bernoulli { means } => {
                if means.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(invalid("Bernoulli means must lie in [0, 1]"));
                }
            }
            ArmModel::Gaussian { sigma, .. } => {
                if !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(invalid("Gaussian sigma must be positive"));
                }
            }
            ArmModel::ShiftedUniform { q, .. } => {
                if !(*q > 0.0 && *q < 1.0) {
                    return Err(invalid("shifted-uniform q must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    fn sample_step(&self, rng: &mut ChaCha8Rng, out: &mut Vec<Option<f64>>) {
        out.clear();
        match self {
            ArmModel::Bernoulli { means } => {
                for &p in means {
                    out.push(Some(f64::from(rng.random::<f64>() < p)));
                }
            }
            ArmModel::Gaussian { means, sigma } => {
                let normal = Normal::new(0.0, *sigma).expect("validated sigma");
                for &mu in means {
                    out.push(Some(mu + normal.sample(rng)));
                }
            }
            ArmModel::ShiftedUniform { locs, q } => {
                for &loc in locs {
                    out.push(Some(loc + (rng.random::<f64>() - q)));
                }
            }
        }
    }
}

fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Materializes a fully observed stream, deterministic in `(model, seed)`.
pub fn generate_stream(model: &ArmModel, t_max: u64, seed: u64) -> Result<ObservationStream> {
    generate_replication_stream(model, t_max, seed, 0)
}

/// The stream replication `rep` of an experiment with the given seed draws;
/// [`generate_stream`] is replication zero.
pub fn generate_replication_stream(
    model: &ArmModel,
    t_max: u64,
    seed: u64,
    rep: u64,
) -> Result<ObservationStream> {
    model.validate()?;
    if t_max == 0 {
        return Err(invalid("t_max must be >= 1"));
    }
    let mut rng = replication_rng(seed, rep);
    let mut steps = Vec::with_capacity(t_max as usize);
    let mut buf = Vec::with_capacity(model.k());
    for _ in 0..t_max {
        model.sample_step(&mut rng, &mut buf);
        steps.push(buf.clone());
    }
    Ok(ObservationStream {
        k: model.k(),
        steps,
    })
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// False coverage proportion: the fraction of selected arms whose true
/// parameter falls outside its open interval. An empty selection counts as
/// zero misses.
pub fn compute_fcp(selected: &[usize], intervals: &[BoundPair], truth: &[f64]) -> Result<f64> {
    if intervals.len() != truth.len() {
        return Err(invalid("intervals and truth must have equal length"));
    }
    if selected.is_empty() {
        return Ok(0.0);
    }
    let mut misses = 0usize;
    for &i in selected {
        let theta = *truth
            .get(i)
            .ok_or_else(|| invalid(format!("selected arm {i} out of range")))?;
        if !intervals[i].covers(theta) {
            misses += 1;
        }
    }
    Ok(misses as f64 / selected.len() as f64)
}

/// Jaccard overlap `|A and B| / |A or B|`; two empty sets count as identical.
pub fn compute_jac(a: &[usize], b: &[usize]) -> f64 {
    use std::collections::HashSet;
    let sa: HashSet<usize> = a.iter().copied().collect();
    let sb: HashSet<usize> = b.iter().copied().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Indices of the arms whose parameter ties or beats the m-th largest; the
/// set screening must retain.
pub fn promising_set(truth: &[f64], m: usize) -> Vec<usize> {
    let mut sorted: Vec<f64> = truth.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite truth"));
    let cutoff = sorted[m - 1];
    (0..truth.len()).filter(|&i| truth[i] >= cutoff).collect()
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// A full Monte Carlo experiment specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub screening: ScreeningConfig,
    pub model: ArmModel,
    pub reps: u64,
    pub t_max: u64,
    /// Times at which per-replication metrics are recorded; ascending.
    pub checkpoints: Vec<u64>,
    /// Window for the data-dependent stop: first time with no elimination
    /// for this many steps.
    pub stable_window: u64,
    /// FCR target for the adjusted intervals; defaults to the screening
    /// alpha.
    pub fcr_alpha: Option<f64>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.screening.validate()?;
        self.model.validate()?;
        if self.model.k() != self.screening.k {
            return Err(invalid(format!(
                "model has {} arms but screening expects {}",
                self.model.k(),
                self.screening.k
            )));
        }
        if self.reps == 0 {
            return Err(invalid("need at least one replication"));
        }
        if self.t_max == 0 {
            return Err(invalid("t_max must be >= 1"));
        }
        if self.stable_window == 0 {
            return Err(invalid("stable_window must be >= 1"));
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("checkpoints must be strictly increasing"));
        }
        if self.checkpoints.iter().any(|&c| c == 0 || c > self.t_max) {
            return Err(invalid("checkpoints must lie in 1..=t_max"));
        }
        if let Some(a) = self.fcr_alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(invalid("fcr_alpha must be in (0, 1)"));
            }
        }
        Ok(())
    }

    pub fn fcr_alpha(&self) -> f64 {
        self.fcr_alpha.unwrap_or(self.screening.alpha)
    }
}

/// Metrics captured at a single checkpoint of a single replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMetrics {
    pub time: u64,
    pub survivor_count: usize,
    pub jaccard: f64,
    /// FCP of the selection-proportional adjusted intervals.
    pub fcp_psi: f64,
    /// FCP of the fixed-level adjusted intervals.
    pub fcp_bonferroni: f64,
    /// FCP of the raw screening intervals (reported, not guaranteed).
    pub fcp_screening: f64,
    pub identified: bool,
}

/// Everything recorded for one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub rep: u64,
    /// Survivor sets were nested at every step.
    pub monotone_ok: bool,
    /// Survivor count stayed at or above m at every step.
    pub floor_ok: bool,
    /// The true top-m set was contained in the survivors at every step.
    pub uniform_coverage_ok: bool,
    /// First step at which containment failed, if it ever did.
    pub first_coverage_failure: Option<u64>,
    pub checkpoints: Vec<CheckpointMetrics>,
    /// First time the survivor set equaled the true top-m set exactly.
    pub identified_at: Option<u64>,
    /// The data-dependent stopping time (capped at t_max).
    pub stop_time: u64,
    pub fcp_psi_at_stop: f64,
    pub fcp_bonferroni_at_stop: f64,
    pub final_survivor_count: usize,
}

/// Across-replication aggregates at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointAggregate {
    pub time: u64,
    pub mean_survivors: f64,
    pub median_survivors: f64,
    /// Mean FCP across replications: the FCR estimate.
    pub fcr_psi: f64,
    pub fcr_bonferroni: f64,
    pub fcr_screening: f64,
    pub mean_jaccard: f64,
    /// Fraction of replications whose containment had failed by this time.
    pub coverage_failure_by: f64,
    /// Fraction of replications whose survivor set equals the top-m set.
    pub identification_rate: f64,
}

/// Aggregate report of a full experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub reps: u64,
    pub seed: u64,
    pub t_max: u64,
    pub stable_window: u64,
    pub fcr_alpha: f64,
    pub monotone_all: bool,
    pub floor_all: bool,
    /// Fraction of replications where containment failed at any step.
    pub coverage_failure_rate: f64,
    pub mean_stop_time: f64,
    /// FCR estimates at the data-dependent stopping time.
    pub stopped_fcr_psi: f64,
    pub stopped_fcr_bonferroni: f64,
    pub checkpoints: Vec<CheckpointAggregate>,
    pub replications: Vec<ReplicationSummary>,
}

struct StopSnapshot {
    time: u64,
    fcp_psi: f64,
    fcp_bonferroni: f64,
}

fn adjusted_fcps(
    state: &ScreeningState,
    cfg: &ExperimentConfig,
    truth: &[f64],
) -> Result<(f64, f64, f64)> {
    let screening = &cfg.screening;
    let survivors = state.survivors();
    let level_psi = psi_level(survivors.len(), screening.k, cfg.fcr_alpha())?;
    let level_bonf = bonferroni_level(screening.m, screening.k, cfg.fcr_alpha())?;
    let mut psi_misses = 0usize;
    let mut bonf_misses = 0usize;
    for &arm in &survivors {
        let st = &state.arms()[arm];
        let pair_psi = screening
            .constructor
            .bounds(st, level_psi, screening.k, state.time())?;
        if !pair_psi.covers(truth[arm]) {
            psi_misses += 1;
        }
        let pair_bonf = screening
            .constructor
            .bounds(st, level_bonf, screening.k, state.time())?;
        if !pair_bonf.covers(truth[arm]) {
            bonf_misses += 1;
        }
    }
    let n = survivors.len().max(1) as f64;
    let fcp_screening = compute_fcp(&survivors, state.bounds(), truth)?;
    Ok((psi_misses as f64 / n, bonf_misses as f64 / n, fcp_screening))
}

fn run_replication(
    cfg: &ExperimentConfig,
    rep: u64,
    target: &[usize],
) -> Result<ReplicationSummary> {
    let screening = &cfg.screening;
    let truth = cfg.model.truth();
    let mut rng = replication_rng(cfg.seed, rep);
    let mut state = ScreeningState::new(screening)?;
    let mut obs: Vec<Option<f64>> = Vec::with_capacity(screening.k);
    let mut prev_alive = state.alive_mask().to_vec();

    let mut monotone_ok = true;
    let mut floor_ok = true;
    let mut first_coverage_failure: Option<u64> = None;
    let mut identified_at: Option<u64> = None;
    let mut stop: Option<StopSnapshot> = None;
    let mut checkpoints = Vec::with_capacity(cfg.checkpoints.len());
    let mut next_cp = 0usize;

    for t in 1..=cfg.t_max {
        cfg.model.sample_step(&mut rng, &mut obs);
        state = scs_step(state, &obs, screening)?;

        let alive = state.alive_mask();
        for i in 0..screening.k {
            if alive[i] && !prev_alive[i] {
                monotone_ok = false;
            }
        }
        prev_alive.copy_from_slice(alive);
        floor_ok &= state.survivor_count() >= screening.m;
        if first_coverage_failure.is_none() && target.iter().any(|&i| !alive[i]) {
            first_coverage_failure = Some(t);
        }
        if identified_at.is_none()
            && state.survivor_count() == target.len()
            && target.iter().all(|&i| alive[i])
        {
            identified_at = Some(t);
        }

        if stop.is_none()
            && t >= cfg.stable_window
            && t - state.last_elimination() >= cfg.stable_window
        {
            let (fcp_psi, fcp_bonferroni, _) = adjusted_fcps(&state, cfg, truth)?;
            stop = Some(StopSnapshot {
                time: t,
                fcp_psi,
                fcp_bonferroni,
            });
        }

        if next_cp < cfg.checkpoints.len() && t == cfg.checkpoints[next_cp] {
            let (fcp_psi, fcp_bonferroni, fcp_screening) = adjusted_fcps(&state, cfg, truth)?;
            let survivors = state.survivors();
            checkpoints.push(CheckpointMetrics {
                time: t,
                survivor_count: survivors.len(),
                jaccard: compute_jac(target, &survivors),
                fcp_psi,
                fcp_bonferroni,
                fcp_screening,
                identified: survivors == target,
            });
            next_cp += 1;
        }
    }

    let stop = match stop {
        Some(s) => s,
        None => {
            let (fcp_psi, fcp_bonferroni, _) = adjusted_fcps(&state, cfg, truth)?;
            StopSnapshot {
                time: cfg.t_max,
                fcp_psi,
                fcp_bonferroni,
            }
        }
    };

    Ok(ReplicationSummary {
        rep,
        monotone_ok,
        floor_ok,
        uniform_coverage_ok: first_coverage_failure.is_none(),
        first_coverage_failure,
        checkpoints,
        identified_at,
        stop_time: stop.time,
        fcp_psi_at_stop: stop.fcp_psi,
        fcp_bonferroni_at_stop: stop.fcp_bonferroni,
        final_survivor_count: state.survivor_count(),
    })
}

fn median_of(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Runs the experiment; replications are independent and the report is a
/// deterministic function of the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let target = promising_set(cfg.model.truth(), cfg.screening.m);
    let summaries: Vec<ReplicationSummary> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_replication(cfg, rep, &target))
        .collect::<Result<Vec<_>>>()?;

    let n = cfg.reps as f64;
    let mean = |f: &dyn Fn(&ReplicationSummary) -> f64| summaries.iter().map(f).sum::<f64>() / n;

    let checkpoints = (0..cfg.checkpoints.len())
        .map(|c| {
            let time = cfg.checkpoints[c];
            let at = |f: &dyn Fn(&CheckpointMetrics) -> f64| {
                summaries.iter().map(|s| f(&s.checkpoints[c])).sum::<f64>() / n
            };
            CheckpointAggregate {
                time,
                mean_survivors: at(&|m| m.survivor_count as f64),
                median_survivors: median_of(
                    summaries
                        .iter()
                        .map(|s| s.checkpoints[c].survivor_count as f64)
                        .collect(),
                ),
                fcr_psi: at(&|m| m.fcp_psi),
                fcr_bonferroni: at(&|m| m.fcp_bonferroni),
                fcr_screening: at(&|m| m.fcp_screening),
                mean_jaccard: at(&|m| m.jaccard),
                coverage_failure_by: mean(&|s| {
                    f64::from(s.first_coverage_failure.is_some_and(|f| f <= time))
                }),
                identification_rate: at(&|m| f64::from(m.identified)),
            }
        })
        .collect();

    Ok(ExperimentReport {
        reps: cfg.reps,
        seed: cfg.seed,
        t_max: cfg.t_max,
        stable_window: cfg.stable_window,
        fcr_alpha: cfg.fcr_alpha(),
        monotone_all: summaries.iter().all(|s| s.monotone_ok),
        floor_all: summaries.iter().all(|s| s.floor_ok),
        coverage_failure_rate: mean(&|s| f64::from(!s.uniform_coverage_ok)),
        mean_stop_time: mean(&|s| s.stop_time as f64),
        stopped_fcr_psi: mean(&|s| s.fcp_psi_at_stop),
        stopped_fcr_bonferroni: mean(&|s| s.fcp_bonferroni_at_stop),
        checkpoints,
        replications: summaries,
    })
}
