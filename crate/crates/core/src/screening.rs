//! Sequential elimination of arms that cannot be among the top m.
//!
//! Starting from all k arms, each step computes one confidence-sequence pair
//! per arm at the working level `alpha / (2 m (k - m))`, takes the m-th
//! largest lower bound among the current survivors as the threshold, and
//! permanently removes every survivor whose upper bound falls strictly below
//! it. Because the underlying bounds hold uniformly over time, the surviving
//! set contains the true top-m set at every time simultaneously with
//! probability at least `1 - alpha`, and the recursion makes the survivor
//! sequence monotone by construction.
//!
//! Using survivors (rather than all arms) for the threshold order statistic
//! is what keeps at least m arms alive on every path where lower < upper.
//!
//! The same recursion can be driven by the wider fixed-time intervals used
//! by the LUCB family of best-arm algorithms (Kalyanakrishnan et al. 2012),
//! which serves as a baseline; the original LUCB stopping rule is provided
//! as a diagnostic.

use serde::{Deserialize, Serialize};

use crate::confseq::{
    heavytail_bounds, missing_data_bounds, quantile_bounds, subgaussian_bounds, ArmState,
    BoundPair, HeavyTailConfig, MissingDataConfig, QuantileConfig, Retention, SubGaussianConfig,
};
use crate::error::{invalid, Result};

// ---------------------------------------------------------------------------
// Bound constructor selection
// ---------------------------------------------------------------------------

/// Which confidence-sequence family drives the screening recursion.
///
/// `ModifiedLucb` is the baseline: the fixed-time LUCB interval widened with
/// a `5 k^5 T^4 / 4` correction so that it is valid simultaneously over arms
/// and times, run through the very same set recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundConstructor {
    SubGaussian(SubGaussianConfig),
    HeavyTail(HeavyTailConfig),
    Quantile(QuantileConfig),
    MissingData(MissingDataConfig),
    ModifiedLucb,
}

impl BoundConstructor {
    pub fn validate(&self) -> Result<()> {
        match self {
            BoundConstructor::SubGaussian(c) => c.validate(),
            BoundConstructor::HeavyTail(c) => c.validate(),
            BoundConstructor::Quantile(c) => c.validate(),
            BoundConstructor::MissingData(c) => c.validate(),
            BoundConstructor::ModifiedLucb => Ok(()),
        }
    }

    /// What per-arm state the constructor needs retained.
    pub fn retention(&self) -> Retention {
        match self {
            BoundConstructor::Quantile(_) => Retention::SortedValues,
            BoundConstructor::HeavyTail(_) => Retention::WeightedHistory,
            _ => Retention::SufficientStats,
        }
    }

    /// The predictable weight fed to [`crate::confseq::update_arm`] at time `t`.
    pub fn lambda_at(&self, t: u64) -> f64 {
        match self {
            BoundConstructor::SubGaussian(c) => c.schedule.value(t),
            BoundConstructor::HeavyTail(c) => c.schedule.value(t),
            BoundConstructor::MissingData(c) => c.lambda,
            BoundConstructor::Quantile(_) | BoundConstructor::ModifiedLucb => 1.0,
        }
    }

    /// Bounds for one arm at the given level. Arms without data always get
    /// the vacuous pair: they can neither be removed nor move the threshold.
    pub fn bounds(&self, state: &ArmState, level: f64, k: usize, time: u64) -> Result<BoundPair> {
        if state.obs_count() == 0 {
            return BoundPair::unbounded(level);
        }
        match self {
            BoundConstructor::SubGaussian(c) => subgaussian_bounds(state, c, level),
            BoundConstructor::HeavyTail(c) => {
                heavytail_bounds(state, c, level, state.weighted_history())
            }
            BoundConstructor::Quantile(c) => quantile_bounds(state, c, level),
            BoundConstructor::MissingData(c) => missing_data_bounds(state, c, level),
            BoundConstructor::ModifiedLucb => modified_lucb_bounds(state, k, time, level),
        }
    }

    /// Point estimate to plot alongside the interval; NaN before any data.
    pub fn center(&self, state: &ArmState) -> f64 {
        if state.obs_count() == 0 {
            return f64::NAN;
        }
        match self {
            BoundConstructor::SubGaussian(_) | BoundConstructor::HeavyTail(_) => {
                state.weighted_mean()
            }
            BoundConstructor::Quantile(c) => {
                crate::confseq::empirical_quantile_lower(state.sorted_obs(), c.q)
            }
            BoundConstructor::MissingData(_) | BoundConstructor::ModifiedLucb => state.raw_mean(),
        }
    }
}

/// Full screening specification: arm count, target count, global level, and
/// the bound family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    pub constructor: BoundConstructor,
}

impl ScreeningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(invalid(format!("need at least 2 arms, got {}", self.k)));
        }
        if self.m < 1 || self.m >= self.k {
            return Err(invalid(format!(
                "target count m must satisfy 1 <= m < k, got m={}, k={}",
                self.m, self.k
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        self.constructor.validate()
    }

    /// The working level `alpha / (2 m (k - m))` at which the screening
    /// bounds are monitored.
    pub fn effective_level(&self) -> f64 {
        self.alpha / (2.0 * self.m as f64 * (self.k - self.m) as f64)
    }
}

// ---------------------------------------------------------------------------
// Observation streams
// ---------------------------------------------------------------------------

/// A finite per-time, per-arm stream; `None` marks a missing observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationStream {
    pub k: usize,
    pub steps: Vec<Vec<Option<f64>>>,
}

impl ObservationStream {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("stream must describe at least one arm"));
        }
        for (i, step) in self.steps.iter().enumerate() {
            if step.len() != self.k {
                return Err(invalid(format!(
                    "step {} has {} slots, expected {}",
                    i + 1,
                    step.len(),
                    self.k
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Screening state and the set recursion
// ---------------------------------------------------------------------------

/// The survivor set, per-arm statistics and the bounds at the current time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreeningState {
    time: u64,
    alive: Vec<bool>,
    alive_count: usize,
    eliminated_at: Vec<Option<u64>>,
    threshold: f64,
    bounds: Vec<BoundPair>,
    arms: Vec<ArmState>,
}

impl ScreeningState {
    /// The initial state: every arm alive, vacuous bounds, time zero.
    pub fn new(cfg: &ScreeningConfig) -> Result<Self> {
        cfg.validate()?;
        let retention = cfg.constructor.retention();
        let level = cfg.effective_level();
        let arms: Vec<ArmState> = (0..cfg.k).map(|i| ArmState::new(i, retention)).collect();
        let bounds = vec![BoundPair::unbounded(level)?; cfg.k];
        Ok(Self {
            time: 0,
            alive: vec![true; cfg.k],
            alive_count: cfg.k,
            eliminated_at: vec![None; cfg.k],
            threshold: f64::NEG_INFINITY,
            bounds,
            arms,
        })
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn is_survivor(&self, arm: usize) -> bool {
        self.alive[arm]
    }

    pub fn survivor_count(&self) -> usize {
        self.alive_count
    }

    /// Sorted indices of the surviving arms.
    pub fn survivors(&self) -> Vec<usize> {
        (0..self.alive.len()).filter(|&i| self.alive[i]).collect()
    }

    pub fn alive_mask(&self) -> &[bool] {
        &self.alive
    }

    /// Elimination time per arm; `None` for survivors.
    pub fn eliminated_at(&self) -> &[Option<u64>] {
        &self.eliminated_at
    }

    /// The threshold `L_T^(m)` used at the current time.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Bounds for every arm (survivors and eliminated alike) at the working
    /// level and current time.
    pub fn bounds(&self) -> &[BoundPair] {
        &self.bounds
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    /// Time of the most recent elimination, zero if none happened yet.
    pub fn last_elimination(&self) -> u64 {
        self.eliminated_at
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0)
    }
}

/// The pure set-update rule applied to one step's bounds.
///
/// The threshold is the m-th largest lower bound among survivors, counted
/// with multiplicity, and exactly those survivors whose upper bound is
/// strictly below it are removed. Bounds of eliminated arms are ignored.
/// With fewer than m survivors carrying data the threshold degenerates to
/// `-inf` and nothing is removed.
pub fn screening_rule(bounds: &[BoundPair], alive: &[bool], m: usize) -> Result<(f64, Vec<bool>)> {
    if bounds.len() != alive.len() {
        return Err(invalid("bounds and survivor mask must have equal length"));
    }
    if m < 1 {
        return Err(invalid("m must be at least 1"));
    }
    let mut lowers: Vec<f64> = bounds
        .iter()
        .zip(alive)
        .filter(|(_, &a)| a)
        .map(|(b, _)| b.lower)
        .collect();
    let threshold = if lowers.len() < m {
        f64::NEG_INFINITY
    } else {
        let idx = m - 1;
        lowers.select_nth_unstable_by(idx, |a, b| b.partial_cmp(a).expect("bounds are not NaN"));
        lowers[idx]
    };
    // Removal uses strict `<`, so keeping is `upper >= threshold`; NaN cannot
    // occur in a validated BoundPair.
    let next: Vec<bool> = bounds
        .iter()
        .zip(alive)
        .map(|(b, &a)| a && b.upper >= threshold)
        .collect();
    Ok((threshold, next))
}

/// Advances the screening state by one tick.
///
/// Every arm's statistics ingest the new observation, eliminated arms
/// included (they can never re-enter, but their intervals stay current for
/// reporting and later inference). Bounds are recomputed at the working
/// level and the set recursion is applied to the survivors.
pub fn scs_step(
    mut state: ScreeningState,
    observations: &[Option<f64>],
    cfg: &ScreeningConfig,
) -> Result<ScreeningState> {
    if observations.len() != cfg.k || state.arms.len() != cfg.k {
        return Err(invalid(format!(
            "observation vector covers {} arms, expected {}",
            observations.len(),
            cfg.k
        )));
    }
    let t = state.time + 1;
    let lambda = cfg.constructor.lambda_at(t);
    let level = cfg.effective_level();

    for (arm, &obs) in state.arms.iter_mut().zip(observations) {
        arm.ingest(obs, lambda)?;
    }
    for (slot, arm) in state.bounds.iter_mut().zip(&state.arms) {
        *slot = cfg.constructor.bounds(arm, level, cfg.k, t)?;
    }

    let (threshold, next_alive) = screening_rule(&state.bounds, &state.alive, cfg.m)?;
    for ((was, now), slot) in state
        .alive
        .iter()
        .zip(&next_alive)
        .zip(state.eliminated_at.iter_mut())
    {
        if *was && !*now {
            *slot = Some(t);
            state.alive_count -= 1;
        }
    }
    state.alive = next_alive;
    state.threshold = threshold;
    state.time = t;
    Ok(state)
}

// ---------------------------------------------------------------------------
// Full runs and traces
// ---------------------------------------------------------------------------

/// When to stop consuming the stream; every rule also stops at stream end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopRule {
    /// Consume the whole stream.
    StreamEnd,
    /// Stop once the given time is reached.
    AtTime(u64),
    /// Stop as soon as exactly m arms survive.
    SizeReached,
    /// Stop once no elimination has happened for the given number of steps.
    StableFor(u64),
}

impl StopRule {
    fn fired(&self, state: &ScreeningState, m: usize) -> bool {
        match *self {
            StopRule::StreamEnd => false,
            StopRule::AtTime(t) => state.time >= t,
            StopRule::SizeReached => state.alive_count == m,
            StopRule::StableFor(window) => {
                state.time >= window && state.time - state.last_elimination() >= window
            }
        }
    }
}

/// One recorded step of a screening run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: u64,
    pub survivors: Vec<usize>,
    pub bounds: Vec<BoundPair>,
    #[serde(with = "crate::ext_real::vec")]
    pub centers: Vec<f64>,
    #[serde(with = "crate::ext_real")]
    pub threshold: f64,
}

/// A full screening run: the per-step records (time zero included) and the
/// final state, which retains every arm's statistics for later inference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreeningTrace {
    pub records: Vec<StepRecord>,
    pub final_state: ScreeningState,
}

impl ScreeningTrace {
    pub fn final_time(&self) -> u64 {
        self.final_state.time()
    }
}

fn record_of(state: &ScreeningState, cfg: &ScreeningConfig) -> StepRecord {
    StepRecord {
        time: state.time(),
        survivors: state.survivors(),
        bounds: state.bounds().to_vec(),
        centers: state
            .arms()
            .iter()
            .map(|a| cfg.constructor.center(a))
            .collect(),
        threshold: state.threshold(),
    }
}

/// Runs the screening recursion over a finite stream.
///
/// The trace records every step from time zero up to the stopping time,
/// which is the earlier of the stream end and the first time `stop` fires.
pub fn run_scs(
    stream: &ObservationStream,
    cfg: &ScreeningConfig,
    stop: StopRule,
) -> Result<ScreeningTrace> {
    cfg.validate()?;
    stream.validate()?;
    if stream.k != cfg.k {
        return Err(invalid(format!(
            "stream has {} arms but the configuration expects {}",
            stream.k, cfg.k
        )));
    }
    let mut state = ScreeningState::new(cfg)?;
    let mut records = vec![record_of(&state, cfg)];
    for step in &stream.steps {
        if stop.fired(&state, cfg.m) {
            break;
        }
        state = scs_step(state, step, cfg)?;
        records.push(record_of(&state, cfg));
    }
    Ok(ScreeningTrace {
        records,
        final_state: state,
    })
}

// ---------------------------------------------------------------------------
// Modified LUCB baseline and the original stopping rule
// ---------------------------------------------------------------------------

/// The widened fixed-time interval around the plain sample mean:
/// `mean +/- sqrt(log(5 k^5 T^4 / (4 alpha)) / (2 T))`.
///
/// Requires a fully observed arm (`T` observations at time `T`).
pub fn modified_lucb_bounds(state: &ArmState, k: usize, t: u64, alpha: f64) -> Result<BoundPair> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("level must be in (0, 1), got {alpha}")));
    }
    if t == 0 {
        return Err(invalid("modified LUCB bounds need T >= 1"));
    }
    if state.obs_count() != t {
        return Err(invalid(format!(
            "modified LUCB bounds need a fully observed arm: {} observations at time {t}",
            state.obs_count()
        )));
    }
    let tf = t as f64;
    let kf = k as f64;
    let mean = state.raw_sum() / tf;
    let radius = ((5.0 * kf.powi(5) * tf.powi(4) / (4.0 * alpha)).ln() / (2.0 * tf)).sqrt();
    BoundPair::new(mean - radius, mean + radius, alpha)
}

/// The LUCB stopping criterion: with the top-m arms by point estimate on one
/// side and the rest on the other, stop once every bottom-set upper bound
/// lies strictly below every top-set lower bound. Ties in the estimates put
/// the smaller index in the top set.
pub fn lucb_stopping(bounds: &[BoundPair], estimates: &[f64], m: usize) -> Result<bool> {
    let k = bounds.len();
    if estimates.len() != k {
        return Err(invalid("bounds and estimates must have equal length"));
    }
    if k < 2 || m < 1 || m >= k {
        return Err(invalid(format!(
            "need k >= 2 and 1 <= m < k, got k={k}, m={m}"
        )));
    }
    if estimates.iter().any(|e| e.is_nan()) {
        return Err(invalid("estimates must not be NaN"));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        estimates[b]
            .partial_cmp(&estimates[a])
            .expect("estimates are not NaN")
            .then(a.cmp(&b))
    });
    let top = &order[..m];
    let rest = &order[m..];
    let min_top_lower = top
        .iter()
        .map(|&i| bounds[i].lower)
        .fold(f64::INFINITY, f64::min);
    let max_rest_upper = rest
        .iter()
        .map(|&i| bounds[i].upper)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(max_rest_upper < min_top_lower)
}
