//! Anytime-valid confidence sequences for means and quantiles.
//!
//! A confidence sequence is a time-indexed family of intervals
//! `(L_T(alpha), U_T(alpha))` whose coverage holds *uniformly over time*:
//!
//! ```text
//!     P(exists T : theta <= L_T(alpha)) <= alpha
//!     P(exists T : theta >= U_T(alpha)) <= alpha
//! ```
//!
//! so the interval may be inspected at any data-dependent stopping time
//! without inflating the error. Each constructor here inverts Ville's
//! inequality for a nonnegative supermartingale `(M_T)` with `E[M_1] <= 1`:
//! `P(exists T : M_T >= 1/alpha) <= alpha` (Ville 1939; Howard et al. 2021).
//!
//! Constructors provided:
//! - sub-Gaussian mean with known variance proxy, closed-form inversion of
//!   the exponential supermartingale (predictable weight sequence);
//! - heavy-tailed mean under a bounded p-th central moment, 1 < p <= 2,
//!   via the influence-function supermartingale of Wang & Ramdas (2023),
//!   inverted numerically;
//! - distribution-free quantile bounds from empirical quantile functions
//!   (Howard & Ramdas 2022);
//! - sub-Gaussian mean with a fixed weight and missing observations, where
//!   only observed ticks enter the product.
//!
//! All products are accumulated in the log domain; all logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default search bracket for the heavy-tailed numerical inversion.
pub const DEFAULT_THETA_BRACKET: (f64, f64) = (-1e6, 1e6);

/// Relative tolerance for the bisection in [`heavytail_bounds`].
pub const THETA_ROOT_REL_TOL: f64 = 1e-9;

fn check_level(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("level must be in (0, 1), got {alpha}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Bound pairs
// ---------------------------------------------------------------------------

/// One arm's lower/upper confidence-sequence values at a single time.
///
/// `lower` and `upper` are extended reals: an arm with no data yet carries
/// `(-inf, +inf)`. Construction enforces `lower <= upper` and a level in
/// (0, 1); equality of the endpoints can only arise from duplicate
/// observations in the quantile constructor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    #[serde(with = "crate::ext_real")]
    pub lower: f64,
    #[serde(with = "crate::ext_real")]
    pub upper: f64,
    pub level: f64,
}

impl BoundPair {
    pub fn new(lower: f64, upper: f64, level: f64) -> Result<Self> {
        check_level(level)?;
        if lower.is_nan() || upper.is_nan() {
            return Err(invalid("bounds must not be NaN"));
        }
        if lower > upper {
            return Err(invalid(format!(
                "lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            level,
        })
    }

    /// The vacuous pair `(-inf, +inf)` reported before any data arrives.
    pub fn unbounded(level: f64) -> Result<Self> {
        Self::new(f64::NEG_INFINITY, f64::INFINITY, level)
    }

    /// Interval width; `+inf` when either side is unbounded.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Whether `theta` lies in the open interval `(lower, upper)`.
    pub fn covers(&self, theta: f64) -> bool {
        self.lower < theta && theta < self.upper
    }
}

// ---------------------------------------------------------------------------
// Per-arm state
// ---------------------------------------------------------------------------

/// What an [`ArmState`] retains beyond its running sums.
///
/// The sub-Gaussian and missing-data constructors need only sufficient
/// statistics. The quantile constructor needs the sorted sample (O(T) memory,
/// acceptable at desk scale), and the heavy-tailed constructor needs the full
/// weighted history because its supermartingale is not a function of sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Retention {
    SufficientStats,
    SortedValues,
    WeightedHistory,
}

/// Running statistics for one arm.
///
/// Missing ticks leave the state untouched: only observed data enter the
/// sums, and `obs_count` counts observed points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmState {
    pub arm_id: usize,
    obs_count: u64,
    weighted_sum: f64,
    lambda_sum: f64,
    lambda_sq_sum: f64,
    raw_sum: f64,
    retention: Retention,
    sorted_obs: Vec<f64>,
    history: Vec<(f64, f64)>,
}

impl ArmState {
    pub fn new(arm_id: usize, retention: Retention) -> Self {
        Self {
            arm_id,
            obs_count: 0,
            weighted_sum: 0.0,
            lambda_sum: 0.0,
            lambda_sq_sum: 0.0,
            raw_sum: 0.0,
            retention,
            sorted_obs: Vec::new(),
            history: Vec::new(),
        }
    }

    /// Number of observed points `T_i`.
    pub fn obs_count(&self) -> u64 {
        self.obs_count
    }

    /// Weighted running sum of observations, `sum_t lambda_t x_t`.
    pub fn weighted_sum(&self) -> f64 {
        self.weighted_sum
    }

    /// `sum_t lambda_t`.
    pub fn lambda_sum(&self) -> f64 {
        self.lambda_sum
    }

    /// `sum_t lambda_t^2`.
    pub fn lambda_sq_sum(&self) -> f64 {
        self.lambda_sq_sum
    }

    /// Unweighted sum of observed values.
    pub fn raw_sum(&self) -> f64 {
        self.raw_sum
    }

    pub fn retention(&self) -> Retention {
        self.retention
    }

    /// Weighted mean `V = sum lambda x / sum lambda`; NaN before any data.
    pub fn weighted_mean(&self) -> f64 {
        self.weighted_sum / self.lambda_sum
    }

    /// Plain mean of observed values; NaN before any data.
    pub fn raw_mean(&self) -> f64 {
        self.raw_sum / self.obs_count as f64
    }

    /// The sorted sample, nonempty only under [`Retention::SortedValues`].
    pub fn sorted_obs(&self) -> &[f64] {
        &self.sorted_obs
    }

    /// Per-step `(lambda, x)` pairs, kept under [`Retention::WeightedHistory`].
    pub fn weighted_history(&self) -> &[(f64, f64)] {
        &self.history
    }

    pub(crate) fn ingest(&mut self, observation: Option<f64>, lambda: f64) -> Result<()> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(invalid(format!(
                "lambda must be a positive finite real, got {lambda}"
            )));
        }
        let Some(x) = observation else {
            return Ok(()); // missing tick: nothing observed, state unchanged
        };
        if !x.is_finite() {
            return Err(invalid(format!("observation must be finite, got {x}")));
        }
        self.obs_count += 1;
        self.weighted_sum += lambda * x;
        self.lambda_sum += lambda;
        self.lambda_sq_sum += lambda * lambda;
        self.raw_sum += x;
        match self.retention {
            Retention::SufficientStats => {}
            Retention::SortedValues => {
                let pos = self.sorted_obs.partition_point(|&y| y <= x);
                self.sorted_obs.insert(pos, x);
            }
            Retention::WeightedHistory => self.history.push((lambda, x)),
        }
        Ok(())
    }
}

/// Folds one tick into an arm's state.
///
/// A missing observation (`None`) leaves the state unchanged; an observed
/// value updates all running sums with the supplied predictable weight.
pub fn update_arm(mut state: ArmState, observation: Option<f64>, lambda: f64) -> Result<ArmState> {
    state.ingest(observation, lambda)?;
    Ok(state)
}

// ---------------------------------------------------------------------------
// Weight schedules
// ---------------------------------------------------------------------------

/// The default decaying weight rule, `sqrt(8 log(1/alpha) / (t log(t+1)))`
/// clipped to 1.
///
/// It is a deterministic function of the time index, hence predictable, and
/// it decays just fast enough that the interval width vanishes while the
/// variance penalty stays summable (Waudby-Smith & Ramdas 2024).
pub fn default_lambda(t: u64, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    if t == 0 {
        return Err(invalid("time index must be >= 1"));
    }
    let tf = t as f64;
    let raw = (8.0 * (1.0 / alpha).ln() / (tf * (tf + 1.0).ln())).sqrt();
    Ok(raw.min(1.0))
}

/// A predictable weight rule `lambda_t`.
///
/// Both variants depend only on the time index, which makes predictability
/// an interface guarantee rather than a runtime check. Data-dependent rules
/// can be realized by driving [`update_arm`] directly with weights computed
/// from the history strictly before each tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaSchedule {
    /// A fixed weight for every tick.
    Constant(f64),
    /// [`default_lambda`] with the stored target level.
    SqrtLogRate { alpha: f64 },
}

impl LambdaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LambdaSchedule::Constant(l) => {
                if !l.is_finite() || l <= 0.0 {
                    return Err(invalid(format!(
                        "constant lambda must be positive and finite, got {l}"
                    )));
                }
            }
            LambdaSchedule::SqrtLogRate { alpha } => check_level(alpha)?,
        }
        Ok(())
    }

    /// The weight applied at time `t >= 1`.
    pub fn value(&self, t: u64) -> f64 {
        match *self {
            LambdaSchedule::Constant(l) => l,
            LambdaSchedule::SqrtLogRate { alpha } => {
                default_lambda(t, alpha).expect("validated schedule")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Constructor configurations
// ---------------------------------------------------------------------------

/// Sub-Gaussian mean bounds with known variance proxy `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubGaussianConfig {
    pub sigma2: f64,
    pub schedule: LambdaSchedule,
}

impl SubGaussianConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma2.is_finite() || self.sigma2 <= 0.0 {
            return Err(invalid(format!(
                "variance proxy must be positive, got {}",
                self.sigma2
            )));
        }
        self.schedule.validate()
    }
}

/// Heavy-tailed mean bounds under `E|X - theta|^p <= v`, `1 < p <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailConfig {
    pub p: f64,
    pub v: f64,
    pub schedule: LambdaSchedule,
    /// Search bracket for the numerical inversion over theta.
    pub theta_bracket: (f64, f64),
}

impl HeavyTailConfig {
    pub fn new(p: f64, v: f64, schedule: LambdaSchedule) -> Self {
        Self {
            p,
            v,
            schedule,
            theta_bracket: DEFAULT_THETA_BRACKET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p <= 2.0) {
            return Err(invalid(format!(
                "moment order p must lie in (1, 2], got {}",
                self.p
            )));
        }
        if !self.v.is_finite() || self.v <= 0.0 {
            return Err(invalid(format!(
                "moment bound v must be positive, got {}",
                self.v
            )));
        }
        if !self.theta_bracket.0.is_finite()
            || !self.theta_bracket.1.is_finite()
            || self.theta_bracket.0 >= self.theta_bracket.1
        {
            return Err(invalid("theta bracket must be a finite ordered pair"));
        }
        self.schedule.validate()
    }
}

/// Distribution-free bounds for the `q`-th quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileConfig {
    pub q: f64,
}

impl QuantileConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(invalid(format!(
                "target quantile must lie in (0, 1), got {}",
                self.q
            )));
        }
        Ok(())
    }
}

/// Sub-Gaussian mean bounds with a fixed weight and missing observations.
///
/// The weight is fixed across time so that it is measurable before every
/// tick even when the number of observed points is not. A fixed weight means
/// the width does not shrink to zero; that is deliberate for short panels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingDataConfig {
    pub sigma2: f64,
    pub lambda: f64,
}

impl MissingDataConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma2.is_finite() || self.sigma2 <= 0.0 {
            return Err(invalid(format!(
                "variance proxy must be positive, got {}",
                self.sigma2
            )));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(invalid(format!(
                "fixed lambda must be positive, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// The fixed weight minimizing the interval width for an anticipated number
/// of observed points: `sqrt(2 log(1/alpha) / (n sigma2))`.
pub fn optimal_fixed_lambda(alpha: f64, expected_obs: u64, sigma2: f64) -> Result<f64> {
    check_level(alpha)?;
    if expected_obs == 0 || sigma2 <= 0.0 {
        return Err(invalid("expected_obs must be >= 1 and sigma2 > 0"));
    }
    Ok((2.0 * (1.0 / alpha).ln() / (expected_obs as f64 * sigma2)).sqrt())
}

// ---------------------------------------------------------------------------
// Sub-Gaussian bounds and e-process
// ---------------------------------------------------------------------------

/// Sub-Gaussian confidence-sequence pair.
///
/// With `V = sum lambda x / sum lambda` and
/// `W(alpha) = (sigma2 sum lambda^2 / 2 - log alpha) / sum lambda`, the pair
/// is `(V - W, V + W)`; it comes from inverting the exponential
/// supermartingales in theta. No data yields `(-inf, +inf)`.
pub fn subgaussian_bounds(
    state: &ArmState,
    cfg: &SubGaussianConfig,
    alpha: f64,
) -> Result<BoundPair> {
    check_level(alpha)?;
    cfg.validate()?;
    if state.lambda_sum <= 0.0 {
        return BoundPair::unbounded(alpha);
    }
    let center = state.weighted_sum / state.lambda_sum;
    let radius = (cfg.sigma2 * state.lambda_sq_sum / 2.0 - alpha.ln()) / state.lambda_sum;
    BoundPair::new(center - radius, center + radius, alpha)
}

/// Which of the paired supermartingales to evaluate: `Plus` detects
/// `theta >= U` and `Minus` detects `theta <= L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EProcessSide {
    Plus,
    Minus,
}

/// Log of the sub-Gaussian supermartingale at `theta`.
///
/// `log M+/- = sum_t [ -/+ lambda_t (x_t - theta) - sigma2 lambda_t^2 / 2 ]`
/// over the observed history. The empty product gives 0. The crossing
/// identities hold exactly: `theta >= U(alpha)` iff `M+ >= 1/alpha`, and
/// `theta <= L(alpha)` iff `M- >= 1/alpha`.
pub fn subgaussian_log_eprocess(
    history: &[(f64, f64)],
    theta: f64,
    side: EProcessSide,
    cfg: &SubGaussianConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !theta.is_finite() {
        return Err(invalid("theta must be finite"));
    }
    let sign = match side {
        EProcessSide::Plus => -1.0,
        EProcessSide::Minus => 1.0,
    };
    let mut log_m = 0.0;
    for &(lambda, x) in history {
        if !lambda.is_finite() || lambda <= 0.0 || !x.is_finite() {
            return Err(invalid("history entries must be finite with lambda > 0"));
        }
        log_m += sign * lambda * (x - theta) - cfg.sigma2 * lambda * lambda / 2.0;
    }
    Ok(log_m)
}

/// The supermartingale value `M+/-(theta)` itself; may overflow to `+inf`
/// for extreme theta, which is safe for threshold comparisons.
pub fn evaluate_eprocess(
    history: &[(f64, f64)],
    theta: f64,
    side: EProcessSide,
    cfg: &SubGaussianConfig,
) -> Result<f64> {
    Ok(subgaussian_log_eprocess(history, theta, side, cfg)?.exp())
}

// ---------------------------------------------------------------------------
// Heavy-tailed bounds
// ---------------------------------------------------------------------------

/// The influence function `phi_p(x) = sgn(x) log(1 + |x| + |x|^p / p)`.
///
/// Odd and increasing; it caps the contribution of any single observation,
/// which is what tolerates infinite higher moments.
pub fn phi_p(x: f64, p: f64) -> f64 {
    let a = x.abs();
    x.signum() * (1.0 + a + a.powf(p) / p).ln()
}

/// Whether a numerically inverted heavy-tailed bound was resolved inside the
/// configured bracket or conservatively replaced by an infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BracketStatus {
    pub lower_bracketed: bool,
    pub upper_bracketed: bool,
}

/// log M-(theta): decreasing in theta.
fn heavytail_log_minus(history: &[(f64, f64)], theta: f64, p: f64, v: f64) -> f64 {
    let mut log_m = 0.0;
    for &(lambda, x) in history {
        log_m += phi_p(lambda * (x - theta), p) - lambda.powf(p) * v / p;
    }
    log_m
}

/// log M+(theta): increasing in theta.
fn heavytail_log_plus(history: &[(f64, f64)], theta: f64, p: f64, v: f64) -> f64 {
    let mut log_m = 0.0;
    for &(lambda, x) in history {
        log_m += -phi_p(lambda * (x - theta), p) - lambda.powf(p) * v / p;
    }
    log_m
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut inside: f64, mut outside: f64, target: f64) -> f64 {
    // Invariant: f(inside) >= target > f(outside). Returns the certified
    // inside endpoint, which errs on the conservative side for both tails.
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        let span = (inside - outside).abs();
        if span <= THETA_ROOT_REL_TOL * inside.abs().max(outside.abs()).max(1.0) {
            break;
        }
        if f(mid) >= target {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Heavy-tailed confidence-sequence pair with bracket diagnostics.
///
/// `lower = sup{theta : M-(theta) >= 1/alpha}` and
/// `upper = inf{theta : M+(theta) >= 1/alpha}`, found by bisection on the
/// monotone log supermartingales. A side whose crossing cannot be bracketed
/// inside `cfg.theta_bracket` is reported as the corresponding infinity and
/// flagged in the returned status.
pub fn heavytail_bounds_with_status(
    state: &ArmState,
    cfg: &HeavyTailConfig,
    alpha: f64,
    history: &[(f64, f64)],
) -> Result<(BoundPair, BracketStatus)> {
    check_level(alpha)?;
    cfg.validate()?;
    if history.is_empty() {
        return Err(invalid("heavy-tailed bounds need a nonempty history"));
    }
    if state.obs_count != history.len() as u64 {
        return Err(invalid(format!(
            "history length {} does not match the arm's {} observations",
            history.len(),
            state.obs_count
        )));
    }
    let target = (1.0 / alpha).ln();
    let (lo, hi) = cfg.theta_bracket;
    let (p, v) = (cfg.p, cfg.v);

    let f_minus = |theta: f64| heavytail_log_minus(history, theta, p, v);
    let f_plus = |theta: f64| heavytail_log_plus(history, theta, p, v);

    // Both crossings exist at some finite theta (each log supermartingale
    // grows without bound in its tail), so a threshold not straddled by the
    // bracket means the crossing escaped the search range: that side becomes
    // the conservative infinity and is flagged.
    let mut status = BracketStatus {
        lower_bracketed: true,
        upper_bracketed: true,
    };

    // M- decreases in theta: its superlevel set is (-inf, theta*].
    let lower = if f_minus(lo) >= target && f_minus(hi) < target {
        bisect(&f_minus, lo, hi, target)
    } else {
        status.lower_bracketed = false;
        f64::NEG_INFINITY
    };

    // M+ increases in theta: its superlevel set is [theta*, +inf).
    let upper = if f_plus(hi) >= target && f_plus(lo) < target {
        bisect(&f_plus, hi, lo, target)
    } else {
        status.upper_bracketed = false;
        f64::INFINITY
    };

    Ok((BoundPair::new(lower, upper, alpha)?, status))
}

/// Heavy-tailed confidence-sequence pair; see [`heavytail_bounds_with_status`].
pub fn heavytail_bounds(
    state: &ArmState,
    cfg: &HeavyTailConfig,
    alpha: f64,
    history: &[(f64, f64)],
) -> Result<BoundPair> {
    Ok(heavytail_bounds_with_status(state, cfg, alpha, history)?.0)
}

// ---------------------------------------------------------------------------
// Quantile bounds
// ---------------------------------------------------------------------------

/// Upper empirical quantile function `sup{x : F_hat(x) <= q}` on a sorted
/// sample; `-inf` for `q < 0` and `+inf` for `q >= 1`.
pub fn empirical_quantile_upper(sorted: &[f64], q: f64) -> f64 {
    if q < 0.0 {
        return f64::NEG_INFINITY;
    }
    let t = sorted.len();
    if t == 0 || q >= 1.0 {
        return f64::INFINITY;
    }
    let j = (q * t as f64).floor() as usize;
    if j >= t {
        return f64::INFINITY;
    }
    sorted[j]
}

/// Lower empirical quantile function `sup{x : F_hat(x) < q}` on a sorted
/// sample; `-inf` for `q <= 0` and `+inf` for `q > 1`.
pub fn empirical_quantile_lower(sorted: &[f64], q: f64) -> f64 {
    if q <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let t = sorted.len();
    if t == 0 || q > 1.0 {
        return f64::INFINITY;
    }
    let j = ((q * t as f64).ceil() as usize).clamp(1, t);
    sorted[j - 1]
}

fn quantile_rate(t: u64, alpha: f64) -> f64 {
    let tf = t as f64;
    (1.4 * (2.1 * tf).ln().ln() + (5.0 / alpha).ln()) / tf
}

fn quantile_margin(q: f64, t: u64, alpha: f64) -> f64 {
    let l = quantile_rate(t, alpha);
    1.5 * (q * (1.0 - q) * l).sqrt() + 0.8 * l
}

/// Distribution-free quantile confidence-sequence pair (Howard & Ramdas
/// 2022): `U = qhat_lower(q + f_T(q))` and `L = qhat_upper(q - f_T(1-q))`,
/// with `f_t(q) = 1.5 sqrt(q(1-q) l(t)) + 0.8 l(t)` and
/// `l(t) = (1.4 log log(2.1 t) + log(5/alpha)) / t`. Margins reaching past
/// the unit interval give one-sided infinities; no data gives the vacuous
/// pair.
pub fn quantile_bounds(state: &ArmState, cfg: &QuantileConfig, alpha: f64) -> Result<BoundPair> {
    check_level(alpha)?;
    cfg.validate()?;
    if state.retention != Retention::SortedValues {
        return Err(invalid(
            "quantile bounds need an arm retaining sorted observations",
        ));
    }
    let t = state.obs_count;
    if t == 0 {
        return BoundPair::unbounded(alpha);
    }
    let q = cfg.q;
    let q_upper = q + quantile_margin(q, t, alpha);
    let q_lower = q - quantile_margin(1.0 - q, t, alpha);
    let upper = if q_upper >= 1.0 {
        f64::INFINITY
    } else {
        empirical_quantile_lower(&state.sorted_obs, q_upper)
    };
    let lower = if q_lower <= 0.0 {
        f64::NEG_INFINITY
    } else {
        empirical_quantile_upper(&state.sorted_obs, q_lower)
    };
    BoundPair::new(lower, upper, alpha)
}

// ---------------------------------------------------------------------------
// Missing-data bounds
// ---------------------------------------------------------------------------

/// Fixed-weight sub-Gaussian pair over observed points only:
/// `Xbar +/- (log(1/alpha) / (lambda T_i) + sigma2 lambda / 2)`, and the
/// vacuous pair while `T_i = 0`.
pub fn missing_data_bounds(
    state: &ArmState,
    cfg: &MissingDataConfig,
    alpha: f64,
) -> Result<BoundPair> {
    check_level(alpha)?;
    cfg.validate()?;
    if state.obs_count == 0 {
        return BoundPair::unbounded(alpha);
    }
    let t_i = state.obs_count as f64;
    let mean = state.raw_sum / t_i;
    let radius = (1.0 / alpha).ln() / (cfg.lambda * t_i) + cfg.sigma2 * cfg.lambda / 2.0;
    BoundPair::new(mean - radius, mean + radius, alpha)
}
