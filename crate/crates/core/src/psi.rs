//! Post-screening intervals with false-coverage-rate control.
//!
//! Intervals reported for a *data-chosen* subset of arms at a *data-chosen*
//! stopping time suffer selection bias: per-arm coverage does not imply that
//! the expected fraction of misses among the reported intervals (the false
//! coverage rate of Benjamini & Yekutieli 2005) stays below the target.
//!
//! Two adjusted levels fix this for the screening output:
//! - the selection-proportional level `alpha |S| / (2k)`, an instance of the
//!   e-BY selective-inference rule of Xu & Ramdas (2024) applied to the
//!   supermartingale-backed bounds (it needs the bounds to invert e-processes);
//! - the fixed level `m alpha / (2k)`, a Bonferroni-style fallback that
//!   needs nothing beyond uniform coverage of each bound pair.
//!
//! Since at least m arms always survive screening, the Bonferroni level is
//! never larger than the selection-proportional one, so its intervals are
//! never narrower. [`compare_levels`] classifies how the two adjusted levels
//! sit relative to the screening level for any `(k, m, |S|)`.

use serde::{Deserialize, Serialize};

use crate::confseq::BoundPair;
use crate::error::{invalid, Result};
use crate::screening::{ScreeningConfig, ScreeningState, ScreeningTrace};

fn check_level(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("level must be in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// The selection-proportional adjusted level `alpha |S| / (2k)`.
pub fn psi_level(selected_size: usize, k: usize, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    if selected_size < 1 || selected_size > k {
        return Err(invalid(format!(
            "selected size must satisfy 1 <= |S| <= k, got |S|={selected_size}, k={k}"
        )));
    }
    Ok(alpha * selected_size as f64 / (2.0 * k as f64))
}

/// The fixed adjusted level `m alpha / (2k)`.
pub fn bonferroni_level(m: usize, k: usize, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    if m < 1 || m >= k {
        return Err(invalid(format!("need 1 <= m < k, got m={m}, k={k}")));
    }
    Ok(m as f64 * alpha / (2.0 * k as f64))
}

/// Which adjustment produced a report's intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiMethod {
    /// Selection-proportional level `alpha |S| / (2k)`.
    Psi,
    /// Fixed level `m alpha / (2k)`.
    Bonferroni,
}

/// One selected arm's intervals: the adjusted pair next to the raw screening
/// pair, so the level ordering is visible in the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiEntry {
    pub arm: usize,
    pub adjusted: BoundPair,
    pub screening: BoundPair,
}

/// Adjusted intervals for every arm surviving at the stopping time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    pub tau: u64,
    pub method: PsiMethod,
    /// The adjusted level the intervals were computed at.
    pub level: f64,
    /// The screening level the raw intervals were computed at.
    pub screening_level: f64,
    pub entries: Vec<PsiEntry>,
}

impl PsiReport {
    pub fn selected(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.arm).collect()
    }
}

/// Builds a report from a live screening state (any stopping time the caller
/// is holding). The adjusted intervals reuse each arm's accumulated
/// statistics; only the level changes, so nesting across levels carries over.
///
/// `fcr_alpha` is the FCR target; pass the screening alpha to share one
/// budget.
pub fn psi_report_from_state(
    state: &ScreeningState,
    method: PsiMethod,
    cfg: &ScreeningConfig,
    fcr_alpha: f64,
) -> Result<PsiReport> {
    cfg.validate()?;
    check_level(fcr_alpha)?;
    let selected = state.survivors();
    if selected.is_empty() {
        return Err(invalid("cannot build a report for an empty selection"));
    }
    let level = match method {
        PsiMethod::Psi => psi_level(selected.len(), cfg.k, fcr_alpha)?,
        PsiMethod::Bonferroni => bonferroni_level(cfg.m, cfg.k, fcr_alpha)?,
    };
    let screening_level = cfg.effective_level();
    let entries = selected
        .iter()
        .map(|&arm| {
            let st = &state.arms()[arm];
            Ok(PsiEntry {
                arm,
                adjusted: cfg.constructor.bounds(st, level, cfg.k, state.time())?,
                screening: state.bounds()[arm],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PsiReport {
        tau: state.time(),
        method,
        level,
        screening_level,
        entries,
    })
}

/// Builds a report at stopping time `tau` from a finished trace.
///
/// The trace retains per-arm statistics only at its final time, so `tau`
/// must equal it; stop the run where inference is wanted, or use
/// [`psi_report_from_state`] mid-run.
pub fn build_psi_report(
    trace: &ScreeningTrace,
    tau: u64,
    method: PsiMethod,
    cfg: &ScreeningConfig,
    fcr_alpha: f64,
) -> Result<PsiReport> {
    if tau != trace.final_time() {
        return Err(invalid(format!(
            "trace retains arm statistics at its final time {} only, got tau={tau}",
            trace.final_time()
        )));
    }
    psi_report_from_state(&trace.final_state, method, cfg, fcr_alpha)
}

// ---------------------------------------------------------------------------
// Level comparison
// ---------------------------------------------------------------------------

/// Structural regime of a `(k, m, |S|)` triple, determining how the three
/// levels order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelRegime {
    /// m = 1 and a single survivor: both adjusted levels coincide and sit
    /// strictly below the screening level.
    TopOneSelectedOne,
    /// m = 1 with two or more survivors: bonferroni < screening <= psi.
    TopOneSelectedMore,
    /// 2 <= m <= k-2 (so k >= 4): screening <= bonferroni <= psi.
    Interior,
    /// m = k-1 (k >= 3): screening < bonferroni <= psi.
    AllButOne,
}

/// The three levels for one `(k, m, |S|)` triple and their regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelComparison {
    pub screening: f64,
    pub psi: f64,
    pub bonferroni: f64,
    pub regime: LevelRegime,
}

impl LevelComparison {
    /// The total order among the three levels with equalities, smallest
    /// first, e.g. `"screening < bonferroni = psi"`.
    pub fn ordering(&self) -> String {
        let mut named = [
            (self.screening, "screening"),
            (self.psi, "psi"),
            (self.bonferroni, "bonferroni"),
        ];
        named.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("levels are finite")
                .then(a.1.cmp(b.1))
        });
        let mut out = String::from(named[0].1);
        for w in named.windows(2) {
            out.push_str(if w[0].0 == w[1].0 { " = " } else { " < " });
            out.push_str(w[1].1);
        }
        out
    }
}

/// Computes the screening, selection-proportional, and fixed adjusted levels
/// for a `(k, m, |S|)` triple and classifies their ordering regime.
pub fn compare_levels(
    k: usize,
    m: usize,
    selected_size: usize,
    alpha: f64,
) -> Result<LevelComparison> {
    check_level(alpha)?;
    if k < 2 || m < 1 || m >= k {
        return Err(invalid(format!(
            "need k >= 2 and 1 <= m < k, got k={k}, m={m}"
        )));
    }
    if selected_size < m || selected_size > k {
        return Err(invalid(format!(
            "selected size must satisfy m <= |S| <= k, got |S|={selected_size}"
        )));
    }
    let screening = alpha / (2.0 * m as f64 * (k - m) as f64);
    let psi = psi_level(selected_size, k, alpha)?;
    let bonferroni = bonferroni_level(m, k, alpha)?;
    let regime = if m == 1 {
        if selected_size == 1 {
            LevelRegime::TopOneSelectedOne
        } else {
            LevelRegime::TopOneSelectedMore
        }
    } else if m == k - 1 {
        LevelRegime::AllButOne
    } else {
        LevelRegime::Interior
    };
    Ok(LevelComparison {
        screening,
        psi,
        bonferroni,
        regime,
    })
}
