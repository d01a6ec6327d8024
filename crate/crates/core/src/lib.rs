//! Anytime-valid screening of the top-m arms over confidence sequences,
//! post-screening intervals with false-coverage-rate control, and a seeded
//! Monte Carlo harness for both.
//!
//! - [`confseq`]: time-uniform lower/upper bound sequences (sub-Gaussian,
//!   heavy-tailed, quantile, missing-data) and their supermartingales.
//! - [`screening`]: the monotone survivor-set recursion, a widened-LUCB
//!   baseline, and the LUCB stopping rule.
//! - [`psi`]: adjusted intervals for the surviving arms at any stopping
//!   time, with FCR control, plus the level-ordering comparison.
//! - [`simharness`]: reproducible replicated experiments with coverage,
//!   FCR, set-size, and Jaccard metrics.
//!
//! ```
//! use scs_core::confseq::{LambdaSchedule, SubGaussianConfig};
//! use scs_core::psi::{build_psi_report, PsiMethod};
//! use scs_core::screening::{
//!     run_scs, BoundConstructor, ObservationStream, ScreeningConfig, StopRule,
//! };
//!
//! let cfg = ScreeningConfig {
//!     k: 3,
//!     m: 1,
//!     alpha: 0.1,
//!     constructor: BoundConstructor::SubGaussian(SubGaussianConfig {
//!         sigma2: 0.25,
//!         schedule: LambdaSchedule::SqrtLogRate { alpha: 0.1 },
//!     }),
//! };
//! let stream = ObservationStream {
//!     k: 3,
//!     steps: vec![
//!         vec![Some(1.0), Some(0.0), Some(1.0)],
//!         vec![Some(1.0), Some(0.0), None], // missing tick for arm 2
//!     ],
//! };
//! let trace = run_scs(&stream, &cfg, StopRule::StreamEnd)?;
//! let report = build_psi_report(&trace, trace.final_time(), PsiMethod::Psi, &cfg, 0.1)?;
//! assert_eq!(report.tau, 2);
//! assert_eq!(report.selected(), vec![0, 1, 2]); // two steps separate nothing
//! # Ok::<(), scs_core::Error>(())
//! ```

pub mod confseq;
pub mod error;
pub mod ext_real;
pub mod psi;
pub mod screening;
pub mod simharness;

pub use error::{Error, Result};
