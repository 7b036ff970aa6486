//! Assist-as-needed control with phase-locked impedance landscapes.
//!
//! The assistive torque of an ankle orthosis follows a saturating law whose
//! stiffness `g(φ)` varies over the gait cycle. `g` is a normalized mix of
//! Gaussian kernels; the kernel weights are tuned stride by stride with
//! path-integral policy improvement, and a two-level supervisor swaps the cost
//! between "track the target" and "back off" depending on recent performance.
//!
//! [`subject`] provides a simulated walker to close the loop, and [`harness`]
//! runs full training protocols, logs them and computes summary metrics.

pub mod error;
pub mod force_field;
pub mod harness;
pub mod parallel;
pub mod phase;
pub mod pi2;
pub mod subject;
pub mod supervisor;

pub use error::{AanError, Result};
pub use force_field::{assist_torque, deadband_error, ForceFieldConfig, TrackingError};
pub use phase::{kernel_centers, segment_of, BasisSet, ImpedancePolicy, LandscapeValue, PhaseGrid};
pub use pi2::{CostWeights, ExplorationBatch, NoiseMode, Pi2Config};
pub use subject::{BaselineGait, StrideOutcome, SubjectParams, SubjectPlant, SubjectState, TargetTask};
pub use supervisor::{LearningMode, Plant, SessionState, StrideKind, Supervisor, SupervisorConfig};
