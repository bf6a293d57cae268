//! Post-selected von Neumann measurement of which-path and right-arm
//! polarization for a photon in a two-arm interferometer, with Gaussian
//! pointers of arbitrary strength and coherence.
//!
//! State space is `C^2 (path) ⊗ C^2 (polarization)`, stored in the lab
//! basis `(L,H), (L,V), (R,H), (R,V)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheshire;
pub mod error;
pub mod hilbert;
pub mod meters;
pub mod oracle;
pub mod sampler;
pub mod statistics;
pub mod weakvalues;

pub use cheshire::{cheshire_parameter, max_family, noise_check, CheshireReport, NoiseDiagnostics};
pub use error::{Error, Result};
pub use hilbert::{BlochAxis, PureState, SystemOperator};
pub use meters::{classify_regime, GaussianMeter, Regime, RegimeLabel};
pub use oracle::{brute_force_joint, oracle_check, GriddedJoint, GriddedMeter, OracleCheck};
pub use sampler::{estimate_cheshire, sample_trials, CheshireEstimate, SampleRun, SamplerConfig, TrialRecord};
pub use statistics::{joint_density, moments, Experiment, LimitRegime, MomentReport};
pub use weakvalues::{matrix_elements, weak_values_general, weak_values_pure, MatrixElements, WeakValueSet};
