//! Monte Carlo simulator for the classical "cylinder" model of lossy
//! detection.
//!
//! Pairs of pieces share a conserved length and correlated orientations; each
//! detector decides `+1`, `-1` or no detection from its own piece alone.
//! Conditioning on joint detection reproduces the quantum two-particle
//! coincidence correlation, four-piece entanglement-swapping fringes and the
//! GHZ selection rules.
//!
//! * [`cylinder`]: the detection response and its closed forms.
//! * [`source`]: correlated pair/quad emission on keyed random streams.
//! * [`stats`]: tallies, estimators and sinusoid fitting.
//! * [`experiments`]: bipartite scan, CHSH, swapping and GHZ protocols.

pub mod cylinder;
pub mod error;
pub mod experiments;
pub mod source;
pub mod stats;

pub use cylinder::{
    check_constraints, predicted_efficiencies, predicted_prob_matrix, predicted_q,
    predicted_q_from_scallop, respond, scallop_area, scallop_f, wrap_angle, DetectorConfig,
    EfficiencyTriple, HiddenState, MomentMatrix, Outcome, ParticleKind, ProbMatrix,
};
pub use error::{Error, Result};
pub use experiments::ExperimentReport;
pub use source::{emit_pair, emit_quad, source_correlation, RngStream, SourceKind, StreamKey};
pub use stats::{CoincidenceTally, Estimate, SineFit, VisibilityResult};
