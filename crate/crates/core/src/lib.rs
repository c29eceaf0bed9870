//! Light propagation in an ideal two-mirror planar multi-mode waveguide:
//! intensity carpets, quantum and pseudo-thermal photon correlations of
//! order 2 and 3, and the effective beam-splitter picture at self-imaging
//! planes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlations;
pub mod error;
pub mod geometry;
pub mod permanent;
pub mod propagation;
pub mod recurrence;
pub mod splitter;
pub mod states;

pub use error::{Error, Result};
pub use geometry::{imaging_width, PhaseModel, RevivalDistances, TransverseGrid, WaveguideGeometry};
pub use propagation::{decompose, green_kernel, mode_profile, propagate, propagation_phase, ModeBasis, SampledField};
pub use states::{BeamSpec, InputConfig, StateKind};
