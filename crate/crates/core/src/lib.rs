//! Cooperative 3D beamforming from two antenna arrays.
//!
//! Both arrays transmit the same position-based precoding vector, so a user
//! sees the combined channel `h_L + h_R`. The crate builds the precoders
//! (zero forcing, zero forcing with derivative nulls, MPDR), draws Rician
//! channels over small-cell and cell-free layouts, and compares Monte Carlo
//! spectral efficiency with closed-form capacity.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod modulation;
pub mod num;
pub mod precoder;
pub mod scenario;
pub mod simulator;
pub mod theory;

pub use channel::{
    combined_channel, path_loss_db, rician_sample, ChannelRealization, LinkBudget, ReceivedPower, RicianFactor,
};
pub use error::{Error, Result};
pub use geometry::{
    angles_between, planar_array, steering_derivative, steering_vector, AngleAxis, AnglePair, ArrayGeometry, Position,
    SteeringVector,
};
pub use modulation::SquareQam;
pub use num::{CMatrix, CVector, CompensatedSum, Real};
pub use precoder::{
    conventional_zf, mpdr, regularized_inverse, zfp, zfp_d, zfp_general, ConstraintSet, InverseReport, Precoder,
    PrecoderMethod,
};
pub use theory::{
    capacity_quadrature, capacity_theorem1, capacity_theorem2, sinr_density, sinr_moments, vse, Constellation,
    InterferenceNorm, SinrMoments, Theorem1Variant, VolumeSpec,
};

pub type Position64 = Position<f64>;
pub type Position32 = Position<f32>;
pub type AnglePair64 = AnglePair<f64>;
pub type AnglePair32 = AnglePair<f32>;
pub type ArrayGeometry64 = ArrayGeometry<f64>;
pub type ArrayGeometry32 = ArrayGeometry<f32>;
pub type ConstraintSet64 = ConstraintSet<f64>;
pub type ConstraintSet32 = ConstraintSet<f32>;
pub type Precoder64 = Precoder<f64>;
pub type Precoder32 = Precoder<f32>;
pub type SinrMoments64 = SinrMoments<f64>;
pub type SinrMoments32 = SinrMoments<f32>;
pub type RicianFactor64 = RicianFactor<f64>;
pub type RicianFactor32 = RicianFactor<f32>;
