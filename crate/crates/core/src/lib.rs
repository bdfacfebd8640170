//! Closed-form relative pose estimation from 3D point correspondences
//! using Classical Rodrigues Parameters, with a Q15.16 fixed-point
//! datapath and a transaction-level model of the attitude core.
//!
//! `b = R(q)·a + t`, where `R(q) = (I + Q)⁻¹(I − Q)` and `Q = [q×]`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod estimator;
pub mod fixedpoint;
pub mod hwsim;
pub mod math;
pub mod scenario;

pub use error::{Error, Result};
pub use estimator::{estimate_pose, Correspondence, EstimateResult, Method, MethodTag, Pose};
pub use fixedpoint::{Fixed32, ScaleConfig, ScaleKind, ScaleMode};
pub use math::{cayley, inverse_cayley, Crp, Mat3, Vec3};
