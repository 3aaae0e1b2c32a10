//! Design and analysis of optical cavities for superconducting strip
//! single-photon detectors.
//!
//! The numeric modules ([`materials`], [`stack`], [`tmm`], [`analytic`],
//! [`search`]) are generic over the scalar type through [`Real`]; the
//! aliases below fix it to `f64` or `f32`. [`design`] and [`config`] work in
//! `f64`.

// `!(x > 0)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod design;
pub mod error;
pub mod materials;
pub mod scalar;
pub mod search;
pub mod stack;
pub mod tmm;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};
pub use stack::CavityKind;

pub type OpticalConstantF64 = materials::OpticalConstant<f64>;
pub type MaterialF64 = materials::Material<f64>;
pub type MaterialRegistryF64 = materials::MaterialRegistry<f64>;
pub type LayerF64 = stack::Layer<f64>;
pub type StackF64 = stack::Stack<f64>;
pub type WireGeometryF64 = stack::WireGeometry<f64>;
pub type FMatrixF64 = tmm::FMatrix<f64>;
pub type ScatterResultF64 = tmm::ScatterResult<f64>;
pub type CavityContextF64 = analytic::CavityContext<f64>;
pub type OptimumPointF64 = analytic::OptimumPoint<f64>;

pub type OpticalConstantF32 = materials::OpticalConstant<f32>;
pub type MaterialF32 = materials::Material<f32>;
pub type StackF32 = stack::Stack<f32>;
pub type FMatrixF32 = tmm::FMatrix<f32>;
pub type ScatterResultF32 = tmm::ScatterResult<f32>;
pub type CavityContextF32 = analytic::CavityContext<f32>;
