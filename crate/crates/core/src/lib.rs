//! Volumes of purification fibers over mixed states and the entropy
//! statistics built on them.

pub mod coarse;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod metric;
pub mod montecarlo;
pub mod purification;
pub mod quadrature;
pub mod report;
pub mod scaling;
pub mod unitary;
pub mod validate;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityOperator, StateVector, C64};
pub use metric::{GramMetric, VolumeMethod, VolumeResult};
pub use purification::Fiber;
pub use unitary::{
    DerivativeMode, Group, PlaneRotationFactory, UnitaryFactory, UnitaryParameterization,
};
