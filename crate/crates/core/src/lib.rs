//! FMCW radar vital-sign monitoring: scene simulation, the floating-point
//! localization and estimation chain, regression, and a bit-accurate model
//! of the fixed-point hardware pipeline.
//!
//! Signal-processing code is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the common choices.

pub mod dsp;
pub mod error;
pub mod features;
pub mod fpga;
pub mod io;
pub mod kv;
pub mod pipeline;
pub mod radar;
pub mod real;
pub mod regression;
pub mod scene;
pub mod vmd;

pub use error::{Error, Result};
pub use radar::{derive_params, min_elevation, DerivedParams, ElevationPlan, GeometryScene, RadarConfig};
pub use real::Real;
pub use scene::{DataCube, SimScene, SubjectSpec};

pub type DataCube64 = scene::DataCube<f64>;
pub type DataCube32 = scene::DataCube<f32>;
pub type AzimuthGrid64 = dsp::AzimuthGrid<f64>;
pub type RangeAzimuthSeries64 = dsp::RangeAzimuthSeries<f64>;
pub type RangeAzimuthMap64 = dsp::RangeAzimuthMap<f64>;
pub type PhaseSignal64 = dsp::PhaseSignal<f64>;
