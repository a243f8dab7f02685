//! Discrete-time simulator of a two-layer remote IoT network: a fleet of
//! mobile access points (MAPs) flocks over clustered, wandering ground
//! devices (MSDs), covering them while keeping its own overlay connected.
//!
//! Each step clusters the devices, matches them to access points, computes
//! a distributed control input per access point (separation and load
//! sharing, velocity consensus, pull toward the nearest cluster center),
//! integrates the double-integrator dynamics, injects scheduled failures,
//! moves the devices and records coverage, information penetration and
//! algebraic connectivity.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod association;
pub mod baselines;
pub mod clustering;
pub mod controller;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod events;
pub mod graph;
pub mod kernels;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod render;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use vector::Vec2;

pub type Point = vector::Vec2<f64>;
pub type Config = model::ScenarioConfig<f64>;
pub type State = model::SimulationState<f64>;
pub type MapAgent = model::MapState<f64>;
pub type Device = model::MsdState<f64>;
pub type Record = metrics::MetricsRecord<f64>;
pub type Graph = graph::ProximityGraph<f64>;
pub type SymMatrix = matrix::Matrix<f64>;
pub type Output = runner::RunOutput<f64>;

/// Single-precision counterparts.
pub type Point32 = vector::Vec2<f32>;
pub type Config32 = model::ScenarioConfig<f32>;
