//! Deterministic simulator for one-dimensional herds of penguin groups that
//! walk home under a discontinuous velocity law and fuse on contact.
//!
//! The crate is organized bottom-up:
//!
//! - [`functions`] and [`model`]: the pointwise velocity field,
//! - [`engine`]: stop-and-go integration with merge and arrival resets,
//! - [`scenario`]: configuration documents and builtin herds,
//! - [`verify`] and [`oracle`]: homecoming bookkeeping, theorem checkers and
//!   an independent Euler integrator for cross-validation,
//! - [`export`] and [`svg`]: CSV, TOML and plot output.

pub mod engine;
pub mod export;
pub mod functions;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod state;
pub mod svg;
pub mod verify;

pub use engine::{
    simulate, EngineError, Event, EventKind, Segment, Snapshot, SolverSettings, Trajectory,
};
pub use functions::{Environment, PanicProfile, SightKernel};
pub use model::{ModelError, ModelParams};
pub use scenario::{builtin, builtin_scenarios, parse_scenario, ScenarioConfig, ScenarioError};
pub use state::{Arrival, GroupId, HerdState};
pub use svg::PlotStyle;
pub use verify::{HomecomingReport, TheoremCertificate};
