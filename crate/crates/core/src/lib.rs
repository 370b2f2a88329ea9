//! Surrogate safety metrics for paired vehicle / e-scooter GPS trajectories.
//!
//! The crate turns two raw GPS tracks into a synchronized planar encounter,
//! estimates per-frame kinematics, derives conflict indicators (gap time,
//! time-to-collision, separation distance), classifies the encounter
//! geometry, and aggregates per-case metrics into corpus-level reports.
//! Everything here is `no_std + alloc`; IO and file formats live in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod conflict;
pub mod geodesy;
pub mod geometry;
pub mod kinematics;
pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod trajectory;

pub use conflict::{
    CoastRay, ConflictConfig, ConflictError, ConflictProfile, Crossing, FrameConflict, RiskLevel,
};
pub use geodesy::{GeoPoint, GeodesyError, PlanePoint, ProjectionContext};
pub use geometry::{GeometryClass, GeometryError, InteractionPhase};
pub use kinematics::{KinematicState, KinematicsError, MPS_TO_MPH, STATIONARY_EPS_MPS};
pub use pipeline::{AnalysisParams, CaseAnalysis, ConditioningParams};
pub use report::{
    AggregateReport, CaseMetrics, ComparisonTable, CorpusSummary, GeometryShares, ReportError,
    VarStats, VarSummary,
};
pub use trajectory::{
    AgentKind, CleanTrajectory, Dataset, EncounterCase, GpsFix, RawTrajectory, TrajectoryError,
};
