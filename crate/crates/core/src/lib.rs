//! Downlink SINR coverage maps for a micro cell under a macro cell, with a
//! direct-path model and an IRS-assisted cascade model, and an exhaustive
//! search for the IRS position that maximizes cell-edge SINR.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coverage;
pub mod error;
pub mod linkbudget;
pub mod placement;
pub mod scenario;
pub mod sinr;

pub use coverage::{
    build_grid, cell_edge_points, edge_stats, sinr_map_conventional, sinr_map_irs, CellExtent,
    EdgeStats, SinrMap,
};
pub use error::{Error, Result};
pub use linkbudget::{AngleMode, IrsPanel, Position3D, RadioEnvironment};
pub use placement::{
    compare_models, evaluate_placement, optimize_placement, CandidateSpec, ComparisonReport,
    Objective, PlacementResult,
};
pub use scenario::{load_scenario, parse_scenario, Scenario};
pub use sinr::{InterferenceSource, SinrSample};
