//! Diamond graphs `G_k`, their `l_p` distortion certificate
//! `sqrt(1 + (p-1)k)`, a gradient search for embeddings that approach it, and
//! exact minimum-distortion `l_1` embeddings through the cut cone.

pub mod certificate;
pub mod cut;
pub mod embedding;
pub mod error;
pub mod experiments;
pub mod format;
pub mod graph;
pub mod lp;
pub mod metric;
pub mod optimizer;
pub mod simplex;

pub use certificate::{certified_lower_bound, corollary_dimension_bound, poincare_sides, Certificate};
pub use cut::{cuts_to_embedding, enumerate_cuts, l1_lp_isomorphism_constant, min_distortion_l1, Cut, CutSolution};
pub use embedding::Embedding;
pub use error::{Error, Result};
pub use graph::{build_diamond, edge_length, level_for_points, DiamondGraph};
pub use lp::{diamond_gap, lp_norm, smoothness_gap, PExponent};
pub use metric::{shortest_path_metric, verify_metric, MetricMatrix};
pub use optimizer::{evaluate_distortion, optimize_embedding, DistortionReport, OptimizerConfig};
