//! Smooth geodesic embedding: nonlinear dimensionality reduction that
//! replaces Isomap's piecewise-linear geodesics with smoothing splines whose
//! lengths serve as manifold distances. Ships MDS and Isomap baselines,
//! distance-based error metrics, synthetic and image dataset handling, and a
//! seeded experiment harness.

pub mod data;
pub mod embed;
pub mod error;
pub mod geodesic;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod spline;

pub use data::{
    add_gaussian_pixel_noise, gen_semisphere, load_csv, load_idx, save_csv, NoiseSpec, PointCloud,
    RadialNoise, SphereMode, SphereSpec,
};
pub use embed::{
    double_center, isomap, mds, pairwise_sq_euclidean, sge, sge_detailed, svd_embed,
    DistanceMatrix, Embedding, GramMatrix, SgeParams, SgeRun,
};
pub use error::{Result, SgeError};
pub use geodesic::{extract_path, floyd_apsp, GeodesicPath, GeodesicTable};
pub use graph::{build_graph, connected_components, knn, NeighborGraph, NeighborLists};
pub use harness::{run_study, StudyKind, StudyReport, SweepConfig};
pub use metrics::{adjacency_error, great_circle_dists, mad, pairwise_euclidean, ErrorReport};
pub use spline::{
    fit_1d, fit_dd, geodesic_length, smooth_geodesic_length, spline_length, CascadeResult,
    DesignCache, Spline1D, SplineD,
};
