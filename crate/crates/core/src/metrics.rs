//! Ground-truth manifold distances and the two embedding-error measures.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::PointCloud;
use crate::error::{Result, SgeError};
use crate::graph::{build_graph, knn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Mad,
    Adjacency,
}

/// A single embedding-error measurement with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub value: f64,
    pub kind: ErrorKind,
    pub metadata: ReportMetadata,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ErrorReport {
    pub fn new(value: f64, kind: ErrorKind) -> Self {
        ErrorReport {
            value,
            kind,
            metadata: ReportMetadata::default(),
        }
    }
}

/// Great-circle distances `r * arccos(a.b / (|a||b|))` between the rows of a
/// 3-D cloud, using the nominal radius and normalized directions (so noisy,
/// off-sphere points still get a well-defined manifold distance). The arccos
/// argument is clamped to [-1, 1].
pub fn great_circle_dists(cloud: &PointCloud, r: f64) -> Result<DMatrix<f64>> {
    if cloud.dim() != 3 {
        return Err(SgeError::InvalidArgument(format!(
            "great-circle distances need 3-D points, got dimension {}",
            cloud.dim()
        )));
    }
    if !(r > 0.0) {
        return Err(SgeError::InvalidArgument(format!(
            "nominal radius must be positive, got {r}"
        )));
    }
    let n = cloud.n();
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let p = cloud.points().row(i);
        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(SgeError::InvalidArgument(format!(
                "point {i} has zero norm; its direction is undefined"
            )));
        }
        norms[i] = norm;
    }
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let mut dot = 0.0;
            for c in 0..3 {
                dot += cloud.points()[(i, c)] * cloud.points()[(j, c)];
            }
            let cos = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            let d = r * cos.acos();
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    Ok(out)
}

/// Mean absolute deviation between two pairwise-distance matrices over the
/// strict upper triangle: `2/(n(n-1)) * sum_{i<j} |ref - emb|`.
pub fn mad(d_ref: &DMatrix<f64>, d_emb: &DMatrix<f64>) -> Result<f64> {
    if d_ref.shape() != d_emb.shape() || d_ref.nrows() != d_ref.ncols() {
        return Err(SgeError::InvalidArgument(format!(
            "MAD needs two square matrices of equal shape, got {:?} and {:?}",
            d_ref.shape(),
            d_emb.shape()
        )));
    }
    let n = d_ref.nrows();
    if n < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += (d_ref[(i, j)] - d_emb[(i, j)]).abs();
        }
    }
    Ok(total * 2.0 / (n as f64 * (n as f64 - 1.0)))
}

/// Unsquared pairwise Euclidean distance matrix.
pub fn pairwise_euclidean(cloud: &PointCloud) -> DMatrix<f64> {
    let n = cloud.n();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = cloud.distance(i, j);
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}

/// Adjacency-distance error between a cloud and its embedding: build the
/// delta-kNN union graph on each side independently, weight present edges by
/// Euclidean distance in the respective space, and take the normalized sum of
/// absolute differences over ordered pairs, `1/(n delta) * sum_{i != j}
/// |A_ij - A~_ij|`.
pub fn adjacency_error(orig: &PointCloud, emb: &PointCloud, delta: usize) -> Result<f64> {
    if orig.n() != emb.n() {
        return Err(SgeError::InvalidArgument(format!(
            "point counts differ: original {} vs embedding {}",
            orig.n(),
            emb.n()
        )));
    }
    let n = orig.n();
    let g_orig = build_graph(orig, &knn(orig, delta)?)?;
    let g_emb = build_graph(emb, &knn(emb, delta)?)?;

    let mut union: std::collections::BTreeMap<(usize, usize), (f64, f64)> =
        std::collections::BTreeMap::new();
    for &(i, j, w) in g_orig.edges() {
        union.entry((i, j)).or_insert((0.0, 0.0)).0 = w;
    }
    for &(i, j, w) in g_emb.edges() {
        union.entry((i, j)).or_insert((0.0, 0.0)).1 = w;
    }
    // ordered pairs count each unordered edge twice
    let total: f64 = union.values().map(|&(a, b)| (a - b).abs()).sum::<f64>() * 2.0;
    Ok(total / (n as f64 * delta as f64))
}
