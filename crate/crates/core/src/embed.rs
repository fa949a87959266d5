//! Distance-matrix assembly, double centering, SVD embedding, and the MDS /
//! Isomap / SGE pipelines.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::data::PointCloud;
use crate::error::{Result, SgeError};
use crate::geodesic::{extract_path, floyd_apsp, GeodesicTable};
use crate::graph::{build_graph, connected_components, knn};
use crate::spline::{smooth_geodesic_length_with, CascadeResult, DesignCache};

/// Parameters of the SGE pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SgeParams {
    /// Neighbor count for the kNN graph.
    pub delta: usize,
    /// Smoothing multiplier: each geodesic's residual budget is `mu_s * m`.
    pub mu_s: f64,
    /// Spline threshold in percent: a fit may exceed the geodesic length by
    /// at most this factor before the cascade descends.
    pub nu: f64,
    /// Number of grid points used to measure spline lengths.
    pub h: usize,
    /// Embedding dimension.
    pub p: usize,
    /// Skip spline fitting entirely and use raw geodesic distances; the
    /// result then equals Isomap exactly.
    pub fallback_only: bool,
}

impl SgeParams {
    fn validate(&self, n: usize) -> Result<()> {
        if self.delta == 0 || self.delta > n.saturating_sub(1) {
            return Err(SgeError::InvalidArgument(format!(
                "delta must satisfy 1 <= delta <= n-1; delta = {}, n = {n}",
                self.delta
            )));
        }
        if self.p == 0 || self.p > n {
            return Err(SgeError::InvalidArgument(format!(
                "embedding dimension must satisfy 1 <= p <= n; p = {}, n = {n}",
                self.p
            )));
        }
        if !(self.mu_s >= 0.0) {
            return Err(SgeError::InvalidArgument(format!(
                "mu_s must be >= 0, got {}",
                self.mu_s
            )));
        }
        if !(self.nu >= 0.0) {
            return Err(SgeError::InvalidArgument(format!(
                "nu must be >= 0, got {}",
                self.nu
            )));
        }
        if self.h < 2 {
            return Err(SgeError::InvalidArgument(format!(
                "h must be >= 2, got {}",
                self.h
            )));
        }
        Ok(())
    }
}

/// Symmetric matrix of squared distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(DMatrix<f64>);

impl DistanceMatrix {
    pub fn from_squared(values: DMatrix<f64>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(SgeError::InvalidArgument(format!(
                "distance matrix must be square, got {}x{}",
                n,
                values.ncols()
            )));
        }
        for i in 0..n {
            if values[(i, i)] != 0.0 {
                return Err(SgeError::InvalidArgument(format!(
                    "distance matrix diagonal must be zero at {i}"
                )));
            }
            for j in 0..n {
                let v = values[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(SgeError::InvalidArgument(format!(
                        "distance matrix entry ({i}, {j}) = {v} is not a finite nonnegative value"
                    )));
                }
                if values[(j, i)] != v {
                    return Err(SgeError::InvalidArgument(format!(
                        "distance matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(DistanceMatrix(values))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Doubly centered Gram-like matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<f64>);

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Latent coordinates plus the retained singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// n x p latent coordinates, one row per input point.
    pub coords: DMatrix<f64>,
    /// The p largest singular values of the centered matrix, nonincreasing.
    pub singular_values: Vec<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn p(&self) -> usize {
        self.coords.ncols()
    }

    /// The embedding as a point cloud (optionally carrying labels), for
    /// distance-based error measures.
    pub fn to_cloud(&self, labels: Option<Vec<i64>>) -> Result<PointCloud> {
        PointCloud::new(self.coords.clone(), labels)
    }
}

/// Entry `(i, j)` is the squared Euclidean distance between rows i and j.
pub fn pairwise_sq_euclidean(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.n();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = cloud.sq_distance(i, j);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    DistanceMatrix(d)
}

/// Double centering: `s_ij = -1/2 (d²_ij - mu_i - mu_j + mu)` with row,
/// column, and grand means of the squared-distance matrix.
pub fn double_center(d: &DistanceMatrix) -> GramMatrix {
    let n = d.n();
    let m = &d.0;
    let mut row_means = vec![0.0; n];
    let mut col_means = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..n {
        for j in 0..n {
            row_means[i] += m[(i, j)];
            col_means[j] += m[(i, j)];
            grand += m[(i, j)];
        }
    }
    for v in row_means.iter_mut().chain(col_means.iter_mut()) {
        *v /= n as f64;
    }
    grand /= (n * n) as f64;
    let s = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (m[(i, j)] - row_means[i] - col_means[j] + grand)
    });
    GramMatrix(s)
}

/// SVD embedding `S = V Σ Uᵀ`; row i of the output holds point i's p latent
/// coordinates `sqrt(σ_l) u_il`. Each latent axis is sign-canonicalized so
/// its largest-magnitude entry is positive (ties: first such entry).
pub fn svd_embed(s: &GramMatrix, p: usize) -> Result<Embedding> {
    Ok(svd_embed_detailed(s, p)?.0)
}

/// As [`svd_embed`], also reporting the fraction of total singular mass that
/// sits on negative-eigenvalue directions of `S` (the distortion the SVD
/// route hides when geodesic distances are not Euclidean).
pub fn svd_embed_detailed(s: &GramMatrix, p: usize) -> Result<(Embedding, f64)> {
    let n = s.n();
    if p == 0 || p > n {
        return Err(SgeError::InvalidArgument(format!(
            "embedding dimension must satisfy 1 <= p <= n; p = {p}, n = {n}"
        )));
    }
    let svd = s.0.clone().svd(true, true);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| SgeError::Numerical("SVD did not produce U".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| SgeError::Numerical("SVD did not produce Vᵀ".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
            .then(a.cmp(&b))
    });

    // sign of the eigenvalue behind each singular triple: for symmetric S the
    // left and right singular vectors agree up to the eigenvalue's sign
    let mut negative_mass = 0.0;
    let mut total_mass = 0.0;
    for l in 0..n {
        let sigma = svd.singular_values[l];
        total_mass += sigma;
        let dot: f64 = (0..n).map(|i| u[(i, l)] * v_t[(l, i)]).sum();
        if dot < 0.0 {
            negative_mass += sigma;
        }
    }
    let negative_fraction = if total_mass > 0.0 {
        negative_mass / total_mass
    } else {
        0.0
    };

    let mut coords = DMatrix::zeros(n, p);
    let mut singular_values = Vec::with_capacity(p);
    for (col, &l) in order[..p].iter().enumerate() {
        let sigma = svd.singular_values[l];
        singular_values.push(sigma);
        let scale = sigma.sqrt();
        for i in 0..n {
            coords[(i, col)] = scale * v_t[(l, i)];
        }
        // canonical sign: the largest-magnitude entry is positive
        let mut best = 0;
        for i in 1..n {
            if coords[(i, col)].abs() > coords[(best, col)].abs() {
                best = i;
            }
        }
        if coords[(best, col)] < 0.0 {
            for i in 0..n {
                coords[(i, col)] = -coords[(i, col)];
            }
        }
    }
    Ok((
        Embedding {
            coords,
            singular_values,
        },
        negative_fraction,
    ))
}

/// Classical multidimensional scaling: squared Euclidean distances, double
/// centering, SVD embedding.
pub fn mds(cloud: &PointCloud, p: usize) -> Result<Embedding> {
    let d = pairwise_sq_euclidean(cloud);
    svd_embed(&double_center(&d), p)
}

/// The geodesic table for a cloud's delta-kNN union graph, or a
/// disconnected-graph error listing component sizes.
pub fn geodesic_table(cloud: &PointCloud, delta: usize) -> Result<GeodesicTable> {
    let nbrs = knn(cloud, delta)?;
    let graph = build_graph(cloud, &nbrs)?;
    let table = floyd_apsp(&graph);
    if !table.is_connected() {
        let component_sizes = connected_components(&graph)
            .iter()
            .map(|c| c.len())
            .collect();
        return Err(SgeError::DisconnectedGraph { component_sizes });
    }
    Ok(table)
}

fn squared_geodesic_matrix(table: &GeodesicTable) -> DistanceMatrix {
    let n = table.n();
    DistanceMatrix(DMatrix::from_fn(n, n, |i, j| {
        let d = table.dist(i, j);
        d * d
    }))
}

/// Isomap: geodesic distances on the kNN graph fed through classical MDS.
pub fn isomap(cloud: &PointCloud, delta: usize, p: usize) -> Result<Embedding> {
    if p == 0 || p > cloud.n() {
        return Err(SgeError::InvalidArgument(format!(
            "embedding dimension must satisfy 1 <= p <= n; p = {p}, n = {}",
            cloud.n()
        )));
    }
    let table = geodesic_table(cloud, delta)?;
    svd_embed(&double_center(&squared_geodesic_matrix(&table)), p)
}

/// Detailed output of an SGE run.
#[derive(Debug, Clone, PartialEq)]
pub struct SgeRun {
    pub embedding: Embedding,
    /// Counts of accepted spline degrees over all unordered pairs, indexed
    /// `[fallback, linear, quadratic, cubic]`.
    pub degree_histogram: [usize; 4],
    /// Fraction of singular mass on negative-eigenvalue directions.
    pub negative_energy_fraction: f64,
    /// Cascade outcome per unordered pair `(i, j)`, `i < j`, row-major.
    pub pair_results: Vec<CascadeResult>,
}

/// Smooth geodesic embedding (Algorithm: kNN graph, Floyd shortest paths,
/// spline-smoothed path lengths, squared-distance matrix, double centering,
/// SVD).
pub fn sge(cloud: &PointCloud, params: &SgeParams) -> Result<Embedding> {
    Ok(sge_detailed(cloud, params)?.embedding)
}

/// As [`sge`], also reporting the degree histogram, per-pair cascade results,
/// and the negative-energy diagnostic.
pub fn sge_detailed(cloud: &PointCloud, params: &SgeParams) -> Result<SgeRun> {
    params.validate(cloud.n())?;
    let table = geodesic_table(cloud, params.delta)?;
    sge_from_table(cloud, &table, params, &DesignCache::new())
}

/// SGE stage after the geodesic table: shared by [`sge_detailed`] and the
/// experiment harness (which reuses one table across smoothing multipliers).
pub fn sge_from_table(
    cloud: &PointCloud,
    table: &GeodesicTable,
    params: &SgeParams,
    cache: &DesignCache,
) -> Result<SgeRun> {
    params.validate(cloud.n())?;
    let n = cloud.n();
    let d = cloud.dim();

    let (matrix, pair_results) = if params.fallback_only {
        let pair_results = pairs(n)
            .into_iter()
            .map(|(i, j)| {
                let g = table.dist(i, j);
                CascadeResult {
                    length: g,
                    degree_used: 0,
                    geodesic_length: g,
                }
            })
            .collect();
        (squared_geodesic_matrix(table), pair_results)
    } else {
        let pair_list = pairs(n);
        let pair_results: Vec<CascadeResult> = pair_list
            .par_iter()
            .map(|&(i, j)| {
                let path = extract_path(table, i, j)?;
                let m = path.point_count();
                let points = DMatrix::from_fn(m, d, |r, c| cloud.points()[(path.indices[r], c)]);
                smooth_geodesic_length_with(cache, &points, params.mu_s, params.nu, params.h)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut values = DMatrix::zeros(n, n);
        for (&(i, j), r) in pair_list.iter().zip(&pair_results) {
            let sq = r.length * r.length;
            values[(i, j)] = sq;
            values[(j, i)] = sq;
        }
        (DistanceMatrix(values), pair_results)
    };

    let mut degree_histogram = [0usize; 4];
    for r in &pair_results {
        degree_histogram[r.degree_used] += 1;
    }
    let (embedding, negative_energy_fraction) =
        svd_embed_detailed(&double_center(&matrix), params.p)?;
    Ok(SgeRun {
        embedding,
        degree_histogram,
        negative_energy_fraction,
        pair_results,
    })
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// Rows of the largest connected component of the delta-kNN graph, for the
/// explicit opt-in restriction when the graph is disconnected. Returns the
/// sub-cloud and the original row indices.
pub fn largest_component_subset(
    cloud: &PointCloud,
    delta: usize,
) -> Result<(PointCloud, Vec<usize>)> {
    let nbrs = knn(cloud, delta)?;
    let graph = build_graph(cloud, &nbrs)?;
    let components = connected_components(&graph);
    let largest = components
        .iter()
        .max_by_key(|c| c.len())
        .expect("at least one component");
    Ok((cloud.subset(largest)?, largest.clone()))
}

/// Writes the embedding CSV: header `e1,...,ep[,label]`, one row per point in
/// input order.
pub fn save_embedding_csv(
    embedding: &Embedding,
    labels: Option<&[i64]>,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    use std::io::Write as _;
    let cloud = embedding.to_cloud(labels.map(|l| l.to_vec()))?;
    let mut out = String::new();
    crate::data::write_csv(&cloud, "e", &mut out);
    let path_str = path.as_ref().display().to_string();
    std::fs::File::create(path.as_ref())
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| SgeError::io(path_str, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PointCloud;

    fn cloud(rows: &[Vec<f64>]) -> PointCloud {
        PointCloud::from_rows(rows, None).unwrap()
    }

    fn embedding_distance(e: &Embedding, i: usize, j: usize) -> f64 {
        (0..e.p())
            .map(|c| (e.coords[(i, c)] - e.coords[(j, c)]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn pairwise_matrix_basics() {
        let c = cloud(&[vec![0.0, 0.0], vec![3.0, 0.0]]);
        let d = pairwise_sq_euclidean(&c);
        assert_eq!(d.values()[(0, 1)], 9.0);
        assert_eq!(d.values()[(1, 0)], 9.0);

        let same = cloud(&[vec![1.0, 2.0], vec![1.0, 2.0]]);
        assert!(pairwise_sq_euclidean(&same).values().iter().all(|&v| v == 0.0));

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let c = cloud(&rows);
        let d = pairwise_sq_euclidean(&c);
        for i in 0..5 {
            for j in 0..5 {
                let direct: f64 = (0..4).map(|k| (rows[i][k] - rows[j][k]).powi(2)).sum();
                assert!((d.values()[(i, j)] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn double_center_matches_hand_values() {
        let zero = DistanceMatrix::from_squared(DMatrix::zeros(3, 3)).unwrap();
        assert!(double_center(&zero).values().iter().all(|&v| v == 0.0));

        let d = DistanceMatrix::from_squared(DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, 1.0, 0.0],
        ))
        .unwrap();
        let s = double_center(&d);
        assert!((s.values()[(0, 0)] - 0.25).abs() < 1e-15);
        assert!((s.values()[(0, 1)] + 0.25).abs() < 1e-15);
        assert!((s.values()[(1, 0)] + 0.25).abs() < 1e-15);
        assert!((s.values()[(1, 1)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn double_center_rows_sum_to_zero() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let n = 12;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.random_range(0.0..5.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let s = double_center(&DistanceMatrix::from_squared(m).unwrap());
        let max_abs = s.values().iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|j| s.values()[(i, j)]).sum();
            assert!(row_sum.abs() <= 1e-10 * n as f64 * max_abs.max(1.0));
        }
    }

    #[test]
    fn svd_embed_two_points() {
        let d = DistanceMatrix::from_squared(DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, 1.0, 0.0],
        ))
        .unwrap();
        let e = svd_embed(&double_center(&d), 2).unwrap();
        // coordinates +-0.5 on the first axis, zero second singular value
        let xs: Vec<f64> = (0..2).map(|i| e.coords[(i, 0)]).collect();
        assert!((xs[0].abs() - 0.5).abs() < 1e-12);
        assert!((xs[0] + xs[1]).abs() < 1e-12);
        assert!(xs[0] > 0.0 || xs[1] > 0.0);
        assert!((e.singular_values[0] - 0.5).abs() < 1e-12);
        assert!(e.singular_values[1].abs() < 1e-12);
    }

    #[test]
    fn svd_embed_unit_square_recovers_distances() {
        let c = cloud(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]);
        let e = mds(&c, 2).unwrap();
        assert!((e.singular_values[0] - e.singular_values[1]).abs() < 1e-9);
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let orig = c.distance(i, j);
                assert!((embedding_distance(&e, i, j) - orig).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn svd_embed_zero_matrix() {
        let s = double_center(&DistanceMatrix::from_squared(DMatrix::zeros(4, 4)).unwrap());
        let e = svd_embed(&s, 2).unwrap();
        assert!(e.coords.iter().all(|&v| v == 0.0));
        assert!(svd_embed(&s, 5).is_err());
    }

    #[test]
    fn mds_collinear_and_full_rank_exactness() {
        let c = cloud(&[vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![3.0, 3.0, 3.0]]);
        let e = mds(&c, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (embedding_distance(&e, i, j) - c.distance(i, j)).abs() < 1e-9,
                    "({i},{j})"
                );
            }
        }

        let dup = cloud(&vec![vec![2.0, 1.0]; 5]);
        let e = mds(&dup, 2).unwrap();
        assert!(e.coords.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn embedding_columns_are_centered() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let e = mds(&cloud(&rows), 3).unwrap();
        let scale = e.coords.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for c in 0..3 {
            let mean: f64 = (0..30).map(|i| e.coords[(i, c)]).sum::<f64>() / 30.0;
            assert!(mean.abs() < 1e-8 * scale.max(1.0));
        }
    }

    #[test]
    fn isomap_on_collinear_points_recovers_line() {
        let c = cloud(&[vec![0.0], vec![1.0], vec![3.0]]);
        let e = isomap(&c, 1, 1).unwrap();
        assert!((embedding_distance(&e, 0, 1) - 1.0).abs() < 1e-9);
        assert!((embedding_distance(&e, 1, 2) - 2.0).abs() < 1e-9);
        assert!((embedding_distance(&e, 0, 2) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn isomap_with_complete_graph_equals_mds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<Vec<f64>> = (0..15)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let c = cloud(&rows);
        let a = isomap(&c, 14, 2).unwrap();
        let b = mds(&c, 2).unwrap();
        for (x, y) in a.coords.iter().zip(b.coords.iter()) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn isomap_reports_disconnection_with_component_sizes() {
        let c = cloud(&[
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![10.0, 0.0],
            vec![10.1, 0.0],
            vec![10.2, 0.0],
        ]);
        match isomap(&c, 1, 2) {
            Err(SgeError::DisconnectedGraph { component_sizes }) => {
                assert_eq!(component_sizes, vec![2, 3]);
            }
            other => panic!("expected disconnection, got {other:?}"),
        }
    }

    #[test]
    fn sge_fallback_equals_isomap_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(30);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let c = cloud(&rows);
        let params = SgeParams {
            delta: 5,
            mu_s: 1.0,
            nu: 10.0,
            h: 50,
            p: 2,
            fallback_only: true,
        };
        let a = sge(&c, &params).unwrap();
        let b = isomap(&c, 5, 2).unwrap();
        for (x, y) in a.coords.iter().zip(b.coords.iter()) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn sge_on_collinear_cloud_equals_isomap() {
        // delta = 1 keeps every geodesic a run of consecutive points, so the
        // path points are uniformly spaced and the interpolants are exact
        // lines
        let rows: Vec<Vec<f64>> = (0..8).map(|k| vec![k as f64, k as f64 * 0.5]).collect();
        let c = cloud(&rows);
        let params = SgeParams {
            delta: 1,
            mu_s: 0.0,
            nu: 10.0,
            h: 100,
            p: 1,
            fallback_only: false,
        };
        let a = sge(&c, &params).unwrap();
        let b = isomap(&c, 1, 1).unwrap();
        for (x, y) in a.coords.iter().zip(b.coords.iter()) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn sge_determinism_repeat_runs_bitwise_equal() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let c = cloud(&rows);
        let params = SgeParams {
            delta: 4,
            mu_s: 0.5,
            nu: 10.0,
            h: 60,
            p: 2,
            fallback_only: false,
        };
        let a = sge_detailed(&c, &params).unwrap();
        let b = sge_detailed(&c, &params).unwrap();
        assert_eq!(a.embedding.coords, b.embedding.coords);
        assert_eq!(a.degree_histogram, b.degree_histogram);
    }

    #[test]
    fn monotone_nu_never_decreases_degrees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let c = cloud(&rows);
        let base = SgeParams {
            delta: 4,
            mu_s: 0.3,
            nu: 2.0,
            h: 60,
            p: 2,
            fallback_only: false,
        };
        let strict = sge_detailed(&c, &base).unwrap();
        let loose = sge_detailed(
            &c,
            &SgeParams {
                nu: 25.0,
                ..base.clone()
            },
        )
        .unwrap();
        for (a, b) in strict.pair_results.iter().zip(&loose.pair_results) {
            assert!(b.degree_used >= a.degree_used);
            let cap = a.length * (100.0 + 25.0) / (100.0 + 2.0);
            assert!(b.length <= cap + 1e-9 * cap.max(1.0));
        }
    }

    #[test]
    fn largest_component_subset_keeps_big_side() {
        let c = cloud(&[
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![10.0, 0.0],
            vec![10.1, 0.0],
            vec![10.2, 0.0],
        ]);
        let (sub, indices) = largest_component_subset(&c, 1).unwrap();
        assert_eq!(indices, vec![2, 3, 4]);
        assert_eq!(sub.n(), 3);
    }
}
