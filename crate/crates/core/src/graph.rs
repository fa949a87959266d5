//! k-nearest-neighbor search and the weighted neighborhood graph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::PointCloud;
use crate::error::{Result, SgeError};

/// For each point, its `delta` nearest neighbors sorted by (distance, index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborLists {
    delta: usize,
    lists: Vec<Vec<usize>>,
}

impl NeighborLists {
    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.lists[i]
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

/// Undirected weighted simple graph over point indices. Edges are stored once
/// as `(i, j, w)` with `i < j`, sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl NeighborGraph {
    pub fn from_edges(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in edges.iter_mut() {
            if e.0 == e.1 {
                return Err(SgeError::InvalidArgument(format!("loop edge at {}", e.0)));
            }
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
            if e.1 >= n {
                return Err(SgeError::InvalidArgument(format!(
                    "edge ({}, {}) out of range for n = {n}",
                    e.0, e.1
                )));
            }
            if !seen.insert((e.0, e.1)) {
                return Err(SgeError::InvalidArgument(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
        }
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Ok(NeighborGraph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Adjacency lists (both directions), each sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, w) in &self.edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for list in &mut adj {
            list.sort_by(|a, b| a.0.cmp(&b.0));
        }
        adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(i, j, _)| i == v || j == v)
            .count()
    }

    /// Debug edge-list export: one `i j w` line per edge, sorted by `(i, j)`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(i, j, w) in &self.edges {
            let _ = writeln!(out, "{i} {j} {w}");
        }
        out
    }
}

/// Exact brute-force k-nearest-neighbor search under Euclidean distance.
/// Ties break toward the smaller index.
pub fn knn(cloud: &PointCloud, delta: usize) -> Result<NeighborLists> {
    let n = cloud.n();
    if delta == 0 || delta > n.saturating_sub(1) {
        return Err(SgeError::InvalidArgument(format!(
            "delta must satisfy 1 <= delta <= n-1; delta = {delta}, n = {n}"
        )));
    }
    let lists: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut order: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (cloud.sq_distance(i, j), j))
                .collect();
            order.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            order.truncate(delta);
            order.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(NeighborLists { delta, lists })
}

/// Union-symmetrized neighborhood graph: the edge `{i, j}` exists iff
/// `j` is one of `i`'s nearest neighbors or vice versa. Weights are plain
/// (unsquared) Euclidean distances so path lengths stay additive.
pub fn build_graph(cloud: &PointCloud, nbrs: &NeighborLists) -> Result<NeighborGraph> {
    let n = cloud.n();
    if nbrs.len() != n {
        return Err(SgeError::InvalidArgument(format!(
            "neighbor lists cover {} points but the cloud has {n}",
            nbrs.len()
        )));
    }
    let mut pairs = BTreeSet::new();
    for i in 0..n {
        for &j in nbrs.neighbors(i) {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(i, j)| (i, j, cloud.distance(i, j)))
        .collect();
    NeighborGraph::from_edges(n, edges)
}

/// Partition of the node set into maximal connected sets. Each set is sorted
/// ascending; the list is sorted by smallest member.
pub fn connected_components(g: &NeighborGraph) -> Vec<Vec<usize>> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.n()];
    let mut components = Vec::new();
    for start in 0..g.n() {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_cloud(xs: &[f64]) -> PointCloud {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        PointCloud::from_rows(&rows, None).unwrap()
    }

    #[test]
    fn knn_prefers_nearer_endpoint() {
        let cloud = line_cloud(&[0.0, 1.0, 3.0]);
        let nbrs = knn(&cloud, 1).unwrap();
        assert_eq!(nbrs.neighbors(0), &[1]);
        assert_eq!(nbrs.neighbors(1), &[0]);
        assert_eq!(nbrs.neighbors(2), &[1]);
    }

    #[test]
    fn knn_breaks_ties_toward_lower_index() {
        let cloud = line_cloud(&[0.0, 1.0, 2.0]);
        let nbrs = knn(&cloud, 1).unwrap();
        assert_eq!(nbrs.neighbors(1), &[0]);
    }

    #[test]
    fn knn_matches_quadratic_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for case in 0..100 {
            let n = rng.random_range(5..=50);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let cloud = PointCloud::from_rows(&rows, None).unwrap();
            let delta = rng.random_range(1..n);
            let nbrs = knn(&cloud, delta).unwrap();
            for i in 0..n {
                // independent oracle: full sort on (distance, index)
                let mut order: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        let d: f64 = (0..3)
                            .map(|c| (rows[i][c] - rows[j][c]).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        (d, j)
                    })
                    .collect();
                order.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let expect: Vec<usize> = order[..delta].iter().map(|&(_, j)| j).collect();
                assert_eq!(nbrs.neighbors(i), expect, "case {case} point {i}");
            }
        }
    }

    #[test]
    fn union_symmetrization_on_collinear_points() {
        let cloud = line_cloud(&[0.0, 1.0, 3.0]);
        let nbrs = knn(&cloud, 1).unwrap();
        let g = build_graph(&cloud, &nbrs).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0), (1, 2, 2.0)]);
    }

    #[test]
    fn maximal_delta_gives_complete_graph() {
        let cloud = line_cloud(&[0.0, 1.0, 3.0, 7.0, 8.5]);
        let nbrs = knn(&cloud, 4).unwrap();
        let g = build_graph(&cloud, &nbrs).unwrap();
        assert_eq!(g.edges().len(), 5 * 4 / 2);
    }

    #[test]
    fn sphere_graph_degrees_at_least_delta() {
        use crate::data::{gen_semisphere, RadialNoise, SphereMode, SphereSpec};
        let cloud = gen_semisphere(&SphereSpec {
            n: 300,
            r0: 20.0,
            radial_noise: RadialNoise::None,
            mode: SphereMode::Random,
            seed: 1,
        })
        .unwrap();
        let nbrs = knn(&cloud, 3).unwrap();
        let g = build_graph(&cloud, &nbrs).unwrap();
        let mut degrees = vec![0usize; g.n()];
        for &(i, j, _) in g.edges() {
            degrees[i] += 1;
            degrees[j] += 1;
        }
        assert!(degrees.iter().all(|&d| d >= 3));
        // symmetry: every knn choice is present as an edge with its distance
        for i in 0..cloud.n() {
            for &j in nbrs.neighbors(i) {
                let (a, b) = (i.min(j), i.max(j));
                let found = g
                    .edges()
                    .iter()
                    .find(|&&(x, y, _)| (x, y) == (a, b))
                    .expect("edge present");
                assert_eq!(found.2, cloud.distance(i, j));
            }
        }
    }

    #[test]
    fn rigid_motion_leaves_lists_and_weights_unchanged() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let cloud = PointCloud::from_rows(&rows, None).unwrap();
        // rotation about z by 0.7 rad plus a translation
        let (s, c) = 0.7f64.sin_cos();
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .map(|p| {
                vec![
                    c * p[0] - s * p[1] + 10.0,
                    s * p[0] + c * p[1] - 4.0,
                    p[2] + 0.5,
                ]
            })
            .collect();
        let moved = PointCloud::from_rows(&moved, None).unwrap();
        let a = knn(&cloud, 4).unwrap();
        let b = knn(&moved, 4).unwrap();
        assert_eq!(a, b);
        let ga = build_graph(&cloud, &a).unwrap();
        let gb = build_graph(&moved, &b).unwrap();
        for (ea, eb) in ga.edges().iter().zip(gb.edges()) {
            assert_eq!((ea.0, ea.1), (eb.0, eb.1));
            assert!((ea.2 - eb.2).abs() <= 1e-9 * ea.2.max(1.0));
        }
    }

    #[test]
    fn components_edgeless_path_and_two_triangles() {
        let g = NeighborGraph::from_edges(3, vec![]).unwrap();
        assert_eq!(connected_components(&g), vec![vec![0], vec![1], vec![2]]);

        let g = NeighborGraph::from_edges(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(connected_components(&g), vec![vec![0, 1, 2]]);

        let g = NeighborGraph::from_edges(
            6,
            vec![
                (0, 2, 1.0),
                (2, 4, 1.0),
                (0, 4, 1.0),
                (1, 3, 1.0),
                (3, 5, 1.0),
                (1, 5, 1.0),
            ],
        )
        .unwrap();
        // union-find oracle
        let mut parent: Vec<usize> = (0..6).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        for &(i, j, _) in g.edges() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
        let comps = connected_components(&g);
        assert_eq!(comps.len(), 2);
        for comp in &comps {
            assert_eq!(comp.len(), 3);
            let root = find(&mut parent, comp[0]);
            assert!(comp.iter().all(|&v| find(&mut parent, v) == root));
        }
    }

    #[test]
    fn invalid_delta_rejected() {
        let cloud = line_cloud(&[0.0, 1.0]);
        assert!(knn(&cloud, 0).is_err());
        assert!(knn(&cloud, 2).is_err());
    }

    #[test]
    fn edge_list_export_is_sorted() {
        let g = NeighborGraph::from_edges(4, vec![(2, 3, 0.5), (0, 1, 1.5)]).unwrap();
        assert_eq!(g.to_edge_list(), "0 1 1.5\n2 3 0.5\n");
    }
}
