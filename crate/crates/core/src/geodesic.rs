//! All-pairs shortest paths over the neighbor graph with path reconstruction.

use rayon::prelude::*;

use crate::error::{Result, SgeError};
use crate::graph::NeighborGraph;

const NO_HOP: u32 = u32::MAX;

/// Dense all-pairs shortest-path table: distances plus a next-hop matrix for
/// path reconstruction. Unreachable pairs hold `+inf` / no hop.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTable {
    n: usize,
    dist: Vec<f64>,
    next: Vec<u32>,
}

impl GeodesicTable {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn next_hop(&self, i: usize, j: usize) -> Option<usize> {
        match self.next[i * self.n + j] {
            NO_HOP => None,
            v => Some(v as usize),
        }
    }

    pub fn is_connected(&self) -> bool {
        // finite first row suffices for an undirected graph
        (0..self.n).all(|j| self.dist(0, j).is_finite())
    }

    /// All nodes reachable from `i`, sorted ascending. For an undirected
    /// graph this is `i`'s connected component.
    pub fn reachable_from(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.dist(i, j).is_finite()).collect()
    }
}

/// A reconstructed shortest path: node indices from `i` to `j` and the sum of
/// edge weights along it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub indices: Vec<usize>,
    pub length: f64,
}

impl GeodesicPath {
    pub fn point_count(&self) -> usize {
        self.indices.len()
    }
}

/// Floyd's algorithm. When a relaxation through `k` ties the current distance
/// exactly, the existing path is kept, so paths are stable under node order.
pub fn floyd_apsp(g: &NeighborGraph) -> GeodesicTable {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n * n];
    let mut next = vec![NO_HOP; n * n];
    for i in 0..n {
        dist[i * n + i] = 0.0;
        next[i * n + i] = i as u32;
    }
    for &(i, j, w) in g.edges() {
        dist[i * n + j] = w;
        dist[j * n + i] = w;
        next[i * n + j] = j as u32;
        next[j * n + i] = i as u32;
    }

    let mut row_k = vec![0.0f64; n];
    for k in 0..n {
        row_k.copy_from_slice(&dist[k * n..(k + 1) * n]);
        let row_k = &row_k;
        dist.par_chunks_mut(n)
            .zip(next.par_chunks_mut(n))
            .for_each(|(dist_i, next_i)| {
                let dik = dist_i[k];
                if !dik.is_finite() {
                    return;
                }
                let nik = next_i[k];
                for j in 0..n {
                    let cand = dik + row_k[j];
                    if cand < dist_i[j] {
                        dist_i[j] = cand;
                        next_i[j] = nik;
                    }
                }
            });
    }
    GeodesicTable { n, dist, next }
}

/// Follows the next-hop matrix from `i` to `j`. Errors on `i == j` and on
/// unreachable pairs (carrying both components).
pub fn extract_path(t: &GeodesicTable, i: usize, j: usize) -> Result<GeodesicPath> {
    let n = t.n();
    if i >= n || j >= n {
        return Err(SgeError::InvalidArgument(format!(
            "node index out of range: ({i}, {j}) with n = {n}"
        )));
    }
    if i == j {
        return Err(SgeError::InvalidArgument(format!(
            "path endpoints must differ, got ({i}, {j})"
        )));
    }
    if !t.dist(i, j).is_finite() {
        return Err(SgeError::NoPath {
            from: i,
            to: j,
            from_component: t.reachable_from(i),
            to_component: t.reachable_from(j),
        });
    }
    let mut indices = vec![i];
    let mut length = 0.0;
    let mut cur = i;
    while cur != j {
        let hop = t.next_hop(cur, j).ok_or_else(|| {
            SgeError::Numerical(format!("next-hop matrix inconsistent at ({cur}, {j})"))
        })?;
        length += t.dist(cur, hop);
        cur = hop;
        indices.push(cur);
        if indices.len() > n {
            return Err(SgeError::Numerical(format!(
                "next-hop cycle detected while extracting path ({i}, {j})"
            )));
        }
    }
    Ok(GeodesicPath { indices, length })
}
