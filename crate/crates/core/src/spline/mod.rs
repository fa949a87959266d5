//! Channel-wise smoothing splines over geodesic point sequences, the degree
//! cascade, and spline/geodesic length computation.
//!
//! A geodesic with m points is parameterized on the uniform grid
//! `z_k = (k-1)/(m-1)`. Each coordinate channel is fitted independently by a
//! one-dimensional smoothing spline under a shared residual budget
//! `s = mu_s * m`; the d fits combine into a curve whose chordal length over
//! an h-point grid is the smooth-geodesic distance. The fit maximizes
//! smoothness subject to the budget, so `s = 0` interpolates and large
//! budgets approach the least-squares straight line.

mod basis;
mod design;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;

pub use basis::BsplineBasis;
use design::Design;

use crate::error::{Result, SgeError};

/// A fitted one-dimensional smoothing spline.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline1D {
    pub degree: usize,
    /// Clamped knot vector on `[0, 1]`.
    pub knots: Vec<f64>,
    /// B-spline coefficients.
    pub coefficients: Vec<f64>,
    /// Residual sum of squares actually realized by the fit.
    pub achieved_rss: f64,
    /// Penalty weight realizing the budget; 0 for interpolation, infinite
    /// when the roughness-free limit already met the budget.
    pub lambda: f64,
}

impl Spline1D {
    pub fn eval(&self, z: f64) -> f64 {
        let basis = BsplineBasis::from_knots(self.degree, self.knots.clone());
        let (first, values) = basis.eval(z.clamp(0.0, 1.0));
        values
            .iter()
            .enumerate()
            .map(|(o, v)| self.coefficients[first + o] * v)
            .sum()
    }
}

/// d one-dimensional splines sharing degree and knots: a curve in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineD {
    channels: Vec<Spline1D>,
    degree: usize,
}

impl SplineD {
    pub fn new(channels: Vec<Spline1D>) -> Result<Self> {
        let first = channels.first().ok_or_else(|| {
            SgeError::InvalidArgument("a d-dimensional spline needs at least one channel".into())
        })?;
        let degree = first.degree;
        if channels
            .iter()
            .any(|c| c.degree != degree || c.knots != first.knots)
        {
            return Err(SgeError::InvalidArgument(
                "spline channels must share degree and knots".into(),
            ));
        }
        Ok(SplineD { channels, degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Spline1D] {
        &self.channels
    }

    pub fn eval(&self, z: f64) -> Vec<f64> {
        self.sample_at(&BsplineBasis::from_knots(
            self.degree,
            self.channels[0].knots.clone(),
        ), z)
    }

    fn sample_at(&self, basis: &BsplineBasis, z: f64) -> Vec<f64> {
        let (first, values) = basis.eval(z.clamp(0.0, 1.0));
        self.channels
            .iter()
            .map(|ch| {
                values
                    .iter()
                    .enumerate()
                    .map(|(o, v)| ch.coefficients[first + o] * v)
                    .sum()
            })
            .collect()
    }

    /// Curve samples on the uniform grid `z = k/(h-1)`, `k = 0..h-1`. The
    /// basis row is evaluated once per grid point and shared by all channels.
    pub fn sample_grid(&self, h: usize) -> Vec<Vec<f64>> {
        let basis = BsplineBasis::from_knots(self.degree, self.channels[0].knots.clone());
        (0..h)
            .map(|k| self.sample_at(&basis, k as f64 / (h as f64 - 1.0)))
            .collect()
    }
}

/// Outcome of the degree cascade for one geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeResult {
    /// Accepted smooth-geodesic length (equals `geodesic_length` on fallback).
    pub length: f64,
    /// 3, 2, or 1 for the accepted spline degree; 0 for the raw-geodesic
    /// fallback.
    pub degree_used: usize,
    pub geodesic_length: f64,
}

/// Fits one coordinate channel: the smoothing spline of the given degree with
/// knots at the data sites, maximizing smoothness subject to a residual
/// budget of `s`.
pub fn fit_1d(ys: &[f64], degree: usize, s: f64) -> Result<Spline1D> {
    let design = Design::new(ys.len(), degree)?;
    fit_channel(&design, ys, s)
}

fn fit_channel(design: &Design, ys: &[f64], s: f64) -> Result<Spline1D> {
    let fit = design.fit(ys, s)?;
    Ok(Spline1D {
        degree: design.degree,
        knots: design.basis.knots().to_vec(),
        coefficients: fit.coefficients.iter().copied().collect(),
        achieved_rss: fit.achieved_rss,
        lambda: fit.lambda,
    })
}

/// Fits all d channels of an m-by-d point sequence with the same residual
/// budget `s = mu_s * m`.
pub fn fit_dd(points: &DMatrix<f64>, degree: usize, mu_s: f64) -> Result<SplineD> {
    let design = Design::new(points.nrows(), degree)?;
    fit_dd_with(&design, points, mu_s)
}

fn fit_dd_with(design: &Design, points: &DMatrix<f64>, mu_s: f64) -> Result<SplineD> {
    if !(mu_s >= 0.0) {
        return Err(SgeError::InvalidArgument(format!(
            "smoothing multiplier must be >= 0, got {mu_s}"
        )));
    }
    let s = mu_s * points.nrows() as f64;
    let mut channel_data = vec![0.0; points.nrows()];
    let channels = (0..points.ncols())
        .map(|c| {
            for r in 0..points.nrows() {
                channel_data[r] = points[(r, c)];
            }
            fit_channel(design, &channel_data, s)
        })
        .collect::<Result<Vec<_>>>()?;
    SplineD::new(channels)
}

/// Chordal length of the curve over the uniform h-point grid.
pub fn spline_length(f: &SplineD, h: usize) -> Result<f64> {
    if h < 2 {
        return Err(SgeError::InvalidArgument(format!(
            "discretization count must be >= 2, got {h}"
        )));
    }
    let samples = f.sample_grid(h);
    Ok(polyline_length(&samples))
}

fn polyline_length(samples: &[Vec<f64>]) -> f64 {
    samples
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

/// Sum of consecutive Euclidean distances along the rows of `points`.
pub fn geodesic_length(points: &DMatrix<f64>) -> f64 {
    let mut total = 0.0;
    for r in 1..points.nrows() {
        let mut acc = 0.0;
        for c in 0..points.ncols() {
            let diff = points[(r, c)] - points[(r - 1, c)];
            acc += diff * diff;
        }
        total += acc.sqrt();
    }
    total
}

/// Shared per-(m, degree) fitting machinery. Fit results do not depend on
/// cache state, so a cache may be shared freely across threads and runs.
#[derive(Default)]
pub struct DesignCache {
    map: RwLock<HashMap<(usize, usize), Arc<Design>>>,
}

impl DesignCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&self, m: usize, degree: usize) -> Result<Arc<Design>> {
        if let Some(d) = self.map.read().expect("cache lock").get(&(m, degree)) {
            return Ok(d.clone());
        }
        let design = Arc::new(Design::new(m, degree)?);
        let mut guard = self.map.write().expect("cache lock");
        Ok(guard.entry((m, degree)).or_insert(design).clone())
    }
}

/// The degree cascade: try cubic, then quadratic, then linear fits (as the
/// point count allows) and accept the first whose length stays below
/// `d_G * (100 + nu) / 100`; otherwise fall back to the geodesic length
/// itself. A fit that fails numerically counts as a rejection.
pub fn smooth_geodesic_length(
    points: &DMatrix<f64>,
    mu_s: f64,
    nu: f64,
    h: usize,
) -> Result<CascadeResult> {
    smooth_geodesic_length_with(&DesignCache::new(), points, mu_s, nu, h)
}

/// Cascade sharing a [`DesignCache`] across calls (one cache per embedding
/// run; the per-(m, degree) machinery dominates the fit cost otherwise).
pub fn smooth_geodesic_length_with(
    cache: &DesignCache,
    points: &DMatrix<f64>,
    mu_s: f64,
    nu: f64,
    h: usize,
) -> Result<CascadeResult> {
    let m = points.nrows();
    if m < 2 {
        return Err(SgeError::InvalidArgument(format!(
            "a geodesic needs at least 2 points, got {m}"
        )));
    }
    if !(nu >= 0.0) {
        return Err(SgeError::InvalidArgument(format!(
            "spline threshold must be >= 0, got {nu}"
        )));
    }
    if h < 2 {
        return Err(SgeError::InvalidArgument(format!(
            "discretization count must be >= 2, got {h}"
        )));
    }
    if !(mu_s >= 0.0) {
        return Err(SgeError::InvalidArgument(format!(
            "smoothing multiplier must be >= 0, got {mu_s}"
        )));
    }

    let d_geo = geodesic_length(points);
    let threshold = d_geo * (100.0 + nu) / 100.0;
    let degrees: &[usize] = match m {
        2 => &[1],
        3 => &[2, 1],
        _ => &[3, 2, 1],
    };
    for &degree in degrees {
        let Ok(design) = cache.get(m, degree) else {
            continue;
        };
        let Ok(fit) = fit_dd_with(&design, points, mu_s) else {
            continue;
        };
        let Ok(length) = spline_length(&fit, h) else {
            continue;
        };
        if length.is_finite() && length < threshold {
            return Ok(CascadeResult {
                length,
                degree_used: degree,
                geodesic_length: d_geo,
            });
        }
    }
    Ok(CascadeResult {
        length: d_geo,
        degree_used: 0,
        geodesic_length: d_geo,
    })
}
