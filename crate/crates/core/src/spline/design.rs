//! Penalized-least-squares machinery for smoothing-spline fits on the fixed
//! uniform site grid.
//!
//! For m sites and a fixed degree, everything except the data is shared: the
//! collocation matrix `B`, the roughness form `P`, and a value-space
//! reduction that lets the residual budget be met by bisection at O(m) per
//! probe. Writing a candidate fit as `c = B⁺ v + Z w` (with `v` the fitted
//! site values and `Z` spanning the interpolation slack `null(B)`), the
//! roughness minimized over `w` becomes `vᵀ K v`, so the penalized problem
//! reduces to `min |y - v|² + λ vᵀ K v`, solved in the eigenbasis of `K`.

use nalgebra::{DMatrix, DVector};

use super::basis::BsplineBasis;
use crate::error::{Result, SgeError};

const LOG_LAMBDA_MIN: f64 = -18.0;
const LOG_LAMBDA_MAX: f64 = 18.0;
const MAX_BISECT_ITERS: usize = 200;
const BRACKET_TOL: f64 = 1e-12;

pub(crate) struct Design {
    pub m: usize,
    pub degree: usize,
    pub basis: BsplineBasis,
    collocation: DMatrix<f64>,
    pinv: DMatrix<f64>,
    /// Orthonormal basis of null(B); empty matrix when the collocation is
    /// square (degree 1).
    null_basis: DMatrix<f64>,
    /// Maps fitted values to the roughness-minimizing null-space weights.
    null_correction: DMatrix<f64>,
    eig_vectors: DMatrix<f64>,
    eig_values: DVector<f64>,
}

pub(crate) struct SplineFit {
    pub coefficients: DVector<f64>,
    pub achieved_rss: f64,
    pub lambda: f64,
}

impl Design {
    pub fn new(m: usize, degree: usize) -> Result<Design> {
        if !(1..=3).contains(&degree) {
            return Err(SgeError::InvalidArgument(format!(
                "spline degree must be 1, 2, or 3, got {degree}"
            )));
        }
        if m < degree + 1 {
            return Err(SgeError::InsufficientPoints { m, degree });
        }
        let basis = BsplineBasis::on_uniform_sites(m, degree);
        let sites = BsplineBasis::sites(m);
        let collocation = basis.collocation(&sites);
        let penalty = roughness_form(&basis, &sites, degree);
        let nb = basis.n_basis();
        let q = nb - m;

        // B⁺ = Q R⁻ᵀ from the QR factorization of Bᵀ.
        let qr = collocation.transpose().qr();
        let qt = qr.q().transpose();
        let pinv_t = qr
            .r()
            .solve_upper_triangular(&qt)
            .ok_or_else(|| SgeError::Numerical("rank-deficient collocation matrix".into()))?;
        let pinv = pinv_t.transpose();

        // null(B) from the smallest eigenvectors of BᵀB.
        let gram = collocation.transpose() * &collocation;
        let eig = gram.symmetric_eigen();
        let mut order: Vec<usize> = (0..nb).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .expect("finite eigenvalues")
        });
        let max_eig = eig.eigenvalues[order[nb - 1]].max(1.0);
        if q > 0 && eig.eigenvalues[order[q]] < 1e-10 * max_eig {
            return Err(SgeError::Numerical(
                "collocation rank below the expected m".into(),
            ));
        }
        let mut null_basis = DMatrix::zeros(nb, q);
        for (col, &idx) in order[..q].iter().enumerate() {
            null_basis.set_column(col, &eig.eigenvectors.column(idx));
        }

        let null_correction = if q > 0 {
            let pz = &penalty * &null_basis; // nb x q
            let zpz = null_basis.transpose() * &pz; // q x q
            let zpb = pz.transpose() * &pinv; // q x m
            let inv = zpz.try_inverse().ok_or_else(|| {
                SgeError::Numerical("singular roughness form on the interpolation slack".into())
            })?;
            -(inv * zpb)
        } else {
            DMatrix::zeros(0, m)
        };

        // K = B⁺ᵀ P B⁺ + (Zᵀ P B⁺)ᵀ W, symmetrized.
        let pb = &penalty * &pinv; // nb x m
        let mut k = pinv.transpose() * &pb;
        if q > 0 {
            let zpb = null_basis.transpose() * &pb; // q x m
            k += zpb.transpose() * &null_correction;
        }
        let k = (&k + k.transpose()) * 0.5;

        let eig = k.symmetric_eigen();
        let max_val = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let mut eig_values = eig.eigenvalues.clone();
        for v in eig_values.iter_mut() {
            if *v < 1e-12 * max_val.max(1.0) {
                *v = 0.0;
            }
        }
        if eig_values.iter().any(|v| !v.is_finite()) {
            return Err(SgeError::Numerical("non-finite roughness spectrum".into()));
        }

        Ok(Design {
            m,
            degree,
            basis,
            collocation,
            pinv,
            null_basis,
            null_correction,
            eig_vectors: eig.eigenvectors,
            eig_values,
        })
    }

    fn rss_at(&self, log_lambda: f64, yhat: &DVector<f64>) -> f64 {
        let lambda = log_lambda.exp();
        let mut rss = 0.0;
        for i in 0..self.m {
            let le = lambda * self.eig_values[i];
            let shrink = le / (1.0 + le);
            rss += (shrink * yhat[i]) * (shrink * yhat[i]);
        }
        rss
    }

    /// Fitted site values at a given lambda, in the original basis.
    fn values_at(&self, lambda: f64, yhat: &DVector<f64>) -> DVector<f64> {
        let mut scaled = yhat.clone();
        for i in 0..self.m {
            scaled[i] /= 1.0 + lambda * self.eig_values[i];
        }
        &self.eig_vectors * scaled
    }

    /// Coefficients of the roughness-minimal spline with the given site
    /// values.
    fn coefficients_for(&self, values: &DVector<f64>) -> DVector<f64> {
        let mut c = &self.pinv * values;
        if self.null_basis.ncols() > 0 {
            c += &self.null_basis * (&self.null_correction * values);
        }
        c
    }

    /// Smoothing-spline fit in the residual-budget formulation: the smoothest
    /// spline of this degree whose residual sum of squares stays within `s`.
    pub fn fit(&self, ys: &[f64], s: f64) -> Result<SplineFit> {
        if ys.len() != self.m {
            return Err(SgeError::InvalidArgument(format!(
                "expected {} samples, got {}",
                self.m,
                ys.len()
            )));
        }
        if ys.iter().any(|v| !v.is_finite()) {
            return Err(SgeError::InvalidArgument(
                "spline data contains a non-finite value".into(),
            ));
        }
        if !(s >= 0.0) {
            return Err(SgeError::InvalidArgument(format!(
                "residual budget must be >= 0, got {s}"
            )));
        }
        let y = DVector::from_row_slice(ys);
        let yhat = self.eig_vectors.transpose() * &y;

        let rss_limit: f64 = (0..self.m)
            .filter(|&i| self.eig_values[i] > 0.0)
            .map(|i| yhat[i] * yhat[i])
            .sum();

        let (values, lambda) = if s == 0.0 {
            (y.clone(), 0.0)
        } else if rss_limit <= s {
            // even the roughness-free least-squares limit fits the budget
            let mut masked = yhat.clone();
            for i in 0..self.m {
                if self.eig_values[i] > 0.0 {
                    masked[i] = 0.0;
                }
            }
            (&self.eig_vectors * masked, f64::INFINITY)
        } else if self.rss_at(LOG_LAMBDA_MIN, &yhat) > s {
            // the budget is so tight only the interpolant satisfies it
            (y.clone(), 0.0)
        } else {
            let mut lo = LOG_LAMBDA_MIN;
            let mut hi = LOG_LAMBDA_MAX;
            if self.rss_at(hi, &yhat) <= s {
                lo = hi;
            } else {
                for _ in 0..MAX_BISECT_ITERS {
                    if hi - lo < BRACKET_TOL {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if self.rss_at(mid, &yhat) <= s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            let lambda = lo.exp();
            (self.values_at(lambda, &yhat), lambda)
        };

        let coefficients = self.coefficients_for(&values);
        if coefficients.iter().any(|v| !v.is_finite()) {
            return Err(SgeError::Numerical("non-finite spline coefficients".into()));
        }
        let residual = &y - &self.collocation * &coefficients;
        let achieved_rss = residual.norm_squared();
        Ok(SplineFit {
            coefficients,
            achieved_rss,
            lambda,
        })
    }
}

/// Roughness quadratic form on the coefficients.
///
/// Degrees 3 and 2 use the exact Gram matrix of second derivatives (for
/// splines of degree <= 3 the second derivative is piecewise linear or
/// piecewise constant, so per-interval integration is exact). Degree 1 has
/// no second derivative, so squared second differences of the hat
/// coefficients stand in for the curvature; with fewer than three
/// coefficients the form is zero and any data is interpolated.
///
/// All three forms annihilate straight lines, so exactly collinear data is
/// reproduced at every budget.
fn roughness_form(basis: &BsplineBasis, sites: &[f64], degree: usize) -> DMatrix<f64> {
    let nb = basis.n_basis();
    let mut p = DMatrix::zeros(nb, nb);
    match degree {
        2 | 3 => {
            for win in sites.windows(2) {
                let (z0, z1) = (win[0], win[1]);
                let h = z1 - z0;
                let span = basis.find_span(0.5 * (z0 + z1));
                let (first, left) = basis.derivs_in_span(span, z0, 2);
                let (_, right) = basis.derivs_in_span(span, z1, 2);
                let (dl, dr) = (&left[2], &right[2]);
                // exact integral of products of linear functions on [z0, z1]
                for a in 0..=degree {
                    for b in 0..=degree {
                        p[(first + a, first + b)] += h / 6.0
                            * (2.0 * dl[a] * dl[b]
                                + dl[a] * dr[b]
                                + dr[a] * dl[b]
                                + 2.0 * dr[a] * dr[b]);
                    }
                }
            }
        }
        1 => {
            for r in 0..nb.saturating_sub(2) {
                // row of the second-difference operator: [1, -2, 1]
                let idx = [r, r + 1, r + 2];
                let coef = [1.0, -2.0, 1.0];
                for a in 0..3 {
                    for b in 0..3 {
                        p[(idx[a], idx[b])] += coef[a] * coef[b];
                    }
                }
            }
        }
        _ => unreachable!("degree validated by Design::new"),
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_lines_have_zero_roughness() {
        for degree in 1..=3usize {
            let m = 7;
            let basis = BsplineBasis::on_uniform_sites(m, degree);
            let sites = BsplineBasis::sites(m);
            let p = roughness_form(&basis, &sites, degree);
            let nb = basis.n_basis();
            let greville: Vec<f64> = (0..nb)
                .map(|k| basis.knots()[k + 1..k + 1 + degree].iter().sum::<f64>() / degree as f64)
                .collect();
            let line = DVector::from_iterator(nb, greville.iter().map(|&g| 1.5 - 0.75 * g));
            let rough = (line.transpose() * &p * &line)[(0, 0)];
            assert!(rough.abs() < 1e-12, "degree {degree}: roughness {rough}");
        }
    }

    #[test]
    fn budget_is_respected_and_monotone() {
        let ys = [0.0, 1.0, -0.5, 2.0, 0.25, -1.0, 0.5];
        for degree in 1..=3usize {
            let design = Design::new(ys.len(), degree).unwrap();
            let mut prev_rss = -1.0;
            for s in [0.0, 0.1, 0.5, 2.0, 50.0] {
                let fit = design.fit(&ys, s).unwrap();
                assert!(
                    fit.achieved_rss <= s + 1e-6 * s.max(1.0),
                    "degree {degree} s {s}: rss {}",
                    fit.achieved_rss
                );
                assert!(fit.achieved_rss + 1e-9 >= prev_rss, "rss monotone in s");
                prev_rss = fit.achieved_rss;
            }
        }
    }

    #[test]
    fn interpolation_at_zero_budget() {
        let ys = [0.0, 1.0, 0.0, 1.0, 0.0];
        for degree in 1..=3usize {
            let design = Design::new(ys.len(), degree).unwrap();
            let fit = design.fit(&ys, 0.0).unwrap();
            assert!(fit.achieved_rss < 1e-18, "degree {degree}");
        }
    }

    #[test]
    fn collinear_data_is_exact_at_any_budget() {
        let ys = [0.0, 1.0, 2.0, 3.0];
        for degree in 1..=3usize {
            for s in [0.0, 1.0, 4.0, 1e6] {
                let design = Design::new(ys.len(), degree).unwrap();
                let fit = design.fit(&ys, s).unwrap();
                assert!(
                    fit.achieved_rss < 1e-18,
                    "degree {degree} s {s}: rss {}",
                    fit.achieved_rss
                );
            }
        }
    }

    #[test]
    fn two_point_linear_fit_is_always_the_segment() {
        let design = Design::new(2, 1).unwrap();
        for s in [0.0, 0.5, 10.0] {
            let fit = design.fit(&[3.0, 7.0], s).unwrap();
            assert!((fit.coefficients[0] - 3.0).abs() < 1e-12);
            assert!((fit.coefficients[1] - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Design::new(3, 3).is_err());
        assert!(Design::new(2, 0).is_err());
        let design = Design::new(4, 3).unwrap();
        assert!(design.fit(&[0.0, f64::NAN, 0.0, 0.0], 1.0).is_err());
        assert!(design.fit(&[0.0; 4], -1.0).is_err());
        assert!(design.fit(&[0.0; 3], 1.0).is_err());
    }
}
