//! Clamped B-spline basis on `[0, 1]` with knots at the data sites.

/// B-spline basis of a given degree over a clamped knot vector. Evaluation
/// follows the standard Cox-de Boor recurrences (basis values and
/// derivatives computed span-locally).
#[derive(Debug, Clone, PartialEq)]
pub struct BsplineBasis {
    degree: usize,
    knots: Vec<f64>,
}

impl BsplineBasis {
    /// Basis with knots at the uniform sites `z_k = k/(m-1)`, `k = 0..m-1`
    /// (boundary knots repeated `degree + 1` times). The spline space then
    /// contains an interpolant of any data on those sites.
    pub fn on_uniform_sites(m: usize, degree: usize) -> Self {
        assert!(m >= 2 && degree >= 1);
        let mut knots = Vec::with_capacity(m + 2 * degree);
        knots.extend(std::iter::repeat(0.0).take(degree + 1));
        for k in 1..m - 1 {
            knots.push(k as f64 / (m as f64 - 1.0));
        }
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        BsplineBasis { degree, knots }
    }

    pub fn from_knots(degree: usize, knots: Vec<f64>) -> Self {
        assert!(knots.len() > 2 * (degree + 1) - 1);
        BsplineBasis { degree, knots }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Uniform parameter sites this basis was built on.
    pub fn sites(m: usize) -> Vec<f64> {
        (0..m).map(|k| k as f64 / (m as f64 - 1.0)).collect()
    }

    /// Knot span index containing `z`: `knots[span] <= z < knots[span + 1]`,
    /// with `z >= 1` mapped to the last non-empty span.
    pub fn find_span(&self, z: f64) -> usize {
        let n = self.n_basis();
        let p = self.degree;
        if z >= self.knots[n] {
            return n - 1;
        }
        if z <= self.knots[p] {
            return p;
        }
        let mut lo = p;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if z < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// The `degree + 1` basis values that are non-zero at `z`, together with
    /// the index of the first one.
    pub fn eval(&self, z: f64) -> (usize, Vec<f64>) {
        let span = self.find_span(z);
        (span - self.degree, self.values_in_span(span, z))
    }

    fn values_in_span(&self, span: usize, z: f64) -> Vec<f64> {
        let p = self.degree;
        let mut values = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        values[0] = 1.0;
        for j in 1..=p {
            left[j] = z - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - z;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
        }
        values
    }

    /// Basis values and derivatives up to `order` evaluated at `z` using the
    /// given span (so one-sided limits at knots can be requested explicitly).
    /// Returns the first non-zero basis index and `ders[k][j]` = k-th
    /// derivative of basis `first + j`.
    pub fn derivs_in_span(&self, span: usize, z: f64, order: usize) -> (usize, Vec<Vec<f64>>) {
        let p = self.degree;
        let n = order.min(p);
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = z - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - z;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }

        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let mut s1 = 0;
            let mut s2 = 1;
            a[0][0] = 1.0;
            for k in 1..=n {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize {
                    k - 1
                } else {
                    p - r
                };
                for j in j1..=j2 {
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][(rk + j as isize) as usize];
                    d += a[s2][j] * ndu[(rk + j as isize) as usize][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }

        let mut factor = p as f64;
        for k in 1..=n {
            for j in 0..=p {
                ders[k][j] *= factor;
            }
            factor *= (p - k) as f64;
        }
        (span - p, ders)
    }

    /// Dense collocation matrix of the basis at the given sites.
    pub fn collocation(&self, sites: &[f64]) -> nalgebra::DMatrix<f64> {
        let mut b = nalgebra::DMatrix::zeros(sites.len(), self.n_basis());
        for (row, &z) in sites.iter().enumerate() {
            let (first, values) = self.eval(z);
            for (offset, v) in values.iter().enumerate() {
                b[(row, first + offset)] = *v;
            }
        }
        b
    }
}
