//! Synthetic manifold generation, dataset ingestion, and noise injection.
//!
//! All randomized operations take an explicit 64-bit seed and use `ChaCha8Rng`,
//! so any generator called twice with the same spec returns bitwise-identical
//! output. Experiment code derives per-realization child seeds as
//! `base_seed + realization_index`.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SgeError};

/// An n-by-d matrix of observations; rows are points. Labels are optional
/// per-point integers (e.g. digit classes).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: DMatrix<f64>,
    labels: Option<Vec<i64>>,
}

impl PointCloud {
    pub fn new(points: DMatrix<f64>, labels: Option<Vec<i64>>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(SgeError::InvalidArgument(format!(
                "point cloud must be at least 1x1, got {}x{}",
                points.nrows(),
                points.ncols()
            )));
        }
        if let Some(bad) = points.iter().find(|v| !v.is_finite()) {
            return Err(SgeError::InvalidArgument(format!(
                "point cloud contains a non-finite entry: {bad}"
            )));
        }
        if let Some(ref l) = labels {
            if l.len() != points.nrows() {
                return Err(SgeError::InvalidArgument(format!(
                    "labels length {} does not match point count {}",
                    l.len(),
                    points.nrows()
                )));
            }
        }
        Ok(PointCloud { points, labels })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<i64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(SgeError::InvalidArgument("empty point list".into()));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(SgeError::InvalidArgument("ragged point rows".into()));
        }
        let points = DMatrix::from_row_iterator(rows.len(), d, rows.iter().flatten().copied());
        PointCloud::new(points, labels)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Row `i` copied into a plain vector.
    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    /// Euclidean distance between rows `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.sq_distance(i, j).sqrt()
    }

    /// Squared Euclidean distance between rows `i` and `j`.
    pub fn sq_distance(&self, i: usize, j: usize) -> f64 {
        let mut acc = 0.0;
        for c in 0..self.points.ncols() {
            let diff = self.points[(i, c)] - self.points[(j, c)];
            acc += diff * diff;
        }
        acc
    }

    /// New cloud keeping the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if rows.iter().any(|&r| r >= self.n()) {
            return Err(SgeError::InvalidArgument("subset row out of range".into()));
        }
        let d = self.dim();
        let points = DMatrix::from_fn(rows.len(), d, |r, c| self.points[(rows[r], c)]);
        let labels = self
            .labels
            .as_ref()
            .map(|l| rows.iter().map(|&r| l[r]).collect());
        PointCloud::new(points, labels)
    }

    /// First `n` rows as a new cloud.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        let rows: Vec<usize> = (0..n).collect();
        self.subset(&rows)
    }
}

/// Radial noise applied to the semi-sphere radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialNoise {
    /// `N(0, sigma^2)` added to the nominal radius.
    Gaussian(f64),
    /// `eta * U[-1, 1]` added to the nominal radius.
    Uniform(f64),
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereMode {
    Random,
    Lattice,
}

/// Parameters for semi-sphere generation.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSpec {
    pub n: usize,
    pub r0: f64,
    pub radial_noise: RadialNoise,
    pub mode: SphereMode,
    pub seed: u64,
}

impl SphereSpec {
    fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(SgeError::InvalidArgument(format!(
                "sphere spec requires n >= 4, got {}",
                self.n
            )));
        }
        if !(self.r0 > 0.0) {
            return Err(SgeError::InvalidArgument(format!(
                "sphere spec requires r0 > 0, got {}",
                self.r0
            )));
        }
        match self.radial_noise {
            RadialNoise::Gaussian(s) if !(s >= 0.0) => Err(SgeError::InvalidArgument(format!(
                "gaussian radial noise requires sigma >= 0, got {s}"
            ))),
            RadialNoise::Uniform(e) if !(e >= 0.0) => Err(SgeError::InvalidArgument(format!(
                "uniform radial noise requires eta >= 0, got {e}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Additive i.i.d. Gaussian pixel noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

fn draw_radial(rng: &mut ChaCha8Rng, noise: RadialNoise) -> f64 {
    match noise {
        RadialNoise::Gaussian(sigma) => {
            if sigma == 0.0 {
                0.0
            } else {
                Normal::new(0.0, sigma).expect("sigma validated").sample(rng)
            }
        }
        RadialNoise::Uniform(eta) => eta * rng.random_range(-1.0..=1.0),
        RadialNoise::None => 0.0,
    }
}

fn sphere_point(r: f64, g1: f64, g2: f64) -> [f64; 3] {
    [
        r * g1.cos() * g2.cos(),
        r * g1.cos() * g2.sin(),
        r * g1.sin(),
    ]
}

/// Lattice factorization: a*b = n with the angular spacings pi/(a-1) and
/// pi/(b-1) as close to equal as possible; ties go to the larger a.
fn lattice_shape(n: usize) -> Result<(usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for a in 2..=n / 2 {
        if n % a != 0 {
            continue;
        }
        let b = n / a;
        if b < 2 {
            continue;
        }
        let gap = (1.0 / (a as f64 - 1.0) - 1.0 / (b as f64 - 1.0)).abs();
        let better = match best {
            None => true,
            Some((g, ba, _)) => gap < g || (gap == g && a > ba),
        };
        if better {
            best = Some((gap, a, b));
        }
    }
    best.map(|(_, a, b)| (a, b)).ok_or_else(|| {
        SgeError::InvalidArgument(format!(
            "lattice mode requires n factorable as a*b with a, b >= 2; n = {n}"
        ))
    })
}

/// Samples `spec.n` points from the semi-sphere
/// `(r cos g1 cos g2, r cos g1 sin g2, r sin g1)` with `g1 in [-pi/2, pi/2]`,
/// `g2 in [0, pi]` and per-point radius `r = r0 + noise`.
///
/// Random mode draws both angles uniformly; lattice mode places them on an
/// a-by-b grid (endpoints inclusive, g1 outer / g2 inner, row-major). In both
/// modes every point consumes one fresh radial-noise draw.
pub fn gen_semisphere(spec: &SphereSpec) -> Result<PointCloud> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.n);
    match spec.mode {
        SphereMode::Random => {
            for _ in 0..spec.n {
                let g1 = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
                let g2 = rng.random_range(0.0..PI);
                let r = spec.r0 + draw_radial(&mut rng, spec.radial_noise);
                rows.push(sphere_point(r, g1, g2).to_vec());
            }
        }
        SphereMode::Lattice => {
            let (a, b) = lattice_shape(spec.n)?;
            for i in 0..a {
                let g1 = -FRAC_PI_2 + PI * i as f64 / (a as f64 - 1.0);
                for j in 0..b {
                    let g2 = PI * j as f64 / (b as f64 - 1.0);
                    let r = spec.r0 + draw_radial(&mut rng, spec.radial_noise);
                    rows.push(sphere_point(r, g1, g2).to_vec());
                }
            }
        }
    }
    PointCloud::from_rows(&rows, None)
}

/// Adds i.i.d. `N(0, sigma^2)` to every entry. No clamping: downstream error
/// measures are distance-based and clipping would bias them asymmetrically.
pub fn add_gaussian_pixel_noise(cloud: &PointCloud, noise: &NoiseSpec) -> Result<PointCloud> {
    if !(noise.sigma >= 0.0) {
        return Err(SgeError::InvalidArgument(format!(
            "pixel noise requires sigma >= 0, got {}",
            noise.sigma
        )));
    }
    if noise.sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let dist = Normal::new(0.0, noise.sigma).expect("sigma validated");
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let (n, d) = (cloud.n(), cloud.dim());
    let mut points = cloud.points().clone();
    for i in 0..n {
        for j in 0..d {
            points[(i, j)] += dist.sample(&mut rng);
        }
    }
    PointCloud::new(points, cloud.labels.clone())
}

/// Loads a CSV point cloud: header `c1,...,cd[,label]`, one decimal float row
/// per point. A trailing `label` column becomes integer labels. Header names
/// other than the trailing `label` are not interpreted.
pub fn load_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| SgeError::io(&path_str, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| SgeError::Parse {
        path: path_str.clone(),
        line: 1,
        message: "empty file".into(),
    })?;
    let columns: Vec<&str> = header.split(',').collect();
    let has_label = columns.last().map(|c| c.trim() == "label").unwrap_or(false);
    let d = if has_label {
        columns.len() - 1
    } else {
        columns.len()
    };
    if d == 0 {
        return Err(SgeError::Parse {
            path: path_str,
            line: 1,
            message: "header declares no coordinate columns".into(),
        });
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(SgeError::Parse {
                path: path_str,
                line: lineno,
                message: format!("expected {} cells, found {}", columns.len(), cells.len()),
            });
        }
        let mut row = Vec::with_capacity(d);
        for cell in &cells[..d] {
            let v: f64 = cell.trim().parse().map_err(|_| SgeError::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(SgeError::Parse {
                    path: path_str,
                    line: lineno,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            row.push(v);
        }
        if has_label {
            let cell = cells[d].trim();
            labels.push(cell.parse().map_err(|_| SgeError::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("cannot parse label {cell:?} as an integer"),
            })?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(SgeError::Parse {
            path: path_str,
            line: 1,
            message: "file has a header but no data rows".into(),
        });
    }
    PointCloud::from_rows(&rows, has_label.then_some(labels))
}

/// Writes the CSV format read by [`load_csv`]. Values carry 17 significant
/// digits so that `load_csv(save_csv(c)) == c` bitwise.
pub fn save_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut out = String::new();
    write_csv(cloud, "c", &mut out);
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| SgeError::io(&path_str, e))
}

/// CSV body shared between data clouds (`c` prefix) and embeddings (`e`).
pub(crate) fn write_csv(cloud: &PointCloud, prefix: &str, out: &mut String) {
    use std::fmt::Write as _;
    let d = cloud.dim();
    for j in 0..d {
        if j > 0 {
            out.push(',');
        }
        let _ = write!(out, "{prefix}{}", j + 1);
    }
    if cloud.labels().is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for i in 0..cloud.n() {
        for j in 0..d {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.16e}", cloud.points()[(i, j)]);
        }
        if let Some(l) = cloud.labels() {
            let _ = write!(out, ",{}", l[i]);
        }
        out.push('\n');
    }
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_be_u32(bytes: &[u8], offset: usize, path: &str) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(SgeError::Parse {
            path: path.into(),
            line: 0,
            message: format!("truncated IDX header (need {end} bytes, have {})", bytes.len()),
        });
    }
    Ok(u32::from_be_bytes(bytes[offset..end].try_into().unwrap()))
}

/// Loads an IDX image/label pair (the MNIST container format), keeps only
/// images whose label is in `keep_digits`, draws a uniform random sample of
/// `count` of them without replacement, scales pixels to `[0, 1]` by 255, and
/// flattens each image row-major.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    keep_digits: &BTreeSet<u8>,
    count: usize,
    seed: u64,
) -> Result<PointCloud> {
    let images_path = images_path.as_ref().display().to_string();
    let labels_path = labels_path.as_ref().display().to_string();
    let img_bytes = fs::read(&images_path).map_err(|e| SgeError::io(&images_path, e))?;
    let lbl_bytes = fs::read(&labels_path).map_err(|e| SgeError::io(&labels_path, e))?;

    let magic = read_be_u32(&img_bytes, 0, &images_path)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(SgeError::Parse {
            path: images_path,
            line: 0,
            message: format!("bad magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"),
        });
    }
    let n_images = read_be_u32(&img_bytes, 4, &images_path)? as usize;
    let rows = read_be_u32(&img_bytes, 8, &images_path)? as usize;
    let cols = read_be_u32(&img_bytes, 12, &images_path)? as usize;
    let pixels = rows * cols;
    if img_bytes.len() != 16 + n_images * pixels {
        return Err(SgeError::Parse {
            path: images_path,
            line: 0,
            message: format!(
                "truncated image data: header promises {} bytes, file has {}",
                16 + n_images * pixels,
                img_bytes.len()
            ),
        });
    }

    let magic = read_be_u32(&lbl_bytes, 0, &labels_path)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(SgeError::Parse {
            path: labels_path,
            line: 0,
            message: format!("bad magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"),
        });
    }
    let n_labels = read_be_u32(&lbl_bytes, 4, &labels_path)? as usize;
    if lbl_bytes.len() != 8 + n_labels {
        return Err(SgeError::Parse {
            path: labels_path,
            line: 0,
            message: format!(
                "truncated label data: header promises {} bytes, file has {}",
                8 + n_labels,
                lbl_bytes.len()
            ),
        });
    }
    if n_labels != n_images {
        return Err(SgeError::InvalidArgument(format!(
            "image count {n_images} does not match label count {n_labels}"
        )));
    }

    let labels = &lbl_bytes[8..];
    let mut matching: Vec<usize> = (0..n_images)
        .filter(|&i| keep_digits.contains(&labels[i]))
        .collect();
    if count == 0 {
        return Err(SgeError::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    if count > matching.len() {
        return Err(SgeError::InvalidArgument(format!(
            "requested {count} images but only {} match digits {keep_digits:?}",
            matching.len()
        )));
    }

    // Partial Fisher-Yates: the first `count` slots are a uniform sample
    // without replacement.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let j = rng.random_range(i..matching.len());
        matching.swap(i, j);
    }
    matching.truncate(count);

    let points = DMatrix::from_fn(count, pixels, |r, c| {
        img_bytes[16 + matching[r] * pixels + c] as f64 / 255.0
    });
    let labels = matching.iter().map(|&i| labels[i] as i64).collect();
    PointCloud::new(points, Some(labels))
}
