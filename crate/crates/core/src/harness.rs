//! Seeded, repeatable experiment harness: sphere parameter sweep, sparsity
//! and noise studies, and the image-embedding study, each aggregated over
//! realizations.
//!
//! Seeding: realization `r` of a single-grid study uses child seed
//! `base_seed + r`; studies that regenerate data per grid level (the noise
//! study) use `base_seed + level_index * realizations + r`. Sub-purposes
//! (pixel noise on a sampled image set) derive their seed through a splitmix
//! mix of the child seed, so no stream is reused across purposes. Reports are
//! byte-identical across runs and thread counts apart from `wall_time_ms`.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{
    add_gaussian_pixel_noise, gen_semisphere, load_csv, load_idx, NoiseSpec, PointCloud,
    RadialNoise, SphereMode, SphereSpec,
};
use crate::embed::{geodesic_table, save_embedding_csv, sge_from_table, SgeParams};
use crate::error::{Result, SgeError};
use crate::metrics::{adjacency_error, great_circle_dists, mad, pairwise_euclidean};
use crate::spline::DesignCache;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    SphereSweep,
    Sparsity,
    Noise,
    Image,
}

impl std::fmt::Display for StudyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StudyKind::SphereSweep => "sphere_sweep",
            StudyKind::Sparsity => "sparsity",
            StudyKind::Noise => "noise",
            StudyKind::Image => "image",
        };
        f.write_str(s)
    }
}

/// Image dataset source for the image study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImageDataset {
    /// IDX image/label pair (the MNIST container format); `count` images with
    /// labels in `digits` are sampled per realization.
    Idx {
        images: PathBuf,
        labels: PathBuf,
        digits: Vec<u8>,
        count: usize,
    },
    /// Pre-flattened CSV (one image per row); optionally subsampled to
    /// `count` rows per realization.
    Csv {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<usize>,
    },
}

/// One experiment configuration; serialized field-for-field as the bench
/// config JSON (snake_case keys). Grids apply per study:
/// sphere_sweep uses `delta` x `mu_s`, sparsity uses `n`, noise uses `eta`,
/// image uses `sigma` x `mu_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub study: StudyKind,
    #[serde(default)]
    pub delta: Vec<usize>,
    #[serde(default)]
    pub mu_s: Vec<f64>,
    #[serde(default)]
    pub eta: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
    pub realizations: usize,
    pub base_seed: u64,
    pub nu: f64,
    pub h: usize,
    pub p: usize,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default)]
    pub sigma_r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<ImageDataset>,
    /// When set, the image study writes one embedding CSV per cell (first
    /// realization) for scatter plotting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter_dir: Option<PathBuf>,
}

fn default_r0() -> f64 {
    20.0
}

/// Cell coordinates within a study grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub params: CellParams,
    /// Per-realization errors (successful realizations only).
    pub errors: Vec<f64>,
    pub mean: Option<f64>,
    /// Population standard deviation over realizations (0 for a single one).
    pub std: Option<f64>,
    pub failed: bool,
}

/// One entry of the Isomap-minus-SGE error surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub delta: usize,
    pub mu_s: f64,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: StudyKind,
    pub config: SweepConfig,
    pub cells: Vec<CellRecord>,
    /// Mean `E_I - E_S` per (delta, mu_s); sphere sweep only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<Vec<SurfaceCell>>,
    pub version: String,
    pub wall_time_ms: u64,
}

impl StudyReport {
    /// Report serialization with the wall-time field zeroed, for
    /// determinism comparisons.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_time_ms = 0;
        serde_json::to_string_pretty(&clone).expect("report serialization")
    }
}

/// Accumulates per-realization outcomes for one cell, in realization order.
struct CellAccumulator {
    params: CellParams,
    errors: Vec<f64>,
    failed: bool,
}

impl CellAccumulator {
    fn new(params: CellParams) -> Self {
        CellAccumulator {
            params,
            errors: Vec::new(),
            failed: false,
        }
    }

    fn record(&mut self, outcome: Option<f64>) {
        match outcome {
            Some(v) => self.errors.push(v),
            None => self.failed = true,
        }
    }

    fn finish(self) -> CellRecord {
        let (mean, std) = if self.failed || self.errors.is_empty() {
            (None, None)
        } else {
            let n = self.errors.len() as f64;
            let mean = self.errors.iter().sum::<f64>() / n;
            let var = self.errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
            (Some(mean), Some(var.sqrt()))
        };
        CellRecord {
            params: self.params,
            errors: self.errors,
            mean,
            std,
            failed: self.failed,
        }
    }
}

fn splitmix(child: u64, tag: u64) -> u64 {
    let mut z = child ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(SgeError::InvalidArgument(msg.into()))
    }
}

fn single<T: Copy>(grid: &[T], name: &str) -> Result<T> {
    if grid.len() == 1 {
        Ok(grid[0])
    } else {
        Err(SgeError::InvalidArgument(format!(
            "this study expects exactly one {name} value, got {}",
            grid.len()
        )))
    }
}

/// Runs the study named by `cfg.study`.
pub fn run_study(cfg: &SweepConfig) -> Result<StudyReport> {
    let start = Instant::now();
    let mut report = match cfg.study {
        StudyKind::SphereSweep => run_sphere_sweep(cfg),
        StudyKind::Sparsity => run_sparsity_study(cfg),
        StudyKind::Noise => run_noise_study(cfg),
        StudyKind::Image => run_image_study(cfg),
    }?;
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn sge_params(cfg: &SweepConfig, delta: usize, mu_s: f64, fallback_only: bool) -> SgeParams {
    SgeParams {
        delta,
        mu_s,
        nu: cfg.nu,
        h: cfg.h,
        p: cfg.p,
        fallback_only,
    }
}

/// MAD of an embedding against the great-circle truth for a sphere cloud.
fn sphere_error(
    cloud: &PointCloud,
    table: &crate::geodesic::GeodesicTable,
    cfg: &SweepConfig,
    delta: usize,
    mu_s: f64,
    fallback_only: bool,
    cache: &DesignCache,
) -> Result<f64> {
    let run = sge_from_table(cloud, table, &sge_params(cfg, delta, mu_s, fallback_only), cache)?;
    let truth = great_circle_dists(cloud, cfg.r0)?;
    let emb = pairwise_euclidean(&run.embedding.to_cloud(None)?);
    mad(&truth, &emb)
}

/// Isomap vs SGE over a (delta, mu_s) grid on random noisy semi-spheres;
/// one shared cloud per realization.
pub fn run_sphere_sweep(cfg: &SweepConfig) -> Result<StudyReport> {
    require(cfg.study == StudyKind::SphereSweep, "study must be sphere_sweep")?;
    require(!cfg.delta.is_empty(), "delta grid must be nonempty")?;
    require(!cfg.mu_s.is_empty(), "mu_s grid must be nonempty")?;
    require(cfg.realizations >= 1, "realizations must be >= 1")?;
    let n = single(&cfg.n, "n")?;

    // cells: per delta one isomap cell then one sge cell per mu_s
    let mut iso_cells: Vec<CellAccumulator> = cfg
        .delta
        .iter()
        .map(|&d| {
            CellAccumulator::new(CellParams {
                method: "isomap".into(),
                delta: Some(d),
                mu_s: None,
                n: Some(n),
                eta: None,
                sigma: None,
            })
        })
        .collect();
    let mut sge_cells: Vec<Vec<CellAccumulator>> = cfg
        .delta
        .iter()
        .map(|&d| {
            cfg.mu_s
                .iter()
                .map(|&mu| {
                    CellAccumulator::new(CellParams {
                        method: "sge".into(),
                        delta: Some(d),
                        mu_s: Some(mu),
                        n: Some(n),
                        eta: None,
                        sigma: None,
                    })
                })
                .collect()
        })
        .collect();

    for r in 0..cfg.realizations {
        let cloud = gen_semisphere(&SphereSpec {
            n,
            r0: cfg.r0,
            radial_noise: RadialNoise::Gaussian(cfg.sigma_r),
            mode: SphereMode::Random,
            seed: cfg.base_seed.wrapping_add(r as u64),
        })?;
        for (di, &delta) in cfg.delta.iter().enumerate() {
            match geodesic_table(&cloud, delta) {
                Err(SgeError::DisconnectedGraph { .. }) => {
                    iso_cells[di].record(None);
                    for cell in &mut sge_cells[di] {
                        cell.record(None);
                    }
                }
                Err(other) => return Err(other),
                Ok(table) => {
                    let cache = DesignCache::new();
                    iso_cells[di]
                        .record(Some(sphere_error(&cloud, &table, cfg, delta, 0.0, true, &cache)?));
                    for (mi, &mu) in cfg.mu_s.iter().enumerate() {
                        sge_cells[di][mi]
                            .record(Some(sphere_error(&cloud, &table, cfg, delta, mu, false, &cache)?));
                    }
                }
            }
        }
    }

    let mut cells = Vec::new();
    let mut iso_means = Vec::new();
    for acc in iso_cells {
        let rec = acc.finish();
        iso_means.push(rec.mean);
        cells.push(rec);
    }
    let mut surface = Vec::new();
    for (di, row) in sge_cells.into_iter().enumerate() {
        for (mi, acc) in row.into_iter().enumerate() {
            let rec = acc.finish();
            surface.push(SurfaceCell {
                delta: cfg.delta[di],
                mu_s: cfg.mu_s[mi],
                value: match (iso_means[di], rec.mean) {
                    (Some(ei), Some(es)) => Some(ei - es),
                    _ => None,
                },
            });
            cells.push(rec);
        }
    }

    Ok(StudyReport {
        study: cfg.study,
        config: cfg.clone(),
        cells,
        surface: Some(surface),
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: 0,
    })
}

/// Isomap vs SGE on nested sphere datasets of growing size; realization r's
/// n-point set is the n-row prefix of its largest set.
pub fn run_sparsity_study(cfg: &SweepConfig) -> Result<StudyReport> {
    require(cfg.study == StudyKind::Sparsity, "study must be sparsity")?;
    require(!cfg.n.is_empty(), "n grid must be nonempty")?;
    require(cfg.realizations >= 1, "realizations must be >= 1")?;
    let delta = single(&cfg.delta, "delta")?;
    let mu_s = single(&cfg.mu_s, "mu_s")?;
    let n_max = *cfg.n.iter().max().expect("nonempty grid");

    let mut accs: Vec<(CellAccumulator, CellAccumulator)> = cfg
        .n
        .iter()
        .map(|&n| {
            (
                CellAccumulator::new(CellParams {
                    method: "isomap".into(),
                    delta: Some(delta),
                    mu_s: None,
                    n: Some(n),
                    eta: None,
                    sigma: None,
                }),
                CellAccumulator::new(CellParams {
                    method: "sge".into(),
                    delta: Some(delta),
                    mu_s: Some(mu_s),
                    n: Some(n),
                    eta: None,
                    sigma: None,
                }),
            )
        })
        .collect();

    for r in 0..cfg.realizations {
        let full = gen_semisphere(&SphereSpec {
            n: n_max,
            r0: cfg.r0,
            radial_noise: RadialNoise::Gaussian(cfg.sigma_r),
            mode: SphereMode::Random,
            seed: cfg.base_seed.wrapping_add(r as u64),
        })?;
        for (ni, &n) in cfg.n.iter().enumerate() {
            let cloud = full.prefix(n)?;
            match geodesic_table(&cloud, delta) {
                Err(SgeError::DisconnectedGraph { .. }) => {
                    accs[ni].0.record(None);
                    accs[ni].1.record(None);
                }
                Err(other) => return Err(other),
                Ok(table) => {
                    let cache = DesignCache::new();
                    accs[ni]
                        .0
                        .record(Some(sphere_error(&cloud, &table, cfg, delta, 0.0, true, &cache)?));
                    accs[ni]
                        .1
                        .record(Some(sphere_error(&cloud, &table, cfg, delta, mu_s, false, &cache)?));
                }
            }
        }
    }

    let mut cells = Vec::new();
    for (iso, sge) in accs {
        cells.push(iso.finish());
        cells.push(sge.finish());
    }
    Ok(StudyReport {
        study: cfg.study,
        config: cfg.clone(),
        cells,
        surface: None,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: 0,
    })
}

/// Isomap vs SGE on a latticed semi-sphere under growing uniform radial
/// noise levels.
pub fn run_noise_study(cfg: &SweepConfig) -> Result<StudyReport> {
    require(cfg.study == StudyKind::Noise, "study must be noise")?;
    require(!cfg.eta.is_empty(), "eta grid must be nonempty")?;
    require(cfg.realizations >= 1, "realizations must be >= 1")?;
    let n = single(&cfg.n, "n")?;
    let delta = single(&cfg.delta, "delta")?;
    let mu_s = single(&cfg.mu_s, "mu_s")?;

    let mut cells = Vec::new();
    for (ei, &eta) in cfg.eta.iter().enumerate() {
        let mut iso = CellAccumulator::new(CellParams {
            method: "isomap".into(),
            delta: Some(delta),
            mu_s: None,
            n: Some(n),
            eta: Some(eta),
            sigma: None,
        });
        let mut sge = CellAccumulator::new(CellParams {
            method: "sge".into(),
            delta: Some(delta),
            mu_s: Some(mu_s),
            n: Some(n),
            eta: Some(eta),
            sigma: None,
        });
        for r in 0..cfg.realizations {
            let seed = cfg
                .base_seed
                .wrapping_add((ei * cfg.realizations + r) as u64);
            let cloud = gen_semisphere(&SphereSpec {
                n,
                r0: cfg.r0,
                radial_noise: RadialNoise::Uniform(eta),
                mode: SphereMode::Lattice,
                seed,
            })?;
            match geodesic_table(&cloud, delta) {
                Err(SgeError::DisconnectedGraph { .. }) => {
                    iso.record(None);
                    sge.record(None);
                }
                Err(other) => return Err(other),
                Ok(table) => {
                    let cache = DesignCache::new();
                    iso.record(Some(sphere_error(&cloud, &table, cfg, delta, 0.0, true, &cache)?));
                    sge.record(Some(sphere_error(
                        &cloud, &table, cfg, delta, mu_s, false, &cache,
                    )?));
                }
            }
        }
        cells.push(iso.finish());
        cells.push(sge.finish());
    }
    Ok(StudyReport {
        study: cfg.study,
        config: cfg.clone(),
        cells,
        surface: None,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: 0,
    })
}

fn load_image_dataset(dataset: &ImageDataset, seed: u64) -> Result<PointCloud> {
    match dataset {
        ImageDataset::Idx {
            images,
            labels,
            digits,
            count,
        } => {
            for path in [images, labels] {
                if !path.exists() {
                    return Err(SgeError::InvalidArgument(format!(
                        "dataset file {} not found; fetch the MNIST IDX files \
                         (train-images-idx3-ubyte / train-labels-idx1-ubyte) and point the \
                         config at them — see the README for sources",
                        path.display()
                    )));
                }
            }
            let keep: BTreeSet<u8> = digits.iter().copied().collect();
            load_idx(images, labels, &keep, *count, seed)
        }
        ImageDataset::Csv { path, count } => {
            if !path.exists() {
                return Err(SgeError::InvalidArgument(format!(
                    "dataset file {} not found; flatten the image set to CSV first (see README)",
                    path.display()
                )));
            }
            let cloud = load_csv(path)?;
            match count {
                None => Ok(cloud),
                Some(count) => {
                    use rand::{Rng, SeedableRng};
                    if *count == 0 || *count > cloud.n() {
                        return Err(SgeError::InvalidArgument(format!(
                            "cannot sample {count} rows from a {}-row dataset",
                            cloud.n()
                        )));
                    }
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    let mut rows: Vec<usize> = (0..cloud.n()).collect();
                    for i in 0..*count {
                        let j = rng.random_range(i..rows.len());
                        rows.swap(i, j);
                    }
                    rows.truncate(*count);
                    cloud.subset(&rows)
                }
            }
        }
    }
}

/// Isomap vs SGE on image data under pixel noise, scored by the
/// adjacency-distance error against the clean cloud.
pub fn run_image_study(cfg: &SweepConfig) -> Result<StudyReport> {
    require(cfg.study == StudyKind::Image, "study must be image")?;
    require(!cfg.sigma.is_empty(), "sigma grid must be nonempty")?;
    require(!cfg.mu_s.is_empty(), "mu_s grid must be nonempty")?;
    require(cfg.realizations >= 1, "realizations must be >= 1")?;
    let delta = single(&cfg.delta, "delta")?;
    let dataset = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| SgeError::InvalidArgument("image study requires a dataset".into()))?;
    if let Some(dir) = &cfg.scatter_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| SgeError::io(dir.display().to_string(), e))?;
    }

    // cells ordered: for each sigma, isomap then sge per mu_s
    let mut accs: Vec<CellAccumulator> = Vec::new();
    for &sigma in &cfg.sigma {
        accs.push(CellAccumulator::new(CellParams {
            method: "isomap".into(),
            delta: Some(delta),
            mu_s: None,
            n: None,
            eta: None,
            sigma: Some(sigma),
        }));
        for &mu in &cfg.mu_s {
            accs.push(CellAccumulator::new(CellParams {
                method: "sge".into(),
                delta: Some(delta),
                mu_s: Some(mu),
                n: None,
                eta: None,
                sigma: Some(sigma),
            }));
        }
    }

    for r in 0..cfg.realizations {
        let child = cfg.base_seed.wrapping_add(r as u64);
        let clean = load_image_dataset(dataset, child)?;
        let mut cell_idx = 0;
        for (si, &sigma) in cfg.sigma.iter().enumerate() {
            let noisy = if sigma == 0.0 {
                clean.clone()
            } else {
                add_gaussian_pixel_noise(
                    &clean,
                    &NoiseSpec {
                        sigma,
                        seed: splitmix(child, si as u64 + 1),
                    },
                )?
            };
            match geodesic_table(&noisy, delta) {
                Err(SgeError::DisconnectedGraph { .. }) => {
                    for _ in 0..=cfg.mu_s.len() {
                        accs[cell_idx].record(None);
                        cell_idx += 1;
                    }
                }
                Err(other) => return Err(other),
                Ok(table) => {
                    let cache = DesignCache::new();
                    let mut variants: Vec<(f64, bool, String)> =
                        vec![(0.0, true, format!("sigma{sigma}_isomap"))];
                    for &mu in &cfg.mu_s {
                        variants.push((mu, false, format!("sigma{sigma}_sge_mu{mu}")));
                    }
                    for (mu, fallback, tag) in variants {
                        let run = sge_from_table(
                            &noisy,
                            &table,
                            &sge_params(cfg, delta, mu, fallback),
                            &cache,
                        )?;
                        let emb_cloud = run.embedding.to_cloud(None)?;
                        let err = adjacency_error(&clean, &emb_cloud, delta)?;
                        accs[cell_idx].record(Some(err));
                        cell_idx += 1;
                        if r == 0 {
                            if let Some(dir) = &cfg.scatter_dir {
                                let path = dir.join(format!("scatter_{tag}.csv"));
                                save_embedding_csv(&run.embedding, clean.labels(), path)?;
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(StudyReport {
        study: cfg.study,
        config: cfg.clone(),
        cells: accs.into_iter().map(CellAccumulator::finish).collect(),
        surface: None,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(study: StudyKind) -> SweepConfig {
        SweepConfig {
            study,
            delta: vec![3],
            mu_s: vec![1.0],
            eta: vec![],
            sigma: vec![],
            n: vec![80],
            realizations: 1,
            base_seed: 7,
            nu: 10.0,
            h: 30,
            p: 2,
            r0: 20.0,
            sigma_r: 1.0,
            dataset: None,
            scatter_dir: None,
        }
    }

    #[test]
    fn sphere_sweep_fallback_cell_equals_isomap() {
        let mut cfg = base_config(StudyKind::SphereSweep);
        cfg.delta = vec![4];
        cfg.mu_s = vec![0.0];
        let report = run_sphere_sweep(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2);
        // SGE at mu_s = 0 on this cloud: splines interpolate; not necessarily
        // equal to isomap. The exact-equality check needs fallback; covered
        // by the pipeline tests. Here: grid shape + surface present.
        let surface = report.surface.as_ref().unwrap();
        assert_eq!(surface.len(), 1);
        assert_eq!(surface[0].delta, 4);
    }

    #[test]
    fn sphere_sweep_grid_completeness_and_aggregates() {
        let mut cfg = base_config(StudyKind::SphereSweep);
        cfg.delta = vec![3, 5];
        cfg.mu_s = vec![0.0, 1.0];
        cfg.realizations = 2;
        cfg.n = vec![60];
        let report = run_sphere_sweep(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2 * (1 + 2));
        for cell in &report.cells {
            assert!(!cell.failed);
            assert_eq!(cell.errors.len(), 2);
            let mean = cell.errors.iter().sum::<f64>() / 2.0;
            assert!((cell.mean.unwrap() - mean).abs() < 1e-12);
            let var = cell
                .errors
                .iter()
                .map(|e| (e - mean) * (e - mean))
                .sum::<f64>()
                / 2.0;
            assert!((cell.std.unwrap() - var.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn sparsity_prefix_property_and_shape() {
        let mut cfg = base_config(StudyKind::Sparsity);
        cfg.n = vec![40, 60];
        let report = run_sparsity_study(&cfg).unwrap();
        assert_eq!(report.cells.len(), 4);

        // prefix property: the 40-point set is the first 40 rows of the
        // 60-point set
        let full = gen_semisphere(&SphereSpec {
            n: 60,
            r0: cfg.r0,
            radial_noise: RadialNoise::Gaussian(cfg.sigma_r),
            mode: SphereMode::Random,
            seed: cfg.base_seed,
        })
        .unwrap();
        let sub = full.prefix(40).unwrap();
        for i in 0..40 {
            assert_eq!(sub.point(i), full.point(i));
        }
    }

    #[test]
    fn noise_study_zero_eta_has_zero_std() {
        let mut cfg = base_config(StudyKind::Noise);
        cfg.n = vec![64];
        cfg.eta = vec![0.0];
        cfg.realizations = 3;
        let report = run_noise_study(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2);
        for cell in &report.cells {
            assert!(!cell.failed, "failed cell {:?}", cell.params);
            assert!(cell.std.unwrap() < 1e-15);
        }
    }

    #[test]
    fn disconnected_cells_are_isolated() {
        let mut cfg = base_config(StudyKind::SphereSweep);
        // delta = 1 on a 80-point random sphere is essentially always
        // disconnected; delta = 10 is connected
        cfg.delta = vec![1, 10];
        cfg.mu_s = vec![0.5];
        let report = run_sphere_sweep(&cfg).unwrap();
        let by_delta = |d: usize| -> Vec<&CellRecord> {
            report
                .cells
                .iter()
                .filter(|c| c.params.delta == Some(d))
                .collect()
        };
        assert!(by_delta(1).iter().all(|c| c.failed));
        assert!(by_delta(10).iter().all(|c| !c.failed));
    }

    #[test]
    fn reports_are_deterministic() {
        let mut cfg = base_config(StudyKind::Noise);
        cfg.n = vec![64];
        cfg.eta = vec![0.0, 0.9];
        cfg.realizations = 2;
        let a = run_study(&cfg).unwrap();
        let b = run_study(&cfg).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut cfg = base_config(StudyKind::Image);
        cfg.sigma = vec![0.0, 0.2];
        cfg.dataset = Some(ImageDataset::Idx {
            images: "data/mnist/train-images-idx3-ubyte".into(),
            labels: "data/mnist/train-labels-idx1-ubyte".into(),
            digits: vec![2],
            count: 400,
        });
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: SweepConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
