//! Wild bootstrap for the wavelet estimator and bootstrap confidence balls.
//!
//! Pipeline: fit a pilot estimate at scale `J0*`, form log-domain residuals,
//! rescale each residual matrix by one i.i.d. scalar multiplier, rebuild
//! bootstrap observations and re-estimate at scale `J0`. All heavy lifting
//! stays in the log domain; matrices are exponentiated only at the public
//! boundary.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::BallCS;
use crate::pyramid::linear_estimate_logs;
use crate::refinement::RefinementOrder;
use crate::rng::RngStream;
use crate::spd::{le_distance, mat_exp, SpdMat, SymMat};

/// Multiplier law for the wild bootstrap. `Unit` (identically 1) is a
/// degenerate hook for pipeline-identity tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplier {
    Gaussian,
    TwoPoint,
    Unit,
}

/// Draws one multiplier. The two-point law takes the value `-(sqrt5 - 1)/2`
/// with probability `(sqrt5 + 1)/(2 sqrt5)` and `(sqrt5 + 1)/2` otherwise;
/// it is the unique centered two-point law with unit second and third moment.
pub fn multiplier_sample(kind: Multiplier, rng: &mut impl Rng) -> f64 {
    match kind {
        Multiplier::Gaussian => rng.sample(StandardNormal),
        Multiplier::TwoPoint => {
            let s5 = 5.0_f64.sqrt();
            let p = (s5 + 1.0) / (2.0 * s5);
            if rng.gen::<f64>() < p {
                -(s5 - 1.0) / 2.0
            } else {
                (s5 + 1.0) / 2.0
            }
        }
        Multiplier::Unit => 1.0,
    }
}

/// Configuration of one wild-bootstrap run.
#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    /// Pilot smoothing scale for the residual fit.
    pub j0_star: usize,
    /// Smoothing scale of the (re-)estimator.
    pub j0: usize,
    pub order: RefinementOrder,
    /// Replicate count B.
    pub b: usize,
    pub multiplier: Multiplier,
    pub seed: u64,
    /// Rescale residual `k` by `1 / sqrt(1 - 2 w_kk + sum_l w_kl^2)`, where
    /// `w_kl` are the weights of the pilot smoother. Under i.i.d. log-domain
    /// noise the raw residual variance is deflated by exactly that factor
    /// (the pilot fit absorbs part of the noise at its own grid point), so
    /// the rescale makes the expected conditional variance of a replicate
    /// equal to the sampling variance of the estimator -- the analogue of
    /// the leverage (HC2) correction in wild bootstrap for regression. Off
    /// by default, which leaves the plain residual pipeline untouched.
    pub residual_rescale: bool,
}

impl BootstrapConfig {
    fn validate(&self, j: usize) -> Result<()> {
        if self.j0_star > j {
            return Err(Error::ScaleOutOfRange {
                j0: self.j0_star,
                j,
            });
        }
        if self.j0 > j {
            return Err(Error::ScaleOutOfRange { j0: self.j0, j });
        }
        if self.b == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(())
    }
}

fn check_j(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NonPowerOfTwo { len });
    }
    Ok(len.trailing_zeros() as usize)
}

/// Per-point residual rescale factors `1 / sqrt(1 - 2 w_kk + sum_l w_kl^2)`
/// for the pilot smoother on `n` points. The log-domain smoother is linear
/// and acts entrywise with identical scalar weights, so its columns are
/// recovered by pushing unit impulses of 1x1 matrices through it. Results
/// are cached per `(n, j0_star, order)`.
fn pilot_variance_factors(n: usize, j0_star: usize, order: &RefinementOrder) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), Arc<Vec<f64>>>>> = OnceLock::new();
    let key = (n, j0_star, order.n());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("factor cache").get(&key) {
        return Arc::clone(v);
    }
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|l| {
            let impulse: Vec<SymMat> = (0..n)
                .map(|i| SymMat::new(1, vec![if i == l { 1.0 } else { 0.0 }]).expect("1x1"))
                .collect();
            linear_estimate_logs(&impulse, j0_star, order)
                .into_iter()
                .map(|m| m.get(0, 0))
                .collect()
        })
        .collect();
    let mut diag = vec![0.0; n];
    let mut energy = vec![0.0; n];
    for (l, col) in cols.iter().enumerate() {
        for (m, &w) in col.iter().enumerate() {
            energy[m] += w * w;
            if m == l {
                diag[m] = w;
            }
        }
    }
    let factors: Vec<f64> = (0..n)
        // the deflation is >= (1 - w_kk)^2, hence positive away from an
        // identity smoother (j0_star = j is short-circuited by the caller)
        .map(|m| 1.0 / (1.0 - 2.0 * diag[m] + energy[m]).sqrt())
        .collect();
    let factors = Arc::new(factors);
    cache
        .lock()
        .expect("factor cache")
        .insert(key, Arc::clone(&factors));
    factors
}

/// Log-domain core: pilot fit, residuals, and one estimator replicate per
/// call of `f`. Replicate `r` draws its multipliers from `stream.substream(&[r])`,
/// so results are independent of evaluation order.
pub(crate) fn bootstrap_replicates_logs(
    data_logs: &[SymMat],
    cfg: &BootstrapConfig,
    stream: &RngStream,
) -> Result<Vec<Vec<SymMat>>> {
    let j = check_j(data_logs.len())?;
    cfg.validate(j)?;
    let pilot = linear_estimate_logs(data_logs, cfg.j0_star, &cfg.order);
    let mut residuals: Vec<SymMat> = data_logs
        .iter()
        .zip(&pilot)
        .map(|(d, p)| d.sub(p))
        .collect();
    if cfg.residual_rescale && cfg.j0_star < j {
        let factors = pilot_variance_factors(data_logs.len(), cfg.j0_star, &cfg.order);
        for (r, &c) in residuals.iter_mut().zip(factors.iter()) {
            *r = r.scale(c);
        }
    }
    (0..cfg.b)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.substream(&[r as u64]).rng();
            let boot: Vec<SymMat> = pilot
                .iter()
                .zip(&residuals)
                .map(|(p, e)| {
                    let v = multiplier_sample(cfg.multiplier, &mut rng);
                    let mut x = p.clone();
                    x.axpy(v, e);
                    x
                })
                .collect();
            Ok(linear_estimate_logs(&boot, cfg.j0, &cfg.order))
        })
        .collect()
}

/// Wild bootstrap: returns `B` estimator replicates, each a sequence of
/// `2^J` SPD matrices (the re-estimated curve at scale `J0`).
pub fn wild_bootstrap(data: &[SpdMat], cfg: &BootstrapConfig) -> Result<Vec<Vec<SpdMat>>> {
    let logs: Vec<SymMat> = data.iter().map(SpdMat::log).collect();
    let stream = RngStream::new(cfg.seed);
    bootstrap_replicates_logs(&logs, cfg, &stream)?
        .into_iter()
        .map(|rep| rep.iter().map(mat_exp).collect())
        .collect()
}

/// Distances of each replicate to the central estimate at selected grid
/// indices, in the log-Euclidean metric. Returns one vector of `B` distances
/// per requested index.
pub(crate) fn bootstrap_distance_matrix(
    data_logs: &[SymMat],
    estimate_logs: &[SymMat],
    cfg: &BootstrapConfig,
    stream: &RngStream,
    indices: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let reps = bootstrap_replicates_logs(data_logs, cfg, stream)?;
    let mut out = vec![vec![0.0; cfg.b]; indices.len()];
    for (r, rep) in reps.iter().enumerate() {
        for (pos, &k) in indices.iter().enumerate() {
            out[pos][r] = rep[k].sub(&estimate_logs[k]).frob_norm();
        }
    }
    Ok(out)
}

/// Empirical quantile used for bootstrap radii: the `ceil(B (1 - alpha))`-th
/// order statistic of the distances (the higher, conservative convention).
pub fn bootstrap_quantile(distances: &[f64], alpha: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0,1), got {alpha}"
        )));
    }
    let b = distances.len();
    let rank = ((b as f64) * (1.0 - alpha)).ceil() as usize;
    let rank = rank.clamp(1, b);
    let mut sorted = distances.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(sorted[rank - 1])
}

/// Bootstrap confidence ball at one grid point: a log-Euclidean metric ball
/// around the estimate whose radius is the empirical `(1 - alpha)`-quantile
/// of the replicate distances.
pub fn bootstrap_ball(
    estimate_at_k: &SpdMat,
    replicates_at_k: &[SpdMat],
    alpha: f64,
) -> Result<BallCS> {
    let distances = replicates_at_k
        .iter()
        .map(|r| le_distance(estimate_at_k, r))
        .collect::<Result<Vec<_>>>()?;
    bootstrap_ball_from_distances(estimate_at_k, &distances, alpha)
}

/// As [`bootstrap_ball`], from precomputed distances.
pub fn bootstrap_ball_from_distances(
    estimate_at_k: &SpdMat,
    distances: &[f64],
    alpha: f64,
) -> Result<BallCS> {
    let radius = bootstrap_quantile(distances, alpha)?;
    BallCS::new(estimate_at_k.clone(), radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::ConfidenceSet;
    use crate::pyramid::linear_estimate;

    #[test]
    fn two_point_support_and_moments() {
        let s5 = 5.0_f64.sqrt();
        let lo = -(s5 - 1.0) / 2.0;
        let hi = (s5 + 1.0) / 2.0;
        assert!((lo + 0.618034).abs() < 1e-6);
        assert!((hi - 1.618034).abs() < 1e-6);
        let mut rng = RngStream::new(11).rng();
        let n = 1_000_000;
        let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let v = multiplier_sample(Multiplier::TwoPoint, &mut rng);
            assert!((v - lo).abs() < 1e-12 || (v - hi).abs() < 1e-12);
            m1 += v;
            m2 += v * v;
            m3 += v * v * v;
        }
        let nf = n as f64;
        // E V = 0, E V^2 = E V^3 = 1; SE of each moment is O(n^{-1/2})
        assert!((m1 / nf).abs() < 5.0 / nf.sqrt());
        assert!((m2 / nf - 1.0).abs() < 5.0 * 1.5 / nf.sqrt());
        assert!((m3 / nf - 1.0).abs() < 5.0 * 3.0 / nf.sqrt());
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = RngStream::new(12).rng();
        let n = 1_000_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let v = multiplier_sample(Multiplier::Gaussian, &mut rng);
            m1 += v;
            m2 += v * v;
        }
        let nf = n as f64;
        assert!((m1 / nf).abs() < 5.0 / nf.sqrt());
        assert!((m2 / nf - 1.0).abs() < 5.0 * 2.0_f64.sqrt() / nf.sqrt());
    }

    fn cfg(j0_star: usize, j0: usize, b: usize, multiplier: Multiplier) -> BootstrapConfig {
        BootstrapConfig {
            j0_star,
            j0,
            order: RefinementOrder::new(1),
            b,
            multiplier,
            seed: 42,
            residual_rescale: false,
        }
    }

    #[test]
    fn variance_factors_match_plain_averaging() {
        // For L = 0 the smoother is a block average over 2^(j - j0*) points:
        // w_kk = sum_l w_kl^2 = 2^-(j - j0*), so every factor equals
        // 1 / sqrt(1 - 2^-(j - j0*)).
        let order = RefinementOrder::new(0);
        for (j, j0_star) in [(6usize, 3usize), (8, 5), (8, 8)] {
            let n = 1usize << j;
            let factors = pilot_variance_factors(n, j0_star, &order);
            let expect = if j == j0_star {
                f64::INFINITY
            } else {
                1.0 / (1.0 - 0.5_f64.powi((j - j0_star) as i32)).sqrt()
            };
            for &f in factors.iter() {
                if expect.is_finite() {
                    assert!((f - expect).abs() < 1e-12, "j={j} j0*={j0_star} f={f}");
                } else {
                    assert!(!f.is_finite());
                }
            }
        }
    }

    #[test]
    fn constant_data_replicates_are_the_estimate() {
        let data: Vec<SpdMat> = (0..16).map(|_| SpdMat::from_diag(&[3.0, 0.5]).unwrap()).collect();
        let c = cfg(2, 2, 5, Multiplier::Gaussian);
        let reps = wild_bootstrap(&data, &c).unwrap();
        let est = linear_estimate(&data, 2, &c.order).unwrap();
        for rep in &reps {
            for (a, b) in rep.iter().zip(&est) {
                assert!(le_distance(a, b).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_multiplier_reproduces_the_plain_estimate() {
        // pilot + 1 * (data - pilot) = data, so each replicate is the
        // J0-estimate of the original data
        let data: Vec<SpdMat> = (0..32)
            .map(|k| {
                let t = k as f64 / 32.0;
                SpdMat::from_diag(&[2.0 + t, 1.0 + t * t]).unwrap()
            })
            .collect();
        let c = cfg(3, 2, 3, Multiplier::Unit);
        let reps = wild_bootstrap(&data, &c).unwrap();
        let est = linear_estimate(&data, 2, &c.order).unwrap();
        for rep in &reps {
            for (a, b) in rep.iter().zip(&est) {
                assert!(le_distance(a, b).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn seed_determinism() {
        let data: Vec<SpdMat> = (0..16)
            .map(|k| SpdMat::from_diag(&[1.0 + k as f64, 2.0]).unwrap())
            .collect();
        let c = cfg(2, 2, 4, Multiplier::TwoPoint);
        let a = wild_bootstrap(&data, &c).unwrap();
        let b = wild_bootstrap(&data, &c).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            for (ma, mb) in ra.iter().zip(rb) {
                assert_eq!(ma.as_sym().upper(), mb.as_sym().upper());
            }
        }
    }

    #[test]
    fn quantile_order_statistic() {
        let d: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        assert!((bootstrap_quantile(&d, 0.1).unwrap() - 0.9).abs() < 1e-15);
        assert!((bootstrap_quantile(&d, 0.05).unwrap() - 1.0).abs() < 1e-15);
        // nonincreasing in alpha
        let mut prev = f64::INFINITY;
        for a in [0.05, 0.1, 0.2, 0.5, 0.9] {
            let r = bootstrap_quantile(&d, a).unwrap();
            assert!(r <= prev);
            prev = r;
        }
        assert!(bootstrap_quantile(&[], 0.1).is_err());
        assert!(bootstrap_quantile(&d, 0.0).is_err());
    }

    #[test]
    fn ball_from_replicates() {
        let center = SpdMat::identity(2);
        let reps: Vec<SpdMat> = (0..10)
            .map(|_| SpdMat::from_diag(&[(1.0f64).exp(), 1.0]).unwrap())
            .collect();
        // all distances 1 -> radius 1 for any alpha
        let ball = bootstrap_ball(&center, &reps, 0.3).unwrap();
        assert!((ball.radius - 1.0).abs() < 1e-12);
        assert!(ball.contains(&center));
    }
}
