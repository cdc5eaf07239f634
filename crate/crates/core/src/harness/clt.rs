//! Statistical sanity checks: the estimator's asymptotic covariance and the
//! bootstrap's conditional covariance, both against their theoretical target.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bootstrap::{bootstrap_replicates_logs, BootstrapConfig, Multiplier};
use crate::error::Result;
use crate::harness::curves::{CurveSpec, NoiseSpec};
use crate::harness::sampling::sample_noisy_curve;
use crate::inference::empirical_covariance_eta;
use crate::pyramid::linear_estimate_logs;
use crate::refinement::{self, RefinementOrder};
use crate::rng::RngStream;
use crate::spd::{SpdMat, SymMat};

/// Configuration of a [`clt_check`] run.
#[derive(Debug, Clone)]
pub struct CltConfig {
    pub curve: CurveSpec,
    pub noise: NoiseSpec,
    pub j: usize,
    pub j0: usize,
    pub order: RefinementOrder,
    /// Fresh-data replicates.
    pub r: usize,
    /// Grid index of the target point.
    pub index: usize,
    pub seed: u64,
}

/// Output of [`clt_check`]: empirical vs theoretical covariance of the
/// eta-vectorized log-estimate at one grid point.
#[derive(Debug, Clone)]
pub struct CltReport {
    pub empirical: DMatrix<f64>,
    /// `2^{-(J - J0)} kappa_N C` under eta.
    pub theoretical: DMatrix<f64>,
    /// Max-norm of the difference over max-norm of the target.
    pub rel_error: f64,
    /// Per-replicate eta vectors of the log-estimate at the target point,
    /// for downstream normality diagnostics.
    pub eta_samples: Vec<Vec<f64>>,
}

/// Estimates the sampling covariance of the estimator at one grid point over
/// `R` independent datasets and compares it with the theoretical limit.
pub fn clt_check(cfg: &CltConfig) -> Result<CltReport> {
    let root = RngStream::new(cfg.seed);
    let logs_at_index: Vec<SymMat> = (0..cfg.r)
        .into_par_iter()
        .map(|rep| {
            let mut rng = root.substream(&[rep as u64]).rng();
            let data = sample_noisy_curve(&cfg.curve, &cfg.noise, cfg.j, &mut rng)?;
            let data_logs: Vec<SymMat> = data.iter().map(SpdMat::log).collect();
            let est = linear_estimate_logs(&data_logs, cfg.j0, &cfg.order);
            Ok(est[cfg.index].clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let empirical = empirical_covariance_eta(&logs_at_index)?;
    let kappa = refinement::kappa(cfg.order.n())?;
    let factor = kappa / (1u64 << (cfg.j - cfg.j0)) as f64;
    let theoretical = cfg.noise.cov_tensor()?.eta_matrix() * factor;
    let rel_error = (&empirical - &theoretical).amax() / theoretical.amax();
    let eta_samples = logs_at_index
        .iter()
        .map(|l| crate::spd::eta_vec(l).values().to_vec())
        .collect();
    Ok(CltReport {
        empirical,
        theoretical,
        rel_error,
        eta_samples,
    })
}

/// Configuration of [`bootstrap_conditional_covariance`].
#[derive(Debug, Clone)]
pub struct BootstrapValidityConfig {
    pub curve: CurveSpec,
    pub noise: NoiseSpec,
    pub j: usize,
    pub j0: usize,
    pub j0_star: usize,
    pub order: RefinementOrder,
    pub b: usize,
    pub index: usize,
    pub multiplier: Multiplier,
    pub seed: u64,
}

/// Draws one dataset, runs the wild bootstrap on it, and returns the
/// conditional covariance of the eta-vectorized log replicate estimates at
/// the target grid point.
pub fn bootstrap_conditional_covariance(
    cfg: &BootstrapValidityConfig,
) -> Result<DMatrix<f64>> {
    let root = RngStream::new(cfg.seed);
    let mut rng = root.substream(&[0]).rng();
    let data = sample_noisy_curve(&cfg.curve, &cfg.noise, cfg.j, &mut rng)?;
    let data_logs: Vec<SymMat> = data.iter().map(SpdMat::log).collect();
    let bcfg = BootstrapConfig {
        j0_star: cfg.j0_star,
        j0: cfg.j0,
        order: cfg.order.clone(),
        b: cfg.b,
        multiplier: cfg.multiplier,
        seed: cfg.seed,
        residual_rescale: false,
    };
    let reps = bootstrap_replicates_logs(&data_logs, &bcfg, &root.substream(&[1]))?;
    let at_index: Vec<SymMat> = reps.into_iter().map(|r| r[cfg.index].clone()).collect();
    empirical_covariance_eta(&at_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_averaging_matches_the_target() {
        // N = 1: the estimate at scale J0-block resolution is the block
        // log-mean, so the covariance is exactly 2^{-(J-J0)} C up to Monte
        // Carlo error
        let cfg = CltConfig {
            curve: CurveSpec::constant(SpdMat::from_diag(&[3.0, 1.5]).unwrap()),
            noise: NoiseSpec::new(0.1, 0.1, 0.1).unwrap(),
            j: 7,
            j0: 4,
            order: RefinementOrder::from_n(1).unwrap(),
            r: 1_500,
            index: 64,
            seed: 31,
        };
        let rep = clt_check(&cfg).unwrap();
        assert!(rep.rel_error < 0.12, "rel error {}", rep.rel_error);
        assert_eq!(rep.eta_samples.len(), 1_500);
    }

    #[test]
    fn conditional_covariance_is_deterministic() {
        let cfg = BootstrapValidityConfig {
            curve: CurveSpec::constant(SpdMat::from_diag(&[2.0, 1.0]).unwrap()),
            noise: NoiseSpec::new(0.1, 0.05, 0.02).unwrap(),
            j: 6,
            j0: 3,
            j0_star: 3,
            order: RefinementOrder::from_n(3).unwrap(),
            b: 50,
            index: 20,
            multiplier: Multiplier::Gaussian,
            seed: 8,
        };
        let a = bootstrap_conditional_covariance(&cfg).unwrap();
        let b = bootstrap_conditional_covariance(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a[(0, 0)] > 0.0);
    }
}
