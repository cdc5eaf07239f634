//! Signal-plus-noise sampling on the dyadic midpoint grid.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::harness::curves::{curve_eval, CurveSpec, NoiseSpec};
use crate::spd::{mat_exp, SpdMat, SymMat};

/// Midpoint of the `k`-th dyadic interval at scale `J`: `t_k = (2k+1)/2^{J+1}`.
pub fn grid_point(j: usize, k: usize) -> f64 {
    (2 * k + 1) as f64 / (1u64 << (j + 1)) as f64
}

/// Draws `X_k = exp(log c(t_k) + xi_k)` on the midpoint grid, where `xi_k`
/// has independent Gaussian entries with the given standard deviations
/// (drawn in the fixed order 11, 22, 12 for each `k`).
pub fn sample_noisy_curve(
    spec: &CurveSpec,
    noise: &NoiseSpec,
    j: usize,
    rng: &mut impl Rng,
) -> Result<Vec<SpdMat>> {
    let n = 1usize << j;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let c = curve_eval(spec, grid_point(j, k))?;
        let mut log = c.log();
        let z11: f64 = rng.sample::<f64, _>(StandardNormal) * noise.sigma_11;
        let z22: f64 = rng.sample::<f64, _>(StandardNormal) * noise.sigma_22;
        let z12: f64 = rng.sample::<f64, _>(StandardNormal) * noise.sigma_12;
        log.axpy(1.0, &SymMat::new(2, vec![z11, z12, z22]).expect("d = 2"));
        out.push(mat_exp(&log)?);
    }
    Ok(out)
}
