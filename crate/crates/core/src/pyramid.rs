//! Midpoint pyramid and the forward/backward intrinsic AI wavelet transform
//! with whitened coefficients, plus the linear-thresholding estimator.
//!
//! All multiscale arithmetic happens on matrix logarithms; exponentiation
//! only occurs at the module boundary.

use crate::error::{Error, Result};
use crate::refinement::{predict_pair, RefinementOrder};
use crate::spd::{mat_exp, SpdMat, SymMat};

/// Per-scale midpoint sequences; `levels[j]` has `2^j` entries and each entry
/// is the intrinsic midpoint of its two children.
#[derive(Debug, Clone)]
pub struct MidpointPyramid {
    levels: Vec<Vec<SpdMat>>,
}

impl MidpointPyramid {
    pub fn finest_scale(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, j: usize) -> &[SpdMat] {
        &self.levels[j]
    }
}

/// Coarsest midpoint plus whitened wavelet coefficients. `coeff(j, k)` with
/// `j = 1..=J` pairs the odd midpoints at scale `j` with the prediction from
/// scale `j - 1`.
#[derive(Debug, Clone)]
pub struct WaveletPyramid {
    finest_scale: usize,
    coarsest: SpdMat,
    coeffs: Vec<Vec<SymMat>>, // coeffs[j - 1] has 2^{j-1} entries
    order: RefinementOrder,
}

impl WaveletPyramid {
    pub fn finest_scale(&self) -> usize {
        self.finest_scale
    }

    pub fn coarsest(&self) -> &SpdMat {
        &self.coarsest
    }

    pub fn order(&self) -> &RefinementOrder {
        &self.order
    }

    pub fn coeffs_at_scale(&self, j: usize) -> &[SymMat] {
        &self.coeffs[j - 1]
    }

    pub fn coeff(&self, j: usize, k: usize) -> &SymMat {
        &self.coeffs[j - 1][k]
    }

    /// Sum of squared Frobenius norms over all coefficients.
    pub fn energy(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| c.frob_inner(c))
            .sum()
    }
}

fn check_power_of_two(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NonPowerOfTwo { len });
    }
    Ok(len.trailing_zeros() as usize)
}

/// Reflects an out-of-range index about the sequence boundary, repeatedly for
/// very short sequences.
fn reflect_index(mut idx: i64, n: i64) -> usize {
    loop {
        if idx < 0 {
            idx = -idx - 1;
        } else if idx >= n {
            idx = 2 * n - 1 - idx;
        } else {
            return idx as usize;
        }
    }
}

/// Predicted odd-child logs for the next finer scale, one per coarse index.
/// Windows overhanging the boundary use reflected indices.
fn predict_odd_level(coarse: &[SymMat], order: &RefinementOrder) -> Vec<SymMat> {
    let n = coarse.len() as i64;
    let l = order.l();
    (0..coarse.len())
        .map(|k| {
            let window: Vec<SymMat> = (-(l as i64)..=(l as i64))
                .map(|off| coarse[reflect_index(k as i64 + off, n)].clone())
                .collect();
            let (_, odd) = predict_pair(&window, order).expect("window length by construction");
            odd
        })
        .collect()
}

/// Log-domain midpoint pyramid: `levels[j][k] = (levels[j+1][2k] + levels[j+1][2k+1]) / 2`.
fn log_pyramid(finest: Vec<SymMat>) -> Vec<Vec<SymMat>> {
    let j_max = finest.len().trailing_zeros() as usize;
    let mut levels = vec![Vec::new(); j_max + 1];
    levels[j_max] = finest;
    for j in (0..j_max).rev() {
        let fine = &levels[j + 1];
        levels[j] = (0..fine.len() / 2)
            .map(|k| fine[2 * k].add(&fine[2 * k + 1]).scale(0.5))
            .collect();
    }
    levels
}

fn scale_factor(j: usize) -> f64 {
    ((1u64 << j) as f64).sqrt()
}

pub(crate) struct LogWaveletPyramid {
    pub coarsest: SymMat,
    pub coeffs: Vec<Vec<SymMat>>,
}

pub(crate) fn forward_logs(finest: Vec<SymMat>, order: &RefinementOrder) -> LogWaveletPyramid {
    let levels = log_pyramid(finest);
    let j_max = levels.len() - 1;
    let mut coeffs = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let pred = predict_odd_level(&levels[j - 1], order);
        let inv = 1.0 / scale_factor(j);
        let cj: Vec<SymMat> = (0..levels[j].len() / 2)
            .map(|k| levels[j][2 * k + 1].sub(&pred[k]).scale(inv))
            .collect();
        coeffs.push(cj);
    }
    LogWaveletPyramid {
        coarsest: levels[0][0].clone(),
        coeffs,
    }
}

pub(crate) fn backward_logs(
    coarsest: &SymMat,
    coeffs: &[Vec<SymMat>],
    order: &RefinementOrder,
) -> Vec<SymMat> {
    let mut level = vec![coarsest.clone()];
    for (jm1, cj) in coeffs.iter().enumerate() {
        let j = jm1 + 1;
        let pred = predict_odd_level(&level, order);
        let sf = scale_factor(j);
        let mut next = Vec::with_capacity(level.len() * 2);
        for k in 0..level.len() {
            let mut odd = pred[k].clone();
            odd.axpy(sf, &cj[k]);
            let even = level[k].scale(2.0).sub(&odd);
            next.push(even);
            next.push(odd);
        }
        level = next;
    }
    level
}

pub(crate) fn linear_estimate_logs(
    finest: &[SymMat],
    j0: usize,
    order: &RefinementOrder,
) -> Vec<SymMat> {
    let j_max = finest.len().trailing_zeros() as usize;
    if j0 == j_max {
        return finest.to_vec();
    }
    let mut pyr = forward_logs(finest.to_vec(), order);
    // keep the level-j0 midpoints intact: only coefficients refining levels
    // beyond j0 are zeroed
    for j in (j0 + 1)..=j_max {
        for c in pyr.coeffs[j - 1].iter_mut() {
            *c = SymMat::zeros(c.dim());
        }
    }
    backward_logs(&pyr.coarsest, &pyr.coeffs, order)
}

/// Builds the midpoint pyramid from `2^J` finest-scale matrices.
pub fn build_pyramid(finest: &[SpdMat]) -> Result<MidpointPyramid> {
    check_power_of_two(finest.len())?;
    let logs: Vec<SymMat> = finest.iter().map(SpdMat::log).collect();
    let levels = log_pyramid(logs)
        .into_iter()
        .enumerate()
        .map(|(j, level)| {
            if j == finest.len().trailing_zeros() as usize {
                Ok(finest.to_vec())
            } else {
                level.iter().map(mat_exp).collect::<Result<Vec<_>>>()
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MidpointPyramid { levels })
}

/// Forward AI wavelet transform: coarsest midpoint plus whitened wavelet
/// coefficients `2^{-j/2} (log M_{j,2k+1} - log Mtilde_{j,2k+1})`.
pub fn forward_transform(finest: &[SpdMat], order: &RefinementOrder) -> Result<WaveletPyramid> {
    let j_max = check_power_of_two(finest.len())?;
    if j_max == 0 {
        return Err(Error::InvalidParameter(
            "forward transform needs at least two matrices".into(),
        ));
    }
    let logs: Vec<SymMat> = finest.iter().map(SpdMat::log).collect();
    let pyr = forward_logs(logs, order);
    Ok(WaveletPyramid {
        finest_scale: j_max,
        coarsest: mat_exp(&pyr.coarsest)?,
        coeffs: pyr.coeffs,
        order: order.clone(),
    })
}

/// Exact inverse of [`forward_transform`].
pub fn backward_transform(pyr: &WaveletPyramid) -> Result<Vec<SpdMat>> {
    for (jm1, cj) in pyr.coeffs.iter().enumerate() {
        if cj.len() != 1usize << jm1 {
            return Err(Error::InvalidParameter(format!(
                "coefficient level {} has {} entries, expected {}",
                jm1 + 1,
                cj.len(),
                1usize << jm1
            )));
        }
    }
    let logs = backward_logs(&pyr.coarsest.log(), &pyr.coeffs, &pyr.order);
    logs.iter().map(mat_exp).collect()
}

/// Linear wavelet estimator: keep the midpoints up to level `j0` exactly,
/// zero every finer wavelet coefficient and reconstruct, so levels beyond
/// `j0` are pure order-`N` refinement. `j0 == J` is the identity.
pub fn linear_estimate(
    data: &[SpdMat],
    j0: usize,
    order: &RefinementOrder,
) -> Result<Vec<SpdMat>> {
    let j_max = check_power_of_two(data.len())?;
    if j0 > j_max {
        return Err(Error::ScaleOutOfRange { j0, j: j_max });
    }
    if j0 == j_max {
        return Ok(data.to_vec());
    }
    let logs: Vec<SymMat> = data.iter().map(SpdMat::log).collect();
    linear_estimate_logs(&logs, j0, order)
        .iter()
        .map(mat_exp)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spd::le_distance;

    fn s1(v: f64) -> SpdMat {
        SpdMat::new(SymMat::new(1, vec![v]).unwrap()).unwrap()
    }

    #[test]
    fn reflect_boundary_rule() {
        assert_eq!(reflect_index(-1, 4), 0);
        assert_eq!(reflect_index(-2, 4), 1);
        assert_eq!(reflect_index(4, 4), 3);
        assert_eq!(reflect_index(5, 4), 2);
        assert_eq!(reflect_index(3, 1), 0);
    }

    #[test]
    fn pyramid_midpoints() {
        let e = std::f64::consts::E;
        let inputs = vec![
            SpdMat::identity(2),
            SpdMat::from_diag(&[e * e, e * e]).unwrap(),
        ];
        let pyr = build_pyramid(&inputs).unwrap();
        let top = &pyr.level(0)[0];
        let expect = SpdMat::from_diag(&[e, e]).unwrap();
        assert!(le_distance(top, &expect).unwrap() < 1e-10);
    }

    #[test]
    fn pyramid_constant_and_scalar_logs() {
        let s = SpdMat::from_diag(&[2.0, 5.0]).unwrap();
        let pyr = build_pyramid(&vec![s.clone(); 8]).unwrap();
        for j in 0..=3 {
            for m in pyr.level(j) {
                assert!(le_distance(m, &s).unwrap() < 1e-10);
            }
        }
        // d=1, logs (0,2,4,6) -> level-1 logs (1,5), level-0 log 3
        let inputs: Vec<SpdMat> = [0.0f64, 2.0, 4.0, 6.0].iter().map(|&v| s1(v.exp())).collect();
        let pyr = build_pyramid(&inputs).unwrap();
        assert!((pyr.level(1)[0].get(0, 0).ln() - 1.0).abs() < 1e-10);
        assert!((pyr.level(1)[1].get(0, 0).ln() - 5.0).abs() < 1e-10);
        assert!((pyr.level(0)[0].get(0, 0).ln() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn pyramid_invariant_holds() {
        let inputs: Vec<SpdMat> = (0..8)
            .map(|k| {
                let a = SymMat::from_fn(2, |i, j| {
                    0.3 * ((k + 1) as f64).sin() * (i + j + 1) as f64
                });
                mat_exp(&a).unwrap()
            })
            .collect();
        let pyr = build_pyramid(&inputs).unwrap();
        for j in 0..3 {
            for k in 0..(1 << j) {
                let mid = crate::spd::weighted_ave(
                    &[pyr.level(j + 1)[2 * k].clone(), pyr.level(j + 1)[2 * k + 1].clone()],
                    &[0.5, 0.5],
                )
                .unwrap();
                assert!(le_distance(&pyr.level(j)[k], &mid).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn non_power_of_two_rejected() {
        let inputs = vec![SpdMat::identity(2); 3];
        assert!(matches!(
            build_pyramid(&inputs),
            Err(Error::NonPowerOfTwo { len: 3 })
        ));
    }

    #[test]
    fn forward_constant_gives_zero_coeffs() {
        let s = SpdMat::from_diag(&[2.0, 0.5]).unwrap();
        let order = RefinementOrder::new(1);
        let pyr = forward_transform(&vec![s.clone(); 8], &order).unwrap();
        assert!(le_distance(pyr.coarsest(), &s).unwrap() < 1e-10);
        for j in 1..=3 {
            for c in pyr.coeffs_at_scale(j) {
                assert!(c.frob_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_log_linear_vanishes_for_n3() {
        // geodesic-sampled input: logs linear in k
        let j_max = 4;
        let n = 1 << j_max;
        let inputs: Vec<SpdMat> = (0..n)
            .map(|k| {
                let a = SymMat::from_fn(2, |i, j| {
                    (0.1 + 0.05 * k as f64) * if i == j { 1.0 } else { 0.3 }
                });
                mat_exp(&a).unwrap()
            })
            .collect();
        let order = RefinementOrder::new(1);
        let pyr = forward_transform(&inputs, &order).unwrap();
        // boundary coefficients are exempt: index reflection breaks
        // log-linearity there
        let l = order.l();
        for j in 1..=j_max {
            let n_coarse = 1usize << (j - 1);
            for (k, c) in pyr.coeffs_at_scale(j).iter().enumerate() {
                if k >= l && k + l < n_coarse {
                    assert!(c.frob_norm() < 1e-10, "scale {j}, k {k}: {}", c.frob_norm());
                }
            }
        }
    }

    #[test]
    fn forward_scalar_l0_example() {
        // d=1, J=1, L=0, inputs (e^0, e^2): coarsest e^1, coeff 1/sqrt(2)
        let order = RefinementOrder::new(0);
        let inputs = vec![s1(1.0), s1(2.0_f64.exp())];
        let pyr = forward_transform(&inputs, &order).unwrap();
        assert!((pyr.coarsest().get(0, 0).ln() - 1.0).abs() < 1e-12);
        let c = pyr.coeff(1, 0).get(0, 0);
        assert!((c - 1.0 / 2.0_f64.sqrt()).abs() < 1e-12);
        // round trip
        let back = backward_transform(&pyr).unwrap();
        assert!((back[0].get(0, 0) - 1.0).abs() < 1e-10);
        assert!((back[1].get(0, 0) - 2.0_f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn backward_zero_coeffs_constant_for_any_order() {
        for l in 0..=2 {
            let order = RefinementOrder::new(l);
            let s = s1(3.0_f64.exp());
            let pyr = WaveletPyramid {
                finest_scale: 2,
                coarsest: s.clone(),
                coeffs: vec![vec![SymMat::zeros(1)], vec![SymMat::zeros(1); 2]],
                order,
            };
            let out = backward_transform(&pyr).unwrap();
            assert_eq!(out.len(), 4);
            for m in &out {
                assert!((m.get(0, 0).ln() - 3.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn round_trip_random() {
        let mut state = 42u64;
        let mut rand01 = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for &l in &[0usize, 1, 2] {
            let order = RefinementOrder::new(l);
            let n = 16;
            let inputs: Vec<SpdMat> = (0..n)
                .map(|_| {
                    let a = SymMat::from_fn(2, |_, _| 4.0 * rand01() - 2.0);
                    mat_exp(&a).unwrap()
                })
                .collect();
            let pyr = forward_transform(&inputs, &order).unwrap();
            let back = backward_transform(&pyr).unwrap();
            for (a, b) in inputs.iter().zip(&back) {
                assert!(
                    a.as_sym().sub(b.as_sym()).frob_norm() < 1e-9,
                    "round trip failed for L={l}"
                );
            }
        }
    }

    #[test]
    fn linear_estimate_identity_and_grand_mean() {
        let order = RefinementOrder::new(1);
        let inputs: Vec<SpdMat> = (0..8).map(|k| s1((k as f64 * 0.3).exp())).collect();
        let out = linear_estimate(&inputs, 3, &order).unwrap();
        assert_eq!(out, inputs);

        // constant data, any j0
        let c = SpdMat::from_diag(&[3.0, 7.0]).unwrap();
        let out = linear_estimate(&vec![c.clone(); 8], 1, &order).unwrap();
        for m in &out {
            assert!(le_distance(m, &c).unwrap() < 1e-10);
        }

        // d=1, J=3, J0=0, L=0, logs 0..7 -> all log 3.5
        let order0 = RefinementOrder::new(0);
        let inputs: Vec<SpdMat> = (0..8).map(|k| s1((k as f64).exp())).collect();
        let out = linear_estimate(&inputs, 0, &order0).unwrap();
        for m in &out {
            assert!((m.get(0, 0).ln() - 3.5).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_estimate_j0_out_of_range() {
        let inputs = vec![SpdMat::identity(2); 4];
        assert!(matches!(
            linear_estimate(&inputs, 5, &RefinementOrder::new(0)),
            Err(Error::ScaleOutOfRange { j0: 5, j: 2 })
        ));
    }

    #[test]
    fn determinant_no_swelling_along_pyramid() {
        let inputs: Vec<SpdMat> = (0..8)
            .map(|k| {
                let a = SymMat::from_fn(2, |i, j| 0.2 * (k as f64 + 1.0).ln() * (i * j + 1) as f64);
                mat_exp(&a).unwrap()
            })
            .collect();
        let pyr = build_pyramid(&inputs).unwrap();
        for j in 0..=3 {
            for k in 0..(1usize << j) {
                let below = 1usize << (3 - j);
                let geo_mean: f64 = (0..below)
                    .map(|i| inputs[k * below + i].det().ln())
                    .sum::<f64>()
                    / below as f64;
                let det = pyr.level(j)[k].det();
                assert!(
                    (det - geo_mean.exp()).abs() / geo_mean.exp().abs() < 1e-8,
                    "j={j} k={k}"
                );
            }
        }
    }
}
