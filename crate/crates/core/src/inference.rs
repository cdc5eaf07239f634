//! Covariance model under the eta vectorization, chi-square quantiles,
//! asymptotic confidence ellipsoids, confidence balls, membership tests and
//! Monte Carlo volume estimation in the cone coordinates of `Sym^+(2)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::refinement;
use crate::spd::{eta_inv, eta_vec, mat_exp, EtaVec, SpdMat, SymMat};

// ---------------------------------------------------------------------------
// chi-square quantiles via the regularized incomplete gamma function
// ---------------------------------------------------------------------------

/// ln Gamma(x), Lanczos approximation (g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma function P(a, x): series for small x,
/// continued fraction otherwise.
fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 500;
    let lg = ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        (a * x.ln() - x - lg).exp() * sum
    } else {
        // Lentz continued fraction for Q(a, x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        1.0 - (a * x.ln() - x - lg).exp() * h
    }
}

/// CDF of the chi-square distribution with `dof` degrees of freedom.
pub fn chi2_cdf(dof: usize, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_p(dof as f64 / 2.0, x / 2.0)
    }
}

/// Quantile of the chi-square distribution: the `x` with `CDF(dof, x) = p`.
pub fn chi2_quantile(dof: usize, p: f64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::InvalidParameter("dof must be positive".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile probability must be in (0,1), got {p}"
        )));
    }
    let mut hi = dof as f64;
    while chi2_cdf(dof, hi) < p {
        hi *= 2.0;
        if hi > 1e10 {
            break;
        }
    }
    let mut lo = 0.0;
    // bisection well past the 1e-12 target
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(dof, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// covariance operator under eta
// ---------------------------------------------------------------------------

/// Row index of entry `(i, j)` in the eta ordering (diagonal first, then
/// above-diagonal row-wise).
pub(crate) fn eta_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        i
    } else {
        d + i * (d - 1) - i * i.saturating_sub(1) / 2 + (j - i - 1)
    }
}

fn eta_scale(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        std::f64::consts::SQRT_2
    }
}

fn sym_eigen_dense(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    crate::spd::sym_eigen(&SymMat::from_dense(m))
}

/// Covariance operator of the log-noise, carried as its `q x q` matrix under
/// the eta isometry; the tensor coefficients `sigma_{ijnm}` are recoverable
/// through [`CovTensor::coeff`].
#[derive(Debug, Clone)]
pub struct CovTensor {
    dim: usize,
    eta_matrix: DMatrix<f64>,
}

impl CovTensor {
    /// From the `q x q` matrix under eta. Must be symmetric positive definite.
    pub fn from_eta_matrix(dim: usize, eta_matrix: DMatrix<f64>) -> Result<Self> {
        let q = dim * (dim + 1) / 2;
        if eta_matrix.nrows() != q || eta_matrix.ncols() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                got: eta_matrix.nrows(),
            });
        }
        let asym = (&eta_matrix - eta_matrix.transpose()).amax();
        if asym > 1e-10 * (1.0 + eta_matrix.amax()) {
            return Err(Error::InvalidParameter(
                "eta covariance matrix is not symmetric".into(),
            ));
        }
        let (eigvals, _) = sym_eigen_dense(&eta_matrix)?;
        if !(eigvals.last().copied().unwrap_or(f64::NAN) > 0.0) {
            return Err(Error::SingularCovariance);
        }
        Ok(CovTensor { dim, eta_matrix })
    }

    /// Independent-entries model: entry `(i, j)` of the log-noise has standard
    /// deviation `sigmas[i][j]`, entries independent. Under eta this is
    /// `diag(sigma_11^2, ..., sigma_dd^2, 2 sigma_12^2, ...)`.
    pub fn from_entry_sigmas(sigmas: &SymMat) -> Result<Self> {
        let d = sigmas.dim();
        let q = d * (d + 1) / 2;
        let mut m = DMatrix::<f64>::zeros(q, q);
        for i in 0..d {
            for j in i..d {
                let a = eta_index(d, i, j);
                let s = sigmas.get(i, j);
                m[(a, a)] = eta_scale(i, j).powi(2) * s * s;
            }
        }
        Self::from_eta_matrix(d, m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    pub fn eta_matrix(&self) -> &DMatrix<f64> {
        &self.eta_matrix
    }

    /// Largest eigenvalue of the covariance under eta (the worst-direction
    /// noise variance).
    pub fn lambda_max(&self) -> Result<f64> {
        let (eigvals, _) = sym_eigen_dense(&self.eta_matrix)?;
        Ok(eigvals[0])
    }

    /// Tensor coefficient `sigma_{ijnm} = Cov((xi)_{ij}, (xi)_{nm})`, with
    /// its index symmetries.
    pub fn coeff(&self, i: usize, j: usize, n: usize, m: usize) -> f64 {
        let a = eta_index(self.dim, i, j);
        let b = eta_index(self.dim, n, m);
        self.eta_matrix[(a, b)] / (eta_scale(i, j) * eta_scale(n, m))
    }

    /// `C^{-1}` under eta.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.spectral_map(|l| {
            if l <= 0.0 {
                Err(Error::SingularCovariance)
            } else {
                Ok(1.0 / l)
            }
        })
    }

    /// `C^{1/2}` under eta.
    pub fn sqrt(&self) -> Result<DMatrix<f64>> {
        self.spectral_map(|l| Ok(l.max(0.0).sqrt()))
    }

    fn spectral_map(&self, f: impl Fn(f64) -> Result<f64>) -> Result<DMatrix<f64>> {
        let (eigvals, q) = sym_eigen_dense(&self.eta_matrix)?;
        let fv = eigvals.into_iter().map(f).collect::<Result<Vec<_>>>()?;
        let n = self.q();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| q[(i, k)] * fv[k] * q[(j, k)]).sum()
        }))
    }
}

/// Unbiased sample covariance of the eta vectors of `samples`.
pub fn empirical_covariance_eta(samples: &[SymMat]) -> Result<DMatrix<f64>> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter(
            "covariance needs at least two samples".into(),
        ));
    }
    let d = samples[0].dim();
    if samples.iter().any(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: samples.iter().map(SymMat::dim).find(|&x| x != d).unwrap(),
        });
    }
    let q = d * (d + 1) / 2;
    let vecs: Vec<DVector<f64>> = samples
        .iter()
        .map(|s| DVector::from_vec(eta_vec(s).values().to_vec()))
        .collect();
    let mean = vecs.iter().fold(DVector::zeros(q), |acc, v| acc + v) / samples.len() as f64;
    let mut cov = DMatrix::<f64>::zeros(q, q);
    for v in &vecs {
        let c = v - &mean;
        cov += &c * c.transpose();
    }
    Ok(cov / (samples.len() - 1) as f64)
}

// ---------------------------------------------------------------------------
// confidence sets
// ---------------------------------------------------------------------------

/// Common membership/volume surface of the two confidence-set families.
pub trait ConfidenceSet {
    fn center(&self) -> &SpdMat;
    /// Closed-set membership.
    fn contains(&self, s: &SpdMat) -> bool;
    /// Boundary point in eta-log coordinates for a unit direction in `R^q`.
    fn boundary_eta_log(&self, dir: &[f64]) -> Vec<f64>;
}

/// Asymptotic confidence ellipsoid: membership is
/// `2^{J-J0} kappa_N^{-1} (eta(log Mhat) - eta(log S))^T C^{-1} (..) <= chi2_{q, level}`.
#[derive(Debug, Clone)]
pub struct EllipsoidCS {
    center: SpdMat,
    center_eta: Vec<f64>,
    metric_matrix: DMatrix<f64>, // C^{-1} under eta
    half_map: DMatrix<f64>,      // sqrt(radius_sq / scale) * C^{1/2}
    radius_sq: f64,
    scale: f64,
    pub alpha: f64,
    pub j: usize,
    pub j0: usize,
    pub order_n: usize,
}

impl EllipsoidCS {
    pub fn radius_sq(&self) -> f64 {
        self.radius_sq
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn metric_matrix(&self) -> &DMatrix<f64> {
        &self.metric_matrix
    }

    /// Left side of the defining inequality for a candidate point.
    pub fn quadratic_form(&self, s: &SpdMat) -> f64 {
        self.quadratic_form_eta(&crate::spd::eta_log(s))
    }

    pub(crate) fn quadratic_form_eta(&self, eta_log_s: &[f64]) -> f64 {
        let q = self.center_eta.len();
        let mut diff = vec![0.0; q];
        for i in 0..q {
            diff[i] = self.center_eta[i] - eta_log_s[i];
        }
        let mut acc = 0.0;
        for i in 0..q {
            for j in 0..q {
                acc += diff[i] * self.metric_matrix[(i, j)] * diff[j];
            }
        }
        self.scale * acc
    }
}

impl ConfidenceSet for EllipsoidCS {
    fn center(&self) -> &SpdMat {
        &self.center
    }

    fn contains(&self, s: &SpdMat) -> bool {
        self.quadratic_form(s) <= self.radius_sq
    }

    fn boundary_eta_log(&self, dir: &[f64]) -> Vec<f64> {
        let q = self.center_eta.len();
        (0..q)
            .map(|i| {
                self.center_eta[i]
                    + (0..q).map(|k| self.half_map[(i, k)] * dir[k]).sum::<f64>()
            })
            .collect()
    }
}

/// Log-Euclidean metric ball.
#[derive(Debug, Clone)]
pub struct BallCS {
    pub center: SpdMat,
    pub radius: f64,
    center_eta: Vec<f64>,
}

impl BallCS {
    pub fn new(center: SpdMat, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be nonnegative, got {radius}"
            )));
        }
        let center_eta = crate::spd::eta_log(&center);
        Ok(BallCS {
            center,
            radius,
            center_eta,
        })
    }
}

impl ConfidenceSet for BallCS {
    fn center(&self) -> &SpdMat {
        &self.center
    }

    fn contains(&self, s: &SpdMat) -> bool {
        let v = crate::spd::eta_log(s);
        let dist_sq: f64 = v
            .iter()
            .zip(&self.center_eta)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        dist_sq.sqrt() <= self.radius
    }

    fn boundary_eta_log(&self, dir: &[f64]) -> Vec<f64> {
        self.center_eta
            .iter()
            .zip(dir)
            .map(|(c, u)| c + self.radius * u)
            .collect()
    }
}

/// Builds the asymptotic confidence set around the wavelet estimate.
///
/// `level` is the nominal coverage (e.g. 0.9): the squared radius is the
/// `level`-quantile of the chi-square distribution with `q` degrees of
/// freedom, and the quadratic form is scaled by `2^{J - J0} / kappa_N`.
pub fn asymptotic_cs(
    estimate: &SpdMat,
    cov: &CovTensor,
    j: usize,
    j0: usize,
    order_n: usize,
    level: f64,
) -> Result<EllipsoidCS> {
    if cov.dim() != estimate.dim() {
        return Err(Error::DimensionMismatch {
            expected: estimate.dim(),
            got: cov.dim(),
        });
    }
    if j0 > j {
        return Err(Error::ScaleOutOfRange { j0, j });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must be in (0,1), got {level}"
        )));
    }
    let q = cov.q();
    let kappa = refinement::kappa(order_n)?;
    let scale = ((1u64 << (j - j0)) as f64) / kappa;
    let radius_sq = chi2_quantile(q, level)?;
    let metric_matrix = cov.inverse()?;
    let half_map = cov.sqrt()? * (radius_sq / scale).sqrt();
    Ok(EllipsoidCS {
        center_eta: crate::spd::eta_log(estimate),
        center: estimate.clone(),
        metric_matrix,
        half_map,
        radius_sq,
        scale,
        alpha: level,
        j,
        j0,
        order_n,
    })
}

/// Closed-set membership test.
pub fn cs_contains<C: ConfidenceSet + ?Sized>(cs: &C, s: &SpdMat) -> bool {
    cs.contains(s)
}

// ---------------------------------------------------------------------------
// Monte Carlo volumes in cone coordinates (d = 2)
// ---------------------------------------------------------------------------

/// Deterministic unit-sphere mesh in `R^3` (theta-phi grid plus poles).
fn sphere_mesh() -> Vec<[f64; 3]> {
    let mut dirs = vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    let nt = 24;
    let np = 48;
    for it in 1..nt {
        let theta = std::f64::consts::PI * it as f64 / nt as f64;
        for ip in 0..np {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / np as f64;
            dirs.push([
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ]);
        }
    }
    dirs
}

fn cone_coords(s: &SpdMat) -> [f64; 3] {
    [s.get(0, 0), s.get(1, 1), s.get(0, 1)]
}

/// Rejection-sampling estimate of the Lebesgue volume of a confidence set in
/// the cone coordinates `(x, y, z)` of `Sym^+(2)`. Returns the volume and one
/// standard error.
///
/// The bounding box is the axis-aligned hull of the exp-image of a
/// deterministic boundary mesh, inflated by 5%.
pub fn cs_volume_mc<C: ConfidenceSet + ?Sized>(
    cs: &C,
    rng: &mut impl Rng,
    n_samples: usize,
) -> Result<(f64, f64)> {
    if cs.center().dim() != 2 {
        return Err(Error::InvalidParameter(
            "volumes are defined in the cone coordinates of d = 2".into(),
        ));
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for dir in sphere_mesh() {
        let v = cs.boundary_eta_log(&dir);
        let a = eta_inv(&EtaVec::new(v).expect("q = 3"));
        let s = mat_exp(&a)?;
        let p = cone_coords(&s);
        for i in 0..3 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let mut vol_box = 1.0;
    let mut ext = [0.0; 3];
    for i in 0..3 {
        let c = 0.5 * (lo[i] + hi[i]);
        let h = 0.5 * (hi[i] - lo[i]) * 1.05;
        lo[i] = c - h;
        hi[i] = c + h;
        ext[i] = 2.0 * h;
        vol_box *= ext[i];
    }
    if !(vol_box > 0.0) || !vol_box.is_finite() {
        return Err(Error::DegenerateBox);
    }
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let x = lo[0] + ext[0] * rng.gen::<f64>();
        let y = lo[1] + ext[1] * rng.gen::<f64>();
        let z = lo[2] + ext[2] * rng.gen::<f64>();
        if x <= 0.0 || x * y <= z * z {
            continue;
        }
        let s = SpdMat::from_sym_unchecked(SymMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) => x,
            (1, 1) => y,
            _ => z,
        }));
        if cs.contains(&s) {
            hits += 1;
        }
    }
    let frac = hits as f64 / n_samples as f64;
    let se = vol_box * (frac * (1.0 - frac) / n_samples as f64).sqrt();
    Ok((vol_box * frac, se))
}

/// Volume of the exp-image of the unit eta-ball at `center`; the reference
/// set for scaled volumes.
pub fn unit_ball_volume(center: &SpdMat, rng: &mut impl Rng, n_samples: usize) -> Result<(f64, f64)> {
    let ball = BallCS::new(center.clone(), 1.0)?;
    cs_volume_mc(&ball, rng, n_samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn chi2_quantile_examples() {
        // dof = 2 closed form: x = -2 ln(1 - p)
        let x = chi2_quantile(2, 0.9).unwrap();
        assert!((x - 4.605170185988091).abs() < 1e-8);
        let x = chi2_quantile(3, 0.9).unwrap();
        assert!((x - 6.251388631170325).abs() < 1e-6);
        let x = chi2_quantile(1, 0.5).unwrap();
        assert!((x - 0.454936423119573).abs() < 1e-8);
    }

    #[test]
    fn chi2_quantile_monotone_and_errors() {
        let a = chi2_quantile(4, 0.5).unwrap();
        let b = chi2_quantile(4, 0.9).unwrap();
        assert!(b > a);
        assert!(chi2_quantile(3, 0.0).is_err());
        assert!(chi2_quantile(3, 1.0).is_err());
        assert!(chi2_quantile(0, 0.5).is_err());
    }

    #[test]
    fn chi2_cdf_round_trip() {
        for dof in [1usize, 2, 3, 5, 10] {
            for &p in &[0.5, 0.9, 0.95, 0.975, 0.99] {
                let x = chi2_quantile(dof, p).unwrap();
                assert!((chi2_cdf(dof, x) - p).abs() < 1e-10, "dof={dof} p={p}");
            }
        }
    }

    #[test]
    fn cov_tensor_independent_entries() {
        let sigmas = SymMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) => 0.05,
            (1, 1) => 0.1,
            _ => 0.01,
        });
        let c = CovTensor::from_entry_sigmas(&sigmas).unwrap();
        let m = c.eta_matrix();
        assert!((m[(0, 0)] - 0.0025).abs() < 1e-15);
        assert!((m[(1, 1)] - 0.01).abs() < 1e-15);
        assert!((m[(2, 2)] - 2.0 * 0.0001).abs() < 1e-15);
        // tensor coefficients recover sigma^2
        assert!((c.coeff(0, 1, 0, 1) - 0.0001).abs() < 1e-15);
        assert!((c.coeff(0, 1, 1, 0) - 0.0001).abs() < 1e-15);
        assert!((c.coeff(0, 0, 1, 1)).abs() < 1e-15);
    }

    #[test]
    fn empirical_covariance_examples() {
        let zero = SymMat::zeros(2);
        let cov = empirical_covariance_eta(&[zero.clone(), zero.clone()]).unwrap();
        assert!(cov.amax() < 1e-15);
        // eta = (0,0,0) and (2,0,0): entry (0,0) is 2 with divisor n-1 = 1
        let a = SymMat::from_fn(2, |i, j| if i == 0 && j == 0 { 2.0 } else { 0.0 });
        let cov = empirical_covariance_eta(&[zero, a]).unwrap();
        assert!((cov[(0, 0)] - 2.0).abs() < 1e-14);
        assert!(cov.amax() - 2.0 < 1e-14);
        assert!(empirical_covariance_eta(&[SymMat::zeros(2)]).is_err());
    }

    #[test]
    fn ellipsoid_membership() {
        let center = SpdMat::identity(2);
        let cov =
            CovTensor::from_eta_matrix(2, DMatrix::identity(3, 3)).unwrap();
        // J = J0, N = 1 so kappa = 1 and scale = 1
        let cs = asymptotic_cs(&center, &cov, 5, 5, 1, 0.9).unwrap();
        assert!(cs.contains(&center));
        // boundary point: eta-log difference with squared norm chi2_{3,0.9}
        let r = chi2_quantile(3, 0.9).unwrap().sqrt();
        let s = mat_exp(&eta_inv(
            &EtaVec::new(vec![r, 0.0, 0.0]).unwrap(),
        ))
        .unwrap();
        assert!(cs.contains(&s), "closed set contains its boundary");
        // widening J - J0 by one doubles the quadratic form
        let cs2 = asymptotic_cs(&center, &cov, 6, 5, 1, 0.9).unwrap();
        assert!(!cs2.contains(&s));
        assert!((cs2.quadratic_form(&s) - 2.0 * cs.quadratic_form(&s)).abs() < 1e-9);
    }

    #[test]
    fn ball_membership() {
        let e2 = SpdMat::from_diag(&[(2.0f64).exp(), 1.0]).unwrap();
        let ball = BallCS::new(SpdMat::identity(2), 2.0).unwrap();
        assert!(ball.contains(&e2), "distance exactly 2, closed");
        let ball = BallCS::new(SpdMat::identity(2), 1.9).unwrap();
        assert!(!ball.contains(&e2));
        assert!(ball.contains(ball.center()));
        assert!(BallCS::new(SpdMat::identity(2), -1.0).is_err());
    }

    #[test]
    fn tiny_ball_volume_vanishes() {
        let ball = BallCS::new(SpdMat::identity(2), 1e-3).unwrap();
        let mut rng = RngStream::new(1).rng();
        let (vol, _) = cs_volume_mc(&ball, &mut rng, 20_000).unwrap();
        assert!(vol < 1e-6, "vol = {vol}");
    }

    #[test]
    fn unit_ball_scaled_volume_is_one() {
        let center = SpdMat::from_diag(&[2.0, 0.7]).unwrap();
        let ball = BallCS::new(center.clone(), 1.0).unwrap();
        let mut rng = RngStream::new(2).rng();
        let (vol, se) = cs_volume_mc(&ball, &mut rng, 40_000).unwrap();
        let mut rng = RngStream::new(2).rng();
        let (unit, _) = unit_ball_volume(&center, &mut rng, 40_000).unwrap();
        assert!((vol / unit - 1.0).abs() < 1e-12);
        assert!(se > 0.0);
    }
}
