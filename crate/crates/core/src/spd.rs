//! Log-Euclidean geometry on the manifold of symmetric positive-definite
//! matrices: symmetric eigendecomposition, matrix log/exp, distance,
//! geodesics, weighted intrinsic means and the eta vectorization.
//!
//! All distances and means here are taken with respect to the log-Euclidean
//! metric, `d(S1, S2) = ||log S2 - log S1||_F`, under which the matrix
//! logarithm is a global isometry onto the flat space `Sym(d)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real symmetric `d x d` matrix, stored as the row-major upper triangle
/// (diagonal included). Tangent-space / log-domain element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatRepr", into = "MatRepr")]
pub struct SymMat {
    dim: usize,
    upper: Vec<f64>,
}

/// A symmetric positive-definite `d x d` matrix (manifold element).
/// Strict positivity of all eigenvalues is checked on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatRepr", into = "MatRepr")]
pub struct SpdMat {
    inner: SymMat,
}

/// JSON wire format shared by `SymMat` and `SpdMat`:
/// `{"dim": d, "upper": [row-major upper triangle including diagonal]}`.
#[derive(Serialize, Deserialize)]
struct MatRepr {
    dim: usize,
    upper: Vec<f64>,
}

impl TryFrom<MatRepr> for SymMat {
    type Error = Error;
    fn try_from(r: MatRepr) -> Result<Self> {
        SymMat::new(r.dim, r.upper)
    }
}

impl From<SymMat> for MatRepr {
    fn from(m: SymMat) -> Self {
        MatRepr {
            dim: m.dim,
            upper: m.upper,
        }
    }
}

impl TryFrom<MatRepr> for SpdMat {
    type Error = Error;
    fn try_from(r: MatRepr) -> Result<Self> {
        SpdMat::new(SymMat::new(r.dim, r.upper)?)
    }
}

impl From<SpdMat> for MatRepr {
    fn from(m: SpdMat) -> Self {
        MatRepr {
            dim: m.inner.dim,
            upper: m.inner.upper,
        }
    }
}

#[inline]
fn tri_len(d: usize) -> usize {
    d * (d + 1) / 2
}

#[inline]
fn upper_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < dim);
    i * (2 * dim - i + 1) / 2 + (j - i)
}

impl SymMat {
    /// Builds a symmetric matrix from its row-major upper triangle.
    pub fn new(dim: usize, upper: Vec<f64>) -> Result<Self> {
        if dim == 0 || upper.len() != tri_len(dim) {
            return Err(Error::DimensionMismatch {
                expected: tri_len(dim.max(1)),
                got: upper.len(),
            });
        }
        if upper.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(SymMat { dim, upper })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(tri_len(dim));
        for i in 0..dim {
            for j in i..dim {
                upper.push(f(i, j));
            }
        }
        SymMat { dim, upper }
    }

    pub fn zeros(dim: usize) -> Self {
        SymMat {
            dim,
            upper: vec![0.0; tri_len(dim)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Symmetrizes a dense matrix (averaging off-diagonal pairs).
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.upper[upper_index(self.dim, i, j)]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_inner(self).sqrt()
    }

    /// Frobenius inner product `<A, B>_F = trace(A B)`.
    pub fn frob_inner(&self, other: &SymMat) -> f64 {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = 0.0;
        let mut idx = 0;
        for i in 0..d {
            for j in i..d {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.upper[idx] * other.upper[idx];
                idx += 1;
            }
        }
        acc
    }

    pub fn scale(&self, c: f64) -> SymMat {
        SymMat {
            dim: self.dim,
            upper: self.upper.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.dim, other.dim);
        SymMat {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.dim, other.dim);
        SymMat {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self + c * other`, in place.
    pub fn axpy(&mut self, c: f64, other: &SymMat) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += c * b;
        }
    }

    /// Matrix exponential; the result is SPD by construction.
    pub fn exp(&self) -> Result<SpdMat> {
        mat_exp(self)
    }
}

impl SpdMat {
    /// Checks strict positive definiteness via the symmetric eigensolver.
    pub fn new(sym: SymMat) -> Result<Self> {
        let (eigvals, _) = sym_eigen(&sym)?;
        let min = eigvals.last().copied().unwrap_or(f64::NAN);
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        Ok(SpdMat { inner: sym })
    }

    /// For results that are SPD by construction (e.g. `exp` of a symmetric
    /// matrix); skips the eigenvalue check.
    pub(crate) fn from_sym_unchecked(sym: SymMat) -> Self {
        SpdMat { inner: sym }
    }

    pub fn identity(dim: usize) -> Self {
        SpdMat {
            inner: SymMat::identity(dim),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        if diag.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: diag.iter().cloned().fold(f64::INFINITY, f64::min),
            });
        }
        let d = diag.len();
        Ok(SpdMat {
            inner: SymMat::from_fn(d, |i, j| if i == j { diag[i] } else { 0.0 }),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn as_sym(&self) -> &SymMat {
        &self.inner
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.inner.to_dense()
    }

    pub fn det(&self) -> f64 {
        self.to_dense().determinant()
    }

    /// Principal matrix logarithm.
    pub fn log(&self) -> SymMat {
        // Eigenvalues are strictly positive by the construction invariant.
        mat_log(self).expect("SPD invariant violated")
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the orthogonal matrix whose
/// columns are the corresponding eigenvectors. Iteration cap: 100 sweeps,
/// off-diagonal tolerance `1e-14 * ||S||_F`.
pub fn sym_eigen(s: &SymMat) -> Result<(Vec<f64>, DMatrix<f64>)> {
    const MAX_SWEEPS: usize = 100;
    let d = s.dim;
    let mut a = s.to_dense();
    let mut q = DMatrix::<f64>::identity(d, d);
    let tol = 1e-14 * s.frob_norm();

    if d == 1 {
        return Ok((vec![a[(0, 0)]], q));
    }

    let off_norm = |a: &DMatrix<f64>| {
        let mut acc = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                acc += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        acc.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > tol {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::EigenNonConvergence {
                sweeps,
                off_norm: off_norm(&a),
                input: s.clone(),
            });
        }
        for p in 0..d {
            for r in (p + 1)..d {
                let apr = a[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                // Rotation angle annihilating a[p][r] (Numerical Recipes 11.1).
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * apr);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_ = t * c;
                let tau = s_ / (1.0 + c);

                let app = a[(p, p)];
                let arr = a[(r, r)];
                a[(p, p)] = app - t * apr;
                a[(r, r)] = arr + t * apr;
                a[(p, r)] = 0.0;
                a[(r, p)] = 0.0;
                for k in 0..d {
                    if k != p && k != r {
                        let akp = a[(k, p)];
                        let akr = a[(k, r)];
                        a[(k, p)] = akp - s_ * (akr + tau * akp);
                        a[(p, k)] = a[(k, p)];
                        a[(k, r)] = akr + s_ * (akp - tau * akr);
                        a[(r, k)] = a[(k, r)];
                    }
                }
                for k in 0..d {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = qkp - s_ * (qkr + tau * qkp);
                    q[(k, r)] = qkr + s_ * (qkp - tau * qkr);
                }
            }
        }
        sweeps += 1;
    }

    // Sort descending, permuting eigenvector columns accordingly.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let eigvals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut qs = DMatrix::<f64>::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..d {
            qs[(k, new)] = q[(k, old)];
        }
    }
    Ok((eigvals, qs))
}

fn apply_spectral(s: &SymMat, f: impl Fn(f64) -> f64) -> Result<SymMat> {
    let (eigvals, q) = sym_eigen(s)?;
    let d = s.dim;
    let fv: Vec<f64> = eigvals.iter().map(|&l| f(l)).collect();
    let out = SymMat::from_fn(d, |i, j| {
        (0..d).map(|k| q[(i, k)] * fv[k] * q[(j, k)]).sum()
    });
    Ok(out)
}

/// Principal matrix logarithm of an SPD matrix.
pub fn mat_log(s: &SpdMat) -> Result<SymMat> {
    let (eigvals, q) = sym_eigen(s.as_sym())?;
    let min = *eigvals.last().unwrap();
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let d = s.dim();
    let lv: Vec<f64> = eigvals.iter().map(|l| l.ln()).collect();
    Ok(SymMat::from_fn(d, |i, j| {
        (0..d).map(|k| q[(i, k)] * lv[k] * q[(j, k)]).sum()
    }))
}

/// Matrix exponential of a symmetric matrix.
pub fn mat_exp(a: &SymMat) -> Result<SpdMat> {
    // exp overflows past ~709.78 for f64.
    const EXP_MAX: f64 = 709.0;
    let (eigvals, _) = sym_eigen(a)?;
    if let Some(&l) = eigvals.iter().find(|&&l| l > EXP_MAX) {
        return Err(Error::Overflow { eigenvalue: l });
    }
    let sym = apply_spectral(a, f64::exp)?;
    Ok(SpdMat::from_sym_unchecked(sym))
}

/// Log-Euclidean distance `||log S2 - log S1||_F`.
pub fn le_distance(s1: &SpdMat, s2: &SpdMat) -> Result<f64> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            got: s2.dim(),
        });
    }
    Ok(s2.log().sub(&s1.log()).frob_norm())
}

/// Point at parameter `t` on the log-Euclidean geodesic through `S1`, `S2`;
/// any real `t` is allowed (extrapolation included).
pub fn geodesic(t: f64, s1: &SpdMat, s2: &SpdMat) -> Result<SpdMat> {
    weighted_ave(
        &[s1.clone(), s2.clone()],
        &[1.0 - t, t],
    )
}

/// Weighted intrinsic (Frechet) mean `exp(sum_i w_i log S_i)`.
/// Negative weights are allowed; the weights must sum to 1.
pub fn weighted_ave(matrices: &[SpdMat], weights: &[f64]) -> Result<SpdMat> {
    if matrices.is_empty() {
        return Err(Error::EmptyInput);
    }
    if matrices.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: matrices.len(),
            got: weights.len(),
        });
    }
    let d = matrices[0].dim();
    if matrices.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: matrices.iter().map(SpdMat::dim).find(|&x| x != d).unwrap(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() >= 1e-12 {
        return Err(Error::WeightSum { sum });
    }
    let mut acc = SymMat::zeros(d);
    for (m, &w) in matrices.iter().zip(weights) {
        acc.axpy(w, &m.log());
    }
    mat_exp(&acc)
}

/// Image of `Sym(d)` in `R^q`, `q = d(d+1)/2`, under the isometric
/// vectorization that stacks the diagonal first and then the sqrt(2)-scaled
/// above-diagonal entries row-wise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaVec {
    dim: usize,
    values: Vec<f64>,
}

impl EtaVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        // Invert q = d(d+1)/2.
        let q = values.len();
        let d = ((-1.0 + (1.0 + 8.0 * q as f64).sqrt()) / 2.0).round() as usize;
        if d == 0 || tri_len(d) != q {
            return Err(Error::BadEtaLength { len: q });
        }
        Ok(EtaVec { dim: d, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Vectorization `eta(A)`.
pub fn eta_vec(a: &SymMat) -> EtaVec {
    let d = a.dim();
    let mut values = Vec::with_capacity(tri_len(d));
    for i in 0..d {
        values.push(a.get(i, i));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            values.push(SQRT2 * a.get(i, j));
        }
    }
    EtaVec { dim: d, values }
}

/// Inverse of [`eta_vec`].
pub fn eta_inv(x: &EtaVec) -> SymMat {
    let d = x.dim;
    SymMat::from_fn(d, |i, j| {
        if i == j {
            x.values[i]
        } else {
            // off-diagonal block starts at d; pairs ordered row-wise
            let idx = d + i * (d - 1) - i * (i.saturating_sub(1)) / 2 + (j - i - 1);
            x.values[idx] / SQRT2
        }
    })
}

/// Raw eta coordinates of `log S` as a plain vector; convenience for the
/// inference module.
pub fn eta_log(s: &SpdMat) -> Vec<f64> {
    eta_vec(&s.log()).values
}
