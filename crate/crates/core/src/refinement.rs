//! Intrinsic average-interpolation refinement: prediction weights, midpoint
//! prediction, the Neville interpolation scheme the weights derive from, and
//! the even/odd transition matrices with their infinite-product limit.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use num::{BigRational, FromPrimitive, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spd::{mat_exp, SpdMat, SymMat};

/// Refinement order `N = 2L + 1` together with the prediction weights
/// `(c_1, ..., c_L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementOrder {
    l: usize,
    weights: Vec<f64>,
}

impl RefinementOrder {
    /// Order from the half-width `L`. Weights for `L <= 3` come from the
    /// exact rational table; larger `L` is derived (and cached) via the
    /// Neville construction.
    pub fn new(l: usize) -> Self {
        RefinementOrder {
            l,
            weights: prediction_weights(l),
        }
    }

    /// Order from `N = 2L + 1`; fails for even `N`.
    pub fn from_n(n: usize) -> Result<Self> {
        if n == 0 || n % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "refinement order N must be odd, got {n}"
            )));
        }
        Ok(Self::new((n - 1) / 2))
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        2 * self.l + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Hardcoded exact prediction weights for `L <= 3`.
fn weights_table(l: usize) -> Option<Vec<BigRational>> {
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    match l {
        0 => Some(vec![]),
        1 => Some(vec![r(-1, 8)]),
        2 => Some(vec![r(-22, 128), r(3, 128)]),
        3 => Some(vec![r(-201, 1024), r(44, 1024), r(-5, 1024)]),
        _ => None,
    }
}

/// Prediction weights `(c_1, ..., c_L)` as exact rationals; the hardcoded
/// table is authoritative for `L <= 3`, larger orders are derived.
pub fn prediction_weights_exact(l: usize) -> Vec<BigRational> {
    weights_table(l).unwrap_or_else(|| derive_weights_neville(l))
}

/// Prediction weights `(c_1, ..., c_L)` as floating values.
pub fn prediction_weights(l: usize) -> Vec<f64> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(w) = cache.lock().unwrap().get(&l) {
        return w.clone();
    }
    let w: Vec<f64> = prediction_weights_exact(l)
        .iter()
        .map(|r| r.to_f64().unwrap())
        .collect();
    cache.lock().unwrap().insert(l, w.clone());
    w
}

/// Scalar Neville evaluation over exact rationals.
fn neville_rational(nodes: &[(BigRational, BigRational)], x: &BigRational) -> BigRational {
    let n = nodes.len();
    let mut p: Vec<BigRational> = nodes.iter().map(|(_, y)| y.clone()).collect();
    for span in 1..n {
        for i in 0..(n - span) {
            let xi = &nodes[i].0;
            let xj = &nodes[i + span].0;
            p[i] = (&p[i] * (xj - x) + &p[i + 1] * (x - xi)) / (xj - xi);
        }
    }
    p[0].clone()
}

/// Derives the prediction weights by running the scalar average-interpolation
/// construction symbolically: interpolate the cumulative means of the
/// Kronecker-delta coarse sequences and read off the even-child coefficients.
///
/// This is the independent oracle backing [`prediction_weights`].
pub fn derive_weights_neville(l: usize) -> Vec<BigRational> {
    let n = 2 * l + 1;
    // For basis input m_s = delta_{s, .}, s = 0..N-1, compute the even-child
    // prediction weight on m_s. Abscissae in units of the coarse step: the
    // cumulative mean over the first `t` intervals sits at x = t, and the even
    // child's right endpoint is x* = L + 1/2.
    let big = |v: i64| BigRational::from_i64(v).unwrap();
    let x_star = big(2 * l as i64 + 1) / big(2);
    let mut even = vec![BigRational::zero(); n];
    for s in 0..n {
        let nodes: Vec<(BigRational, BigRational)> = (1..=n)
            .map(|t| {
                // cumulative mean of m_0..m_{t-1}
                let y = if s < t {
                    big(1) / big(t as i64)
                } else {
                    BigRational::zero()
                };
                (big(t as i64), y)
            })
            .collect();
        let pi = neville_rational(&nodes, &x_star);
        // even child = (2L+1) * pi(x*) - 2L * cumulative-mean-over-L
        let mbar_l = if l > 0 && s < l {
            big(1) / big(l as i64)
        } else {
            BigRational::zero()
        };
        even[s] = big(n as i64) * pi - big(2 * l as i64) * mbar_l;
    }
    // The even stencil is (-c_L, ..., -c_1, 1, c_1, ..., c_L).
    debug_assert_eq!(even[l], big(1));
    let weights: Vec<BigRational> = (1..=l).map(|i| even[l + i].clone()).collect();
    for (i, c) in weights.iter().enumerate() {
        debug_assert_eq!(&even[l - 1 - i], &(-c.clone()));
    }
    weights
}

/// Predicts the two finer-scale children of the window center from a window
/// of `2L + 1` log-domain midpoints.
///
/// The even child carries weights `(-c_L, ..., -c_1, 1, c_1, ..., c_L)`, the
/// odd child the mirrored weights; their mean is exactly the window center.
pub fn predict_pair(window: &[SymMat], order: &RefinementOrder) -> Result<(SymMat, SymMat)> {
    let n = order.n();
    if window.len() != n {
        return Err(Error::WindowLength {
            expected: n,
            got: window.len(),
        });
    }
    let l = order.l();
    let center = &window[l];
    let mut delta = SymMat::zeros(center.dim());
    for (i, &c) in order.weights().iter().enumerate() {
        // c_{i+1} * (right - left)
        delta.axpy(c, &window[l + i + 1].sub(&window[l - i - 1]));
    }
    let even = center.add(&delta);
    let odd = center.sub(&delta);
    Ok((even, odd))
}

/// Intrinsic polynomial interpolation through `(x_i, P_i)` evaluated at `x`,
/// via Neville's recursion on the matrix logarithms.
pub fn neville_interpolate(nodes: &[(f64, SpdMat)], x: f64) -> Result<SpdMat> {
    if nodes.is_empty() {
        return Err(Error::EmptyInput);
    }
    if nodes.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::NonIncreasingAbscissae);
    }
    let n = nodes.len();
    let mut p: Vec<SymMat> = nodes.iter().map(|(_, s)| s.log()).collect();
    for span in 1..n {
        for i in 0..(n - span) {
            let xi = nodes[i].0;
            let xj = nodes[i + span].0;
            let a = (xj - x) / (xj - xi);
            let b = (x - xi) / (xj - xi);
            let mut v = p[i].scale(a);
            v.axpy(b, &p[i + 1]);
            p[i] = v;
        }
    }
    mat_exp(&p[0])
}

/// The `(2N-1) x (2N-1)` transition matrices of the refinement cascade, the
/// limit of the even-matrix powers and the variance constant `kappa_N`.
#[derive(Debug, Clone)]
pub struct TransitionMatrices {
    pub order: RefinementOrder,
    pub e: DMatrix<f64>,
    pub o: DMatrix<f64>,
    pub e_inf: DMatrix<f64>,
    pub kappa: f64,
}

/// Reverses row and column order.
fn reversed(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)])
}

/// Builds the even/odd transition matrices, the power-iteration limit of the
/// even matrix, and `kappa_N` (sum of squared limit-row entries).
pub fn build_transition(order: &RefinementOrder) -> Result<TransitionMatrices> {
    let l = order.l();
    let size = 4 * l + 1; // 2N - 1
    let c = order.weights();

    // Row r maps the refined midpoint at offset r to the coarse window
    // starting at column floor(r/2); even offsets use the even stencil,
    // odd offsets the mirrored one.
    let mut e = DMatrix::<f64>::zeros(size, size);
    for r in 0..size {
        let s = r / 2;
        let even_row = r % 2 == 0;
        e[(r, s + l)] = 1.0;
        for (i, &ci) in c.iter().enumerate() {
            let sign = if even_row { 1.0 } else { -1.0 };
            e[(r, s + l + i + 1)] = sign * ci;
            e[(r, s + l - i - 1)] = -sign * ci;
        }
    }
    let o = reversed(&e);

    // Power iteration; convergence of the infinite refinement products makes
    // E^m approach a rank-one row-constant limit.
    const CAP: usize = 200;
    const TOL: f64 = 1e-13;
    let mut power = e.clone();
    let mut converged = false;
    for _ in 0..CAP {
        let next = &power * &e;
        let diff = (&next - &power).amax();
        power = next;
        if diff < TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::LimitNonConvergence { cap: CAP });
    }
    let kappa = (0..size).map(|i| power[(0, i)] * power[(0, i)]).sum();
    Ok(TransitionMatrices {
        order: order.clone(),
        e,
        o,
        e_inf: power,
        kappa,
    })
}

/// Variance-rescaling constant `kappa_N` for odd order `N`.
pub fn kappa(n: usize) -> Result<f64> {
    let order = RefinementOrder::from_n(n)?;
    Ok(build_transition(&order)?.kappa)
}
