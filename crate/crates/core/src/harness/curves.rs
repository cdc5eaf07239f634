//! Built-in SPD test curves on [0, 1] and the entrywise Gaussian noise model.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::inference::CovTensor;
use crate::spd::{SpdMat, SymMat};

/// A curve of 2x2 SPD matrices on `[0, 1]`: one of the three built-in test
/// curves or a user-supplied closure.
#[derive(Clone)]
pub enum CurveSpec {
    /// `[[50 sqrt|1-(2t)^2| + 0.1, 2 sin(17 pi t)], [., 50t + 1]]`.
    C1,
    /// `[[55 cos u, 50 sqrt(sin(2u)/2)], [., 55 sin u]]`, `u = 5 pi (t+0.1)/11`.
    C2,
    /// `[[2(5-10t)^2, 5-10t], [., 1]]`; singular at `t = 1/2`, which the
    /// midpoint sampling grid avoids.
    C3,
    Custom(Arc<dyn Fn(f64) -> Result<SpdMat> + Send + Sync>),
}

impl CurveSpec {
    /// Short identifier used in reports and the CLI.
    pub fn id(&self) -> &'static str {
        match self {
            CurveSpec::C1 => "c1",
            CurveSpec::C2 => "c2",
            CurveSpec::C3 => "c3",
            CurveSpec::Custom(_) => "custom",
        }
    }

    /// Constant curve at a fixed SPD matrix.
    pub fn constant(value: SpdMat) -> Self {
        CurveSpec::Custom(Arc::new(move |_| Ok(value.clone())))
    }
}

impl fmt::Debug for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for CurveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c1" => Ok(CurveSpec::C1),
            "c2" => Ok(CurveSpec::C2),
            "c3" => Ok(CurveSpec::C3),
            other => Err(Error::InvalidParameter(format!(
                "unknown curve id {other:?} (expected c1, c2 or c3)"
            ))),
        }
    }
}

fn sym2(a11: f64, a22: f64, a12: f64) -> SymMat {
    SymMat::new(2, vec![a11, a12, a22]).expect("length 3 for d = 2")
}

/// Evaluates the curve at `t` in `[0, 1]`; a non-SPD value is an error, not
/// clamped.
pub fn curve_eval(spec: &CurveSpec, t: f64) -> Result<SpdMat> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "curve parameter must be in [0,1], got {t}"
        )));
    }
    let sym = match spec {
        // the square root is taken of |1 - (2t)^2| to keep the entry real on
        // the whole interval
        CurveSpec::C1 => sym2(
            50.0 * (1.0 - (2.0 * t) * (2.0 * t)).abs().sqrt() + 0.1,
            50.0 * t + 1.0,
            2.0 * (17.0 * PI * t).sin(),
        ),
        CurveSpec::C2 => {
            let u = 5.0 * PI * (t + 0.1) / 11.0;
            sym2(
                55.0 * u.cos(),
                55.0 * u.sin(),
                50.0 * ((2.0 * u).sin().max(0.0) / 2.0).sqrt(),
            )
        }
        CurveSpec::C3 => {
            let s = 5.0 - 10.0 * t;
            sym2(2.0 * s * s, 1.0, s)
        }
        CurveSpec::Custom(f) => return f(t),
    };
    SpdMat::new(sym).map_err(|_| Error::CurveNotSpd { t })
}

/// Standard deviations of the independent Gaussian entries of the log-noise;
/// the off-diagonal entry is shared symmetrically.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseSpec {
    pub sigma_11: f64,
    pub sigma_22: f64,
    pub sigma_12: f64,
}

impl NoiseSpec {
    pub fn new(sigma_11: f64, sigma_22: f64, sigma_12: f64) -> Result<Self> {
        for s in [sigma_11, sigma_22, sigma_12] {
            if !(s >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "noise standard deviations must be nonnegative, got {s}"
                )));
            }
        }
        Ok(NoiseSpec {
            sigma_11,
            sigma_22,
            sigma_12,
        })
    }

    pub fn zero() -> Self {
        NoiseSpec {
            sigma_11: 0.0,
            sigma_22: 0.0,
            sigma_12: 0.0,
        }
    }

    /// The noise levels used with each built-in curve.
    pub fn default_for(curve: &CurveSpec) -> Self {
        match curve {
            CurveSpec::C1 => NoiseSpec {
                sigma_11: 0.05,
                sigma_22: 0.1,
                sigma_12: 0.01,
            },
            CurveSpec::C2 => NoiseSpec {
                sigma_11: 0.1,
                sigma_22: 0.05,
                sigma_12: 0.1,
            },
            _ => NoiseSpec {
                sigma_11: 0.1,
                sigma_22: 0.1,
                sigma_12: 0.1,
            },
        }
    }

    pub fn sigmas(&self) -> SymMat {
        SymMat::new(2, vec![self.sigma_11, self.sigma_12, self.sigma_22])
            .expect("length 3 for d = 2")
    }

    /// Covariance operator under eta: `diag(s11^2, s22^2, 2 s12^2)`. Fails
    /// with a singular-covariance error when any sigma is zero.
    pub fn cov_tensor(&self) -> Result<CovTensor> {
        CovTensor::from_entry_sigmas(&self.sigmas())
    }

    pub fn is_zero(&self) -> bool {
        self.sigma_11 == 0.0 && self.sigma_22 == 0.0 && self.sigma_12 == 0.0
    }
}
