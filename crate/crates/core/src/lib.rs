//! Intrinsic average-interpolation wavelet estimation for curves of symmetric
//! positive-definite matrices under the log-Euclidean metric, with asymptotic
//! and wild-bootstrap confidence sets and a Monte Carlo coverage harness.

pub mod bootstrap;
pub mod error;
pub mod harness;
pub mod inference;
pub mod pyramid;
pub mod refinement;
pub mod rng;
pub mod spd;

pub use bootstrap::{
    bootstrap_ball, bootstrap_ball_from_distances, bootstrap_quantile, multiplier_sample,
    wild_bootstrap, BootstrapConfig, Multiplier,
};
pub use error::{Error, Result};
pub use inference::{
    asymptotic_cs, chi2_cdf, chi2_quantile, cs_contains, cs_volume_mc, empirical_covariance_eta,
    unit_ball_volume, BallCS, ConfidenceSet, CovTensor, EllipsoidCS,
};
pub use pyramid::{
    backward_transform, build_pyramid, forward_transform, linear_estimate, MidpointPyramid,
    WaveletPyramid,
};
pub use refinement::{kappa, RefinementOrder, TransitionMatrices};
pub use rng::{RngStream, GAUSSIAN_TRANSFORM_NOTE};
pub use spd::{
    eta_inv, eta_log, eta_vec, geodesic, le_distance, mat_exp, mat_log, sym_eigen, weighted_ave,
    EtaVec, SpdMat, SymMat,
};
