//! Analytic BER of the pair-coded scheme under the Gaussian approximation.
//!
//! The correlator output for a fixed symbol has mean `s_R E_b` with
//! `s_R in {-2, 0, 2}` (probabilities 1/4, 1/2, 1/4) and variance
//!
//! ```text
//! sigma^2 = E_b N0/2 + E_b N0/2 + E_b (L - 2) = E_b (N0 + L - 2)
//! ```
//!
//! (uplink noise, downlink noise, other pairs). With thresholds `+-E_b`
//! the BER is half the two outer tails of the `s_R = 0` density plus a
//! quarter of the `[-E_b, E_b]` mass of each `s_R = +-2` density. Writing
//! `t = E_b / sigma` this reduces to
//!
//! ```text
//! BER = 3/2 Q(t) - 1/2 Q(3t)
//! ```
//!
//! [`ber_quadrature`] integrates the four Gaussian terms directly and is the
//! independent check on [`ber_closed_form`].

use crate::channel::ebn0_to_n0;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Integration windows stop this many standard deviations from each mean.
const WINDOW_SIGMAS: f64 = 12.0;
const QUAD_TOL: f64 = 1e-15;

/// One point of an analytic BER curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub ebn0_db: f64,
    pub users: usize,
    pub beta: usize,
    pub sigma2: f64,
    pub ber: f64,
}

/// Which error events the analytic curve counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BerModel {
    /// Outer tails for `s_R = 0`, inner band for `s_R = +-2`.
    #[default]
    AsPrinted,
    /// Also counts `+2` decoded as `-2` and vice versa, i.e. the full
    /// ternary symbol error rate `3/2 Q(t)`.
    ExactSer,
}

/// Standard normal tail probability `P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `E_b (N0 + L - 2)`.
pub fn decision_variance(e_b: f64, n0: f64, users: usize) -> Result<f64> {
    if users < 2 || !users.is_multiple_of(2) {
        return Err(Error::InvalidUserCount(users));
    }
    if !(e_b > 0.0 && e_b.is_finite()) {
        return Err(Error::NonPositiveEnergy(e_b));
    }
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::NonPositiveNoise(n0));
    }
    Ok(e_b * (n0 + (users - 2) as f64))
}

fn check_args(e_b: f64, sigma2: f64) -> Result<f64> {
    if !(e_b > 0.0 && e_b.is_finite()) {
        return Err(Error::NonPositiveEnergy(e_b));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::NonPositiveNoise(sigma2));
    }
    Ok(sigma2.sqrt())
}

/// Mass of `N(mean, sigma^2)` on `[lo, hi]`, integrated numerically over the
/// part of the interval within `WINDOW_SIGMAS` of the mean.
fn gaussian_mass(mean: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let lo = lo.max(mean - WINDOW_SIGMAS * sigma);
    let hi = hi.min(mean + WINDOW_SIGMAS * sigma);
    if lo >= hi {
        return 0.0;
    }
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let density = |r: f64| {
        let z = (r - mean) / sigma;
        norm * (-0.5 * z * z).exp()
    };
    integrate(density, lo, hi, QUAD_TOL)
}

/// The four Gaussian integrals with thresholds `gamma1 = -E_b`, `gamma2 = E_b`.
pub fn ber_quadrature(e_b: f64, sigma2: f64) -> Result<f64> {
    let sigma = check_args(e_b, sigma2)?;
    let (g1, g2) = (-e_b, e_b);
    let zero_tails = gaussian_mass(0.0, sigma, f64::NEG_INFINITY, g1) + gaussian_mass(0.0, sigma, g2, f64::INFINITY);
    let two_bands = gaussian_mass(-2.0 * e_b, sigma, g1, g2) + gaussian_mass(2.0 * e_b, sigma, g1, g2);
    Ok(0.5 * zero_tails + 0.25 * two_bands)
}

/// `3/2 Q(E_b/sigma) - 1/2 Q(3 E_b/sigma)`.
pub fn ber_closed_form(e_b: f64, sigma2: f64) -> Result<f64> {
    let sigma = check_args(e_b, sigma2)?;
    let t = e_b / sigma;
    Ok(1.5 * q_function(t) - 0.5 * q_function(3.0 * t))
}

/// Ternary symbol error rate `3/2 Q(E_b/sigma)`.
pub fn ser_closed_form(e_b: f64, sigma2: f64) -> Result<f64> {
    let sigma = check_args(e_b, sigma2)?;
    Ok(1.5 * q_function(e_b / sigma))
}

pub fn ber_for_model(model: BerModel, e_b: f64, sigma2: f64) -> Result<f64> {
    match model {
        BerModel::AsPrinted => ber_closed_form(e_b, sigma2),
        BerModel::ExactSer => ser_closed_form(e_b, sigma2),
    }
}

/// Analytic point at one Eb/N0, with `E_b = beta`.
pub fn analytic_point(ebn0_db: f64, users: usize, beta: usize, model: BerModel) -> Result<AnalyticPoint> {
    if beta == 0 {
        return Err(Error::InvalidSpreadingFactor);
    }
    let e_b = beta as f64;
    let n0 = ebn0_to_n0(ebn0_db, beta);
    let sigma2 = decision_variance(e_b, n0, users)?;
    let ber = ber_for_model(model, e_b, sigma2)?;
    Ok(AnalyticPoint {
        ebn0_db,
        users,
        beta,
        sigma2,
        ber,
    })
}

/// [`analytic_point`] over a grid, with the printed model.
pub fn ber_curve(ebn0_grid: &[f64], users: usize, beta: usize) -> Result<Vec<AnalyticPoint>> {
    ber_curve_with(ebn0_grid, users, beta, BerModel::AsPrinted)
}

pub fn ber_curve_with(ebn0_grid: &[f64], users: usize, beta: usize, model: BerModel) -> Result<Vec<AnalyticPoint>> {
    ebn0_grid
        .iter()
        .map(|&db| analytic_point(db, users, beta, model))
        .collect()
}

/// Coherent single-user BPSK, `Q(sqrt(2 Eb/N0))`.
pub fn bpsk_ber(ebn0_db: f64) -> f64 {
    q_function((2.0 * 10f64.powf(ebn0_db / 10.0)).sqrt())
}
