//! Photon-counting gain estimators, their analytic MSE and the threshold gain.

use crate::error::{domain, Error, Result};
use crate::fisher::qfi_coherent_lossy;
use crate::params::{DetectorSpec, Gain};

/// `(Y/η_d + M)/(N + M)`. Not clipped to `[1, ∞)`, so it stays unbiased.
pub fn g_hat(total_count: u64, n: f64, m: usize, det: DetectorSpec) -> f64 {
    (total_count as f64 / det.eta() + m as f64) / (n + m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseBreakdown {
    pub qcrb_term: f64,
    pub probe_penalty_term: f64,
    pub inefficiency_term: f64,
    pub total: f64,
}

impl MseBreakdown {
    fn new(qcrb_term: f64, probe_penalty_term: f64, inefficiency_term: f64) -> Self {
        Self {
            qcrb_term,
            probe_penalty_term,
            inefficiency_term,
            total: qcrb_term + probe_penalty_term + inefficiency_term,
        }
    }
}

fn check(n: f64, m: usize) -> Result<()> {
    if !n.is_finite() || n < 0.0 {
        return domain(format!("photon number must be finite and >= 0, got {n}"));
    }
    if m == 0 {
        return domain("at least one signal mode is required");
    }
    Ok(())
}

/// MSE of [`g_hat`] for any product Fock probe with `N` photons in `M` modes.
pub fn mse_number_analytic(n: f64, m: usize, g: Gain, det: DetectorSpec) -> Result<MseBreakdown> {
    check(n, m)?;
    let total = n + m as f64;
    let eta = det.eta();
    let qcrb = g.g() * g.excess() / total;
    let loss = (1.0 - eta) / (eta * total) * (g.g() - m as f64 / total);
    Ok(MseBreakdown::new(qcrb, 0.0, loss))
}

/// MSE of [`g_hat`] for a product coherent probe; the extra term is the
/// Poisson noise of the input, `G²N/(N + M)²`.
pub fn mse_coherent_analytic(n: f64, m: usize, g: Gain, det: DetectorSpec) -> Result<MseBreakdown> {
    let base = mse_number_analytic(n, m, g, det)?;
    let total = n + m as f64;
    let penalty = g.g() * g.g() * n / (total * total);
    Ok(MseBreakdown::new(
        base.qcrb_term,
        penalty,
        base.inefficiency_term,
    ))
}

/// Lower end of the threshold bracket is `1 + THRESHOLD_EPS`.
pub const THRESHOLD_EPS: f64 = 1e-9;
pub const THRESHOLD_G_HI: f64 = 100.0;
pub const THRESHOLD_G_MAX: f64 = 1e4;
pub const THRESHOLD_TOL: f64 = 1e-9;

/// Single-photon MSE minus the lossy coherent QCRB, both with `N = M`.
/// Positive below the threshold gain, negative above it.
pub fn threshold_residual(g: Gain, det: DetectorSpec, m_probe: usize) -> Result<f64> {
    let n = m_probe as f64;
    let mse = mse_number_analytic(n, m_probe, g, det)?.total;
    let qcrb = 1.0 / qfi_coherent_lossy(n, m_probe, g, det)?.value;
    Ok(mse - qcrb)
}

/// Gain above which single-photon probes with photon counting beat the
/// coherent-state QCRB at detector efficiency `η_d ∈ (0, 1)`.
pub fn threshold_gain(det: DetectorSpec, m_probe: usize) -> Result<f64> {
    if det.is_ideal() {
        return domain("threshold gain needs eta_d < 1 (it tends to 1 as eta_d -> 1)");
    }
    if m_probe == 0 {
        return domain("single-photon probe needs at least one mode");
    }
    let f = |g: f64| threshold_residual(Gain::new(g)?, det, m_probe);
    let mut lo = 1.0 + THRESHOLD_EPS;
    let mut hi = THRESHOLD_G_HI;
    let f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    while f_lo.signum() == f_hi.signum() && hi < THRESHOLD_G_MAX {
        hi = (2.0 * hi).min(THRESHOLD_G_MAX);
        f_hi = f(hi)?;
    }
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
