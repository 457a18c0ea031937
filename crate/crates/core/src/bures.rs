//! Energy-constrained Bures distance between amplifier channels.

use crate::error::{domain, Error, Result};
use crate::fisher::{fidelity_coherent, fidelity_nds};
use crate::params::GainPair;

/// Budgets within this distance of an integer are treated as integers.
pub const INTEGER_SNAP: f64 = 1e-12;

/// Tolerance on the mean of a pmf checked against an energy budget.
pub const MEAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcbResult {
    pub min_fidelity: f64,
    pub ecb_distance: f64,
    /// `(⌊N⌋, ⌈N⌉)`, carrying weights `(1 − {N}, {N})`.
    pub optimal_support: (u64, u64),
    pub optimal_weights: (f64, f64),
}

/// `(⌊N⌋, ⌈N⌉, {N})` with the fractional part snapped to zero near integers.
pub fn split_budget(n: f64) -> Result<(u64, u64, f64)> {
    if !n.is_finite() || n < 0.0 {
        return domain(format!("energy budget must be finite and >= 0, got {n}"));
    }
    let nearest = n.round();
    if (n - nearest).abs() <= INTEGER_SNAP {
        let k = nearest as u64;
        return Ok((k, k, 0.0));
    }
    let floor = n.floor();
    Ok((floor as u64, floor as u64 + 1, n - floor))
}

/// Minimum output fidelity over all `M`-mode probes of mean energy `N`:
/// `ν^M[(1 − {N}) ν^{⌊N⌋} + {N} ν^{⌈N⌉}]`.
pub fn min_fidelity_quantum(n: f64, m: usize, pair: &GainPair) -> Result<EcbResult> {
    if m == 0 {
        return domain("at least one signal mode is required");
    }
    let (lo, hi, frac) = split_budget(n)?;
    let nu = pair.nu();
    let f = nu.powi(m as i32) * ((1.0 - frac) * nu.powf(lo as f64) + frac * nu.powf(hi as f64));
    let f = f.min(1.0);
    Ok(EcbResult {
        min_fidelity: f,
        ecb_distance: (1.0 - f).max(0.0).sqrt(),
        optimal_support: (lo, hi),
        optimal_weights: (1.0 - frac, frac),
    })
}

/// Minimum fidelity over coherent-state probes of total energy `N`.
pub fn min_fidelity_classical(n: f64, m: usize, pair: &GainPair) -> Result<f64> {
    fidelity_coherent(n, m, pair)
}

/// Whether the NDS probe with total-photon pmf `p` stays at or above the
/// quantum minimum fidelity for its mean energy.
pub fn nds_fidelity_lower_bound_check(
    pmf: &[f64],
    n: f64,
    m: usize,
    pair: &GainPair,
) -> Result<bool> {
    let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    if (mean - n).abs().is_nan() || (mean - n).abs() > MEAN_TOL {
        return Err(Error::MeanMismatch {
            expected: n,
            actual: mean,
        });
    }
    let f = fidelity_nds(pmf, m, pair)?;
    Ok(f >= min_fidelity_quantum(n, m, pair)?.min_fidelity - 1e-12)
}

/// Random mean-constrained pmfs for convexity checks; test support only.
#[doc(hidden)]
pub mod testgen {
    use rand::Rng;
    use rand_distr::{Distribution, Gamma};

    /// Random pmf with mean `n`: Dirichlet(1) weights on `0..=2⌈n⌉+3`, then
    /// the mean is moved onto `n` by mixing with a point mass at `0` or at
    /// the top of the support.
    pub fn random_pmf_with_mean<R: Rng>(n: f64, rng: &mut R) -> Vec<f64> {
        let top = 2 * n.ceil() as usize + 3;
        let unit = Gamma::new(1.0, 1.0).unwrap();
        let mut w: Vec<f64> = (0..=top).map(|_| unit.sample(rng)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let mean: f64 = w.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        // mix λ·w + (1 − λ)·δ_anchor so the mean lands on n
        let anchor = if mean > n { 0 } else { top };
        let lambda = (anchor as f64 - n) / (anchor as f64 - mean);
        w.iter_mut().for_each(|x| *x *= lambda);
        w[anchor] += 1.0 - lambda;
        w
    }
}
