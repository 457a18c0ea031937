//! Gain, probe and detector parameters shared by every other module.
//!
//! The amplifier gain `G = cosh²τ` is user facing; the squeeze parameter `τ`
//! is the internal canonical parameter since every series in the crate is
//! smooth in it. A [`Gain`] keeps `G`, `τ` and the excess `G − 1 = sinh²τ`
//! side by side so that neither route has to recover the others through a
//! cancelling subtraction.

use crate::error::{domain, Result};

/// Largest accepted gain. `cosh τ` overflows long before `f64` does, but
/// nothing of interest happens past this point.
pub const MAX_GAIN: f64 = 1.0e6;

/// Gain of a quantum-limited amplifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain {
    g: f64,
    tau: f64,
    excess: f64,
}

impl Gain {
    /// Validated gain `G ∈ [1, 10⁶]`.
    pub fn new(g: f64) -> Result<Self> {
        if !g.is_finite() || g < 1.0 {
            return domain(format!("gain must be a finite value >= 1, got {g}"));
        }
        if g > MAX_GAIN {
            return domain(format!("gain {g} exceeds the supported maximum {MAX_GAIN}"));
        }
        let excess = g - 1.0;
        Ok(Self {
            g,
            tau: excess.sqrt().asinh(),
            excess,
        })
    }

    /// Gain from the squeeze parameter, `G = cosh²τ`.
    pub fn from_tau(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return domain(format!("tau must be a finite value >= 0, got {tau}"));
        }
        let sinh = tau.sinh();
        let excess = sinh * sinh;
        let g = 1.0 + excess;
        if g > MAX_GAIN {
            return domain(format!("tau = {tau} gives a gain above {MAX_GAIN}"));
        }
        Ok(Self { g, tau, excess })
    }

    pub fn identity() -> Self {
        Self {
            g: 1.0,
            tau: 0.0,
            excess: 0.0,
        }
    }

    #[inline]
    pub fn g(&self) -> f64 {
        self.g
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `G − 1 = sinh²τ`, the mean number of photons added to vacuum.
    #[inline]
    pub fn excess(&self) -> f64 {
        self.excess
    }

    /// `sech²τ = 1/G`, the success probability of the added-photon law.
    #[inline]
    pub fn sech2(&self) -> f64 {
        1.0 / self.g
    }

    /// `tanh²τ = (G − 1)/G`.
    #[inline]
    pub fn tanh2(&self) -> f64 {
        self.excess / self.g
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.excess == 0.0
    }
}

/// `G = cosh²τ`.
pub fn gain_from_tau(tau: f64) -> Result<Gain> {
    Gain::from_tau(tau)
}

/// `τ = arccosh √G`.
pub fn tau_from_gain(g: f64) -> Result<f64> {
    Gain::new(g).map(|g| g.tau())
}

/// Two gains together with their overlap parameter `ν = sech(τ′ − τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPair {
    g: Gain,
    g_prime: Gain,
    nu: f64,
}

impl GainPair {
    /// Pair of gains, `ν` evaluated from `G` and `G′` algebraically.
    pub fn new(g: Gain, g_prime: Gain) -> Self {
        let nu = nu_algebraic(g, g_prime);
        debug_assert!(
            (nu - nu_hyperbolic(g, g_prime)).abs() <= 1e-9 * nu,
            "nu routes disagree for G = {}, G' = {}",
            g.g(),
            g_prime.g()
        );
        Self { g, g_prime, nu }
    }

    /// Pair of gains given by squeeze parameters, `ν` from `sech(τ′ − τ)`.
    pub fn from_taus(tau: f64, tau_prime: f64) -> Result<Self> {
        let g = Gain::from_tau(tau)?;
        let g_prime = Gain::from_tau(tau_prime)?;
        let nu = nu_hyperbolic(g, g_prime);
        debug_assert!((nu - nu_algebraic(g, g_prime)).abs() <= 1e-9 * nu);
        Ok(Self { g, g_prime, nu })
    }

    pub fn from_gains(g: f64, g_prime: f64) -> Result<Self> {
        Ok(Self::new(Gain::new(g)?, Gain::new(g_prime)?))
    }

    #[inline]
    pub fn g(&self) -> Gain {
        self.g
    }

    #[inline]
    pub fn g_prime(&self) -> Gain {
        self.g_prime
    }

    #[inline]
    pub fn nu(&self) -> f64 {
        self.nu
    }
}

// (√(GG′) − √((G−1)(G′−1)))⁻¹, multiplied through by the conjugate so that
// no two nearly equal quantities are ever subtracted.
fn nu_algebraic(g: Gain, g_prime: Gain) -> f64 {
    let num = (g.g() * g_prime.g()).sqrt() + (g.excess() * g_prime.excess()).sqrt();
    let den = g.g() + g_prime.excess();
    num / den
}

fn nu_hyperbolic(g: Gain, g_prime: Gain) -> f64 {
    1.0 / (g_prime.tau() - g.tau()).cosh()
}

/// Overlap parameter `ν ∈ (0, 1]` of two gains; symmetric in its arguments.
pub fn nu_of_pair(g: Gain, g_prime: Gain) -> f64 {
    GainPair::new(g, g_prime).nu()
}

/// Photodetector quantum efficiency `η_d ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    eta: f64,
}

impl DetectorSpec {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return domain(format!("detector efficiency must lie in (0, 1], got {eta}"));
        }
        Ok(Self { eta })
    }

    pub fn ideal() -> Self {
        Self { eta: 1.0 }
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[inline]
    pub fn is_ideal(&self) -> bool {
        self.eta == 1.0
    }
}

/// Tolerance on the normalization of an NDS total-photon pmf.
pub const PMF_NORM_TOL: f64 = 1e-12;

/// Probe state fed to the `M` amplifier modes.
///
/// Only the total-photon marginal of an ancilla-entangled probe is kept,
/// which is all the output fidelity depends on.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeSpec {
    /// Product of Fock states, one photon number per mode.
    NumberState(Vec<u64>),
    /// Product of coherent states, one mean photon number per mode.
    CoherentState(Vec<f64>),
    /// Number-diagonal-signal probe described by its total-photon pmf.
    NdsTotalDistribution { pmf: Vec<f64>, modes: usize },
}

impl ProbeSpec {
    pub fn number_state(n: Vec<u64>) -> Result<Self> {
        let probe = Self::NumberState(n);
        probe.validate()?;
        Ok(probe)
    }

    pub fn coherent_state(energies: Vec<f64>) -> Result<Self> {
        let probe = Self::CoherentState(energies);
        probe.validate()?;
        Ok(probe)
    }

    pub fn nds_total(pmf: Vec<f64>, modes: usize) -> Result<Self> {
        let probe = Self::NdsTotalDistribution { pmf, modes };
        probe.validate()?;
        Ok(probe)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::NumberState(n) => {
                if n.is_empty() {
                    return domain("number-state probe needs at least one mode");
                }
            }
            Self::CoherentState(e) => {
                if e.is_empty() {
                    return domain("coherent-state probe needs at least one mode");
                }
                if let Some(bad) = e.iter().find(|x| !x.is_finite() || **x < 0.0) {
                    return domain(format!("mode energy must be finite and >= 0, got {bad}"));
                }
            }
            Self::NdsTotalDistribution { pmf, modes } => {
                if *modes == 0 {
                    return domain("NDS probe needs at least one signal mode");
                }
                if pmf.is_empty() {
                    return domain("NDS probe pmf is empty");
                }
                if let Some(bad) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
                    return domain(format!("pmf entries must be finite and >= 0, got {bad}"));
                }
                let total: f64 = pmf.iter().sum();
                if (total - 1.0).abs() > PMF_NORM_TOL {
                    return domain(format!("pmf sums to {total}, not 1"));
                }
            }
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        match self {
            Self::NumberState(n) => n.len(),
            Self::CoherentState(e) => e.len(),
            Self::NdsTotalDistribution { modes, .. } => *modes,
        }
    }
}

/// Total mean photon number `N` and mode count `M` of a probe.
pub fn probe_totals(probe: &ProbeSpec) -> Result<(f64, usize)> {
    probe.validate()?;
    let total = match probe {
        ProbeSpec::NumberState(n) => n.iter().sum::<u64>() as f64,
        ProbeSpec::CoherentState(e) => {
            // summed in sorted order so the total does not depend on mode order
            let mut sorted = e.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.iter().sum()
        }
        ProbeSpec::NdsTotalDistribution { pmf, .. } => {
            pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
        }
    };
    Ok((total, probe.modes()))
}
