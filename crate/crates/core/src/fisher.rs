//! Fisher information and output fidelities for gain sensing.
//!
//! Closed forms are given with respect to `G`; the numerically evaluated
//! lossy number-state QFI is computed with respect to `τ` and converted with
//! `K_G = K_τ / (4G(G − 1))`. Two finite-difference routes,
//! [`qfi_from_fidelity`] and [`fi_of_pmf_family`], serve as independent
//! oracles for every closed form.

use crate::amplifier::{added_photon_cutoff, LossySeries, PhotonNumberDistribution};
use crate::error::{domain, Error, Result};
use crate::params::{DetectorSpec, Gain, GainPair};

/// Default finite-difference step in `τ`.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Relative disagreement between the two Richardson levels above which a
/// fidelity-curve QFI is rejected.
pub const FD_LEVEL_TOL: f64 = 1e-4;

/// Probabilities below this floor are left out of Fisher-information sums.
pub const PROB_FLOOR: f64 = 1e-300;

// The derivative series carry polynomial weights in the added-photon number,
// so their truncation tolerance is tightened by this factor.
const DERIVATIVE_TAIL_MARGIN: f64 = 1e-6;

/// Parameter a Fisher information refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Gain,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherValue {
    pub value: f64,
    pub parameter: Parameter,
}

impl FisherValue {
    pub fn wrt_gain(value: f64) -> Self {
        Self {
            value,
            parameter: Parameter::Gain,
        }
    }

    pub fn wrt_tau(value: f64) -> Self {
        Self {
            value,
            parameter: Parameter::Tau,
        }
    }

    /// Re-expressed with respect to `G`; `(∂τ/∂G)² = 1/(4G(G − 1))`.
    pub fn to_gain(self, g: Gain) -> Result<Self> {
        match self.parameter {
            Parameter::Gain => Ok(self),
            Parameter::Tau => {
                if g.is_identity() {
                    return Err(Error::Singularity {
                        quantity: "Fisher information with respect to G",
                    });
                }
                Ok(Self::wrt_gain(self.value / (4.0 * g.g() * g.excess())))
            }
        }
    }

    pub fn to_tau(self, g: Gain) -> Self {
        match self.parameter {
            Parameter::Tau => self,
            Parameter::Gain => Self::wrt_tau(self.value * 4.0 * g.g() * g.excess()),
        }
    }
}

fn check_resources(n: f64, m: usize) -> Result<()> {
    if !n.is_finite() || n < 0.0 {
        return domain(format!("photon number must be finite and >= 0, got {n}"));
    }
    if m == 0 {
        return domain("at least one signal mode is required");
    }
    Ok(())
}

fn require_amplifying(g: Gain, quantity: &'static str) -> Result<()> {
    if g.is_identity() {
        Err(Error::Singularity { quantity })
    } else {
        Ok(())
    }
}

/// Optimal QFI of any number-diagonal-signal probe, `(N + M)/(G(G − 1))`.
pub fn qfi_nds(n: f64, m: usize, g: Gain) -> Result<FisherValue> {
    check_resources(n, m)?;
    require_amplifying(g, "optimal QFI")?;
    Ok(FisherValue::wrt_gain((n + m as f64) / (g.g() * g.excess())))
}

/// Optimal QFI with respect to `τ`, `4(N + M)`; finite at `G = 1`.
pub fn qfi_nds_tau(n: f64, m: usize) -> Result<FisherValue> {
    check_resources(n, m)?;
    Ok(FisherValue::wrt_tau(4.0 * (n + m as f64)))
}

/// QFI of a product coherent-state probe, `N/(G(2G − 1)) + M/(G(G − 1))`.
pub fn qfi_coherent(n: f64, m: usize, g: Gain) -> Result<FisherValue> {
    check_resources(n, m)?;
    require_amplifying(g, "coherent-state QFI")?;
    let gg = g.g();
    Ok(FisherValue::wrt_gain(
        n / (gg * (2.0 * gg - 1.0)) + m as f64 / (gg * g.excess()),
    ))
}

/// Homodyne detection on every output mode of a coherent probe.
pub fn fi_homodyne(n: f64, m: usize, g: Gain) -> Result<FisherValue> {
    check_resources(n, m)?;
    let gg = g.g();
    let d = 2.0 * gg - 1.0;
    Ok(FisherValue::wrt_gain(
        n / (gg * d) + 2.0 * m as f64 / (d * d),
    ))
}

/// Heterodyne detection on every output mode of a coherent probe.
pub fn fi_heterodyne(n: f64, m: usize, g: Gain) -> Result<FisherValue> {
    check_resources(n, m)?;
    let gg = g.g();
    Ok(FisherValue::wrt_gain((n / 2.0 + m as f64) / (gg * gg)))
}

/// QFI of a coherent probe whose amplified output passes a loss `η_d`,
/// summed over `M` modes carrying `N` photons in total.
pub fn qfi_coherent_lossy(n: f64, m: usize, g: Gain, det: DetectorSpec) -> Result<FisherValue> {
    check_resources(n, m)?;
    require_amplifying(g, "lossy coherent-state QFI")?;
    let (gg, x, eta) = (g.g(), g.excess(), det.eta());
    let photon = eta * n / (gg * (2.0 * eta * x + 1.0));
    let modal = eta * m as f64 / (x * (eta * x + 1.0));
    Ok(FisherValue::wrt_gain(photon + modal))
}

/// QFI of a single-mode Fock probe `|n⟩` behind a detector of efficiency
/// `η_d`, with respect to `τ` and, for `G > 1`, `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossyNumberQfi {
    pub wrt_tau: FisherValue,
    pub wrt_gain: Option<FisherValue>,
}

/// The photocount family is diagonal in the number basis, so its QFI is the
/// Fisher information of the count pmf,
/// `K_τ = Σ_k [(∂_τ P(k))²/P(k) − ∂²_τ P(k)]`.
pub fn qfi_number_lossy(n: u64, g: Gain, det: DetectorSpec, tol: f64) -> Result<LossyNumberQfi> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return domain(format!("tail tolerance must lie in (0, 1e-6], got {tol}"));
    }
    if g.is_identity() {
        // Every count the unamplified state can produce has ∂P = 0; only the
        // first count beyond reach, k = n + 1 with P ≈ (n+1) η^{n+1} τ²,
        // contributes in the limit.
        let k_tau = 4.0 * (n as f64 + 1.0) * det.eta().powi(n as i32 + 1);
        return Ok(LossyNumberQfi {
            wrt_tau: FisherValue::wrt_tau(k_tau),
            wrt_gain: None,
        });
    }
    let (cutoff, _) = added_photon_cutoff(n, g, tol * DERIVATIVE_TAIL_MARGIN)?;
    let series = LossySeries::new(n, g, det, cutoff);
    let mut k_tau = 0.0;
    for k in 0..=n + cutoff {
        let d = series.derivs(k);
        if d.p > PROB_FLOOR {
            k_tau += d.dp * d.dp / d.p - d.d2p;
        }
    }
    let wrt_tau = FisherValue::wrt_tau(k_tau);
    Ok(LossyNumberQfi {
        wrt_tau,
        wrt_gain: Some(wrt_tau.to_gain(g)?),
    })
}

/// Sum of single-mode lossy QFIs for a product Fock probe.
pub fn qfi_number_lossy_multimode(
    n_vec: &[u64],
    g: Gain,
    det: DetectorSpec,
    tol: f64,
) -> Result<LossyNumberQfi> {
    if n_vec.is_empty() {
        return domain("number-state probe needs at least one mode");
    }
    let mut sorted = n_vec.to_vec();
    sorted.sort_unstable();
    let mut k_tau = 0.0;
    for run in sorted.chunk_by(|a, b| a == b) {
        let single = qfi_number_lossy(run[0], g, det, tol)?;
        k_tau += run.len() as f64 * single.wrt_tau.value;
    }
    let wrt_tau = FisherValue::wrt_tau(k_tau);
    Ok(LossyNumberQfi {
        wrt_tau,
        wrt_gain: if g.is_identity() {
            None
        } else {
            Some(wrt_tau.to_gain(g)?)
        },
    })
}

/// Output fidelity `Σ_n p_n ν^{n+M}` of an NDS probe with total-photon pmf `p`.
pub fn fidelity_nds(pmf: &[f64], m: usize, pair: &GainPair) -> Result<f64> {
    if m == 0 {
        return domain("at least one signal mode is required");
    }
    if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return domain("pmf entries must be finite and >= 0");
    }
    let nu = pair.nu();
    if nu == 1.0 {
        return Ok(pmf.iter().sum());
    }
    let ln_nu = nu.ln();
    Ok(pmf
        .iter()
        .enumerate()
        .map(|(n, p)| p * ((n + m) as f64 * ln_nu).exp())
        .sum())
}

/// Fidelity between two displaced thermal states with real amplitudes
/// `alpha`, `alpha_prime` and thermal occupations `n_th`, `n_th_prime`.
pub fn fidelity_displaced_thermal(alpha: f64, n_th: f64, alpha_prime: f64, n_th_prime: f64) -> f64 {
    let thermal = 1.0 / (((1.0 + n_th) * (1.0 + n_th_prime)).sqrt() - (n_th * n_th_prime).sqrt());
    let shift = alpha_prime - alpha;
    thermal * (-shift * shift / (2.0 * (1.0 + n_th + n_th_prime))).exp()
}

/// Output fidelity of a product coherent probe with `N` photons over `M` modes,
/// `ν^M exp[−N (cosh τ′ − cosh τ)² / (2(sinh²τ′ + sinh²τ + 1))]`.
pub fn fidelity_coherent(n: f64, m: usize, pair: &GainPair) -> Result<f64> {
    fidelity_coherent_lossy(n, m, pair, DetectorSpec::ideal())
}

/// Fidelity between the detected (lossy) outputs of a product coherent probe.
pub fn fidelity_coherent_lossy(
    n: f64,
    m: usize,
    pair: &GainPair,
    det: DetectorSpec,
) -> Result<f64> {
    check_resources(n, m)?;
    let (g, gp) = (pair.g(), pair.g_prime());
    let eta = det.eta();
    let (th, th_p) = (eta * g.excess(), eta * gp.excess());
    let vacuum = if det.is_ideal() {
        pair.nu()
    } else {
        fidelity_displaced_thermal(0.0, th, 0.0, th_p)
    };
    // Σ_m (√(ηG′N_m) − √(ηGN_m))² = ηN (√G′ − √G)²; the conjugate form avoids
    // cancelling √G′ − √G.
    let dcosh = (gp.g() - g.g()) / (gp.g().sqrt() + g.g().sqrt());
    let exponent = -eta * n * dcosh * dcosh / (2.0 * (1.0 + th + th_p));
    Ok(vacuum.powi(m as i32) * exponent.exp())
}

fn second_difference<F>(curve: &F, theta: f64, h: f64, center: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((curve(theta + h)? - 2.0 * center + curve(theta - h)?) / (h * h))
}

/// QFI from a fidelity curve `θ′ ↦ F(θ, θ′)` as `−4 ∂²F/∂θ′²` at `θ′ = θ`.
///
/// The second derivative is a central difference at steps `h` and `h/2`
/// combined by one Richardson step. If the two levels disagree by more than
/// [`FD_LEVEL_TOL`] relative, the step is dominated by roundoff (or too
/// coarse) and an error carrying both levels is returned.
pub fn qfi_from_fidelity<F>(
    curve: F,
    theta: f64,
    step: f64,
    parameter: Parameter,
) -> Result<FisherValue>
where
    F: Fn(f64) -> Result<f64>,
{
    if !step.is_finite() || step <= 0.0 {
        return domain(format!(
            "finite-difference step must be positive, got {step}"
        ));
    }
    let center = curve(theta)?;
    let coarse = second_difference(&curve, theta, step, center)?;
    let fine = second_difference(&curve, theta, step / 2.0, center)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    if coarse != fine {
        let gap = (fine - coarse).abs() / extrapolated.abs();
        if gap.is_nan() || gap > FD_LEVEL_TOL {
            return Err(Error::FiniteDifference {
                coarse,
                fine,
                gap,
                limit: FD_LEVEL_TOL,
                step,
            });
        }
    }
    Ok(FisherValue {
        value: -4.0 * extrapolated,
        parameter,
    })
}

/// Classical Fisher information `Σ_k (∂_θ P(k))²/P(k)` of a family of count
/// distributions, derivatives from the five-point central stencil.
pub fn fi_of_pmf_family<F>(
    family: F,
    theta: f64,
    step: f64,
    parameter: Parameter,
) -> Result<FisherValue>
where
    F: Fn(f64) -> Result<PhotonNumberDistribution>,
{
    if !step.is_finite() || step <= 0.0 {
        return domain(format!(
            "finite-difference step must be positive, got {step}"
        ));
    }
    let center = family(theta)?;
    let m2 = family(theta - 2.0 * step)?;
    let m1 = family(theta - step)?;
    let p1 = family(theta + step)?;
    let p2 = family(theta + 2.0 * step)?;
    let lengths: Vec<usize> = [&m2, &m1, &center, &p1, &p2]
        .iter()
        .map(|d| d.pmf().len())
        .collect();
    if lengths.iter().any(|&l| l != lengths[0]) {
        return Err(Error::SupportMismatch(lengths));
    }
    let mut fi = 0.0;
    for (k, &p) in center.pmf().iter().enumerate() {
        if p <= PROB_FLOOR {
            continue;
        }
        let dp = (8.0 * (p1.pmf()[k] - m1.pmf()[k]) - (p2.pmf()[k] - m2.pmf()[k])) / (12.0 * step);
        fi += dp * dp / p;
    }
    Ok(FisherValue {
        value: fi,
        parameter,
    })
}

/// Fisher information of jointly measuring the ancilla Schmidt basis and
/// every output photon number for an NDS probe, `4(N + M)` in `τ`.
pub fn fi_schmidt_counting(n: f64, m: usize) -> Result<FisherValue> {
    check_resources(n, m)?;
    Ok(FisherValue::wrt_tau(4.0 * (n + m as f64)))
}
