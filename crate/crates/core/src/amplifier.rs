//! Photon-number statistics of the quantum-limited amplifier channel.
//!
//! A Fock input `|n⟩` leaves the amplifier as a mixture of `|n + a⟩` with the
//! number of added photons `a ~ NB(n + 1, sech²τ)`. Detection with efficiency
//! `η_d` binomially thins the amplified photon number. Every probability below
//! is accumulated in log space and exponentiated last; binomial coefficients
//! such as `C(n + a, a)` overflow long before the probabilities underflow.

use statrs::function::factorial::ln_factorial;

use crate::error::{domain, Error, Result};
use crate::params::{DetectorSpec, Gain};

/// Default truncation tolerance for the added-photon series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Upper limit on the number of added-photon terms before giving up.
pub const MAX_SERIES_TERMS: usize = 200_000;

/// Negative binomial pmf `C(k + r − 1, k) (1 − p)^k p^r`.
pub fn nb_pmf(r: u64, p: f64, k: u64) -> Result<f64> {
    if r == 0 {
        return domain("negative binomial needs r >= 1");
    }
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!(
            "negative binomial success probability must lie in (0, 1], got {p}"
        ));
    }
    if p == 1.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let ln = ln_binomial(k + r - 1, k) + k as f64 * (-p).ln_1p() + r as f64 * p.ln();
    Ok(ln.exp())
}

#[inline]
fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Probability that the amplifier adds `a` photons to the Fock input `|n⟩`,
/// `C(n + a, a) sech^{2(n+1)}τ tanh^{2a}τ`.
pub fn fock_transition_prob(n: u64, a: u64, g: Gain) -> f64 {
    if g.is_identity() {
        return if a == 0 { 1.0 } else { 0.0 };
    }
    nb_pmf(n + 1, g.sech2(), a).expect("sech²τ lies in (0, 1) for G > 1")
}

/// Evaluates both sides of the composition identity
/// `Σ_{a₁+…+a_M = a} Π C(n_m + a_m, a_m) = C(Σn_m + M − 1 + a, a)`,
/// the left by enumerating every composition of `a` into `M` parts.
pub fn lemma_identity_check(n_vec: &[u64], a: u64) -> Result<(u64, u64)> {
    if n_vec.is_empty() {
        return domain("composition identity needs at least one mode");
    }
    let total: u64 = n_vec
        .iter()
        .try_fold(0u64, |acc, &n| acc.checked_add(n))
        .ok_or(Error::Overflow)?;
    let top = total
        .checked_add(n_vec.len() as u64 - 1)
        .and_then(|x| x.checked_add(a))
        .ok_or(Error::Overflow)?;
    let rhs = binomial_u64(top, a)?;
    let lhs = sum_over_compositions(n_vec, a)?;
    Ok((lhs, rhs))
}

fn sum_over_compositions(n_vec: &[u64], remaining: u64) -> Result<u64> {
    match n_vec {
        [] => Ok(u64::from(remaining == 0)),
        [last] => binomial_u64(last + remaining, remaining),
        [first, rest @ ..] => {
            let mut acc = 0u64;
            for a_m in 0..=remaining {
                let here = binomial_u64(first + a_m, a_m)?;
                let tail = sum_over_compositions(rest, remaining - a_m)?;
                let term = here.checked_mul(tail).ok_or(Error::Overflow)?;
                acc = acc.checked_add(term).ok_or(Error::Overflow)?;
            }
            Ok(acc)
        }
    }
}

/// Exact `C(n, k)` in 64-bit arithmetic.
pub fn binomial_u64(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(Error::Overflow);
        }
    }
    Ok(acc as u64)
}

/// Truncated photon-count pmf with a certified bound on the omitted mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    pmf: Vec<f64>,
    tail_bound: f64,
}

impl PhotonNumberDistribution {
    pub fn new(pmf: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if pmf.is_empty() {
            return domain("pmf must have at least one entry");
        }
        if let Some(bad) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return domain(format!("pmf entries must be finite and >= 0, got {bad}"));
        }
        if tail_bound.is_nan() || tail_bound < 0.0 {
            return domain(format!("tail bound must be >= 0, got {tail_bound}"));
        }
        let total: f64 = pmf.iter().sum();
        if total > 1.0 + 1e-12 || total < 1.0 - tail_bound - 1e-12 {
            return domain(format!(
                "pmf mass {total} inconsistent with tail bound {tail_bound}"
            ));
        }
        Ok(Self { pmf, tail_bound })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Largest count with an explicit entry.
    pub fn k_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, p)| (k * k) as f64 * p)
            .sum()
    }
}

/// Smallest `A` such that the certified mass of `NB(n + 1, sech²τ)` beyond
/// `A` is below `tol`, together with that bound.
///
/// Successive ratios `p_{a+1}/p_a = (n + a + 1)/(a + 1)·tanh²τ` decrease in
/// `a`, so once the ratio `ρ` at `A + 1` is below one the tail is dominated
/// by the geometric series `p_{A+1}/(1 − ρ)`.
pub fn added_photon_cutoff(n: u64, g: Gain, tol: f64) -> Result<(u64, f64)> {
    if g.is_identity() {
        return Ok((0, 0.0));
    }
    let t = g.tanh2();
    let n_f = n as f64;
    // p_{A+1}, starting from A = 0: p_1 = (n + 1) t p_0
    let mut p_next = ((n_f + 1.0) * g.sech2().ln() + (n_f + 1.0).ln() + t.ln()).exp();
    let mut bound = f64::INFINITY;
    for big_a in 0..MAX_SERIES_TERMS as u64 {
        let a1 = big_a as f64 + 1.0;
        let rho = (n_f + a1 + 1.0) / (a1 + 1.0) * t;
        if rho < 1.0 {
            bound = p_next / (1.0 - rho);
            if bound < tol {
                return Ok((big_a, bound));
            }
        }
        p_next *= rho;
        if p_next == 0.0 && rho < 1.0 {
            return Ok((big_a + 1, 0.0));
        }
    }
    Err(Error::NonConvergence {
        max_terms: MAX_SERIES_TERMS,
        tail: bound,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return domain(format!("tail tolerance must lie in (0, 1e-6], got {tol}"));
    }
    Ok(())
}

/// Photocount pmf for the Fock input `|n⟩` after amplification and
/// detection with efficiency `η_d`.
///
/// The added-photon series is cut at a certified tail of `tol/2`; trailing
/// counts holding at most another `tol/2` of mass are dropped.
pub fn lossy_count_distribution(
    n: u64,
    g: Gain,
    det: DetectorSpec,
    tol: f64,
) -> Result<PhotonNumberDistribution> {
    check_tol(tol)?;
    let (cutoff, a_tail) = added_photon_cutoff(n, g, tol / 2.0)?;
    let series = LossySeries::new(n, g, det, cutoff);
    let mut pmf: Vec<f64> = (0..=n + cutoff).map(|k| series.prob(k)).collect();

    let mut trimmed = 0.0;
    while pmf.len() > 1 {
        let last = *pmf.last().unwrap();
        if trimmed + last > tol / 2.0 {
            break;
        }
        trimmed += last;
        pmf.pop();
    }
    PhotonNumberDistribution::new(pmf, a_tail + trimmed)
}

/// Photocount pmf on the fixed support `0..=k_max`; the added-photon series
/// is still truncated at `tol`. The tail bound covers both the series cut and
/// the counts above `k_max`.
pub fn lossy_count_pmf_on_support(
    n: u64,
    g: Gain,
    det: DetectorSpec,
    k_max: u64,
    tol: f64,
) -> Result<PhotonNumberDistribution> {
    check_tol(tol)?;
    let (cutoff, a_tail) = added_photon_cutoff(n, g, tol)?;
    let series = LossySeries::new(n, g, det, cutoff);
    let pmf: Vec<f64> = (0..=k_max).map(|k| series.prob(k)).collect();
    let mass: f64 = pmf.iter().sum();
    let tail = (1.0 - mass).max(0.0).max(a_tail);
    PhotonNumberDistribution::new(pmf, tail)
}

/// Terms of the photocount series
/// `P_τ(k) = Σ_a C(n+a, a) sech^{2(n+1)}τ tanh^{2a}τ · C(n+a, k) η^k (1−η)^{n+a−k}`
/// and of its first two derivatives in `τ`.
pub(crate) struct LossySeries {
    n: u64,
    cutoff: u64,
    g: Gain,
    ln_eta: f64,
    ln_one_minus_eta: f64,
    ln_fact: Vec<f64>,
}

/// `P`, `∂_τ P` and `∂²_τ P` at one count.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CountDerivs {
    pub p: f64,
    pub dp: f64,
    pub d2p: f64,
}

impl LossySeries {
    pub fn new(n: u64, g: Gain, det: DetectorSpec, cutoff: u64) -> Self {
        let eta = det.eta();
        let ln_fact = (0..=n + cutoff).map(ln_factorial).collect();
        Self {
            n,
            cutoff,
            g,
            ln_eta: eta.ln(),
            ln_one_minus_eta: (-eta).ln_1p(),
            ln_fact,
        }
    }

    fn ln_binom(&self, n: u64, k: u64) -> f64 {
        self.ln_fact[n as usize] - self.ln_fact[k as usize] - self.ln_fact[(n - k) as usize]
    }

    // Admissible added-photon range for count k: the thinned photon number
    // n + a must reach k, and when η = 1 it must equal k.
    fn a_range(&self, k: u64) -> std::ops::RangeInclusive<u64> {
        let lo = k.saturating_sub(self.n);
        let hi = if self.ln_one_minus_eta == f64::NEG_INFINITY {
            lo
        } else {
            self.cutoff
        };
        lo..=hi.min(self.cutoff)
    }

    fn ln_weight(&self, k: u64, a: u64) -> f64 {
        let n = self.n;
        let lost = n + a - k;
        let thin = self.ln_binom(n + a, k)
            + k as f64 * self.ln_eta
            + if lost == 0 {
                0.0
            } else {
                lost as f64 * self.ln_one_minus_eta
            };
        let gain = self.g;
        let amp = self.ln_binom(n + a, a) - (n as f64 + 1.0) * gain.g().ln()
            + if a == 0 {
                0.0
            } else {
                a as f64 * gain.tanh2().ln()
            };
        thin + amp
    }

    pub fn prob(&self, k: u64) -> f64 {
        if k > self.n + self.cutoff {
            return 0.0;
        }
        if self.g.is_identity() {
            // only a = 0 survives
            return if k <= self.n {
                self.ln_weight(k, 0).exp()
            } else {
                0.0
            };
        }
        self.a_range(k).map(|a| self.ln_weight(k, a).exp()).sum()
    }

    /// Requires `G > 1`.
    ///
    /// With `w_a` the summand, `∂_τ ln w_a = −2(n+1) tanh τ + 2a/(sinh τ cosh τ)`
    /// and `∂²_τ ln w_a = −2(n+1) sech²τ − 2a (cosh²τ + sinh²τ)/(sinh²τ cosh²τ)`.
    pub fn derivs(&self, k: u64) -> CountDerivs {
        debug_assert!(!self.g.is_identity());
        let g = self.g.g();
        let x = self.g.excess();
        let np1 = self.n as f64 + 1.0;
        let tanh = (x / g).sqrt();
        let inv_sc = 1.0 / (x * g).sqrt();
        let curv_a = (g + x) / (x * g);
        let mut out = CountDerivs::default();
        if k > self.n + self.cutoff {
            return out;
        }
        for a in self.a_range(k) {
            let w = self.ln_weight(k, a).exp();
            let a_f = a as f64;
            let s = -2.0 * np1 * tanh + 2.0 * a_f * inv_sc;
            let ds = -2.0 * np1 / g - 2.0 * a_f * curv_a;
            out.p += w;
            out.dp += w * s;
            out.d2p += w * (s * s + ds);
        }
        out
    }
}

/// Parameters of the displaced thermal photocount state produced by a
/// coherent input `|√N_m⟩`: coherent amplitude `√(η_d G N_m)` and thermal
/// occupation `η_d (G − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacedThermalParams {
    pub mean_amplitude: f64,
    pub thermal_occupation: f64,
}

pub fn displaced_thermal_params(
    mode_energy: f64,
    g: Gain,
    det: DetectorSpec,
) -> Result<DisplacedThermalParams> {
    if !mode_energy.is_finite() || mode_energy < 0.0 {
        return domain(format!(
            "mode energy must be finite and >= 0, got {mode_energy}"
        ));
    }
    Ok(DisplacedThermalParams {
        mean_amplitude: (det.eta() * g.g() * mode_energy).sqrt(),
        thermal_occupation: det.eta() * g.excess(),
    })
}

/// Single-mode input to the amplifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeInput {
    Number(u64),
    Coherent(f64),
}

impl ModeInput {
    fn moments(self) -> (f64, f64) {
        match self {
            Self::Number(n) => {
                let n = n as f64;
                (n, n * n)
            }
            Self::Coherent(e) => (e, e * e + e),
        }
    }
}

/// First and second moments of the photocount in one detected mode.
pub fn count_moments(input: ModeInput, g: Gain, det: DetectorSpec) -> (f64, f64) {
    let (n1, n2) = input.moments();
    let gg = g.g();
    let x = g.excess();
    let out1 = gg * n1 + x;
    let out2 = gg * gg * n2 + 3.0 * gg * x * n1 + x * (2.0 * gg - 1.0);
    let eta = det.eta();
    (eta * out1, eta * eta * out2 + eta * (1.0 - eta) * out1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gain(g: f64) -> Gain {
        Gain::new(g).unwrap()
    }

    fn det(eta: f64) -> DetectorSpec {
        DetectorSpec::new(eta).unwrap()
    }

    #[test]
    fn nb_pmf_examples() {
        assert_eq!(nb_pmf(1, 0.5, 0).unwrap(), 0.5);
        // C(4,2)·0.75²·0.25³ = 27/512
        assert_relative_eq!(
            nb_pmf(3, 0.25, 2).unwrap(),
            27.0 / 512.0,
            max_relative = 1e-14
        );
        assert!(nb_pmf(0, 0.5, 1).is_err());
        assert!(nb_pmf(1, 0.0, 1).is_err());
        assert!(nb_pmf(1, 1.5, 1).is_err());
        assert_eq!(nb_pmf(4, 1.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn nb_pmf_normalizes() {
        for &(r, p) in &[(1u64, 0.5), (3, 0.25), (7, 0.9), (2, 0.05)] {
            let total: f64 = (0..5000).map(|k| nb_pmf(r, p, k).unwrap()).sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn nb_pmf_large_arguments_stay_finite() {
        let p = nb_pmf(500, 0.3, 1200).unwrap();
        assert!(p.is_finite() && p > 0.0);
    }

    #[test]
    fn fock_transition_examples() {
        assert_eq!(fock_transition_prob(5, 0, Gain::identity()), 1.0);
        assert_eq!(fock_transition_prob(5, 2, Gain::identity()), 0.0);
        assert_relative_eq!(
            fock_transition_prob(0, 1, gain(2.0)),
            0.25,
            max_relative = 1e-14
        );
        for k in 0..10 {
            let geo = 0.5 * 0.5f64.powi(k as i32);
            assert_relative_eq!(
                fock_transition_prob(0, k, gain(2.0)),
                geo,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn fock_transition_normalizes() {
        for n in [0u64, 1, 3, 8] {
            for g in [1.2, 2.0, 4.0] {
                let (cut, _) = added_photon_cutoff(n, gain(g), 1e-13).unwrap();
                let total: f64 = (0..=cut).map(|a| fock_transition_prob(n, a, gain(g))).sum();
                assert!((total - 1.0).abs() < 1e-10, "n={n} G={g} total={total}");
            }
        }
    }

    #[test]
    fn composition_identity_examples() {
        assert_eq!(lemma_identity_check(&[0], 3).unwrap(), (1, 1));
        assert_eq!(lemma_identity_check(&[1, 2], 1).unwrap(), (5, 5));
        assert_eq!(lemma_identity_check(&[1, 1, 1], 2).unwrap(), (21, 21));
        assert!(lemma_identity_check(&[], 2).is_err());
        assert_eq!(
            lemma_identity_check(&[u64::MAX / 2, u64::MAX / 2], 3),
            Err(Error::Overflow)
        );
    }

    #[test]
    fn composition_identity_exhaustive_two_modes() {
        for a in 0..=5 {
            for n1 in 0..=3 {
                for n2 in 0..=3 {
                    let (l, r) = lemma_identity_check(&[n1, n2], a).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn binomial_u64_values() {
        assert_eq!(binomial_u64(7, 2).unwrap(), 21);
        assert_eq!(binomial_u64(3, 5).unwrap(), 0);
        assert_eq!(binomial_u64(64, 32).unwrap(), 1832624140942590534);
        assert_eq!(binomial_u64(200, 100), Err(Error::Overflow));
    }

    #[test]
    fn cutoff_bound_is_certified() {
        for n in [0u64, 2, 5] {
            for g in [1.2, 2.0, 4.0] {
                let (cut, bound) = added_photon_cutoff(n, gain(g), 1e-10).unwrap();
                assert!(bound < 1e-10);
                let true_tail: f64 = (cut + 1..cut + 20_000)
                    .map(|a| fock_transition_prob(n, a, gain(g)))
                    .sum();
                assert!(true_tail <= bound * (1.0 + 1e-9), "n={n} G={g}");
            }
        }
    }

    #[test]
    fn cutoff_gives_up_on_enormous_gain() {
        let err = added_photon_cutoff(0, gain(1e6), 1e-12).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn lossy_distribution_examples() {
        let d =
            lossy_count_distribution(0, Gain::identity(), DetectorSpec::ideal(), 1e-12).unwrap();
        assert_eq!(d.pmf(), &[1.0]);

        let d = lossy_count_distribution(2, Gain::identity(), det(0.7), 1e-12).unwrap();
        let expect = [0.09, 0.42, 0.49];
        assert_eq!(d.pmf().len(), 3);
        for (p, e) in d.pmf().iter().zip(expect) {
            assert_relative_eq!(*p, e, max_relative = 1e-13);
        }

        // (j + 1)/2^{j+2} at count 1 + j
        let d = lossy_count_distribution(1, gain(2.0), DetectorSpec::ideal(), 1e-12).unwrap();
        assert_eq!(d.get(0), 0.0);
        for j in 0..30 {
            let e = (j as f64 + 1.0) / 2f64.powi(j + 2);
            assert_relative_eq!(d.get(1 + j as usize), e, max_relative = 1e-12);
        }
    }

    #[test]
    fn lossy_distribution_rejects_bad_tolerance() {
        assert!(lossy_count_distribution(1, gain(2.0), det(0.5), 1e-3).is_err());
        assert!(lossy_count_distribution(1, gain(2.0), det(0.5), 0.0).is_err());
    }

    #[test]
    fn lossy_distribution_mass_and_tail() {
        let tol = 1e-12;
        for n in 0..=5u64 {
            for g in [1.2, 2.0, 4.0] {
                for eta in [0.5, 0.9, 1.0] {
                    let d = lossy_count_distribution(n, gain(g), det(eta), tol).unwrap();
                    assert!(d.tail_bound() <= tol);
                    let mass = d.total_mass();
                    assert!(mass <= 1.0 + 1e-14 && mass >= 1.0 - d.tail_bound() - 1e-14);
                }
            }
        }
    }

    #[test]
    fn lossy_moments_match_heisenberg_moments() {
        for n in 0..=5u64 {
            for g in [1.2, 2.0, 4.0] {
                for eta in [0.5, 0.9, 1.0] {
                    let d = lossy_count_distribution(n, gain(g), det(eta), 1e-13).unwrap();
                    let (m1, m2) = count_moments(ModeInput::Number(n), gain(g), det(eta));
                    assert_relative_eq!(d.mean(), m1, max_relative = 1e-9);
                    assert_relative_eq!(d.second_moment(), m2, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn unit_efficiency_is_shifted_transition_law() {
        for n in 0..=4u64 {
            for g in [1.2, 2.0, 4.0] {
                let d = lossy_count_distribution(n, gain(g), DetectorSpec::ideal(), 1e-12).unwrap();
                for k in 0..n as usize {
                    assert_eq!(d.get(k), 0.0);
                }
                for a in 0..40u64 {
                    let p = fock_transition_prob(n, a, gain(g));
                    // entries past the trimmed support are within the tail bound
                    assert_relative_eq!(
                        d.get((n + a) as usize),
                        p,
                        epsilon = 1e-12,
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn fixed_support_pmf_matches_adaptive() {
        let d = lossy_count_distribution(1, gain(2.0), det(0.7), 1e-12).unwrap();
        let f = lossy_count_pmf_on_support(1, gain(2.0), det(0.7), 30, 1e-12).unwrap();
        assert_eq!(f.pmf().len(), 31);
        for k in 0..=30 {
            // the two series are cut at tol and tol/2 respectively
            assert_relative_eq!(f.get(k), d.get(k), epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn displaced_thermal_examples() {
        let p = displaced_thermal_params(0.0, Gain::identity(), DetectorSpec::ideal()).unwrap();
        assert_eq!((p.mean_amplitude, p.thermal_occupation), (0.0, 0.0));
        let p = displaced_thermal_params(4.0, gain(2.0), det(0.5)).unwrap();
        assert_relative_eq!(p.mean_amplitude, 2.0);
        assert_relative_eq!(p.thermal_occupation, 0.5);
        let p = displaced_thermal_params(1.0, gain(3.0), DetectorSpec::ideal()).unwrap();
        assert_relative_eq!(p.mean_amplitude, 3f64.sqrt());
        assert_relative_eq!(p.thermal_occupation, 2.0);
        assert!(displaced_thermal_params(-1.0, gain(3.0), DetectorSpec::ideal()).is_err());
    }

    #[test]
    fn count_moment_examples() {
        assert_eq!(
            count_moments(
                ModeInput::Number(0),
                Gain::identity(),
                DetectorSpec::ideal()
            ),
            (0.0, 0.0)
        );
        let (m, s) = count_moments(ModeInput::Number(1), gain(2.0), DetectorSpec::ideal());
        assert_relative_eq!(m, 3.0);
        assert_relative_eq!(s, 13.0);
        let (m, s) = count_moments(ModeInput::Coherent(1.0), gain(2.0), det(0.5));
        assert_relative_eq!(m, 1.5);
        assert_relative_eq!(s, 5.0);
    }

    #[test]
    fn derivative_series_matches_finite_differences() {
        let n = 2;
        let d = det(0.7);
        let tau = 0.6;
        let h = 1e-4;
        let at = |t: f64| {
            let g = Gain::from_tau(t).unwrap();
            LossySeries::new(n, g, d, 400)
        };
        let mid = at(tau);
        let (lo, hi) = (at(tau - h), at(tau + h));
        for k in 0..12 {
            let dv = mid.derivs(k);
            let fd1 = (hi.prob(k) - lo.prob(k)) / (2.0 * h);
            let fd2 = (hi.prob(k) - 2.0 * mid.prob(k) + lo.prob(k)) / (h * h);
            assert_relative_eq!(dv.p, mid.prob(k), max_relative = 1e-14);
            assert!((dv.dp - fd1).abs() < 1e-7, "k={k}: {} vs {}", dv.dp, fd1);
            assert!((dv.d2p - fd2).abs() < 1e-5, "k={k}: {} vs {}", dv.d2p, fd2);
        }
    }
}
