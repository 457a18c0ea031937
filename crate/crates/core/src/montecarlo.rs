//! Photon-counting simulation at the amplifier output.
//!
//! Every trial owns a ChaCha8 generator keyed by `(seed, trial index)`, so a
//! plan produces the same estimates under any thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal, Poisson};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Error, Result};
use crate::estimators::g_hat;
use crate::params::{probe_totals, DetectorSpec, Gain, ProbeSpec};

/// Generator for one trial of a seeded run.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    // rate is finite and far below the sampler's limit for G ≤ 1e6
    let dist = Poisson::new(lambda).expect("finite positive Poisson rate");
    dist.sample(rng) as u64
}

/// Photons added to a Fock input of `n` photons: `NB(n + 1, sech²τ)` drawn
/// as a Poisson count with a gamma-distributed rate (shape `n + 1`, scale
/// `sinh²τ`).
pub fn sample_added_photons<R: Rng + ?Sized>(n: u64, g: Gain, rng: &mut R) -> u64 {
    if g.is_identity() {
        return 0;
    }
    let gamma = Gamma::new(n as f64 + 1.0, g.excess()).expect("positive gamma parameters");
    poisson(gamma.sample(rng), rng)
}

fn thin<R: Rng + ?Sized>(photons: u64, det: DetectorSpec, rng: &mut R) -> u64 {
    if det.is_ideal() || photons == 0 {
        return photons;
    }
    Binomial::new(photons, det.eta())
        .expect("efficiency in (0, 1]")
        .sample(rng)
}

/// Per-mode counts for a product Fock probe: amplify, then thin with `η_d`.
pub fn sample_counts_number_probe<R: Rng + ?Sized>(
    n_vec: &[u64],
    g: Gain,
    det: DetectorSpec,
    rng: &mut R,
) -> Vec<u64> {
    n_vec
        .iter()
        .map(|&n| {
            let a = sample_added_photons(n, g, rng);
            thin(n + a, det, rng)
        })
        .collect()
}

/// Per-mode counts for a product coherent probe.
///
/// The detected state is displaced thermal, whose P-function is a Gaussian
/// around `√(η_d G N_m)` with variance `η_d(G − 1)/2` per quadrature; a count
/// is Poisson in `|β|²` for `β` drawn from it.
pub fn sample_counts_coherent_probe<R: Rng + ?Sized>(
    energies: &[f64],
    g: Gain,
    det: DetectorSpec,
    rng: &mut R,
) -> Vec<u64> {
    let eta = det.eta();
    let sd = (eta * g.excess() / 2.0).sqrt();
    energies
        .iter()
        .map(|&e| {
            let mean = (eta * g.g() * e).sqrt();
            let intensity = if sd == 0.0 {
                mean * mean
            } else {
                let normal = Normal::new(0.0, sd).expect("finite spread");
                let re = mean + normal.sample(rng);
                let im = normal.sample(rng);
                re * re + im * im
            };
            poisson(intensity, rng)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub probe: ProbeSpec,
    pub g_true: Gain,
    pub det: DetectorSpec,
    pub trials: u64,
    pub seed: u64,
}

impl TrialPlan {
    pub fn new(
        probe: ProbeSpec,
        g_true: Gain,
        det: DetectorSpec,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if trials == 0 {
            return domain("at least one trial is required");
        }
        probe.validate()?;
        if matches!(probe, ProbeSpec::NdsTotalDistribution { .. }) {
            return Err(Error::UnsupportedProbe(
                "entangled NDS distributions cannot be sampled; use a number or coherent probe",
            ));
        }
        Ok(Self {
            probe,
            g_true,
            det,
            trials,
            seed,
        })
    }
}

/// Summary of an estimator over independent trials. Standard errors are
/// `None` for a single trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorStats {
    pub trials: u64,
    pub mean_estimate: f64,
    pub bias: f64,
    pub empirical_mse: f64,
    pub stderr_mean: Option<f64>,
    pub stderr_mse: Option<f64>,
}

impl EstimatorStats {
    /// Statistics of `estimates` of `g_true`, accumulated in order.
    pub fn from_estimates(estimates: &[f64], g_true: f64) -> Result<Self> {
        if estimates.is_empty() {
            return domain("no estimates to summarize");
        }
        let n = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / n;
        let mse = estimates.iter().map(|e| (e - g_true).powi(2)).sum::<f64>() / n;
        let (stderr_mean, stderr_mse) = if estimates.len() < 2 {
            (None, None)
        } else {
            let var_est = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let var_sq = estimates
                .iter()
                .map(|e| ((e - g_true).powi(2) - mse).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            (Some((var_est / n).sqrt()), Some((var_sq / n).sqrt()))
        };
        Ok(Self {
            trials: estimates.len() as u64,
            mean_estimate: mean,
            bias: mean - g_true,
            empirical_mse: mse,
            stderr_mean,
            stderr_mse,
        })
    }
}

fn one_trial(plan: &TrialPlan, n_total: f64, m: usize, trial: u64) -> f64 {
    let mut rng = trial_rng(plan.seed, trial);
    let counts = match &plan.probe {
        ProbeSpec::NumberState(n_vec) => {
            sample_counts_number_probe(n_vec, plan.g_true, plan.det, &mut rng)
        }
        ProbeSpec::CoherentState(e) => {
            sample_counts_coherent_probe(e, plan.g_true, plan.det, &mut rng)
        }
        ProbeSpec::NdsTotalDistribution { .. } => unreachable!("rejected by TrialPlan::new"),
    };
    let y: u64 = counts.iter().sum();
    g_hat(y, n_total, m, plan.det)
}

/// Runs the plan on the global rayon pool.
pub fn run_estimator_trials(plan: &TrialPlan) -> Result<EstimatorStats> {
    let (n_total, m) = probe_totals(&plan.probe)?;
    let estimates: Vec<f64> = (0..plan.trials)
        .into_par_iter()
        .map(|t| one_trial(plan, n_total, m, t))
        .collect();
    EstimatorStats::from_estimates(&estimates, plan.g_true.g())
}

/// Runs the plan on a dedicated pool of `workers` threads.
pub fn run_estimator_trials_with_workers(
    plan: &TrialPlan,
    workers: usize,
) -> Result<EstimatorStats> {
    if workers == 0 {
        return domain("worker count must be positive");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_estimator_trials(plan))
}

/// Pearson χ² goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Compares a count histogram with an expected pmf. Cells expecting fewer
/// than five draws are merged from the top down, together with all mass the
/// pmf leaves unlisted and any observations past its support.
pub fn chi_square_test(observed: &[u64], expected_pmf: &[f64]) -> Result<ChiSquare> {
    let draws: u64 = observed.iter().sum();
    if draws == 0 {
        return domain("histogram is empty");
    }
    let total = draws as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled_obs = 0.0;
    let mut pooled_exp = 0.0;
    let len = observed.len().max(expected_pmf.len());
    let listed: f64 = expected_pmf.iter().sum();
    pooled_exp += (1.0 - listed).max(0.0) * total;
    for k in (0..len).rev() {
        let o = observed.get(k).copied().unwrap_or(0) as f64;
        let e = expected_pmf.get(k).copied().unwrap_or(0.0) * total;
        pooled_obs += o;
        pooled_exp += e;
        if pooled_exp >= 5.0 {
            cells.push((pooled_obs, pooled_exp));
            pooled_obs = 0.0;
            pooled_exp = 0.0;
        }
    }
    if pooled_obs > 0.0 || pooled_exp > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pooled_obs;
                last.1 += pooled_exp;
            }
            None => cells.push((pooled_obs, pooled_exp)),
        }
    }
    if cells.len() < 2 {
        return domain("fewer than two cells after pooling");
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let law = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: law.sf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplifier::{
        count_moments, fock_transition_prob, lossy_count_distribution, ModeInput,
    };
    use crate::estimators::{mse_coherent_analytic, mse_number_analytic};

    fn gain(g: f64) -> Gain {
        Gain::new(g).unwrap()
    }

    fn det(eta: f64) -> DetectorSpec {
        DetectorSpec::new(eta).unwrap()
    }

    fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    fn histogram(draws: impl Iterator<Item = u64>) -> Vec<u64> {
        let mut h = Vec::new();
        for d in draws {
            let d = d as usize;
            if h.len() <= d {
                h.resize(d + 1, 0);
            }
            h[d] += 1;
        }
        h
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: u64 = trial_rng(7, 3).random();
        let _: u64 = trial_rng(7, 2).random();
        let b: u64 = trial_rng(7, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, trial_rng(7, 4).random::<u64>());
    }

    #[test]
    fn unit_gain_samples() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_added_photons(3, Gain::identity(), &mut rng), 0);
            assert_eq!(
                sample_counts_number_probe(&[2], Gain::identity(), DetectorSpec::ideal(), &mut rng),
                vec![2]
            );
        }
    }

    #[test]
    fn added_photon_mean() {
        let mut rng = trial_rng(11, 0);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_added_photons(1, gain(2.0), &mut rng) as f64)
            .collect();
        let (m, se) = mean_and_stderr(&xs);
        assert!((m - 2.0).abs() < 4.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn added_photon_pmf_is_geometric() {
        let mut rng = trial_rng(12, 0);
        let h = histogram((0..1_000_000).map(|_| sample_added_photons(0, gain(2.0), &mut rng)));
        let pmf: Vec<f64> = (0..60)
            .map(|a| fock_transition_prob(0, a, gain(2.0)))
            .collect();
        let chi = chi_square_test(&h, &pmf).unwrap();
        assert!(chi.p_value > 0.001, "{chi:?}");
    }

    #[test]
    fn coherent_unit_gain_is_poisson() {
        let mut rng = trial_rng(13, 0);
        let h = histogram((0..200_000).map(|_| {
            sample_counts_coherent_probe(&[4.0], Gain::identity(), DetectorSpec::ideal(), &mut rng)
                [0]
        }));
        let pmf: Vec<f64> = (0..40u32)
            .map(|k| {
                (-4.0f64 + k as f64 * 4f64.ln()
                    - statrs::function::factorial::ln_factorial(k as u64))
                .exp()
            })
            .collect();
        let chi = chi_square_test(&h, &pmf).unwrap();
        assert!(chi.p_value > 0.001, "{chi:?}");
    }

    #[test]
    fn number_probe_matches_lossy_pmf() {
        let (g, d) = (gain(2.0), det(0.7));
        let mut rng = trial_rng(14, 0);
        let h =
            histogram((0..1_000_000).map(|_| sample_counts_number_probe(&[1], g, d, &mut rng)[0]));
        let expected = lossy_count_distribution(1, g, d, 1e-12).unwrap();
        let chi = chi_square_test(&h, expected.pmf()).unwrap();
        assert!(chi.p_value > 0.001, "{chi:?}");
    }

    fn moments_within_4_stderr(input: ModeInput, g: Gain, d: DetectorSpec, seed: u64) {
        let mut rng = trial_rng(seed, 0);
        let draws: Vec<f64> = (0..200_000)
            .map(|_| match input {
                ModeInput::Number(n) => sample_counts_number_probe(&[n], g, d, &mut rng)[0],
                ModeInput::Coherent(e) => sample_counts_coherent_probe(&[e], g, d, &mut rng)[0],
            } as f64)
            .collect();
        let squares: Vec<f64> = draws.iter().map(|y| y * y).collect();
        let (m1, se1) = mean_and_stderr(&draws);
        let (m2, se2) = mean_and_stderr(&squares);
        let (e1, e2) = count_moments(input, g, d);
        assert!(
            (m1 - e1).abs() < 4.0 * se1,
            "{input:?} G={} eta={}: {m1} vs {e1}",
            g.g(),
            d.eta()
        );
        assert!(
            (m2 - e2).abs() < 4.0 * se2,
            "{input:?} G={} eta={}: {m2} vs {e2}",
            g.g(),
            d.eta()
        );
    }

    #[test]
    fn moment_consistency_grid() {
        let mut seed = 100;
        for g in [1.5, 2.0, 4.0] {
            for eta in [0.5, 0.9, 1.0] {
                for input in [ModeInput::Number(1), ModeInput::Coherent(1.0)] {
                    seed += 1;
                    moments_within_4_stderr(input, gain(g), det(eta), seed);
                }
            }
        }
    }

    #[test]
    fn coherent_mean_example() {
        let mut rng = trial_rng(15, 0);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_counts_coherent_probe(&[1.0], gain(2.0), det(0.5), &mut rng)[0] as f64)
            .collect();
        let (m, se) = mean_and_stderr(&xs);
        assert!((m - 1.5).abs() < 4.0 * se, "mean {m}");
    }

    #[test]
    fn nds_plan_is_rejected() {
        let probe = ProbeSpec::nds_total(vec![0.5, 0.5], 1).unwrap();
        let err = TrialPlan::new(probe, gain(2.0), DetectorSpec::ideal(), 10, 1).unwrap_err();
        assert!(matches!(err, Error::UnsupportedProbe(_)));
        let probe = ProbeSpec::number_state(vec![1]).unwrap();
        assert!(TrialPlan::new(probe, gain(2.0), DetectorSpec::ideal(), 0, 1).is_err());
    }

    #[test]
    fn single_trial_has_no_stderr() {
        let probe = ProbeSpec::number_state(vec![1; 4]).unwrap();
        let plan = TrialPlan::new(probe, gain(2.0), DetectorSpec::ideal(), 1, 5).unwrap();
        let stats = run_estimator_trials(&plan).unwrap();
        assert_eq!(stats.trials, 1);
        assert!(stats.stderr_mean.is_none() && stats.stderr_mse.is_none());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let probe = ProbeSpec::coherent_state(vec![1.0; 20]).unwrap();
        let plan = TrialPlan::new(probe, gain(2.0), det(0.7), 5_000, 42).unwrap();
        let a = run_estimator_trials_with_workers(&plan, 1).unwrap();
        let b = run_estimator_trials_with_workers(&plan, 8).unwrap();
        assert_eq!(a, b);
        assert!(run_estimator_trials_with_workers(&plan, 0).is_err());
    }

    #[test]
    fn estimator_trials_match_analytic_mse() {
        let g = gain(2.0);
        let number = ProbeSpec::number_state(vec![1; 20]).unwrap();
        let plan = TrialPlan::new(number, g, DetectorSpec::ideal(), 100_000, 2024).unwrap();
        let s = run_estimator_trials(&plan).unwrap();
        let target = mse_number_analytic(20.0, 20, g, DetectorSpec::ideal())
            .unwrap()
            .total;
        assert!((s.empirical_mse - target).abs() < 0.05 * target, "{s:?}");
        assert!(s.bias.abs() < 4.0 * s.stderr_mean.unwrap());

        let coherent = ProbeSpec::coherent_state(vec![1.0; 20]).unwrap();
        let plan = TrialPlan::new(coherent, g, DetectorSpec::ideal(), 100_000, 2025).unwrap();
        let s = run_estimator_trials(&plan).unwrap();
        let target = mse_coherent_analytic(20.0, 20, g, DetectorSpec::ideal())
            .unwrap()
            .total;
        assert!((target - 0.1).abs() < 1e-12);
        assert!((s.empirical_mse - target).abs() < 0.05 * target, "{s:?}");
        assert!(s.bias.abs() < 4.0 * s.stderr_mean.unwrap());
    }

    #[test]
    fn chi_square_rejects_wrong_law() {
        let mut rng = trial_rng(16, 0);
        let h = histogram((0..100_000).map(|_| sample_added_photons(0, gain(2.0), &mut rng)));
        let wrong: Vec<f64> = (0..60)
            .map(|a| fock_transition_prob(0, a, gain(2.2)))
            .collect();
        assert!(chi_square_test(&h, &wrong).unwrap().p_value < 1e-6);
        assert!(chi_square_test(&[], &[1.0]).is_err());
    }
}
