//! Built-in consistency checks, each a row of the selftest report.

use gainsense_core::fisher::DEFAULT_FD_STEP;
use gainsense_core::{
    added_photon_cutoff, fi_heterodyne, fi_homodyne, fi_of_pmf_family, fidelity_coherent,
    fidelity_coherent_lossy, fidelity_nds, lemma_identity_check, lossy_count_pmf_on_support,
    min_fidelity_classical, min_fidelity_quantum, mse_number_analytic, qfi_coherent,
    qfi_coherent_lossy, qfi_from_fidelity, qfi_nds, qfi_number_lossy, DetectorSpec, Gain, GainPair,
    Parameter, Result, DEFAULT_TAIL_TOL,
};

use crate::error::CliError;
use crate::table::{Cell, Report, Table};

const GAINS: [f64; 5] = [1.1, 1.5, 2.0, 3.0, 5.0];
const PHOTONS: [u64; 3] = [0, 1, 6];
const MODES: [usize; 2] = [1, 9];

struct Check {
    name: &'static str,
    cases: u64,
    max_error: f64,
    tolerance: f64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            max_error: 0.0,
            tolerance,
        }
    }

    fn record(&mut self, error: f64) {
        self.cases += 1;
        // NaN must fail the check and stay failed
        self.max_error = if error.is_nan() || self.max_error.is_nan() {
            f64::NAN
        } else {
            self.max_error.max(error)
        };
    }

    fn record_rel(&mut self, got: f64, want: f64) {
        self.record((got - want).abs() / want.abs());
    }

    fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

fn gain(g: f64) -> Result<Gain> {
    Gain::new(g)
}

fn fidelity_qfi<F: Fn(f64) -> Result<f64>>(curve: F, g: Gain) -> Result<f64> {
    Ok(
        qfi_from_fidelity(curve, g.tau(), DEFAULT_FD_STEP, Parameter::Tau)?
            .to_gain(g)?
            .value,
    )
}

fn compositions(max_part: u64, m: usize) -> Vec<Vec<u64>> {
    (0..m).fold(vec![Vec::new()], |acc, _| {
        acc.iter()
            .flat_map(|v| {
                (0..=max_part).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect()
    })
}

fn composition_identity() -> Result<Check> {
    let mut c = Check::new("composition_identity", 0.0);
    for m in 1..=3 {
        for n_vec in compositions(3, m) {
            for a in 0..=5 {
                let (lhs, rhs) = lemma_identity_check(&n_vec, a)?;
                c.record(lhs.abs_diff(rhs) as f64);
            }
        }
    }
    Ok(c)
}

fn oracle_nds(perturb: f64) -> Result<Check> {
    let mut c = Check::new("oracle_optimal_qfi", 1e-6);
    for g in GAINS {
        let g = gain(g)?;
        for n in PHOTONS {
            for m in MODES {
                let mut pmf = vec![0.0; n as usize + 1];
                pmf[n as usize] = 1.0;
                let k = fidelity_qfi(
                    |t| fidelity_nds(&pmf, m, &GainPair::new(g, Gain::from_tau(t)?)),
                    g,
                )?;
                c.record_rel(k, qfi_nds(n as f64, m, g)?.value * (1.0 + perturb));
            }
        }
    }
    Ok(c)
}

fn oracle_coherent() -> Result<Check> {
    let mut c = Check::new("oracle_coherent_qfi", 1e-6);
    for g in GAINS {
        let g = gain(g)?;
        for n in PHOTONS.map(|n| n as f64) {
            for m in MODES {
                let k = fidelity_qfi(
                    |t| fidelity_coherent(n, m, &GainPair::new(g, Gain::from_tau(t)?)),
                    g,
                )?;
                c.record_rel(k, qfi_coherent(n, m, g)?.value);
            }
        }
    }
    Ok(c)
}

fn oracle_lossy_coherent() -> Result<Check> {
    let mut c = Check::new("oracle_lossy_coherent_qfi", 1e-6);
    let det = DetectorSpec::new(0.7)?;
    for g in GAINS {
        let g = gain(g)?;
        for n in PHOTONS.map(|n| n as f64) {
            for m in MODES {
                let k = fidelity_qfi(
                    |t| fidelity_coherent_lossy(n, m, &GainPair::new(g, Gain::from_tau(t)?), det),
                    g,
                )?;
                c.record_rel(k, qfi_coherent_lossy(n, m, g, det)?.value);
            }
        }
    }
    Ok(c)
}

fn lossy_number_unit_efficiency() -> Result<Check> {
    let mut c = Check::new("lossy_number_qfi_unit_efficiency", 1e-8);
    for n in 0..=5u64 {
        for g in [1.2, 2.0, 4.0] {
            let k = qfi_number_lossy(n, gain(g)?, DetectorSpec::ideal(), DEFAULT_TAIL_TOL)?;
            c.record_rel(k.wrt_tau.value, 4.0 * (n as f64 + 1.0));
        }
    }
    Ok(c)
}

fn lossy_number_oracle() -> Result<Check> {
    let mut c = Check::new("oracle_lossy_number_qfi", 1e-6);
    for eta in [0.5, 0.9] {
        let det = DetectorSpec::new(eta)?;
        for n in [0u64, 1, 3] {
            for g in [1.2, 2.0, 4.0] {
                let g = gain(g)?;
                let series = qfi_number_lossy(n, g, det, DEFAULT_TAIL_TOL)?.wrt_tau.value;
                let top = Gain::from_tau(g.tau() + 3.0 * DEFAULT_FD_STEP)?;
                let support = n + added_photon_cutoff(n, top, 1e-16)?.0;
                let family =
                    |t: f64| lossy_count_pmf_on_support(n, Gain::from_tau(t)?, det, support, 1e-12);
                let oracle =
                    fi_of_pmf_family(family, g.tau(), DEFAULT_FD_STEP, Parameter::Tau)?.value;
                c.record_rel(series, oracle);
            }
        }
    }
    Ok(c)
}

fn lossless_reductions() -> Result<Check> {
    let mut c = Check::new("lossless_reductions", 1e-12);
    let ideal = DetectorSpec::ideal();
    for g in GAINS {
        let g = gain(g)?;
        for n in PHOTONS.map(|n| n as f64) {
            for m in MODES {
                c.record_rel(
                    qfi_coherent_lossy(n, m, g, ideal)?.value,
                    qfi_coherent(n, m, g)?.value,
                );
                let pair = GainPair::new(g, gain(g.g() * 1.3)?);
                c.record_rel(
                    fidelity_coherent_lossy(n, m, &pair, ideal)?,
                    fidelity_coherent(n, m, &pair)?,
                );
                c.record_rel(
                    mse_number_analytic(n, m, g, ideal)?.total,
                    1.0 / qfi_nds(n, m, g)?.value,
                );
            }
        }
    }
    Ok(c)
}

/// Counts violations of `qfi_nds ≥ qfi_coherent ≥ max(homodyne, heterodyne)`.
fn hierarchy() -> Result<Check> {
    let mut c = Check::new("fisher_information_hierarchy", 0.0);
    for g in GAINS {
        let g = gain(g)?;
        for n in PHOTONS.map(|n| n as f64) {
            for m in MODES {
                let q = qfi_nds(n, m, g)?.value;
                let k = qfi_coherent(n, m, g)?.value;
                let best = fi_homodyne(n, m, g)?
                    .value
                    .max(fi_heterodyne(n, m, g)?.value);
                c.record(f64::from(u8::from(!(q >= k && k > best))));
            }
        }
    }
    Ok(c)
}

/// Counts rows where the classical minimum fidelity drops below the quantum one.
fn bures_ordering() -> Result<Check> {
    let mut c = Check::new("bures_classical_ge_quantum", 0.0);
    let gs = [1.0, 1.5, 2.0, 4.0];
    for g in gs {
        for gp in gs {
            let pair = GainPair::from_gains(g, gp)?;
            for n in [0.0, 1.0, 5.5] {
                for m in [1, 3] {
                    let q = min_fidelity_quantum(n, m, &pair)?.min_fidelity;
                    let k = min_fidelity_classical(n, m, &pair)?;
                    c.record(f64::from(u8::from(k < q - 1e-12)));
                }
            }
        }
    }
    Ok(c)
}

/// Runs every check. The report is complete even when checks fail; the
/// number of failures is returned alongside it.
pub fn cmd_selftest(perturb: f64) -> std::result::Result<(Report, usize), CliError> {
    let checks = [
        composition_identity()?,
        oracle_nds(perturb)?,
        oracle_coherent()?,
        oracle_lossy_coherent()?,
        lossy_number_unit_efficiency()?,
        lossy_number_oracle()?,
        lossless_reductions()?,
        hierarchy()?,
        bures_ordering()?,
    ];
    let mut table = Table::new(&["check", "cases", "max_error", "tolerance", "status"]);
    let mut failed = 0;
    for c in &checks {
        if !c.passed() {
            failed += 1;
        }
        table.rows.push(vec![
            Cell::Text(c.name.into()),
            Cell::Num(c.cases as f64),
            Cell::Num(c.max_error),
            Cell::Num(c.tolerance),
            Cell::Text(if c.passed() { "pass" } else { "fail" }.into()),
        ]);
    }
    let mut report = Report::new("selftest", table);
    report.note("checks", checks.len());
    report.note("failed", failed);
    Ok((report, failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_identity_case_count() {
        // Σ_{M=1..3} 4^M tuples × 6 values of a
        let c = composition_identity().unwrap();
        assert_eq!(c.cases, (4 + 16 + 64) * 6);
        assert!(c.passed());
    }

    #[test]
    fn nan_fails_a_check() {
        let mut c = Check::new("x", 1.0);
        c.record(f64::NAN);
        c.record(0.5);
        assert!(!c.passed());
    }
}
