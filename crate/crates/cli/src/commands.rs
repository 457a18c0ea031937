//! One function per subcommand; each turns validated options into a [`Report`].

use gainsense_core::estimators::threshold_gain;
use gainsense_core::{
    fi_heterodyne, fi_homodyne, min_fidelity_classical, min_fidelity_quantum,
    mse_coherent_analytic, mse_number_analytic, probe_totals, qfi_coherent, qfi_nds,
    run_estimator_trials, DetectorSpec, Error, FisherValue, Gain, GainPair, ProbeSpec, TrialPlan,
    MAX_GAIN,
};
use rayon::prelude::*;

use crate::args::{GridKind, ProbeKind, RunArgs};
use crate::error::{usage, CliError};
use crate::table::{Cell, Report, Table};

pub const MIN_MC_TRIALS: u64 = 1_000;

/// Gains of a linear grid in `G` or in `τ`.
pub fn gain_grid(min: f64, max: f64, steps: usize, kind: GridKind) -> Result<Vec<Gain>, CliError> {
    if steps < 2 {
        return usage(format!("--steps must be at least 2, got {steps}"));
    }
    if !(min >= 1.0 && max <= MAX_GAIN && min < max) {
        return usage(format!(
            "gain grid needs 1 <= gain-min < gain-max <= {MAX_GAIN}, got [{min}, {max}]"
        ));
    }
    let last = (steps - 1) as f64;
    let point = |lo: f64, hi: f64, i: usize| {
        if i == steps - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / last
        }
    };
    (0..steps)
        .map(|i| match kind {
            GridKind::Gain => Gain::new(point(min, max, i)),
            GridKind::Tau => {
                let (lo, hi) = (Gain::new(min)?.tau(), Gain::new(max)?.tau());
                if i == steps - 1 {
                    Gain::new(max)
                } else {
                    Gain::from_tau(point(lo, hi, i))
                }
            }
        })
        .map(|g| g.map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn explicit_gains(values: &[f64]) -> Result<Vec<Gain>, CliError> {
    if values.is_empty() {
        return usage("--gains is empty");
    }
    values
        .iter()
        .map(|&g| Gain::new(g).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn detector(args: &RunArgs, default: f64) -> Result<DetectorSpec, CliError> {
    DetectorSpec::new(args.eta.unwrap_or(default)).map_err(|e| CliError::Usage(e.to_string()))
}

/// `(N, M)` from the per-mode vectors if given, otherwise from
/// `--photons`/`--modes`.
pub fn resources(
    args: &RunArgs,
    default_n: f64,
    default_m: usize,
) -> Result<(f64, usize), CliError> {
    let probe = match (&args.n_vec, &args.energy_vec) {
        (Some(_), Some(_)) => return usage("give at most one of --n-vec and --energy-vec"),
        (Some(n), None) => Some(ProbeSpec::number_state(n.clone())),
        (None, Some(e)) => Some(ProbeSpec::coherent_state(e.clone())),
        (None, None) => None,
    };
    if let Some(p) = probe {
        if args.photons.is_some() || args.modes.is_some() {
            return usage("--photons/--modes conflict with a per-mode vector");
        }
        return p
            .and_then(|p| probe_totals(&p))
            .map_err(|e| CliError::Usage(e.to_string()));
    }
    let n = args.photons.unwrap_or(default_n);
    let m = args.modes.unwrap_or(default_m);
    if !(n >= 0.0 && n.is_finite()) {
        return usage(format!("--photons must be finite and >= 0, got {n}"));
    }
    if m == 0 {
        return usage("--modes must be at least 1");
    }
    Ok((n, m))
}

/// Value with respect to `G`, or the boundary token where it diverges.
fn gain_cell(v: Result<FisherValue, Error>) -> Result<Cell, CliError> {
    match v {
        Ok(f) => Ok(Cell::Num(f.value)),
        Err(Error::Singularity { .. }) => Ok(Cell::Boundary),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_qfi_curve(args: &RunArgs) -> Result<Report, CliError> {
    let (n, m) = resources(args, 6.0, 9)?;
    let grid = gain_grid(
        args.gain_min.unwrap_or(1.0),
        args.gain_max.unwrap_or(5.0),
        args.steps.unwrap_or(41),
        args.grid,
    )?;
    let ideal = DetectorSpec::ideal();
    let rows = grid
        .par_iter()
        .map(|&g| -> Result<Vec<Cell>, CliError> {
            let mse = mse_coherent_analytic(n, m, g, ideal)?.total;
            let inv_mse = if mse > 0.0 {
                Cell::Num(1.0 / mse)
            } else {
                Cell::Boundary
            };
            Ok(vec![
                Cell::Num(g.g()),
                gain_cell(qfi_nds(n, m, g))?,
                gain_cell(qfi_coherent(n, m, g))?,
                gain_cell(fi_homodyne(n, m, g))?,
                gain_cell(fi_heterodyne(n, m, g))?,
                inv_mse,
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "G",
        "qfi_nds",
        "qfi_coherent",
        "fi_homodyne",
        "fi_heterodyne",
        "inv_mse_coherent_counting",
    ]);
    table.rows = rows;
    let mut report = Report::new("qfi-curve", table);
    report.note("photons", n);
    report.note("modes", m);
    Ok(report)
}

/// The Fock and coherent probes simulated for `(N, M)`.
fn mc_probes(args: &RunArgs) -> Result<Vec<(&'static str, ProbeSpec)>, CliError> {
    let kind = args.probe.unwrap_or(ProbeKind::Both);
    if kind == ProbeKind::Nds {
        return Err(Error::UnsupportedProbe(
            "entangled NDS probes cannot be simulated; use number, coherent or both",
        )
        .into());
    }
    let bad = |e: Error| CliError::Usage(e.to_string());
    let (n, m) = resources(args, 20.0, 20)?;
    let number = match &args.n_vec {
        Some(v) => ProbeSpec::number_state(v.clone()).map_err(bad)?,
        None => {
            if n.fract() != 0.0 {
                return usage(format!(
                    "a number-state probe needs an integer photon count, got {n}"
                ));
            }
            // photons spread as evenly as possible, the first modes taking the remainder
            let (base, extra) = (n as u64 / m as u64, n as u64 % m as u64);
            ProbeSpec::number_state((0..m as u64).map(|i| base + u64::from(i < extra)).collect())
                .map_err(bad)?
        }
    };
    let coherent = match &args.energy_vec {
        Some(v) => ProbeSpec::coherent_state(v.clone()).map_err(bad)?,
        None => ProbeSpec::coherent_state(vec![n / m as f64; m]).map_err(bad)?,
    };
    Ok(match kind {
        ProbeKind::Number => vec![("number", number)],
        ProbeKind::Coherent => vec![("coherent", coherent)],
        _ => vec![("number", number), ("coherent", coherent)],
    })
}

pub fn cmd_mc_validate(args: &RunArgs) -> Result<Report, CliError> {
    let trials = args.trials.unwrap_or(100_000);
    if trials < MIN_MC_TRIALS {
        return usage(format!(
            "--trials must be at least {MIN_MC_TRIALS}, got {trials}"
        ));
    }
    let det = detector(args, 0.7)?;
    let gains = match &args.gains {
        Some(v) => explicit_gains(v)?,
        None => match (args.gain_min, args.gain_max, args.steps) {
            (None, None, None) => vec![Gain::new(2.0)?],
            _ => gain_grid(
                args.gain_min.unwrap_or(1.0),
                args.gain_max.unwrap_or(5.0),
                args.steps.unwrap_or(5),
                args.grid,
            )?,
        },
    };
    let probes = mc_probes(args)?;
    let mut table = Table::new(&[
        "G",
        "probe_kind",
        "empirical_mse",
        "analytic_mse",
        "bias",
        "stderr_mean",
        "stderr_mse",
        "z_score_mse",
    ]);
    let mut max_abs_z: f64 = 0.0;
    for &g in &gains {
        for (kind, probe) in &probes {
            let (n, m) = probe_totals(probe)?;
            let analytic = match probe {
                ProbeSpec::NumberState(_) => mse_number_analytic(n, m, g, det)?,
                _ => mse_coherent_analytic(n, m, g, det)?,
            }
            .total;
            let plan = TrialPlan::new(probe.clone(), g, det, trials, args.seed)?;
            let stats = run_estimator_trials(&plan)?;
            let se_mse = stats.stderr_mse.unwrap_or(f64::NAN);
            let z = (stats.empirical_mse - analytic) / se_mse;
            max_abs_z = max_abs_z.max(z.abs());
            table.rows.push(vec![
                Cell::Num(g.g()),
                Cell::Text(kind.to_string()),
                Cell::Num(stats.empirical_mse),
                Cell::Num(analytic),
                Cell::Num(stats.bias),
                Cell::Num(stats.stderr_mean.unwrap_or(f64::NAN)),
                Cell::Num(se_mse),
                Cell::Num(z),
            ]);
        }
    }
    let mut report = Report::new("mc-validate", table);
    report.note("trials", trials);
    report.note(
        "max_abs_z_score_mse",
        crate::table::round_significant(max_abs_z),
    );
    Ok(report)
}

pub const DEFAULT_ETAS: [f64; 6] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.99];

pub fn cmd_threshold_curve(args: &RunArgs) -> Result<Report, CliError> {
    let etas = args.etas.clone().unwrap_or_else(|| DEFAULT_ETAS.to_vec());
    if etas.is_empty() {
        return usage("--etas is empty");
    }
    if let Some(bad) = etas.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return usage(format!(
            "threshold efficiencies must lie in (0, 1), got {bad}"
        ));
    }
    let m = args.modes.unwrap_or(20);
    if m == 0 {
        return usage("--modes must be at least 1");
    }
    let results: Vec<Result<f64, Error>> = etas
        .par_iter()
        .map(|&eta| threshold_gain(DetectorSpec::new(eta)?, m))
        .collect();
    let mut table = Table::new(&["eta_d", "threshold_gain"]);
    let mut failures = 0usize;
    let mut solved: Vec<(f64, f64)> = Vec::new();
    for (&eta, r) in etas.iter().zip(results) {
        let cell = match r {
            Ok(t) => {
                solved.push((eta, t));
                Cell::Num(t)
            }
            Err(e @ Error::Bracket { .. }) => {
                eprintln!("warning: eta_d = {eta}: {e}");
                failures += 1;
                Cell::Text("bracket-failure".into())
            }
            Err(e) => return Err(e.into()),
        };
        table.rows.push(vec![Cell::Num(eta), cell]);
    }
    solved.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = solved.windows(2).all(|w| w[1].1 < w[0].1);
    let mut report = Report::new("threshold-curve", table);
    report.warnings += failures;
    report.note("modes", m);
    report.note("bracket_failures", failures);
    report.note("decreasing_in_eta", monotone);
    Ok(report)
}

pub fn cmd_bures(args: &RunArgs) -> Result<Report, CliError> {
    let (n, m) = resources(args, 2.0, 1)?;
    let gains = match &args.gains {
        Some(v) => explicit_gains(v)?,
        None => gain_grid(
            args.gain_min.unwrap_or(1.0),
            args.gain_max.unwrap_or(5.0),
            args.steps.unwrap_or(9),
            args.grid,
        )?,
    };
    let primes = explicit_gains(args.gain_prime.as_deref().unwrap_or(&[2.0]))
        .map_err(|_| CliError::Usage("--gain-prime values must lie in [1, 1e6]".into()))?;
    let pairs: Vec<GainPair> = gains
        .iter()
        .flat_map(|&g| primes.iter().map(move |&gp| GainPair::new(g, gp)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|pair| -> Result<(Vec<Cell>, bool), CliError> {
            let q = min_fidelity_quantum(n, m, pair)?;
            let c = min_fidelity_classical(n, m, pair)?;
            Ok((
                vec![
                    Cell::Num(pair.g().g()),
                    Cell::Num(pair.g_prime().g()),
                    Cell::Num(pair.nu()),
                    Cell::Num(q.min_fidelity),
                    Cell::Num(q.ecb_distance),
                    Cell::Num(c),
                ],
                c >= q.min_fidelity - 1e-12,
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let violations = rows.iter().filter(|(_, ok)| !ok).count();
    let mut table = Table::new(&[
        "G",
        "G_prime",
        "nu",
        "min_fidelity_quantum",
        "ecb_distance",
        "min_fidelity_classical",
    ]);
    table.rows = rows.into_iter().map(|(r, _)| r).collect();
    if violations > 0 {
        return Err(CliError::Numerical(Error::Domain(format!(
            "classical minimum fidelity fell below the quantum minimum on {violations} rows"
        ))));
    }
    let mut report = Report::new("bures", table);
    report.note("photons", n);
    report.note("modes", m);
    report.note("classical_ge_quantum_rows", report.table.rows.len());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = gain_grid(1.0, 5.0, 5, GridKind::Gain).unwrap();
        assert_eq!(
            g.iter().map(|g| g.g()).collect::<Vec<_>>(),
            vec![1.0, 2.0, 3.0, 4.0, 5.0]
        );
        let t = gain_grid(1.0, 5.0, 3, GridKind::Tau).unwrap();
        assert_eq!(t[0].g(), 1.0);
        assert_eq!(t[2].g(), 5.0);
        assert!((t[1].tau() - t[2].tau() / 2.0).abs() < 1e-15);
        assert!(matches!(
            gain_grid(1.0, 5.0, 1, GridKind::Gain),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            gain_grid(0.5, 5.0, 3, GridKind::Gain),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn resources_from_vectors() {
        let args = RunArgs {
            n_vec: Some(vec![1, 2, 3]),
            ..RunArgs::default()
        };
        assert_eq!(resources(&args, 0.0, 1).unwrap(), (6.0, 3));
        let args = RunArgs {
            n_vec: Some(vec![1]),
            photons: Some(2.0),
            ..RunArgs::default()
        };
        assert!(resources(&args, 0.0, 1).is_err());
    }

    #[test]
    fn even_photon_split() {
        let args = RunArgs {
            photons: Some(7.0),
            modes: Some(3),
            probe: Some(ProbeKind::Number),
            ..RunArgs::default()
        };
        let probes = mc_probes(&args).unwrap();
        assert_eq!(probes[0].1, ProbeSpec::NumberState(vec![3, 2, 2]));
    }
}
