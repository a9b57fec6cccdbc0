use qwork_cli::{config, emit, report, validate};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use qwork::airy_osc::{
    classical_work_closed, efg, heisenberg_hamiltonian_in, tpm_mean_closed, OscillatorParams,
};
use qwork::classical::{
    classical_work_distribution, PhaseDistribution, PhasePoint, RampOscillator,
};
use qwork::dynamics::{heisenberg_hamiltonian, propagate, suggested_steps};
use qwork::quantum::{coherent_state, fock_leakage, FockAlgebra, HermitianOperator};
use qwork::workstats::{
    apply_povm, l1_distance, max_coherence_along_path, obs_povm, tpm_povm, work_operator,
    WorkDistribution,
};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

use config::{DistributionConfig, HamiltonianConfig, PovmChoice, ScenarioConfig};
use report::{DistributionSummary, Provenance, RunReport, StepCertificate};

#[derive(Parser)]
#[command(name = "qwork", version, about = "Work statistics for driven quantum systems")]
struct Cli {
    /// Cap the worker thread pool.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomized invariant suites and print a JSON summary.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 12)]
        max_dim: usize,
        /// Deliberately corrupt one propagator (test-only fault injection).
        #[arg(long)]
        inject_nonunitary: bool,
    },
    /// Work distributions and first-law diagnostics for one scenario.
    Quench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classical-vs-TPM relative difference over a phase-space grid.
    Oscillator {
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        omega0: f64,
        #[arg(long, default_value_t = 3.0)]
        omega1: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        t1: f64,
        #[arg(long)]
        t2: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        x_min: f64,
        #[arg(long, default_value_t = 2.0)]
        x_max: f64,
        #[arg(long, default_value_t = 21)]
        x_count: usize,
        #[arg(long, default_value_t = 1.0)]
        p_min: f64,
        #[arg(long, default_value_t = 2.0)]
        p_max: f64,
        #[arg(long, default_value_t = 21)]
        p_count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parameter sweeps for the coherence-scaling and classical-limit checks.
    Sweep {
        #[arg(value_parser = ["result1", "result2"])]
        kind: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Classical Monte Carlo work distribution only.
    Classical {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Moment-mismatch and commutator-smallness report.
    Classicality {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
    },
}

fn init_logging() {
    let level = match std::env::var("QWORK_LOG").as_deref() {
        Ok("quiet") => "off",
        Ok("debug") => "debug",
        _ => "info",
    };
    let _ = env_logger::Builder::new().parse_filters(level).try_init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            log::debug!("thread pool already initialized: {e}");
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // config/parse problems exit 2; numerical-validity failures exit 3
            let code = if e.downcast_ref::<qwork::Error>().is_some() {
                3
            } else {
                2
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Validate {
            seed,
            count,
            max_dim,
            inject_nonunitary,
        } => {
            let summary = validate::run_all(seed, count, max_dim, inject_nonunitary);
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if summary.all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                for suite in summary.suites.iter().filter(|s| s.failures > 0) {
                    eprintln!(
                        "invariant failed: {} ({})",
                        suite.name,
                        suite.detail.as_deref().unwrap_or("no detail")
                    );
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Quench { config, out } => cmd_quench(&config, &out),
        Command::Oscillator {
            mass,
            omega0,
            omega1,
            tau,
            t1,
            t2,
            x_min,
            x_max,
            x_count,
            p_min,
            p_max,
            p_count,
            out,
        } => cmd_oscillator(
            mass, omega0, omega1, tau, t1, t2, x_min, x_max, x_count, p_min, p_max, p_count, &out,
        ),
        Command::Sweep {
            kind,
            config,
            out,
            seed,
        } => cmd_sweep(&kind, &config, &out, seed),
        Command::Classical { config, out, seed } => cmd_classical(&config, &out, seed),
        Command::Classicality {
            config,
            out,
            max_order,
            max_degree,
        } => cmd_classicality(&config, &out, max_order, max_degree),
    }
}

fn grid(min: f64, max: f64, count: usize) -> anyhow::Result<Vec<f64>> {
    if count == 0 || max < min {
        bail!("grid must have at least one point and max >= min");
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    Ok((0..count)
        .map(|k| min + (max - min) * k as f64 / (count - 1) as f64)
        .collect())
}

fn cmd_quench(config_path: &PathBuf, out: &PathBuf) -> anyhow::Result<ExitCode> {
    let (config, bytes) = ScenarioConfig::load(config_path)?;
    let hash = emit::config_hash(&bytes);
    let hspec = config.hamiltonian()?;
    let rho = config.state()?;
    let hbar = config.system.hbar_eff;
    let steps = match config.protocol.steps {
        Some(s) => s,
        None => suggested_steps(&hspec, hbar)?,
    };
    log::info!("propagating with {steps} steps");
    let prop = propagate(&hspec, hspec.tau, steps, hbar)?;
    if matches!(config.hamiltonian, HamiltonianConfig::LinearRampOscillator { .. }) {
        let rho_tau = rho.conjugated(&prop.u);
        let leak = fock_leakage(&rho_tau);
        if leak > 1e-8 {
            return Err(anyhow::Error::new(qwork::Error::TruncationTooSmall {
                tail: leak,
                tol: 1e-8,
            }))
            .context("top-of-basis population after evolution");
        }
    }
    let h0 = hspec.at(0.0)?;
    let h_tau = hspec.at(hspec.tau)?;
    let hh_tau = heisenberg_hamiltonian(&hspec, hspec.tau, &prop.u)?;
    let w = work_operator(&h0, &hh_tau)?;
    let merge_tol = config.analysis.merge_tol;
    let align_tol = config
        .analysis
        .align_tol
        .unwrap_or(1e-7 * w.matrix().norm_max().max(1.0));

    let mut distributions: Vec<(String, WorkDistribution)> = Vec::new();
    let mut criteria = Vec::new();
    for choice in &config.analysis.povms {
        let (name, povm) = match choice {
            PovmChoice::Tpm => ("tpm", tpm_povm(&h0, &h_tau, &prop.u, merge_tol)?),
            PovmChoice::Obs => ("obs", obs_povm(&w, merge_tol)?),
        };
        let report = qwork::workstats::criteria_report(&povm, &h0, &hh_tau, &[rho.clone()])?;
        criteria.push((name.to_string(), report));
        distributions.push((name.to_string(), apply_povm(&povm, &rho)?));
    }
    if let Some(classical) = &config.analysis.classical {
        let dist = classical_distribution(&config, classical)?;
        distributions.push(("classical".to_string(), dist));
    }

    let mut distances = Vec::new();
    for i in 0..distributions.len() {
        for j in i + 1..distributions.len() {
            distances.push((
                format!("{}_{}", distributions[i].0, distributions[j].0),
                l1_distance(&distributions[i].1, &distributions[j].1, align_tol),
            ));
        }
    }

    for (name, dist) in &distributions {
        let rows: Vec<Vec<f64>> = dist.atoms.iter().map(|&(w, p)| vec![w, p]).collect();
        emit::write_csv(&out.join(format!("{name}.csv")), &hash, &["w", "p"], &rows)?;
    }
    let report = RunReport {
        distributions: distributions
            .iter()
            .map(|(name, d)| DistributionSummary {
                name: name.clone(),
                atom_count: d.atoms.len(),
                mean: d.mean(),
                second_moment: d.second_moment(),
                total_mass: d.total_mass(),
            })
            .collect(),
        criteria: criteria
            .into_iter()
            .map(|(name, c)| report::CriteriaSummary {
                protocol: name,
                completeness_residual: c.completeness_residual,
                min_effect_eigenvalue: c.min_effect_eigenvalue,
                first_law_operator_residual: c.first_law_operator_residual,
                first_law_state_gap: c.first_law_state_gap,
            })
            .collect(),
        classicality: None,
        distances: distances
            .into_iter()
            .map(|(pair, l1)| report::DistanceEntry { pair, l1 })
            .collect(),
        provenance: Provenance {
            config_hash: hash.clone(),
            seed: config.analysis.seed,
            tool_version: emit::TOOL_VERSION.to_string(),
            step_certificates: vec![StepCertificate {
                steps: prop.steps,
                unitarity_residual: prop.unitarity_residual,
                richardson_gap: prop.richardson_gap,
            }],
        },
    };
    emit::write_json(&out.join("report.json"), &report)?;
    log::info!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_oscillator(
    mass: f64,
    omega0: f64,
    omega1: f64,
    tau: f64,
    t1: f64,
    t2: Option<f64>,
    x_min: f64,
    x_max: f64,
    x_count: usize,
    p_min: f64,
    p_max: f64,
    p_count: usize,
    out: &PathBuf,
) -> anyhow::Result<ExitCode> {
    let params = OscillatorParams::new(mass, omega0, omega1, tau, 1.0)?;
    let t2 = t2.unwrap_or(tau);
    if !(0.0..=tau).contains(&t1) || !(t1..=tau).contains(&t2) {
        bail!("need 0 <= t1 <= t2 <= tau");
    }
    let xs = grid(x_min, x_max, x_count)?;
    let ps = grid(p_min, p_max, p_count)?;
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .flat_map_iter(|&x0| {
            let params = params.clone();
            let ps = ps.clone();
            ps.into_iter().map(move |p0| {
                let w_cl = classical_work_closed(&params, x0, p0, t1, t2).unwrap();
                let w_tpm = tpm_mean_closed(&params, x0, p0, t1, t2).unwrap();
                let scale = (x0 * x0 + p0 * p0).max(1e-300);
                let rel = if w_cl.abs() < 1e-12 * scale {
                    f64::NAN
                } else {
                    (w_cl - w_tpm) / w_cl
                };
                vec![x0, p0, w_cl, w_tpm, rel]
            })
        })
        .collect();
    // no config file feeds this command; hash the parameter tuple instead
    let key = format!("{mass};{omega0};{omega1};{tau};{t1};{t2};{xs:?};{ps:?}");
    let hash = emit::config_hash(key.as_bytes());
    emit::write_csv(out, &hash, &["x0", "p0", "w_cl", "w_tpm", "rel_diff"], &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(
    kind: &str,
    config_path: &PathBuf,
    out: &PathBuf,
    seed: Option<u64>,
) -> anyhow::Result<ExitCode> {
    let (config, bytes) = ScenarioConfig::load(config_path)?;
    let hash = emit::config_hash(&bytes);
    let values = config
        .sweep
        .as_ref()
        .map(|s| s.values.clone())
        .ok_or_else(|| anyhow!("config has no sweep section"))?;
    if values.is_empty() {
        bail!("sweep.values is empty");
    }
    let _ = seed;
    match kind {
        "result1" => {
            let mut rows: Vec<Vec<f64>> = values
                .par_iter()
                .map(|&eps| result1_row(&config, eps))
                .collect::<anyhow::Result<_>>()?;
            rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
            emit::write_csv(out, &hash, &["epsilon1", "l1_tpm_obs", "ratio"], &rows)?;
        }
        "result2" => {
            let mut rows: Vec<Vec<f64>> = values
                .par_iter()
                .map(|&hbar| result2_row(&config, hbar))
                .collect::<anyhow::Result<_>>()?;
            rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
            emit::write_csv(
                out,
                &hash,
                &[
                    "hbar_eff",
                    "epsilon_a",
                    "epsilon_b",
                    "epsilon_max",
                    "l1_obs_cl",
                    "mean_gap",
                ],
                &rows,
            )?;
        }
        other => bail!("unknown sweep kind {other}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// One amplitude of the weak-drive sweep: measured path coherence, protocol
/// distance, and their ratio.
fn result1_row(config: &ScenarioConfig, eps: f64) -> anyhow::Result<Vec<f64>> {
    let HamiltonianConfig::TwoLevelDrive { base, drive, .. } = &config.hamiltonian else {
        bail!("result1 sweep requires a two_level_drive Hamiltonian");
    };
    let mut scaled = config.clone();
    scaled.hamiltonian = HamiltonianConfig::TwoLevelDrive {
        base: base.clone(),
        drive: drive.clone(),
        envelope: config::EnvelopeConfig::HalfSine { amplitude: eps },
    };
    let hspec = scaled.hamiltonian()?;
    let rho = scaled.state()?;
    let hbar = scaled.system.hbar_eff;
    let steps = match scaled.protocol.steps {
        Some(s) => s,
        None => suggested_steps(&hspec, hbar)?,
    };
    let prop = propagate(&hspec, hspec.tau, steps, hbar)?;
    let h0 = hspec.at(0.0)?;
    let h_tau = hspec.at(hspec.tau)?;
    let hh_tau = heisenberg_hamiltonian(&hspec, hspec.tau, &prop.u)?;
    let w = work_operator(&h0, &hh_tau)?;
    let d_tpm = apply_povm(&tpm_povm(&h0, &h_tau, &prop.u, scaled.analysis.merge_tol)?, &rho)?;
    let d_obs = apply_povm(&obs_povm(&w, scaled.analysis.merge_tol)?, &rho)?;
    let align = scaled
        .analysis
        .align_tol
        .unwrap_or(1e-7 * w.matrix().norm_max().max(1.0));
    let l1 = l1_distance(&d_tpm, &d_obs, align);
    let time_grid: Vec<f64> = (0..=24).map(|k| hspec.tau * k as f64 / 24.0).collect();
    let eps1 = max_coherence_along_path(&hspec, &rho, &time_grid, hbar)?;
    Ok(vec![eps1, l1, l1 / eps1])
}

/// One hbar value of the classical-limit sweep on the ramped oscillator.
fn result2_row(config: &ScenarioConfig, hbar: f64) -> anyhow::Result<Vec<f64>> {
    let HamiltonianConfig::LinearRampOscillator { omega1 } = &config.hamiltonian else {
        bail!("result2 sweep requires a linear_ramp_oscillator Hamiltonian");
    };
    let sys = &config.system;
    let (x0, p0) = (sys.x_center, sys.p_center);
    if x0 == 0.0 && p0 == 0.0 {
        bail!("result2 sweep needs a displaced frame (system.x_center/p_center)");
    }
    let params = OscillatorParams::new(sys.mass, sys.omega0, *omega1, config.protocol.tau, hbar)?;
    let algebra = FockAlgebra::displaced(sys.dim, hbar, sys.mass, sys.omega0, x0, p0)?;
    let rho = coherent_state(Complex64::new(0.0, 0.0), &algebra)?;

    // exact quadratic-flow Heisenberg Hamiltonians carry the work operator
    let c0 = efg(&params, 0.0)?;
    let ct = efg(&params, params.tau)?;
    let w = HermitianOperator::new(
        heisenberg_hamiltonian_in(&algebra, &ct)?
            .matrix()
            .sub(heisenberg_hamiltonian_in(&algebra, &c0)?.matrix()),
        "energy",
    )?;
    let d_obs = apply_povm(&obs_povm(&w, config.analysis.merge_tol)?, &rho)?;
    let w_cl = classical_work_closed(&params, x0, p0, 0.0, params.tau)?;
    let d_cl = WorkDistribution {
        atoms: vec![(w_cl, 1.0)],
        provenance: qwork::workstats::Provenance::Classical,
    };
    let align = config
        .analysis
        .align_tol
        .unwrap_or(0.05 * w_cl.abs().max(1.0));
    let l1_obs_cl = l1_distance(&d_obs, &d_cl, align);
    let mean_gap = (d_obs.mean() - w_cl).abs() / w_cl.abs().max(1e-300);

    let dist = PhaseDistribution::Delta(PhasePoint::new(x0, p0)?);
    let report = qwork::classicality::classicality_report(
        &rho,
        &algebra,
        &dist,
        4,
        2,
        qwork::classicality::DEFAULT_DENOM_FLOOR,
    )?;
    Ok(vec![
        hbar,
        report.epsilon_a,
        report.epsilon_b,
        report.epsilon_max,
        l1_obs_cl,
        mean_gap,
    ])
}

fn classical_spec(config: &ScenarioConfig) -> anyhow::Result<RampOscillator> {
    match &config.hamiltonian {
        HamiltonianConfig::LinearRampOscillator { omega1 } => Ok(RampOscillator {
            mass: config.system.mass,
            omega0: config.system.omega0,
            omega1: *omega1,
            tau: config.protocol.tau,
        }),
        _ => bail!("classical runs require a linear_ramp_oscillator Hamiltonian"),
    }
}

fn classical_distribution(
    config: &ScenarioConfig,
    classical: &config::ClassicalConfig,
) -> anyhow::Result<WorkDistribution> {
    let spec = classical_spec(config)?;
    let dist = match &classical.distribution {
        DistributionConfig::Delta { x, p } => PhaseDistribution::Delta(PhasePoint::new(*x, *p)?),
        DistributionConfig::Gaussian { x, p, sigma_x, sigma_p } => PhaseDistribution::Gaussian {
            mean: PhasePoint::new(*x, *p)?,
            sigma_x: *sigma_x,
            sigma_p: *sigma_p,
        },
        DistributionConfig::Samples { points, weights } => PhaseDistribution::SampleSet {
            points: points
                .iter()
                .map(|q| PhasePoint::new(q[0], q[1]))
                .collect::<qwork::Result<_>>()?,
            weights: weights.clone(),
        },
    };
    Ok(classical_work_distribution(
        &spec,
        &dist,
        classical.n_samples,
        config.analysis.seed,
        classical.bin_width,
    )?)
}

fn cmd_classical(
    config_path: &PathBuf,
    out: &PathBuf,
    seed: Option<u64>,
) -> anyhow::Result<ExitCode> {
    let (mut config, bytes) = ScenarioConfig::load(config_path)?;
    if let Some(seed) = seed {
        config.analysis.seed = seed;
    }
    let classical = config
        .analysis
        .classical
        .clone()
        .ok_or_else(|| anyhow!("config has no analysis.classical section"))?;
    let dist = classical_distribution(&config, &classical)?;
    let hash = emit::config_hash(&bytes);
    let rows: Vec<Vec<f64>> = dist.atoms.iter().map(|&(w, p)| vec![w, p]).collect();
    emit::write_csv(out, &hash, &["w", "p"], &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_classicality(
    config_path: &PathBuf,
    out: &PathBuf,
    max_order: usize,
    max_degree: usize,
) -> anyhow::Result<ExitCode> {
    let (config, bytes) = ScenarioConfig::load(config_path)?;
    let algebra = config.algebra()?;
    let rho = config.state()?;
    let classical = config
        .analysis
        .classical
        .as_ref()
        .ok_or_else(|| anyhow!("config has no analysis.classical section"))?;
    let dist = match &classical.distribution {
        DistributionConfig::Delta { x, p } => PhaseDistribution::Delta(PhasePoint::new(*x, *p)?),
        DistributionConfig::Gaussian { x, p, sigma_x, sigma_p } => PhaseDistribution::Gaussian {
            mean: PhasePoint::new(*x, *p)?,
            sigma_x: *sigma_x,
            sigma_p: *sigma_p,
        },
        DistributionConfig::Samples { points, weights } => PhaseDistribution::SampleSet {
            points: points
                .iter()
                .map(|q| PhasePoint::new(q[0], q[1]))
                .collect::<qwork::Result<_>>()?,
            weights: weights.clone(),
        },
    };
    let report = qwork::classicality::classicality_report(
        &rho,
        &algebra,
        &dist,
        max_order,
        max_degree,
        qwork::classicality::DEFAULT_DENOM_FLOOR,
    )?;
    let hash = emit::config_hash(&bytes);
    #[derive(serde::Serialize)]
    struct Out<'a> {
        config_hash: String,
        tool_version: &'static str,
        epsilon_a: f64,
        epsilon_b: f64,
        epsilon_max: f64,
        max_order_checked: usize,
        skipped_terms: Vec<SkippedOut<'a>>,
    }
    #[derive(serde::Serialize)]
    struct SkippedOut<'a> {
        m: usize,
        n: usize,
        reason: &'a str,
    }
    let payload = Out {
        config_hash: hash,
        tool_version: emit::TOOL_VERSION,
        epsilon_a: report.epsilon_a,
        epsilon_b: report.epsilon_b,
        epsilon_max: report.epsilon_max,
        max_order_checked: report.max_order_checked,
        skipped_terms: report
            .skipped_terms
            .iter()
            .map(|t| SkippedOut {
                m: t.m,
                n: t.n,
                reason: &t.reason,
            })
            .collect(),
    };
    emit::write_json(out, &payload)?;
    Ok(ExitCode::SUCCESS)
}
