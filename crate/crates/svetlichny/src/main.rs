//! Command-line interface over the svetlichny library. Every subcommand is
//! a thin wrapper around `svetlichny::pipeline` and friends.
//!
//! Exit codes: 0 success, 2 malformed input, 3 tomography non-convergence
//! (artifact files are still written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use svetlichny::counts::{self, Scheme};
use svetlichny::inequalities::{
    maximize_svetlichny, svetlichny_prediction, svetlichny_qm, AngleSet,
};
use svetlichny::optics::{ideal_pipeline, noisy_ghz, postselect_ghz};
use svetlichny::pipeline::{
    self, bounds_table, format_bounds_table, load_table, ReportConfig, SimulateConfig,
};
use svetlichny::quantum::{fidelity, ghz_state, DensityMatrix};
use svetlichny::tomography::{
    build_projectors, derived_quantities, reconstruct, ReconstructOptions,
};

#[derive(Parser)]
#[command(
    name = "svetlichny",
    about = "Three-photon GHZ nonlocality: bounds, predictions, counts statistics, tomography, and source simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Counts CSV (bundled measured dataset when omitted)
    #[arg(long)]
    counts: Option<PathBuf>,
    /// Phases sidecar file (optimal Svetlichny angles when omitted)
    #[arg(long)]
    phases: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the enumerated hidden-variable bounds and the quantum maxima
    Bounds {
        /// Random restarts of the quantum angle searches
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Closed-form GHZ prediction of the Svetlichny parameter at given phases
    Predict {
        /// Phases sidecar file (optimal angles when omitted)
        #[arg(long)]
        phases: Option<PathBuf>,
    },
    /// Search the analyzer phases maximizing the Svetlichny parameter
    OptimizeAngles {
        /// Coherence of the probed state, `noisy_ghz(v)`; 1 = pure GHZ
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Measured correlations with Monte Carlo error bars
    Correlations {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 400)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Maximum-likelihood state reconstruction from a counts table
    Tomography {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Multi-start count of the fit
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        /// Iteration cap of each fit
        #[arg(long, default_value_t = 1000)]
        max_iterations: usize,
        /// Output directory for density_matrix.txt
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate a synthetic Poisson counts table from noisy_ghz(v)
    Simulate {
        /// Coherence of the generated state
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        /// Expected four-fold counts per unit probability
        #[arg(long, default_value_t = 1e4)]
        intensity: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Phases sidecar file (optimal angles when omitted)
        #[arg(long)]
        phases: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fock-level simulation of the GHZ-producing interferometer
    SourceSim {
        /// Source phase between the two pair-emission amplitudes (radians)
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Compensating output phase on mode a (radians)
        #[arg(long, default_value_t = std::f64::consts::PI)]
        phase_c: f64,
    },
    /// Full pipeline: correlations, Svetlichny/Mermin parameters, tomography,
    /// and plot-ready artifact files
    Report {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        replicates: usize,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        /// Iteration cap of each tomography fit
        #[arg(long, default_value_t = 1000)]
        max_iterations: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> svetlichny::Result<ExitCode> {
    match cli.command {
        Command::Bounds { restarts, seed } => {
            let rows = bounds_table(restarts, seed);
            print!("{}", format_bounds_table(&rows));
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict { phases } => {
            let ang = match phases {
                Some(p) => counts::load_phases(&p)?,
                None => AngleSet::optimal(),
            };
            let prediction = svetlichny_prediction(&ang);
            let rho = DensityMatrix::from_pure(&ghz_state());
            let matrix_path = svetlichny_qm(&rho, &ang)?;
            println!(
                "phases: phi_a={:.6} phi_a'={:.6} phi_b={:.6} phi_b'={:.6} phi_c={:.6} phi_c'={:.6}",
                ang.phi_a, ang.phi_a_prime, ang.phi_b, ang.phi_b_prime, ang.phi_c, ang.phi_c_prime
            );
            println!("svetlichny_prediction={prediction:.10}");
            println!("svetlichny_qm_ghz={matrix_path:.10}");
            println!("bipartite_bound=4");
            Ok(ExitCode::SUCCESS)
        }
        Command::OptimizeAngles { v, restarts, seed } => {
            let rho = noisy_ghz(v)?;
            let (ang, value) = maximize_svetlichny(&rho, restarts, seed)?;
            println!(
                "best phases: phi_a={:.6} phi_a'={:.6} phi_b={:.6} phi_b'={:.6} phi_c={:.6} phi_c'={:.6}",
                ang.phi_a, ang.phi_a_prime, ang.phi_b, ang.phi_b_prime, ang.phi_c, ang.phi_c_prime
            );
            println!("svetlichny_value={value:.10}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Correlations {
            data,
            replicates,
            seed,
        } => {
            let table = load_table(data.counts.as_deref(), data.phases.as_deref())?;
            warn_if_incomplete(&table, Scheme::Svetlichny);
            let estimates = counts::svetlichny_correlations(&table)?;
            println!("term  sign  value      sigma      counts");
            for (idx, (label, sign, est)) in estimates.iter().enumerate() {
                let bases: Vec<counts::Basis> = label
                    .chars()
                    .map(|ch| {
                        if ch == 'P' {
                            counts::Basis::P
                        } else {
                            counts::Basis::U
                        }
                    })
                    .collect();
                let (_, sigma) = counts::monte_carlo(
                    &table,
                    counts::Statistic::Correlation(bases[0], bases[1], bases[2]),
                    replicates,
                    seed ^ ((10 + idx as u64) << 32),
                )?;
                println!(
                    "{label}   {:+}    {:+.6}  {sigma:.6}   {}/{}",
                    *sign as i64, est.value, est.numerator, est.total
                );
            }
            let sv = counts::svetlichny_from_counts(&table)?;
            let (_, sv_sigma) =
                counts::monte_carlo(&table, counts::Statistic::Svetlichny, replicates, seed)?;
            let mermin = counts::mermin_from_counts(&table)?;
            println!("svetlichny={sv:.6} sigma={sv_sigma:.6}");
            println!("mermin={mermin:.6}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Tomography {
            data,
            seed,
            restarts,
            max_iterations,
            out,
        } => {
            let table = load_table(data.counts.as_deref(), data.phases.as_deref())?;
            warn_if_incomplete(&table, Scheme::Tomography);
            let projectors = build_projectors(table.phases());
            let result = reconstruct(
                &table,
                &projectors,
                &ReconstructOptions {
                    restarts,
                    seed,
                    max_iterations,
                    ..ReconstructOptions::default()
                },
            )?;
            let derived = derived_quantities(&result, table.phases())?;
            std::fs::create_dir_all(&out)?;
            pipeline::write_atomic(&out.join("density_matrix.txt"), &derived.to_report(&result))?;
            println!("fidelity_ghz={:.6}", derived.fidelity_ghz);
            println!("svetlichny_qm={:.6}", derived.svetlichny_qm);
            println!("mermin_qm={:.6}", derived.mermin_qm);
            println!("intensity={:.6}", result.intensity);
            println!("log_likelihood={:.6}", result.log_likelihood);
            println!("converged={}", result.converged);
            println!("wrote {}", out.join("density_matrix.txt").display());
            if result.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
        Command::Simulate {
            v,
            intensity,
            seed,
            phases,
            out,
        } => {
            let cfg = SimulateConfig {
                v,
                intensity,
                seed,
                phases_path: phases,
                out_dir: out,
            };
            let path = pipeline::run_simulate(&cfg)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::SourceSim { theta, phase_c } => {
            let output = ideal_pipeline(theta);
            let (state, probability) = postselect_ghz(&output, phase_c)?;
            let f = fidelity(&DensityMatrix::from_pure(&state), &ghz_state())?;
            println!("post-selected three-photon state (basis |abc>, H=0, V=1):");
            let labels = ["HHH", "HHV", "HVH", "HVV", "VHH", "VHV", "VVH", "VVV"];
            for (idx, amp) in state.amps().iter().enumerate() {
                println!("  |{}>  {:+.6}{:+.6}i", labels[idx], amp.re, amp.im);
            }
            println!("postselection_probability={probability:.6}");
            println!("fidelity_ghz={f:.10}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Report {
            data,
            seed,
            replicates,
            restarts,
            max_iterations,
            out,
        } => {
            let cfg = ReportConfig {
                counts_path: data.counts,
                phases_path: data.phases,
                seed,
                replicates,
                restarts,
                max_iterations,
                out_dir: out,
            };
            let summary = pipeline::run_report(&cfg)?;
            print!("{}", summary.to_summary_text());
            println!(
                "wrote correlations.csv svetlichny.json rho_real.csv rho_imag.csv summary.txt to {}",
                cfg.out_dir.display()
            );
            if summary.tomography.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("warning: tomography did not converge; results flagged in summary.txt");
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn warn_if_incomplete(table: &counts::CountsTable, scheme: Scheme) {
    let missing = table.missing(scheme);
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(4).map(|t| t.to_string()).collect();
        eprintln!(
            "warning: table is missing {} setting triple(s) for this command: {}{}",
            missing.len(),
            shown.join(", "),
            if missing.len() > 4 { ", ..." } else { "" }
        );
    }
}
