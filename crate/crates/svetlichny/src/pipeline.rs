//! Reproducible end-to-end pipelines behind the command-line interface:
//! bound tables, full-report generation with plot-ready artifacts, and
//! synthetic count simulation.
//!
//! Every pipeline draws its randomness from one master seed. Stage `k` of a
//! command derives the sub-seed `seed ^ (k << 32)`, and Monte Carlo
//! replicate `r` inside a stage uses `stage_seed ^ r`, so reruns are
//! byte-identical and independent of thread scheduling.

use std::path::{Path, PathBuf};

use crate::counts::{
    self, mean_stddev, monte_carlo, parallel_map_indexed, CountsTable, Scheme, Statistic,
};
use crate::error::{Error, Result};
use crate::hidden_variables::{model_bound, Expression, Model};
use crate::inequalities::{
    maximize_chsh, maximize_svetlichny, svetlichny_qm, AngleSet, SVETLICHNY_QUANTUM_MAX,
};
use crate::optics::noisy_ghz;
use crate::quantum::{fidelity, ghz_state, DensityMatrix};
use crate::tomography::{
    build_projectors, derived_quantities, poisson_counts, reconstruct, DerivedQuantities,
    ReconstructOptions, TomographyResult,
};

fn stage_seed(seed: u64, stage: u64) -> u64 {
    seed ^ (stage << 32)
}

/// Write a file atomically: write to a sibling temp file, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// One row of the hidden-variable / quantum bound table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub expression: &'static str,
    pub model: &'static str,
    pub value: f64,
}

/// The enumerated hidden-variable bounds plus the numerically maximized
/// quantum values.
pub fn bounds_table(restarts: usize, seed: u64) -> Vec<BoundRow> {
    vec![
        BoundRow {
            expression: "CHSH",
            model: "local",
            value: model_bound(Expression::Chsh, Model::Local).unwrap(),
        },
        BoundRow {
            expression: "Mermin",
            model: "local",
            value: model_bound(Expression::Mermin, Model::Local).unwrap(),
        },
        BoundRow {
            expression: "Mermin",
            model: "bipartite",
            value: model_bound(Expression::Mermin, Model::Bipartite).unwrap(),
        },
        BoundRow {
            expression: "Svetlichny",
            model: "bipartite",
            value: model_bound(Expression::Svetlichny, Model::Bipartite).unwrap(),
        },
        BoundRow {
            expression: "CHSH",
            model: "quantum",
            value: maximize_chsh(restarts, stage_seed(seed, 1)),
        },
        BoundRow {
            expression: "Svetlichny",
            model: "quantum",
            value: {
                let rho = DensityMatrix::from_pure(&ghz_state());
                maximize_svetlichny(&rho, restarts, stage_seed(seed, 2))
                    .unwrap()
                    .1
            },
        },
    ]
}

pub fn format_bounds_table(rows: &[BoundRow]) -> String {
    let mut out = String::from("expression  model      value\n");
    for row in rows {
        out.push_str(&format!(
            "{:<11} {:<10} {:.3}\n",
            row.expression, row.model, row.value
        ));
    }
    out
}

/// Inputs of the full-report pipeline.
#[derive(Debug, Clone)]
pub struct ReportConfig {
    /// Counts CSV; the bundled dataset when absent.
    pub counts_path: Option<PathBuf>,
    /// Phases sidecar; optimal angles when absent.
    pub phases_path: Option<PathBuf>,
    pub seed: u64,
    pub replicates: usize,
    /// Multi-start count of the tomography fits.
    pub restarts: usize,
    /// Iteration cap of each tomography fit.
    pub max_iterations: usize,
    pub out_dir: PathBuf,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            counts_path: None,
            phases_path: None,
            seed: 1,
            replicates: 400,
            restarts: 5,
            max_iterations: 1000,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Everything the report pipeline measured, as written to `summary.txt`.
#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub svetlichny_point: f64,
    pub svetlichny_sigma: f64,
    pub mermin_point: f64,
    pub mermin_sigma: f64,
    pub fidelity_point: f64,
    pub fidelity_sigma: f64,
    pub svetlichny_qm_point: f64,
    pub svetlichny_qm_sigma: f64,
    pub correlations: Vec<(String, f64, f64)>,
    pub tomography: TomographyResult,
    pub derived: DerivedQuantities,
    pub replicates: usize,
    pub seed: u64,
}

impl ReportSummary {
    /// Standard deviations by which the measured point exceeds the
    /// bipartite-model bound of 4.
    pub fn violation_sigmas(&self) -> f64 {
        if self.svetlichny_sigma > 0.0 {
            (self.svetlichny_point - 4.0) / self.svetlichny_sigma
        } else {
            f64::INFINITY
        }
    }

    fn sigma_quality(&self) -> &'static str {
        if self.replicates < 30 {
            "weak"
        } else {
            "ok"
        }
    }

    /// Fixed-order key=value lines for machine diffing.
    pub fn to_summary_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("svetlichny_point={:.6}\n", self.svetlichny_point));
        out.push_str(&format!("svetlichny_sigma={:.6}\n", self.svetlichny_sigma));
        out.push_str("svetlichny_bound=4.000000\n");
        out.push_str(&format!(
            "svetlichny_quantum_max={SVETLICHNY_QUANTUM_MAX:.6}\n"
        ));
        out.push_str(&format!(
            "violation_sigmas={:.2}\n",
            self.violation_sigmas()
        ));
        out.push_str(&format!("mermin_point={:.6}\n", self.mermin_point));
        out.push_str(&format!("mermin_sigma={:.6}\n", self.mermin_sigma));
        out.push_str(&format!("fidelity_point={:.6}\n", self.fidelity_point));
        out.push_str(&format!("fidelity_sigma={:.6}\n", self.fidelity_sigma));
        out.push_str(&format!(
            "svetlichny_qm_point={:.6}\n",
            self.svetlichny_qm_point
        ));
        out.push_str(&format!(
            "svetlichny_qm_sigma={:.6}\n",
            self.svetlichny_qm_sigma
        ));
        out.push_str(&format!(
            "tomography_intensity={:.6}\n",
            self.tomography.intensity
        ));
        out.push_str(&format!(
            "tomography_log_likelihood={:.6}\n",
            self.tomography.log_likelihood
        ));
        out.push_str(&format!(
            "tomography_iterations={}\n",
            self.tomography.iterations
        ));
        out.push_str(&format!(
            "tomography_converged={}\n",
            self.tomography.converged
        ));
        out.push_str(&format!("replicates={}\n", self.replicates));
        out.push_str(&format!("seed={}\n", self.seed));
        out.push_str(&format!("sigma_quality={}\n", self.sigma_quality()));
        out
    }
}

/// Load a counts table plus phases per the config. The bundled dataset and
/// an on-disk file go through the identical parse and validation path.
pub fn load_table(counts_path: Option<&Path>, phases_path: Option<&Path>) -> Result<CountsTable> {
    let phases = match phases_path {
        Some(p) => counts::load_phases(p)?,
        None => AngleSet::optimal(),
    };
    match counts_path {
        Some(p) => CountsTable::load(p, phases),
        None => CountsTable::parse(counts::BUNDLED_TABLE1_CSV, phases),
    }
}

/// Joint Monte Carlo over tomography replicates: each resampled table is
/// reconstructed once and both the GHZ fidelity and the Svetlichny parameter
/// of the fitted state are recorded, mirroring how error bars are usually
/// propagated through a single set of refits. Replicate r reseeds the base
/// options with `seed ^ r`.
pub fn tomography_monte_carlo(
    table: &CountsTable,
    replicates: usize,
    base: &ReconstructOptions,
    seed: u64,
) -> Result<((f64, f64), (f64, f64))> {
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 replicates, got {replicates}"
        )));
    }
    let projectors = build_projectors(table.phases());
    let results = parallel_map_indexed(replicates, |r| {
        let sub_seed = seed ^ r as u64;
        let mut rng = rand::SeedableRng::seed_from_u64(sub_seed);
        let resampled = table.resample(&mut rng);
        let opts = ReconstructOptions {
            seed: sub_seed,
            ..base.clone()
        };
        let fit = reconstruct(&resampled, &projectors, &opts)?;
        let f = fidelity(&fit.rho, &ghz_state())?;
        let sv = svetlichny_qm(&fit.rho, table.phases())?;
        Ok::<(f64, f64), Error>((f, sv))
    });
    let mut fids = Vec::with_capacity(replicates);
    let mut svs = Vec::with_capacity(replicates);
    for r in results {
        let (f, sv) = r?;
        fids.push(f);
        svs.push(sv);
    }
    Ok((mean_stddev(&fids), mean_stddev(&svs)))
}

/// Run the full pipeline — correlations, Svetlichny and Mermin parameters
/// with Monte Carlo error bars, maximum-likelihood tomography with derived
/// quantities — and write `correlations.csv`, `svetlichny.json`,
/// `rho_real.csv`, `rho_imag.csv`, and `summary.txt` into the output
/// directory.
pub fn run_report(cfg: &ReportConfig) -> Result<ReportSummary> {
    let table = load_table(cfg.counts_path.as_deref(), cfg.phases_path.as_deref())?;
    let missing = table.missing(Scheme::Tomography);
    if !missing.is_empty() {
        return Err(Error::MissingCounts(missing.len(), missing[0].to_string()));
    }

    // Stage 1: the eight correlations with per-term Monte Carlo sigmas.
    let estimates = counts::svetlichny_correlations(&table)?;
    let mut correlations = Vec::with_capacity(8);
    for (idx, (label, _sign, est)) in estimates.iter().enumerate() {
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
        let (_, sigma) = monte_carlo(
            &table,
            Statistic::Correlation(bases[0], bases[1], bases[2]),
            cfg.replicates,
            stage_seed(cfg.seed, 10 + idx as u64),
        )?;
        correlations.push((label.clone(), est.value, sigma));
    }

    // Stage 2: Svetlichny and Mermin parameters.
    let svetlichny_point = counts::svetlichny_from_counts(&table)?;
    let (_, svetlichny_sigma) = monte_carlo(
        &table,
        Statistic::Svetlichny,
        cfg.replicates,
        stage_seed(cfg.seed, 2),
    )?;
    let mermin_point = counts::mermin_from_counts(&table)?;
    let (_, mermin_sigma) = monte_carlo(
        &table,
        Statistic::Mermin,
        cfg.replicates,
        stage_seed(cfg.seed, 3),
    )?;

    // Stage 3: maximum-likelihood tomography and derived quantities.
    let projectors = build_projectors(table.phases());
    let fit_opts = ReconstructOptions {
        restarts: cfg.restarts,
        max_iterations: cfg.max_iterations,
        seed: stage_seed(cfg.seed, 4),
        ..ReconstructOptions::default()
    };
    let tomography = reconstruct(&table, &projectors, &fit_opts)?;
    let derived = derived_quantities(&tomography, table.phases())?;

    // Stage 4: Monte Carlo error bars of the derived quantities.
    let ((_, fidelity_sigma), (_, svetlichny_qm_sigma)) =
        tomography_monte_carlo(&table, cfg.replicates, &fit_opts, stage_seed(cfg.seed, 5))?;

    let summary = ReportSummary {
        svetlichny_point,
        svetlichny_sigma,
        mermin_point,
        mermin_sigma,
        fidelity_point: derived.fidelity_ghz,
        fidelity_sigma,
        svetlichny_qm_point: derived.svetlichny_qm,
        svetlichny_qm_sigma,
        correlations,
        tomography,
        derived,
        replicates: cfg.replicates,
        seed: cfg.seed,
    };

    write_report_files(cfg, &summary)?;
    Ok(summary)
}

fn write_report_files(cfg: &ReportConfig, summary: &ReportSummary) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;

    let mut corr = String::from("term,value,sigma\n");
    for (label, value, sigma) in &summary.correlations {
        corr.push_str(&format!("{label},{value:.6},{sigma:.6}\n"));
    }
    write_atomic(&cfg.out_dir.join("correlations.csv"), &corr)?;

    let json = format!(
        "{{\n  \"point\": {:.6},\n  \"sigma\": {:.6},\n  \"bound\": 4.0,\n  \"quantum_max\": {:.6}\n}}\n",
        summary.svetlichny_point, summary.svetlichny_sigma, SVETLICHNY_QUANTUM_MAX
    );
    write_atomic(&cfg.out_dir.join("svetlichny.json"), &json)?;

    let rows_to_csv = |rows: &Vec<Vec<f64>>| -> String {
        rows.iter()
            .map(|row| {
                row.iter()
                    .map(|v| format!("{v:.11e}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    };
    write_atomic(
        &cfg.out_dir.join("rho_real.csv"),
        &rows_to_csv(&summary.derived.rho_real),
    )?;
    write_atomic(
        &cfg.out_dir.join("rho_imag.csv"),
        &rows_to_csv(&summary.derived.rho_imag),
    )?;

    write_atomic(&cfg.out_dir.join("summary.txt"), &summary.to_summary_text())?;
    Ok(())
}

/// Inputs of the synthetic-data generator.
#[derive(Debug, Clone)]
pub struct SimulateConfig {
    /// Coherence of the generated state, `noisy_ghz(v)`.
    pub v: f64,
    /// Expected four-fold counts per unit probability.
    pub intensity: f64,
    pub seed: u64,
    pub phases_path: Option<PathBuf>,
    pub out_dir: PathBuf,
}

/// Generate a 216-row counts CSV by Poisson-sampling every projector of the
/// full scheme against `noisy_ghz(v)`. Returns the written path.
pub fn run_simulate(cfg: &SimulateConfig) -> Result<PathBuf> {
    if cfg.intensity <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "intensity must be positive, got {}",
            cfg.intensity
        )));
    }
    let phases = match cfg.phases_path.as_deref() {
        Some(p) => counts::load_phases(p)?,
        None => AngleSet::optimal(),
    };
    let rho = noisy_ghz(cfg.v)?;
    let table = poisson_counts(&rho, &phases, cfg.intensity, stage_seed(cfg.seed, 1));
    let path = cfg.out_dir.join("simulated_counts.csv");
    std::fs::create_dir_all(&cfg.out_dir)?;
    write_atomic(&path, &table.to_csv())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_table_rows() {
        let rows = bounds_table(8, 7);
        let find = |expr: &str, model: &str| {
            rows.iter()
                .find(|r| r.expression == expr && r.model == model)
                .unwrap()
                .value
        };
        assert_eq!(find("CHSH", "local"), 2.0);
        assert_eq!(find("Mermin", "local"), 2.0);
        assert_eq!(find("Mermin", "bipartite"), 4.0);
        assert_eq!(find("Svetlichny", "bipartite"), 4.0);
        assert!((find("CHSH", "quantum") - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-6);
        assert!((find("Svetlichny", "quantum") - SVETLICHNY_QUANTUM_MAX).abs() < 1e-6);

        let text = format_bounds_table(&rows);
        assert!(text.contains("Svetlichny  bipartite  4.000"));
        assert!(text.contains("Mermin      bipartite  4.000"));
        assert!(text.contains("Svetlichny  quantum    5.657"));
    }

    #[test]
    fn simulate_then_report_round_trip() {
        let dir = std::env::temp_dir().join(format!("svetlichny_pipe_{}", std::process::id()));
        let sim = SimulateConfig {
            v: 1.0,
            intensity: 2e4,
            seed: 9,
            phases_path: None,
            out_dir: dir.clone(),
        };
        let counts_path = run_simulate(&sim).unwrap();

        let cfg = ReportConfig {
            counts_path: Some(counts_path),
            phases_path: None,
            seed: 5,
            replicates: 8,
            restarts: 1,
            max_iterations: 1000,
            out_dir: dir.join("report"),
        };
        let summary = run_report(&cfg).unwrap();
        // Near-ideal GHZ statistics at high intensity.
        assert!((summary.svetlichny_point - SVETLICHNY_QUANTUM_MAX).abs() < 0.05);
        assert!(summary.fidelity_point > 0.99);
        assert!(summary.tomography.converged);

        for name in [
            "correlations.csv",
            "svetlichny.json",
            "rho_real.csv",
            "rho_imag.csv",
            "summary.txt",
        ] {
            assert!(cfg.out_dir.join(name).exists(), "{name} missing");
        }
        let summary_text = std::fs::read_to_string(cfg.out_dir.join("summary.txt")).unwrap();
        assert!(summary_text.contains("sigma_quality=weak"));
        assert!(summary_text.starts_with("svetlichny_point="));

        // Byte-identical rerun.
        let again = run_report(&cfg).unwrap();
        assert_eq!(summary.to_summary_text(), again.to_summary_text());
        let summary_text2 = std::fs::read_to_string(cfg.out_dir.join("summary.txt")).unwrap();
        assert_eq!(summary_text, summary_text2);

        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn report_rejects_incomplete_table() {
        let dir = std::env::temp_dir().join(format!("svetlichny_inc_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("partial.csv");
        std::fs::write(&path, "party_a,party_b,party_c,count\nU+,U+,U+,5\n").unwrap();
        let cfg = ReportConfig {
            counts_path: Some(path),
            out_dir: dir.clone(),
            replicates: 2,
            restarts: 1,
            ..ReportConfig::default()
        };
        assert!(matches!(
            run_report(&cfg),
            Err(Error::MissingCounts(215, _))
        ));
        std::fs::remove_dir_all(&dir).ok();
    }
}
