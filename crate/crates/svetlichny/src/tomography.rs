//! Maximum-likelihood reconstruction of the three-qubit density matrix from
//! the 216-setting overcomplete count data.
//!
//! The state is parameterized as rho = T^dagger T / tr(T^dagger T) with T
//! lower triangular (8 real diagonal entries plus 28 complex off-diagonal
//! entries: 64 real parameters), which keeps every iterate Hermitian,
//! positive semidefinite, and unit trace by construction. A single global
//! intensity converts probabilities to expected counts; its conditionally
//! optimal value N / sum(p_i) is substituted analytically, so the fit runs
//! over the 64 state parameters only. The exact Poisson log-likelihood
//! sum_i [n_i ln(I p_i) - I p_i] is maximized by BFGS with analytic
//! gradients, multi-started from deterministic seeds.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::counts::{CountsTable, SettingTriple, Token};
use crate::error::{Error, Result};
use crate::inequalities::{mermin_qm, svetlichny_qm, AngleSet};
use crate::linalg::CMatrix;
use crate::optim::{self, BfgsOptions, NelderMeadOptions};
use crate::quantum::{
    analyzer_ket, fidelity, ghz_state, tensor3, AnalyzerSetting, DensityMatrix, Pol, Sign,
    StateVector,
};

const DIM: usize = 8;
const PARAMS: usize = 64;

/// Product projectors |s_a> x |s_b> x |s_c| for a set of setting triples.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    items: Vec<(SettingTriple, StateVector)>,
}

impl ProjectorSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[(SettingTriple, StateVector)] {
        &self.items
    }

    /// Probabilities <psi_i| rho |psi_i> for every projector.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.items
            .iter()
            .map(|(_, psi)| {
                let rpsi = rho.matrix().matvec(psi.amps());
                psi.amps()
                    .iter()
                    .zip(&rpsi)
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum()
            })
            .collect()
    }
}

fn analyzer_for(token: Token, phases: &AngleSet, party: usize) -> AnalyzerSetting {
    match token {
        Token::UPlus => AnalyzerSetting::equatorial(phases.phase(party, false), Sign::Plus),
        Token::UMinus => AnalyzerSetting::equatorial(phases.phase(party, false), Sign::Minus),
        Token::PPlus => AnalyzerSetting::equatorial(phases.phase(party, true), Sign::Plus),
        Token::PMinus => AnalyzerSetting::equatorial(phases.phase(party, true), Sign::Minus),
        Token::H => AnalyzerSetting::Computational(Pol::H),
        Token::V => AnalyzerSetting::Computational(Pol::V),
    }
}

/// Projectors for an arbitrary per-party token menu, in canonical order.
pub fn build_projectors_for_tokens(phases: &AngleSet, tokens: &[Token]) -> ProjectorSet {
    let mut items = Vec::with_capacity(tokens.len().pow(3));
    for &a in tokens {
        let ka = analyzer_ket(analyzer_for(a, phases, 0));
        for &b in tokens {
            let kb = analyzer_ket(analyzer_for(b, phases, 1));
            for &c in tokens {
                let kc = analyzer_ket(analyzer_for(c, phases, 2));
                let psi = tensor3(&ka, &kb, &kc).expect("analyzer kets are qubits");
                items.push((SettingTriple::new(a, b, c), psi));
            }
        }
    }
    ProjectorSet { items }
}

/// The full 6 x 6 x 6 = 216 projector scheme.
pub fn build_projectors(phases: &AngleSet) -> ProjectorSet {
    build_projectors_for_tokens(phases, &Token::ALL)
}

/// The 64 equatorial projectors entering the Svetlichny parameter.
pub fn build_svetlichny_projectors(phases: &AngleSet) -> ProjectorSet {
    build_projectors_for_tokens(phases, &Token::ALL[..4])
}

/// Options of the maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct ReconstructOptions {
    /// Multi-start count; start 0 is the maximally mixed state, the rest are
    /// random perturbations drawn deterministically from `seed`.
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Log-likelihood improvement below which an iteration counts as stalled.
    pub f_tolerance: f64,
    /// Consecutive stalled iterations required to declare convergence.
    pub stall_window: usize,
    /// Probability floor keeping ln finite.
    pub clip: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            seed: 0,
            max_iterations: 1000,
            f_tolerance: 1e-9,
            stall_window: 10,
            clip: 1e-12,
        }
    }
}

impl ReconstructOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Result of a maximum-likelihood reconstruction.
#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub rho: DensityMatrix,
    /// Fitted expected four-fold counts per unit probability.
    pub intensity: f64,
    /// Poisson log-likelihood of the returned state.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every accepted optimizer step of the winning
    /// restart (non-decreasing).
    pub likelihood_trace: Vec<f64>,
}

/// Lower-triangular T from the 64 real parameters: the first 8 are the real
/// diagonal, then (re, im) pairs in row-major lower order.
fn t_from_params(x: &[f64]) -> CMatrix {
    let mut t = CMatrix::zeros(DIM);
    for j in 0..DIM {
        t[(j, j)] = Complex64::new(x[j], 0.0);
    }
    let mut idx = DIM;
    for j in 1..DIM {
        for k in 0..j {
            t[(j, k)] = Complex64::new(x[idx], x[idx + 1]);
            idx += 2;
        }
    }
    t
}

struct Objective<'a> {
    projectors: &'a [Vec<Complex64>],
    counts: &'a [f64],
    total: f64,
    clip: f64,
}

impl Objective<'_> {
    /// Profiled negative log-likelihood and its gradient over the 64 real
    /// parameters. Dropping the count-independent constant, the objective is
    /// -( sum_i n_i ln p_i - N ln sum_i p_i ).
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let t = t_from_params(x);
        let n_proj = self.projectors.len();

        let mut tau = 0.0;
        for v in t.data() {
            tau += v.norm_sqr();
        }

        let mut u = vec![vec![Complex64::new(0.0, 0.0); DIM]; n_proj];
        let mut q = vec![0.0f64; n_proj];
        for (i, psi) in self.projectors.iter().enumerate() {
            // Lower-triangular matvec.
            for row in 0..DIM {
                let mut acc = Complex64::new(0.0, 0.0);
                for col in 0..=row {
                    acc += t[(row, col)] * psi[col];
                }
                u[i][row] = acc;
            }
            q[i] = u[i].iter().map(|z| z.norm_sqr()).sum();
        }
        let q_sum: f64 = q.iter().sum();
        let p_sum = q_sum / tau;

        let mut log_l = -self.total * p_sum.ln();
        // W = d L / d conj(T) = M / tau - (s / tau^2) T restricted to the
        // lower triangle, with M = sum_i coeff_i u_i psi_i^dagger.
        let mut m = CMatrix::zeros(DIM);
        let mut s_acc = 0.0;
        for i in 0..n_proj {
            let p = q[i] / tau;
            let clipped = p <= self.clip;
            log_l += self.counts[i] * if clipped { self.clip.ln() } else { p.ln() };
            let coeff = if clipped {
                -self.total / p_sum
            } else {
                self.counts[i] / p - self.total / p_sum
            };
            if coeff == 0.0 {
                continue;
            }
            s_acc += coeff * q[i];
            for row in 0..DIM {
                let cu = coeff * u[i][row];
                for col in 0..=row {
                    m[(row, col)] += cu * self.projectors[i][col].conj();
                }
            }
        }

        let mut grad = vec![0.0f64; PARAMS];
        let scale_m = 1.0 / tau;
        let scale_t = s_acc / (tau * tau);
        for j in 0..DIM {
            let w = m[(j, j)] * scale_m - t[(j, j)] * scale_t;
            grad[j] = -2.0 * w.re;
        }
        let mut idx = DIM;
        for j in 1..DIM {
            for k in 0..j {
                let w = m[(j, k)] * scale_m - t[(j, k)] * scale_t;
                grad[idx] = -2.0 * w.re;
                grad[idx + 1] = -2.0 * w.im;
                idx += 2;
            }
        }
        (-log_l, grad)
    }
}

/// Maximum-likelihood fit of a density matrix to measured counts.
///
/// Every projector's setting triple must have a count in the table. The fit
/// is deterministic given the options; `converged` reports whether the
/// likelihood improvement stayed below `f_tolerance` for `stall_window`
/// consecutive iterations within the iteration cap.
pub fn reconstruct(
    table: &CountsTable,
    projectors: &ProjectorSet,
    opts: &ReconstructOptions,
) -> Result<TomographyResult> {
    if projectors.is_empty() {
        return Err(Error::Validation("empty projector set".into()));
    }
    let mut counts = Vec::with_capacity(projectors.len());
    let mut missing = Vec::new();
    for (triple, _) in projectors.items() {
        match table.get(*triple) {
            Some(n) => counts.push(n as f64),
            None => missing.push(*triple),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCounts(missing.len(), missing[0].to_string()));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::Validation(
            "cannot fit a state to an all-zero count table".into(),
        ));
    }

    let psi_amps: Vec<Vec<Complex64>> = projectors
        .items()
        .iter()
        .map(|(_, psi)| psi.amps().to_vec())
        .collect();
    let objective = Objective {
        projectors: &psi_amps,
        counts: &counts,
        total,
        clip: opts.clip,
    };

    let bfgs_opts = BfgsOptions {
        max_iterations: opts.max_iterations,
        f_tolerance: opts.f_tolerance,
        stall_window: opts.stall_window,
        gradient_tolerance: 1e-10,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<optim::BfgsResult> = None;
    for restart in 0..opts.restarts.max(1) {
        let x0: Vec<f64> = if restart == 0 {
            // T = identity, i.e. the maximally mixed state.
            let mut x = vec![0.0; PARAMS];
            for v in x.iter_mut().take(DIM) {
                *v = 1.0;
            }
            x
        } else {
            let mut x: Vec<f64> = (0..PARAMS).map(|_| rng.gen_range(-0.3..0.3)).collect();
            for v in x.iter_mut().take(DIM) {
                *v = rng.gen_range(0.4..1.6);
            }
            x
        };
        let run = optim::bfgs(|x| objective.eval(x), &x0, &bfgs_opts);
        if best.as_ref().is_none_or(|b| run.f < b.f) {
            best = Some(run);
        }
    }
    let mut best = best.unwrap();

    // Fallback when the gradient path stalled without meeting the
    // convergence criterion: polish with a simplex around the best point.
    if !best.converged {
        let nm = optim::nelder_mead(
            |x| objective.eval(x).0,
            &best.x,
            &vec![1e-3; PARAMS],
            &NelderMeadOptions {
                max_iterations: 4000,
                f_tolerance: opts.f_tolerance,
                x_tolerance: 1e-7,
            },
        );
        if nm.f < best.f {
            best.x = nm.x;
            best.f = nm.f;
            best.converged = nm.converged;
            best.trace.push(nm.f);
        }
    }

    let t = t_from_params(&best.x);
    let gram = t.adjoint().matmul(&t);
    let tau = gram.trace().re;
    let rho = DensityMatrix::new(gram.scale(Complex64::new(1.0 / tau, 0.0)))
        .map_err(|e| Error::InvalidDensityMatrix(format!("reconstruction produced {e}")))?;

    let probabilities = projectors.probabilities(&rho);
    let p_sum: f64 = probabilities.iter().sum();
    let intensity = total / p_sum;
    let log_likelihood: f64 = probabilities
        .iter()
        .zip(&counts)
        .map(|(&p, &n)| {
            let expected = intensity * p.max(opts.clip);
            n * expected.ln() - expected
        })
        .sum();

    // The optimizer trace tracks the profiled objective, which differs from
    // the Poisson log-likelihood by the constant N ln N - N; shift it so the
    // trace ends at the reported value's scale.
    let shift = total * total.ln() - total;
    let likelihood_trace: Vec<f64> = best.trace.iter().map(|f| -f + shift).collect();

    Ok(TomographyResult {
        rho,
        intensity,
        log_likelihood,
        iterations: best.iterations,
        converged: best.converged,
        likelihood_trace,
    })
}

/// Scalars and arrays derived from a reconstruction, in plot-ready form.
#[derive(Debug, Clone)]
pub struct DerivedQuantities {
    pub fidelity_ghz: f64,
    pub svetlichny_qm: f64,
    pub mermin_qm: f64,
    pub eigenvalues: Vec<f64>,
    pub rho_real: Vec<Vec<f64>>,
    pub rho_imag: Vec<Vec<f64>>,
}

/// Fidelity with the GHZ target, Svetlichny and Mermin parameters at the
/// given angles, eigenvalue spectrum, and the real/imaginary parts of rho.
pub fn derived_quantities(result: &TomographyResult, ang: &AngleSet) -> Result<DerivedQuantities> {
    let rho = &result.rho;
    let dim = rho.dim();
    let mut rho_real = vec![vec![0.0; dim]; dim];
    let mut rho_imag = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let z = rho.matrix()[(i, j)];
            rho_real[i][j] = z.re;
            rho_imag[i][j] = z.im;
        }
    }
    Ok(DerivedQuantities {
        fidelity_ghz: fidelity(rho, &ghz_state())?,
        svetlichny_qm: svetlichny_qm(rho, ang)?,
        mermin_qm: mermin_qm(rho, ang)?,
        eigenvalues: rho.eigenvalues(),
        rho_real,
        rho_imag,
    })
}

impl DerivedQuantities {
    /// Structured text document: key-value lines plus the 8x8 real and
    /// imaginary arrays, row-major, 12 significant digits.
    pub fn to_report(&self, result: &TomographyResult) -> String {
        let mut out = String::new();
        out.push_str(&format!("dim={}\n", self.rho_real.len()));
        out.push_str(&format!("fidelity_ghz={:.11e}\n", self.fidelity_ghz));
        out.push_str(&format!("svetlichny_qm={:.11e}\n", self.svetlichny_qm));
        out.push_str(&format!("mermin_qm={:.11e}\n", self.mermin_qm));
        out.push_str(&format!("intensity={:.11e}\n", result.intensity));
        out.push_str(&format!("log_likelihood={:.11e}\n", result.log_likelihood));
        out.push_str(&format!("iterations={}\n", result.iterations));
        out.push_str(&format!("converged={}\n", result.converged));
        let eigs: Vec<String> = self
            .eigenvalues
            .iter()
            .map(|v| format!("{v:.11e}"))
            .collect();
        out.push_str(&format!("eigenvalues={}\n", eigs.join(",")));
        out.push_str("[rho_real]\n");
        for row in &self.rho_real {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.11e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out.push_str("[rho_imag]\n");
        for row in &self.rho_imag {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.11e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Noise-free synthetic table: count_i = round(intensity * p_i) for the full
/// 216-setting scheme.
pub fn expected_counts(rho: &DensityMatrix, phases: &AngleSet, intensity: f64) -> CountsTable {
    let projectors = build_projectors(phases);
    let entries = projectors
        .items()
        .iter()
        .zip(projectors.probabilities(rho))
        .map(|((triple, _), p)| (*triple, (intensity * p).round().max(0.0) as u64))
        .collect();
    CountsTable::new(entries, *phases)
}

/// Poisson-sampled synthetic table with mean intensity * p_i per setting,
/// deterministic given the seed.
pub fn poisson_counts(
    rho: &DensityMatrix,
    phases: &AngleSet,
    intensity: f64,
    seed: u64,
) -> CountsTable {
    let projectors = build_projectors(phases);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = projectors
        .items()
        .iter()
        .zip(projectors.probabilities(rho))
        .map(|((triple, _), p)| {
            let mean = intensity * p;
            let n = if mean <= 0.0 {
                0
            } else {
                Poisson::new(mean).unwrap().sample(&mut rng) as u64
            };
            (*triple, n)
        })
        .collect();
    CountsTable::new(entries, *phases)
}
