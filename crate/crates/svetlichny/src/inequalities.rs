//! Quantum-side evaluation of the Svetlichny, Mermin, and CHSH combinations:
//! matrix-path values for arbitrary density matrices, the closed-form
//! eight-cosine prediction for the GHZ state, and numerical maximization
//! over measurement angles.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hidden_variables::{MERMIN_TERMS, SVETLICHNY_SIGNS};
use crate::optim::{self, NelderMeadOptions};
use crate::quantum::{expectation3, normalize_phase, DensityMatrix};

/// Quantum maximum 4*sqrt(2) of the Svetlichny parameter.
pub const SVETLICHNY_QUANTUM_MAX: f64 = 5.656854249492381;

/// The six equatorial analyzer phases, one unprimed and one primed per party.
/// Normalized to [0, 2*pi) on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSet {
    pub phi_a: f64,
    pub phi_a_prime: f64,
    pub phi_b: f64,
    pub phi_b_prime: f64,
    pub phi_c: f64,
    pub phi_c_prime: f64,
}

impl AngleSet {
    pub fn new(
        phi_a: f64,
        phi_a_prime: f64,
        phi_b: f64,
        phi_b_prime: f64,
        phi_c: f64,
        phi_c_prime: f64,
    ) -> Self {
        Self {
            phi_a: normalize_phase(phi_a),
            phi_a_prime: normalize_phase(phi_a_prime),
            phi_b: normalize_phase(phi_b),
            phi_b_prime: normalize_phase(phi_b_prime),
            phi_c: normalize_phase(phi_c),
            phi_c_prime: normalize_phase(phi_c_prime),
        }
    }

    /// The angle choice that maximizes the Svetlichny violation for the GHZ
    /// state: phi_a = 3*pi/4, phi_a' = pi/4, phi_b = pi/2, phi_b' = 0,
    /// phi_c = 0, phi_c' = pi/2.
    pub fn optimal() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Self::new(3.0 * FRAC_PI_4, FRAC_PI_4, FRAC_PI_2, 0.0, 0.0, FRAC_PI_2)
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4], x[5])
    }

    pub fn to_array(self) -> [f64; 6] {
        [
            self.phi_a,
            self.phi_a_prime,
            self.phi_b,
            self.phi_b_prime,
            self.phi_c,
            self.phi_c_prime,
        ]
    }

    /// Phase of one party's analyzer: `primed` selects the primed setting.
    pub fn phase(&self, party: usize, primed: bool) -> f64 {
        match (party, primed) {
            (0, false) => self.phi_a,
            (0, true) => self.phi_a_prime,
            (1, false) => self.phi_b,
            (1, true) => self.phi_b_prime,
            (2, false) => self.phi_c,
            (2, true) => self.phi_c_prime,
            _ => panic!("party index out of range"),
        }
    }
}

impl Default for AngleSet {
    fn default() -> Self {
        Self::optimal()
    }
}

fn term_phases(ang: &AngleSet, idx: usize) -> (f64, f64, f64) {
    (
        ang.phase(0, idx >> 2 & 1 == 1),
        ang.phase(1, idx >> 1 & 1 == 1),
        ang.phase(2, idx & 1 == 1),
    )
}

/// Signed eight-correlation Svetlichny combination for an arbitrary state,
/// computed through the dense matrix path.
pub fn svetlichny_qm_signed(rho: &DensityMatrix, ang: &AngleSet) -> Result<f64> {
    let mut total = 0.0;
    for (idx, &sign) in SVETLICHNY_SIGNS.iter().enumerate() {
        let (pa, pb, pc) = term_phases(ang, idx);
        total += sign as f64 * expectation3(rho, pa, pb, pc)?;
    }
    Ok(total)
}

/// The Svetlichny parameter |E(a,b,c) + E(a,b,c') + E(a,b',c) - E(a,b',c')
/// + E(a',b,c) - E(a',b,c') - E(a',b',c) - E(a',b',c')|.
pub fn svetlichny_qm(rho: &DensityMatrix, ang: &AngleSet) -> Result<f64> {
    Ok(svetlichny_qm_signed(rho, ang)?.abs())
}

fn svetlichny_prediction_signed(ang: &AngleSet) -> f64 {
    (0..8)
        .map(|idx| {
            let (pa, pb, pc) = term_phases(ang, idx);
            SVETLICHNY_SIGNS[idx] as f64 * (pa + pb - pc).cos()
        })
        .sum()
}

/// Closed-form GHZ prediction: the absolute value of the eight-cosine sum
/// over cos(phi_a + phi_b - phi_c) terms. Agrees with
/// `svetlichny_qm(ghz, ang)` to 1e-10.
pub fn svetlichny_prediction(ang: &AngleSet) -> f64 {
    svetlichny_prediction_signed(ang).abs()
}

/// Signed Mermin combination E(a',b,c) + E(a,b',c) + E(a,b,c') - E(a',b',c').
pub fn mermin_qm_signed(rho: &DensityMatrix, ang: &AngleSet) -> Result<f64> {
    let mut total = 0.0;
    for &(pa, pb, pc, sign) in &MERMIN_TERMS {
        total +=
            sign as f64 * expectation3(rho, ang.phase(0, pa), ang.phase(1, pb), ang.phase(2, pc))?;
    }
    Ok(total)
}

/// The Mermin parameter |E(a',b,c) + E(a,b',c) + E(a,b,c') - E(a',b',c')|.
pub fn mermin_qm(rho: &DensityMatrix, ang: &AngleSet) -> Result<f64> {
    Ok(mermin_qm_signed(rho, ang)?.abs())
}

/// Maximize the Svetlichny parameter of a state over all six analyzer
/// phases by multi-start Nelder-Mead. Starting points are drawn
/// deterministically from `seed`; the best value over all restarts wins.
pub fn maximize_svetlichny(
    rho: &DensityMatrix,
    restarts: usize,
    seed: u64,
) -> Result<(AngleSet, f64)> {
    assert!(restarts >= 1, "at least one restart required");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_pi = 2.0 * std::f64::consts::PI;

    let objective = |x: &[f64]| -> f64 {
        let ang = AngleSet::from_slice(x);
        -svetlichny_qm(rho, &ang).unwrap_or(0.0)
    };

    let opts = NelderMeadOptions {
        max_iterations: 6000,
        f_tolerance: 1e-13,
        x_tolerance: 1e-8,
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..restarts {
        let x0: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..two_pi)).collect();
        let coarse = optim::nelder_mead(objective, &x0, &[0.7; 6], &opts);
        // Polish with a small simplex around the found optimum.
        let fine = optim::nelder_mead(objective, &coarse.x, &[1e-3; 6], &opts);
        let candidate = if fine.f < coarse.f { fine } else { coarse };
        if best.as_ref().is_none_or(|(_, f)| candidate.f < *f) {
            best = Some((candidate.x, candidate.f));
        }
    }
    let (x, f) = best.unwrap();
    Ok((AngleSet::from_slice(&x), -f))
}

/// CHSH quantum prediction cos(a+b) + cos(a+b') + cos(a'+b) - cos(a'+b')
/// for a two-qubit Bell state with equatorial analyzers.
pub fn chsh_prediction(phi_a: f64, phi_a_prime: f64, phi_b: f64, phi_b_prime: f64) -> f64 {
    ((phi_a + phi_b).cos() + (phi_a + phi_b_prime).cos() + (phi_a_prime + phi_b).cos()
        - (phi_a_prime + phi_b_prime).cos())
    .abs()
}

/// Maximum of the CHSH prediction over the four analyzer phases
/// (2*sqrt(2) for the Bell state), found by multi-start Nelder-Mead.
pub fn maximize_chsh(restarts: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    let objective = |x: &[f64]| -chsh_prediction(x[0], x[1], x[2], x[3]);
    let opts = NelderMeadOptions {
        max_iterations: 4000,
        f_tolerance: 1e-13,
        x_tolerance: 1e-8,
    };
    let mut best = f64::INFINITY;
    for _ in 0..restarts.max(1) {
        let x0: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..two_pi)).collect();
        let coarse = optim::nelder_mead(objective, &x0, &[0.7; 4], &opts);
        let fine = optim::nelder_mead(objective, &coarse.x, &[1e-3; 4], &opts);
        best = best.min(coarse.f.min(fine.f));
    }
    -best
}
