//! Fock-level simulation of the GHZ-producing interferometer: double-pair
//! emission written as a polynomial in creation operators, linear optical
//! elements acting by operator substitution, and four-fold post-selection
//! onto the three-photon polarization state.
//!
//! A polynomial term maps mode occupations to a complex coefficient; the
//! squared norm of `P|0>` is `sum |c|^2 prod(n_k!)` over terms, and unitary
//! (or isometric) substitutions preserve it.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quantum::{ghz_state, DensityMatrix, StateVector};

pub use crate::quantum::Pol;

/// Spatial mode labels of the interferometer: SPDC outputs 1 and 2, the
/// transmitted arm 1' after the first PBS, the trigger T, the beam-splitter
/// arm t headed for the second PBS, and the detector modes a, b, c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Spatial {
    One,
    Two,
    OnePrime,
    Trigger,
    Mid,
    OutA,
    OutB,
    OutC,
}

impl fmt::Display for Spatial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Spatial::One => "1",
            Spatial::Two => "2",
            Spatial::OnePrime => "1'",
            Spatial::Trigger => "T",
            Spatial::Mid => "t",
            Spatial::OutA => "a",
            Spatial::OutB => "b",
            Spatial::OutC => "c",
        };
        f.write_str(s)
    }
}

/// A polarization-resolved optical mode.
pub type ModeId = (Spatial, Pol);

/// Product of creation operators in occupation form; absent modes hold zero
/// photons.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ModeMonomial {
    occupations: BTreeMap<ModeId, u32>,
}

impl ModeMonomial {
    pub fn from_modes(modes: &[ModeId]) -> Self {
        let mut m = ModeMonomial::default();
        for &mode in modes {
            m.raise(mode, 1);
        }
        m
    }

    fn raise(&mut self, mode: ModeId, n: u32) {
        if n > 0 {
            *self.occupations.entry(mode).or_insert(0) += n;
        }
    }

    pub fn occupation(&self, mode: ModeId) -> u32 {
        self.occupations.get(&mode).copied().unwrap_or(0)
    }

    pub fn occupations(&self) -> &BTreeMap<ModeId, u32> {
        &self.occupations
    }

    pub fn total_photons(&self) -> u32 {
        self.occupations.values().sum()
    }

    pub fn photons_in(&self, spatial: Spatial) -> u32 {
        self.occupations
            .iter()
            .filter(|((s, _), _)| *s == spatial)
            .map(|(_, n)| n)
            .sum()
    }

    /// prod n_k! — the norm squared of the monomial applied to vacuum.
    fn factorial_weight(&self) -> f64 {
        self.occupations
            .values()
            .map(|&n| (1..=n as u64).product::<u64>() as f64)
            .product()
    }
}

impl fmt::Display for ModeMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.occupations.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .occupations
            .iter()
            .map(|(&(s, p), &n)| {
                let pol = if p == Pol::H { "H" } else { "V" };
                if n == 1 {
                    format!("{s}{pol}")
                } else {
                    format!("{s}{pol}^{n}")
                }
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Linear combination of creation-operator monomials applied to vacuum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockPolynomial {
    terms: BTreeMap<ModeMonomial, Complex64>,
}

impl FockPolynomial {
    pub fn terms(&self) -> &BTreeMap<ModeMonomial, Complex64> {
        &self.terms
    }

    pub fn insert(&mut self, monomial: ModeMonomial, coeff: Complex64) {
        let entry = self
            .terms
            .entry(monomial)
            .or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > 1e-15);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.norm_sqr() * m.factorial_weight())
            .sum()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for c in self.terms.values_mut() {
                *c /= norm;
            }
        }
        self
    }
}

/// A linear optical element with explicit mode wiring.
///
/// Substitution rules: the PBS transmits H and reflects V with phase i, the
/// 50:50 BS splits 1/sqrt(2) with i on reflection, the half-wave plate at
/// axis angle alpha maps H to cos(2a)H + sin(2a)V and V to sin(2a)H -
/// cos(2a)V, and the quarter-wave phase element advances V by e^{i delta}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalElement {
    Pbs {
        in1: Spatial,
        in2: Option<Spatial>,
        out1: Spatial,
        out2: Spatial,
    },
    Bs50 {
        in1: Spatial,
        in2: Option<Spatial>,
        out1: Spatial,
        out2: Spatial,
    },
    Hwp {
        mode: Spatial,
        angle: f64,
    },
    QwpPhase {
        mode: Spatial,
        delta: f64,
    },
}

impl OpticalElement {
    /// Output decomposition of a creation operator on `mode`, or None when
    /// the element does not touch it.
    fn substitution(&self, mode: ModeId) -> Option<Vec<(ModeId, Complex64)>> {
        let (spatial, pol) = mode;
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        match *self {
            OpticalElement::Pbs {
                in1,
                in2,
                out1,
                out2,
            } => {
                if spatial == in1 {
                    Some(match pol {
                        Pol::H => vec![((out1, Pol::H), one)],
                        Pol::V => vec![((out2, Pol::V), i)],
                    })
                } else if Some(spatial) == in2 {
                    Some(match pol {
                        Pol::H => vec![((out2, Pol::H), one)],
                        Pol::V => vec![((out1, Pol::V), i)],
                    })
                } else {
                    None
                }
            }
            OpticalElement::Bs50 {
                in1,
                in2,
                out1,
                out2,
            } => {
                let root_half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                if spatial == in1 {
                    Some(vec![((out1, pol), root_half), ((out2, pol), i * root_half)])
                } else if Some(spatial) == in2 {
                    Some(vec![((out1, pol), i * root_half), ((out2, pol), root_half)])
                } else {
                    None
                }
            }
            OpticalElement::Hwp { mode: m, angle } => {
                if spatial != m {
                    return None;
                }
                let c = (2.0 * angle).cos();
                let s = (2.0 * angle).sin();
                Some(match pol {
                    Pol::H => vec![
                        ((m, Pol::H), Complex64::new(c, 0.0)),
                        ((m, Pol::V), Complex64::new(s, 0.0)),
                    ],
                    Pol::V => vec![
                        ((m, Pol::H), Complex64::new(s, 0.0)),
                        ((m, Pol::V), Complex64::new(-c, 0.0)),
                    ],
                })
            }
            OpticalElement::QwpPhase { mode: m, delta } => {
                if spatial != m {
                    return None;
                }
                Some(match pol {
                    Pol::H => vec![((m, Pol::H), one)],
                    Pol::V => vec![((m, Pol::V), Complex64::new(0.0, delta).exp())],
                })
            }
        }
    }

    /// Input modes this element consumes.
    fn input_modes(&self) -> Vec<ModeId> {
        let spatials: Vec<Spatial> = match *self {
            OpticalElement::Pbs { in1, in2, .. } | OpticalElement::Bs50 { in1, in2, .. } => {
                let mut v = vec![in1];
                v.extend(in2);
                v
            }
            OpticalElement::Hwp { mode, .. } | OpticalElement::QwpPhase { mode, .. } => vec![mode],
        };
        spatials
            .into_iter()
            .flat_map(|s| [(s, Pol::H), (s, Pol::V)])
            .collect()
    }

    /// Largest deviation of the transfer map from an isometry: columns of
    /// the substitution matrix must be orthonormal.
    pub fn isometry_defect(&self) -> f64 {
        let inputs = self.input_modes();
        let mut worst = 0.0f64;
        for (ia, a) in inputs.iter().enumerate() {
            let col_a = self.substitution(*a).unwrap();
            for (ib, b) in inputs.iter().enumerate() {
                let col_b = self.substitution(*b).unwrap();
                let mut dot = Complex64::new(0.0, 0.0);
                for (mode_a, ca) in &col_a {
                    for (mode_b, cb) in &col_b {
                        if mode_a == mode_b {
                            dot += ca.conj() * cb;
                        }
                    }
                }
                let expect = if ia == ib { 1.0 } else { 0.0 };
                worst = worst.max((dot - Complex64::new(expect, 0.0)).norm());
            }
        }
        worst
    }
}

/// Substitute each creation operator on the element's input modes by its
/// output combination, re-expand, and collect terms.
pub fn apply_element(poly: &FockPolynomial, element: &OpticalElement) -> FockPolynomial {
    let mut out = FockPolynomial::default();
    for (monomial, &coeff) in poly.terms() {
        // Expand this term mode by mode.
        let mut partial: Vec<(ModeMonomial, Complex64)> = vec![(ModeMonomial::default(), coeff)];
        for (&mode, &n) in monomial.occupations() {
            match element.substitution(mode) {
                None => {
                    for (m, _) in partial.iter_mut() {
                        m.raise(mode, n);
                    }
                }
                Some(outputs) => {
                    // Multiply by (sum_j alpha_j b_j^dagger)^n one factor at
                    // a time; repeated accumulation builds the multinomial
                    // coefficients.
                    for _ in 0..n {
                        let mut next: Vec<(ModeMonomial, Complex64)> = Vec::new();
                        for (m, c) in &partial {
                            for (out_mode, alpha) in &outputs {
                                let mut grown = m.clone();
                                grown.raise(*out_mode, 1);
                                next.push((grown, c * alpha));
                            }
                        }
                        partial = next;
                    }
                }
            }
        }
        for (m, c) in partial {
            out.insert(m, c);
        }
    }
    out.prune();
    out
}

/// Normalized double-pair emission: the second-order term of the source with
/// pair operator (a1H a2V + e^{i theta} a1V a2H)/sqrt(2), i.e. after the
/// polarization flip H <-> V in mode 2. Three monomials; the cross term
/// carries twice the outer coefficient before normalization.
pub fn double_pair_state(theta: f64) -> FockPolynomial {
    let phase = Complex64::new(0.0, theta).exp();
    let mut p = FockPolynomial::default();

    let mut outer1 = ModeMonomial::default();
    outer1.raise((Spatial::One, Pol::H), 2);
    outer1.raise((Spatial::Two, Pol::V), 2);
    p.insert(outer1, Complex64::new(1.0, 0.0));

    let cross = ModeMonomial::from_modes(&[
        (Spatial::One, Pol::H),
        (Spatial::One, Pol::V),
        (Spatial::Two, Pol::H),
        (Spatial::Two, Pol::V),
    ]);
    p.insert(cross, 2.0 * phase);

    let mut outer2 = ModeMonomial::default();
    outer2.raise((Spatial::One, Pol::V), 2);
    outer2.raise((Spatial::Two, Pol::H), 2);
    p.insert(outer2, phase * phase);

    p.normalized()
}

/// The element sequence of the GHZ interferometer: PBS splitting mode 1 into
/// the transmitted arm and the trigger, a 50:50 BS splitting mode 2 into the
/// overlap arm and detector c, a half-wave plate rotating the transmitted
/// photon to the diagonal basis, and the second PBS overlapping both arms
/// into detectors a and b.
pub fn ghz_interferometer(hwp_angle: f64) -> Vec<OpticalElement> {
    vec![
        OpticalElement::Pbs {
            in1: Spatial::One,
            in2: None,
            out1: Spatial::OnePrime,
            out2: Spatial::Trigger,
        },
        OpticalElement::Bs50 {
            in1: Spatial::Two,
            in2: None,
            out1: Spatial::Mid,
            out2: Spatial::OutC,
        },
        OpticalElement::Hwp {
            mode: Spatial::OnePrime,
            angle: hwp_angle,
        },
        OpticalElement::Pbs {
            in1: Spatial::OnePrime,
            in2: Some(Spatial::Mid),
            out1: Spatial::OutA,
            out2: Spatial::OutB,
        },
    ]
}

/// Run the full ideal pipeline: double-pair emission through the
/// interferometer with the half-wave plate at exactly 22.5 degrees.
pub fn ideal_pipeline(theta: f64) -> FockPolynomial {
    let mut poly = double_pair_state(theta);
    for element in ghz_interferometer(std::f64::consts::FRAC_PI_8) {
        poly = apply_element(&poly, &element);
    }
    poly
}

/// Four-fold post-selection: keep terms with exactly one photon in each of
/// the spatial modes T, a, b, c and a V-polarized trigger, apply the output
/// phase e^{i phase_c} on the V component of mode a, and return the
/// normalized three-qubit polarization state on (a, b, c) together with the
/// post-selection probability.
pub fn postselect_ghz(poly: &FockPolynomial, phase_c: f64) -> Result<(StateVector, f64)> {
    let phase = Complex64::new(0.0, phase_c).exp();
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    let mut probability = 0.0;
    for (monomial, &coeff) in poly.terms() {
        if monomial.total_photons() != 4
            || monomial.photons_in(Spatial::Trigger) != 1
            || monomial.occupation((Spatial::Trigger, Pol::V)) != 1
            || monomial.photons_in(Spatial::OutA) != 1
            || monomial.photons_in(Spatial::OutB) != 1
            || monomial.photons_in(Spatial::OutC) != 1
        {
            continue;
        }
        let bit = |s: Spatial| monomial.occupation((s, Pol::V)) as usize;
        let index = 4 * bit(Spatial::OutA) + 2 * bit(Spatial::OutB) + bit(Spatial::OutC);
        let amp = if bit(Spatial::OutA) == 1 {
            coeff * phase
        } else {
            coeff
        };
        amps[index] += amp;
        probability += coeff.norm_sqr();
    }
    if probability <= 0.0 {
        return Err(Error::EmptyPostSelection);
    }
    Ok((StateVector::new(amps)?, probability))
}

/// Phenomenological partial-distinguishability model:
/// v |ghz><ghz| + (1 - v) (|HHV><HHV| + |VVH><VVH|)/2 — coherence damped,
/// populations kept. Fidelity with the GHZ state is (1 + v)/2.
pub fn noisy_ghz(v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!(
            "visibility {v} outside [0, 1]"
        )));
    }
    let ghz = CMatrix::outer(ghz_state().amps());
    let hhv = CMatrix::outer(StateVector::basis(8, 1).amps());
    let vvh = CMatrix::outer(StateVector::basis(8, 6).amps());
    let populations = hhv.add(&vvh).scale(Complex64::new(0.5, 0.0));
    let mat = ghz
        .scale(Complex64::new(v, 0.0))
        .add(&populations.scale(Complex64::new(1.0 - v, 0.0)));
    DensityMatrix::new(mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{svetlichny_qm, AngleSet, SVETLICHNY_QUANTUM_MAX};
    use crate::quantum::{expectation3, fidelity};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn double_pair_structure() {
        let p = double_pair_state(0.0);
        assert_eq!(p.terms().len(), 3);
        for m in p.terms().keys() {
            assert_eq!(m.total_photons(), 4);
        }
        assert!((p.norm_sqr() - 1.0).abs() < 1e-12);

        let cross = ModeMonomial::from_modes(&[
            (Spatial::One, Pol::H),
            (Spatial::One, Pol::V),
            (Spatial::Two, Pol::H),
            (Spatial::Two, Pol::V),
        ]);
        let mut outer = ModeMonomial::default();
        outer.raise((Spatial::One, Pol::H), 2);
        outer.raise((Spatial::Two, Pol::V), 2);
        let c_cross = p.terms()[&cross];
        let c_outer = p.terms()[&outer];
        // Cross term is twice the outer term.
        assert!(((c_cross / c_outer) - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn double_pair_theta_pi_flips_cross_term() {
        let p = double_pair_state(std::f64::consts::PI);
        let cross = ModeMonomial::from_modes(&[
            (Spatial::One, Pol::H),
            (Spatial::One, Pol::V),
            (Spatial::Two, Pol::H),
            (Spatial::Two, Pol::V),
        ]);
        let mut outer = ModeMonomial::default();
        outer.raise((Spatial::One, Pol::H), 2);
        outer.raise((Spatial::Two, Pol::V), 2);
        let ratio = p.terms()[&cross] / p.terms()[&outer];
        assert!((ratio - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pbs_routes_single_photons() {
        let pbs = OpticalElement::Pbs {
            in1: Spatial::One,
            in2: None,
            out1: Spatial::OnePrime,
            out2: Spatial::Trigger,
        };
        let mut h = FockPolynomial::default();
        h.insert(
            ModeMonomial::from_modes(&[(Spatial::One, Pol::H)]),
            Complex64::new(1.0, 0.0),
        );
        let out = apply_element(&h, &pbs);
        assert_eq!(out.terms().len(), 1);
        let (m, c) = out.terms().iter().next().unwrap();
        assert_eq!(m.occupation((Spatial::OnePrime, Pol::H)), 1);
        assert!((c.re - 1.0).abs() < 1e-15);

        let mut v = FockPolynomial::default();
        v.insert(
            ModeMonomial::from_modes(&[(Spatial::One, Pol::V)]),
            Complex64::new(1.0, 0.0),
        );
        let out = apply_element(&v, &pbs);
        let (m, c) = out.terms().iter().next().unwrap();
        assert_eq!(m.occupation((Spatial::Trigger, Pol::V)), 1);
        assert!((c.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bs_splits_single_photon_evenly() {
        let bs = OpticalElement::Bs50 {
            in1: Spatial::Two,
            in2: None,
            out1: Spatial::Mid,
            out2: Spatial::OutC,
        };
        let mut v = FockPolynomial::default();
        v.insert(
            ModeMonomial::from_modes(&[(Spatial::Two, Pol::V)]),
            Complex64::new(1.0, 0.0),
        );
        let out = apply_element(&v, &bs);
        assert_eq!(out.terms().len(), 2);
        for c in out.terms().values() {
            assert!((c.norm_sqr() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn hom_dip_is_exact() {
        // Two identical photons entering a 50:50 BS from opposite ports:
        // the coincidence term cancels exactly.
        let bs = OpticalElement::Bs50 {
            in1: Spatial::One,
            in2: Some(Spatial::Two),
            out1: Spatial::Mid,
            out2: Spatial::OutC,
        };
        let mut p = FockPolynomial::default();
        p.insert(
            ModeMonomial::from_modes(&[(Spatial::One, Pol::H), (Spatial::Two, Pol::H)]),
            Complex64::new(1.0, 0.0),
        );
        let out = apply_element(&p, &bs);
        let coincidence =
            ModeMonomial::from_modes(&[(Spatial::Mid, Pol::H), (Spatial::OutC, Pol::H)]);
        assert!(out.terms().get(&coincidence).is_none());
        // The two bunched terms carry all the weight: |i/2|^2 * 2! each.
        assert_eq!(out.terms().len(), 2);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn elements_are_isometries_and_preserve_norm() {
        let elements = ghz_interferometer(std::f64::consts::FRAC_PI_8);
        for e in &elements {
            assert!(e.isometry_defect() < 1e-12, "{e:?}");
        }
        assert!(
            OpticalElement::QwpPhase {
                mode: Spatial::OutA,
                delta: 0.7
            }
            .isometry_defect()
                < 1e-12
        );

        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut poly = double_pair_state(rng.gen_range(0.0..std::f64::consts::TAU));
        for e in &elements {
            let before = poly.norm_sqr();
            poly = apply_element(&poly, e);
            let after = poly.norm_sqr();
            assert!((before - after).abs() < 1e-10);
            for m in poly.terms().keys() {
                assert_eq!(m.total_photons(), 4);
            }
        }
    }

    #[test]
    fn ideal_pipeline_projects_on_ghz() {
        let out = ideal_pipeline(0.0);
        let (state, probability) = postselect_ghz(&out, std::f64::consts::PI).unwrap();
        let f = fidelity(&DensityMatrix::from_pure(&state), &ghz_state()).unwrap();
        assert!((f - 1.0).abs() < 1e-10, "fidelity {f}");
        assert!(probability > 0.0 && probability < 1.0);

        // Only HHV and VVH survive post-selection.
        for (idx, amp) in state.amps().iter().enumerate() {
            if idx != 0b001 && idx != 0b110 {
                assert!(amp.norm() < 1e-12, "index {idx} has |amp| {}", amp.norm());
            }
        }
    }

    #[test]
    fn pipeline_probability_matches_permanent_oracle() {
        // Independent route: single-photon transfer matrix of the pipeline
        // and 4x4 permanents over all trigger-V detector patterns.
        let theta = 0.9;
        let out = ideal_pipeline(theta);
        let (_, probability) = postselect_ghz(&out, std::f64::consts::PI).unwrap();

        let modes: Vec<ModeId> = [
            Spatial::One,
            Spatial::Two,
            Spatial::OnePrime,
            Spatial::Trigger,
            Spatial::Mid,
            Spatial::OutA,
            Spatial::OutB,
            Spatial::OutC,
        ]
        .iter()
        .flat_map(|&s| [(s, Pol::H), (s, Pol::V)])
        .collect();
        let index_of = |m: ModeId| modes.iter().position(|&x| x == m).unwrap();

        // Compose the 16x16 transfer matrix, later elements on the left.
        let mut u = CMatrix::identity(16);
        for element in ghz_interferometer(std::f64::consts::FRAC_PI_8) {
            let mut step = CMatrix::identity(16);
            for &m in &modes {
                if let Some(outputs) = element.substitution(m) {
                    let col = index_of(m);
                    for r in 0..16 {
                        step[(r, col)] = Complex64::new(0.0, 0.0);
                    }
                    for (out_mode, alpha) in outputs {
                        step[(index_of(out_mode), col)] = alpha;
                    }
                }
            }
            u = step.matmul(&u);
        }

        fn permanent4(m: &[[Complex64; 4]; 4]) -> Complex64 {
            let mut total = Complex64::new(0.0, 0.0);
            let perms = [
                [0, 1, 2, 3],
                [0, 1, 3, 2],
                [0, 2, 1, 3],
                [0, 2, 3, 1],
                [0, 3, 1, 2],
                [0, 3, 2, 1],
                [1, 0, 2, 3],
                [1, 0, 3, 2],
                [1, 2, 0, 3],
                [1, 2, 3, 0],
                [1, 3, 0, 2],
                [1, 3, 2, 0],
                [2, 0, 1, 3],
                [2, 0, 3, 1],
                [2, 1, 0, 3],
                [2, 1, 3, 0],
                [2, 3, 0, 1],
                [2, 3, 1, 0],
                [3, 0, 1, 2],
                [3, 0, 2, 1],
                [3, 1, 0, 2],
                [3, 1, 2, 0],
                [3, 2, 0, 1],
                [3, 2, 1, 0],
            ];
            for p in perms {
                let mut prod = Complex64::new(1.0, 0.0);
                for (row, &col) in p.iter().enumerate() {
                    prod *= m[row][col];
                }
                total += prod;
            }
            total
        }

        // Source terms: (columns, coefficient / sqrt(prod n_in!)).
        let norm = 1.0 / 12f64.sqrt();
        let phase = Complex64::new(0.0, theta).exp();
        let source: Vec<(Vec<ModeId>, Complex64)> = vec![
            (
                vec![
                    (Spatial::One, Pol::H),
                    (Spatial::One, Pol::H),
                    (Spatial::Two, Pol::V),
                    (Spatial::Two, Pol::V),
                ],
                Complex64::new(norm / 2.0, 0.0),
            ),
            (
                vec![
                    (Spatial::One, Pol::H),
                    (Spatial::One, Pol::V),
                    (Spatial::Two, Pol::H),
                    (Spatial::Two, Pol::V),
                ],
                2.0 * phase * norm,
            ),
            (
                vec![
                    (Spatial::One, Pol::V),
                    (Spatial::One, Pol::V),
                    (Spatial::Two, Pol::H),
                    (Spatial::Two, Pol::H),
                ],
                phase * phase * norm / 2.0,
            ),
        ];

        let mut oracle_probability = 0.0;
        for pa in [Pol::H, Pol::V] {
            for pb in [Pol::H, Pol::V] {
                for pc in [Pol::H, Pol::V] {
                    let rows = [
                        index_of((Spatial::Trigger, Pol::V)),
                        index_of((Spatial::OutA, pa)),
                        index_of((Spatial::OutB, pb)),
                        index_of((Spatial::OutC, pc)),
                    ];
                    let mut amp = Complex64::new(0.0, 0.0);
                    for (cols, coeff) in &source {
                        let mut sub = [[Complex64::new(0.0, 0.0); 4]; 4];
                        for (ri, &row) in rows.iter().enumerate() {
                            for (ci, &col_mode) in cols.iter().enumerate() {
                                sub[ri][ci] = u[(row, index_of(col_mode))];
                            }
                        }
                        amp += coeff * permanent4(&sub);
                    }
                    oracle_probability += amp.norm_sqr();
                }
            }
        }

        assert!(
            (probability - oracle_probability).abs() < 1e-12,
            "polynomial {probability} vs permanent oracle {oracle_probability}"
        );
        // The ideal pipeline succeeds with probability 1/12.
        assert!((probability - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn source_phase_is_global_after_postselection() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let theta = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let out = ideal_pipeline(theta);
            let (state, _) = postselect_ghz(&out, std::f64::consts::PI).unwrap();
            let f = fidelity(&DensityMatrix::from_pure(&state), &ghz_state()).unwrap();
            assert!((f - 1.0).abs() < 1e-10, "theta {theta}: fidelity {f}");
        }
    }

    #[test]
    fn postselect_rejects_empty_subspace() {
        // The bare source has no photon in the trigger mode yet.
        let p = double_pair_state(0.0);
        assert!(matches!(
            postselect_ghz(&p, 0.0),
            Err(Error::EmptyPostSelection)
        ));
    }

    #[test]
    fn noisy_ghz_fidelity_and_correlations() {
        let full = noisy_ghz(1.0).unwrap();
        assert!((fidelity(&full, &ghz_state()).unwrap() - 1.0).abs() < 1e-12);

        let none = noisy_ghz(0.0).unwrap();
        assert!((fidelity(&none, &ghz_state()).unwrap() - 0.5).abs() < 1e-12);
        // The population-only mixture has no equatorial correlations.
        assert!(expectation3(&none, 0.4, 1.3, 2.2).unwrap().abs() < 1e-12);

        let measured_scale = noisy_ghz(0.68).unwrap();
        assert!((fidelity(&measured_scale, &ghz_state()).unwrap() - 0.84).abs() < 1e-12);

        assert!(noisy_ghz(-0.1).is_err());
        assert!(noisy_ghz(1.1).is_err());
    }

    #[test]
    fn noisy_ghz_svetlichny_is_linear_in_v() {
        let ang = AngleSet::optimal();
        for v in [0.0, 0.25, 0.5, 0.797, 1.0] {
            let rho = noisy_ghz(v).unwrap();
            let s = svetlichny_qm(&rho, &ang).unwrap();
            assert!(
                (s - v * SVETLICHNY_QUANTUM_MAX).abs() < 1e-9,
                "v = {v}: S_v = {s}"
            );
        }
        // v ~ 0.797 reproduces the measured violation scale.
        let s = svetlichny_qm(&noisy_ghz(0.797).unwrap(), &ang).unwrap();
        assert!((s - 4.51).abs() < 0.01);
    }
}
