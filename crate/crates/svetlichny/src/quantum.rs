//! Three-qubit polarization states, analyzer settings, and expectation values.
//!
//! Basis convention, fixed once for the whole crate: qubits are ordered
//! (a, b, c) left to right, H maps to bit 0 and V to bit 1, and the leftmost
//! qubit is the most significant bit. So |HHV> sits at index 1 and |VVH> at
//! index 6 of a dimension-8 state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Measurement outcome sign of a two-outcome analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Computational (H/V) basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pol {
    H,
    V,
}

/// One party's projective measurement: either an equatorial analyzer
/// (|H> +- e^{i phi}|V>)/sqrt(2) with a chosen outcome sign, or a
/// computational H/V projector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyzerSetting {
    Equatorial { phase: f64, outcome: Sign },
    Computational(Pol),
}

impl AnalyzerSetting {
    /// Equatorial setting with the phase normalized into [0, 2*pi).
    pub fn equatorial(phase: f64, outcome: Sign) -> Self {
        AnalyzerSetting::Equatorial {
            phase: normalize_phase(phase),
            outcome,
        }
    }
}

/// Wrap an angle into [0, 2*pi).
pub fn normalize_phase(phase: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut p = phase.rem_euclid(two_pi);
    if p >= two_pi {
        p = 0.0;
    }
    p
}

/// Pure state of one, two, or three qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Build from amplitudes; the dimension must be a power of two and the
    /// vector must not be numerically null. Amplitudes are normalized.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || dim & (dim - 1) != 0 {
            return Err(Error::Validation(format!(
                "state dimension must be a power of two, got {dim}"
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Validation("cannot normalize a null vector".into()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <self|other>.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |<self|other>|^2.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Computational basis state |index> of the given dimension.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }
}

/// Mixed state as a validated density matrix: Hermitian, unit trace,
/// positive semidefinite (eigenvalues above -1e-9, tolerating optimizer
/// round-off in reconstructed states).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        let defect = mat.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity defect {defect:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {} + {}i, expected 1",
                tr.re, tr.im
            )));
        }
        let min_eig = linalg::eigvalsh(&mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(Error::InvalidDensityMatrix(format!(
                "smallest eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self {
            mat: CMatrix::outer(psi.amps()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// Convex mixture weight * a + (1 - weight) * b.
    pub fn mix(weight: f64, a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidParameter(format!(
                "mixture weight {weight} outside [0, 1]"
            )));
        }
        let m = a
            .mat
            .scale(Complex64::new(weight, 0.0))
            .add(&b.mat.scale(Complex64::new(1.0 - weight, 0.0)));
        Ok(Self { mat: m })
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat)
    }

    /// Trace distance (1/2)||a - b||_1.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = self.mat.sub(&other.mat);
        0.5 * linalg::eigvalsh(&diff).iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// The three-photon GHZ state (|HHV> + |VVH>)/sqrt(2) in this crate's
/// polarization encoding.
pub fn ghz_state() -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[0b001] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[0b110] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    StateVector { amps }
}

/// The single-qubit state a given analyzer setting projects on.
///
/// Equatorial kets are taken with a real H amplitude:
/// (|H> +- e^{i phi}|V>)/sqrt(2).
pub fn analyzer_ket(setting: AnalyzerSetting) -> StateVector {
    match setting {
        AnalyzerSetting::Equatorial { phase, outcome } => {
            let v = outcome.value() * Complex64::new(0.0, phase).exp() * FRAC_1_SQRT_2;
            StateVector {
                amps: vec![Complex64::new(FRAC_1_SQRT_2, 0.0), v],
            }
        }
        AnalyzerSetting::Computational(Pol::H) => StateVector::basis(2, 0),
        AnalyzerSetting::Computational(Pol::V) => StateVector::basis(2, 1),
    }
}

/// Product state of three single-qubit states, in the fixed basis
/// convention: amplitude at index 4i + 2j + k is sa_i * sb_j * sc_k.
pub fn tensor3(sa: &StateVector, sb: &StateVector, sc: &StateVector) -> Result<StateVector> {
    for s in [sa, sb, sc] {
        if s.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: s.dim(),
            });
        }
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                amps[4 * i + 2 * j + k] = sa.amps[i] * sb.amps[j] * sc.amps[k];
            }
        }
    }
    Ok(StateVector { amps })
}

/// Fidelity F = <psi| rho |psi> of a mixed state with a pure target.
pub fn fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: psi.dim(),
        });
    }
    let rpsi = rho.mat.matvec(psi.amps());
    let f: Complex64 = psi.amps.iter().zip(&rpsi).map(|(a, b)| a.conj() * b).sum();
    Ok(f.re)
}

/// The two-outcome equatorial observable M(phi) = |+phi><+phi| - |-phi><-phi|,
/// i.e. [[0, e^{-i phi}], [e^{i phi}, 0]].
pub fn equatorial_observable(phase: f64) -> CMatrix {
    let mut m = CMatrix::zeros(2);
    m[(0, 1)] = Complex64::new(0.0, -phase).exp();
    m[(1, 0)] = Complex64::new(0.0, phase).exp();
    m
}

/// Three-particle correlation E(a, b, c) = tr(rho M(phi_a) x M(phi_b) x M(phi_c)),
/// evaluated through the dense matrix path.
pub fn expectation3(rho: &DensityMatrix, phi_a: f64, phi_b: f64, phi_c: f64) -> Result<f64> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            actual: rho.dim(),
        });
    }
    let observable = equatorial_observable(phi_a)
        .kron(&equatorial_observable(phi_b))
        .kron(&equatorial_observable(phi_c));
    Ok(rho.mat.trace_product(&observable).re)
}

/// Random-state generators shared by tests across the crate.
#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_pure(dim: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::new(amps).unwrap()
    }

    pub(crate) fn random_mixed(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let mut weights: Vec<f64> = (0..rank).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let mut mat = CMatrix::zeros(dim);
        for &w in &weights {
            let psi = random_pure(dim, rng);
            mat = mat.add(&CMatrix::outer(psi.amps()).scale(Complex64::new(w, 0.0)));
        }
        DensityMatrix::new(mat).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::{random_mixed, random_pure};
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ghz_amplitudes() {
        let g = ghz_state();
        assert!((g.amps()[1].re - FRAC_1_SQRT_2).abs() < 1e-8);
        assert!((g.amps()[6].re - FRAC_1_SQRT_2).abs() < 1e-8);
        for (i, a) in g.amps().iter().enumerate() {
            if i != 1 && i != 6 {
                assert_eq!(a.norm(), 0.0);
            }
        }
        assert!((g.norm() - 1.0).abs() < 1e-12);
        // |<HHV|ghz>|^2 = 0.5
        let hhv = StateVector::basis(8, 1);
        assert!((g.overlap(&hhv) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn analyzer_ket_examples() {
        let plus = analyzer_ket(AnalyzerSetting::equatorial(0.0, Sign::Plus));
        assert!((plus.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((plus.amps()[1].re - FRAC_1_SQRT_2).abs() < 1e-12);

        // phi = 3*pi/4 with + outcome: amplitudes (0.7071, -0.5 + 0.5i).
        let k = analyzer_ket(AnalyzerSetting::equatorial(
            3.0 * std::f64::consts::FRAC_PI_4,
            Sign::Plus,
        ));
        assert!((k.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-4);
        assert!((k.amps()[1].re - -0.5).abs() < 1e-12);
        assert!((k.amps()[1].im - 0.5).abs() < 1e-12);

        let v = analyzer_ket(AnalyzerSetting::Computational(Pol::V));
        assert_eq!(v.amps()[0].norm(), 0.0);
        assert_eq!(v.amps()[1].re, 1.0);
    }

    #[test]
    fn analyzer_kets_are_orthonormal_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let plus = analyzer_ket(AnalyzerSetting::equatorial(phi, Sign::Plus));
            let minus = analyzer_ket(AnalyzerSetting::equatorial(phi, Sign::Minus));
            assert!(plus.inner(&minus).norm() < 1e-12);
            assert!((plus.norm() - 1.0).abs() < 1e-12);
            assert!((minus.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor3_basis_indices() {
        let h = StateVector::basis(2, 0);
        let v = StateVector::basis(2, 1);
        let hhv = tensor3(&h, &h, &v).unwrap();
        assert_eq!(hhv.amps()[1].re, 1.0);
        let vvh = tensor3(&v, &v, &h).unwrap();
        assert_eq!(vvh.amps()[6].re, 1.0);

        let d = analyzer_ket(AnalyzerSetting::equatorial(0.0, Sign::Plus));
        let dhh = tensor3(&d, &h, &h).unwrap();
        assert!((dhh.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-4);
        assert!((dhh.amps()[4].re - FRAC_1_SQRT_2).abs() < 1e-4);
    }

    #[test]
    fn tensor3_rejects_wrong_dims() {
        let h = StateVector::basis(2, 0);
        let big = StateVector::basis(4, 0);
        assert!(tensor3(&big, &h, &h).is_err());
    }

    #[test]
    fn tensor3_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = random_pure(2, &mut rng);
            let b = random_pure(2, &mut rng);
            let c = random_pure(2, &mut rng);
            let t = tensor3(&a, &b, &c).unwrap();
            assert!((t.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_examples() {
        let g = ghz_state();
        let proj = DensityMatrix::from_pure(&g);
        assert!((fidelity(&proj, &g).unwrap() - 1.0).abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(8);
        assert!((fidelity(&mixed, &g).unwrap() - 0.125).abs() < 1e-12);

        let hhv = DensityMatrix::from_pure(&StateVector::basis(8, 1));
        assert!((fidelity(&hhv, &g).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_linear_in_rho() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let g = ghz_state();
        for _ in 0..20 {
            let r1 = random_mixed(8, 3, &mut rng);
            let r2 = random_mixed(8, 2, &mut rng);
            let alpha: f64 = rng.gen_range(0.0..1.0);
            let mixed = DensityMatrix::mix(alpha, &r1, &r2).unwrap();
            let lhs = fidelity(&mixed, &g).unwrap();
            let rhs =
                alpha * fidelity(&r1, &g).unwrap() + (1.0 - alpha) * fidelity(&r2, &g).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation3_matches_cosine_form_on_ghz() {
        // For (|HHV> + |VVH>)/sqrt(2) the correlation is cos(p1 + p2 - p3).
        let rho = DensityMatrix::from_pure(&ghz_state());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let p1 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let p2 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let p3 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let e = expectation3(&rho, p1, p2, p3).unwrap();
            assert!((e - (p1 + p2 - p3).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation3_named_values() {
        let rho = DensityMatrix::from_pure(&ghz_state());
        let e = expectation3(
            &rho,
            3.0 * std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_2,
            0.0,
        )
        .unwrap();
        assert!((e + FRAC_1_SQRT_2).abs() < 1e-8);

        assert!((expectation3(&rho, 0.0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(8);
        assert!(expectation3(&mixed, 0.3, 1.1, 2.9).unwrap().abs() < 1e-12);
    }

    #[test]
    fn expectation3_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let rho = random_mixed(8, 4, &mut rng);
            let e = expectation3(
                &rho,
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
            .unwrap();
            assert!(e.abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn density_matrix_validation() {
        // Non-unit trace rejected.
        let m = CMatrix::identity(2);
        assert!(DensityMatrix::new(m).is_err());
        // Negative eigenvalue rejected.
        let mut m = CMatrix::zeros(2);
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }
}
