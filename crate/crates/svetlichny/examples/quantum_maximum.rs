//! Quantum predictions for the GHZ state and the angle search that finds
//! the maximum Svetlichny violation 4*sqrt(2).
//!
//! Run with: cargo run --example quantum_maximum

use svetlichny::inequalities::{
    maximize_chsh, maximize_svetlichny, mermin_qm, svetlichny_prediction, svetlichny_qm, AngleSet,
    SVETLICHNY_QUANTUM_MAX,
};
use svetlichny::quantum::{expectation3, ghz_state, DensityMatrix};

fn main() {
    let rho = DensityMatrix::from_pure(&ghz_state());
    let optimal = AngleSet::optimal();

    println!("GHZ correlation at a sample phase triple:");
    let e = expectation3(&rho, optimal.phi_a, optimal.phi_b, optimal.phi_c).unwrap();
    println!(
        "  E({:.4}, {:.4}, {:.4}) = {e:.8}  (equals cos(phi_a + phi_b - phi_c))",
        optimal.phi_a, optimal.phi_b, optimal.phi_c
    );

    println!("Svetlichny parameter at the optimal angles:");
    println!("  closed form: {:.10}", svetlichny_prediction(&optimal));
    println!(
        "  matrix path: {:.10}",
        svetlichny_qm(&rho, &optimal).unwrap()
    );
    println!("  4*sqrt(2)  = {SVETLICHNY_QUANTUM_MAX:.10}");

    println!("Mermin parameter at its maximizing angles:");
    let mermin_angles = AngleSet::new(
        0.0,
        std::f64::consts::FRAC_PI_2,
        0.0,
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        0.0,
    );
    println!("  {:.10}", mermin_qm(&rho, &mermin_angles).unwrap());

    println!("Derivative-free search from 20 random starts (seed 42):");
    let (angles, value) = maximize_svetlichny(&rho, 20, 42).unwrap();
    println!("  best value {value:.10}");
    println!(
        "  at phases ({:.6}, {:.6}, {:.6}, {:.6}, {:.6}, {:.6})",
        angles.phi_a,
        angles.phi_a_prime,
        angles.phi_b,
        angles.phi_b_prime,
        angles.phi_c,
        angles.phi_c_prime
    );

    println!("Two-party CHSH maximum from the same machinery:");
    println!(
        "  {:.10}  (2*sqrt(2) = {:.10})",
        maximize_chsh(10, 7),
        2.0 * std::f64::consts::SQRT_2
    );
}
