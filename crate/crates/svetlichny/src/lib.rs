//! Three-photon GHZ nonlocality toolkit.
//!
//! The crate reproduces, end to end, a nonlocality test on three-photon GHZ
//! states: exact hidden-variable bounds for the CHSH, Mermin, and Svetlichny
//! combinations by enumeration, quantum predictions and angle optimization,
//! correlation statistics over measured four-fold coincidence counts with
//! Poissonian Monte Carlo error bars, maximum-likelihood quantum state
//! tomography from a 216-setting overcomplete scheme, and a Fock-level
//! simulation of the interferometer that post-selects the GHZ state from
//! double-pair emission.
//!
//! Start with the runnable programs in `examples/`; each one exercises a
//! major capability. The bundled dataset in `data/lavoie_table1.csv` is a
//! complete measured count table against which every pipeline stage can be
//! run, and `svetlichny::counts::bundled_table1()` loads it directly.

pub mod counts;
pub mod error;
pub mod hidden_variables;
pub mod inequalities;
pub mod linalg;
pub mod optics;
pub mod optim;
pub mod pipeline;
pub mod quantum;
pub mod tomography;

pub use error::{Error, Result};
