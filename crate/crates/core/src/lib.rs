//! Entanglement and localization of random quantum states.
//!
//! The crate samples random-vector ensembles (Haar/CUE, localized CUE,
//! random-phase, exponential envelope) and eigenvectors of three physical
//! models (random two-body spin Hamiltonian, intermediate-statistics random
//! unitary map, 1D Anderson chain), measures their localization moments and
//! bipartite entanglement, and evaluates the closed-form predictions that
//! link the two.
//!
//! Module map:
//!
//! * [`linalg`]: dense Hermitian / tridiagonal / unitary eigensolvers.
//! * [`states`]: ensemble samplers.
//! * [`localization`]: moments `p_q`, IPR and multifractal fits.
//! * [`entanglement`]: partial traces, tangle, entropies, series expansions.
//! * [`theory`]: closed-form predictions.
//! * [`models`]: physical model builders.
//! * [`harness`]: Monte Carlo runner, CSV output and the `entloc` CLI.

pub mod entanglement;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod localization;
pub mod models;
pub mod rng;
pub mod states;
pub mod theory;

mod sum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
