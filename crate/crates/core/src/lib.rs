//! Joint estimation of the length and direction of a qubit Bloch vector from
//! N identically prepared copies, using collective angular-momentum
//! measurements.
//!
//! The crate is organized around the measurement strategy it analyses:
//!
//! - [`states`]: dense N-qubit densities, collective spin operators and
//!   symmetric logarithmic derivatives (closed form and numerical).
//! - [`metrology`]: Fisher and quantum Fisher information, J² moments,
//!   error propagation and the weighted precision tables.
//! - [`angular`]: the exact distribution over total angular momentum j, its
//!   small-ε expansions and per-subspace Fisher information.
//! - [`multiport`]: a Fock-space Bell-multiport (discrete Fourier transform)
//!   interference engine with exact cyclotomic zero tests, signature sets,
//!   the j = N/2 versus j = N/2 − 1 distinguishability check and signature
//!   count ratios.
//! - [`simulate`]: Monte Carlo sampling and estimators for local,
//!   collective and signature-based strategies.
//! - [`cli`]: the command-line front end used by the `blochjoint` binary.
//!
//! ```
//! use blochjoint::{metrology, states::{BlochState, Parameter}};
//!
//! let state = BlochState::with_length(0.6, 0.2).unwrap();
//! let qfi = metrology::qfi_closed_form(&state, 4, Parameter::Epsilon).unwrap();
//! assert!((qfi.value - 6.25).abs() < 1e-12);
//! ```

pub mod angular;
pub mod cli;
pub mod error;
pub mod metrology;
pub mod multiport;
pub mod numeric;
pub mod parametrization;
pub mod serialize;
pub mod simulate;
pub mod spin;
pub mod states;

pub use error::{Error, Result};
pub use parametrization::Parametrization;
pub use spin::HalfInt;
pub use states::{BlochState, Parameter};
