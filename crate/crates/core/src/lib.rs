//! Numerics for the extended Barut-Girardello coherent states of a `U(N,1)`
//! representation.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It covers:
//!
//! - [`specfun`]: Gamma, Beta, Pochhammer and the modified Bessel functions
//!   `I_nu`, `K_nu` for real order.
//! - [`quad`]: Gauss-Legendre and double-exponential quadrature rules.
//! - [`fock`]: the constrained oscillator realization of the `u(N,1)`
//!   generators on a truncated basis.
//! - [`coherent`]: coherent-state amplitudes, the `F_N` series and overlaps.
//! - [`measure`]: the Bessel-K radial measure, its exact sampler, the
//!   simplex quadrature scheme and the integral identities it satisfies.
//! - [`pathint`]: Hamiltonian matrix elements and time-sliced traces.
//! - [`stats`]: mergeable mean/standard-error accumulators for Monte Carlo.
//!
//! Parallel drivers, reports and the command line live in the `bgcs` crate.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod coherent;
pub mod fock;
pub mod measure;
pub mod pathint;
pub mod quad;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
