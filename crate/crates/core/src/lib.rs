//! Ergodic averaging on finite-dimensional tracial matrix algebras.
//!
//! The library models a von Neumann algebra as a direct sum of complex matrix
//! blocks carrying a weighted trace, and builds on top of it:
//!
//! - [`algebra`] — trace algebras, elements, spectral calculus, subalgebras and
//!   trace-preserving conditional expectations;
//! - [`orlicz`] — Orlicz functions, generalized singular-number step functions,
//!   the Luxemburg norm, K-functionals and majorization checks;
//! - [`channels`] — Markov operators (unital, completely positive,
//!   trace-preserving), Choi certification, explicit dilations and the
//!   alternating sequence `T^n (T*)^n`;
//! - [`words`] — reduced words over group/semigroup alphabets, spheres,
//!   stochastic chains and Markov measures on cylinders;
//! - [`spherical`] — spherical averages of a free-group action, both by
//!   brute-force enumeration and by the linear-cost direct-sum recursion,
//!   the involution `U`, even-radius operator identities, and convergence
//!   reporting against the even-subgroup fixed-point expectation;
//! - [`cesaro`] — Chebyshev-type operator families, their running averages,
//!   semigroup power averages and limit-merging diagnostics;
//! - [`harness`] — scenario construction, experiment orchestration and CSV
//!   report emission for the command-line driver.
//!
//! Everything is dense and double-precision; the intended scale is algebras
//! of coordinate dimension up to a few dozen, where every claim can be
//! certified numerically against an independent oracle.
//!
//! ```
//! use ncergo::algebra::TraceAlgebra;
//! use ncergo::channels::ChannelOperator;
//! use ncergo::spherical::{self, DirectSum};
//! use ncergo::words::{LetterAction, SphereChain};
//!
//! // two permutations of four atoms acting on the diagonal algebra
//! let alg = TraceAlgebra::diagonal(4)?;
//! let cycle = ChannelOperator::permutation(&alg, &[1, 2, 3, 0])?;
//! let swap = ChannelOperator::permutation(&alg, &[1, 0, 2, 3])?;
//! let action = LetterAction::group_from_automorphisms(alg.clone(), vec![cycle, swap])?;
//! let ds = DirectSum::new(action, SphereChain::free_group(2)?)?;
//!
//! // the linear-cost recursion agrees with the enumeration oracle
//! let x = alg.diagonal_element(&[1.0, 0.0, 0.0, 0.0])?;
//! let fast = spherical::spherical_avg_recursive(&ds, 4, &x)?;
//! let slow = spherical::spherical_avg_bruteforce(ds.action(), ds.chain(), 4, &x, None)?;
//! assert!(fast.sub(&slow).max_abs() < 1e-12);
//!
//! // even-radius averages converge to the even-subgroup expectation
//! let e2 = spherical::even_fixed_expectation(ds.action())?;
//! let report = spherical::converge_even_spheres(&ds, &e2, &x, 16, &[], 1e-6, 0.05)?;
//! assert!(report.first_n_below.is_some());
//! # Ok::<(), ncergo::Error>(())
//! ```

pub mod algebra;
pub mod cesaro;
pub mod channels;
pub mod error;
pub mod harness;
mod linalg;
pub mod orlicz;
pub mod spherical;
pub mod words;

pub use error::{Error, Result};
