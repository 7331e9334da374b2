//! Closed-form nonlocal covariance and correlation structure of logarithmic
//! principal L-functions, with the supporting special functions, the
//! Möbius / non-divisor polylogarithm identities, the prime-L vs log-L gap
//! mean square, and a Monte-Carlo cross-check that samples L-function values
//! along lines in the critical strip.
//!
//! Module map:
//!
//! * [`arith`]: primes, Möbius function, principal characters, exact rationals.
//! * [`special`]: polylogarithm, prime zeta / prime-L, real and complex zeta,
//!   `log |L(s, χ₀)|`, all with certified truncation.
//! * [`correlation`]: diagonal and vertical covariance functions, correlations,
//!   asymptotic laws, correlation tables.
//! * [`gap`]: mean square of the gap between `Re P` and `log |L|`.
//! * [`identities`]: polylogarithm / non-divisor identities and order-shift checks.
//! * [`mc`]: Monte-Carlo moment estimation along lines.
//! * [`cli`]: command-line front end and output formats.

pub mod arith;
pub mod cli;
pub mod correlation;
pub mod error;
pub mod gap;
pub mod identities;
pub mod mc;
pub mod quad;
pub mod special;

pub use arith::{MobiusTable, PrincipalCharacter, Rational};
pub use correlation::{CorrelationTable, CovKind, CovarianceSpec, Representation};
pub use error::{Error, Result};
pub use special::{ComplexPoint, Estimate, TruncationPolicy};
