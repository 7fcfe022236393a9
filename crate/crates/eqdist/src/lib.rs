//! Exact desk-scale evaluators for the finite objects that show up in
//! equidistribution work on primes in arithmetic progressions: complete and
//! incomplete exponential sums over `Z/qZ`, multiply dense divisibility,
//! completion-of-sums and `q`-van der Corput machinery, sieve decompositions
//! of the von Mangoldt function, and an exact-rational feasibility engine for
//! exponent numerology.
//!
//! Everything here computes finite objects exactly (integer, rational, or
//! unit-circle complex arithmetic); asymptotic statements are out of scope.
//! Where the literature bounds a sum by `C · (explicit formula)` with an
//! unspecified constant `C`, the corresponding evaluator reports the measured
//! ratio against the explicit formula instead of asserting anything.

pub mod arith;
pub mod completion;
pub mod decomp;
pub mod densediv;
pub mod dft;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod expsum;
pub mod poly;
pub mod report;
pub mod sieve;

pub use error::{Error, Result};
pub use num_complex::Complex64;
