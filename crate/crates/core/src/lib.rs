//! Inverse Z-transforms of analytic functions by sinh- and log-deformed contours, and
//! Wiener-Hopf factorization of positive functions on the unit circle.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod cli;
pub mod contours;
pub mod error;
pub mod functions;
pub mod invz;
pub mod oracle;
pub mod sum;
mod util;
pub mod wienerhopf;

pub use error::{Condition, Error, Result};
pub use num_complex::Complex64;
