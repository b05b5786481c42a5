pub mod cramer;
pub mod cumulant;
pub mod depth;
pub mod dist;
pub mod error;
pub mod funcstats;
pub mod polytope;
pub mod quad;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};

/// A real at 17 significant digits, '.' decimal, for CSV output.
pub fn real17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
