//! Numeric building blocks: compensated summation, extended-range reals,
//! arbitrary-precision values, and small least-squares fits.

pub mod big;
pub mod extreal;
pub mod fit;
pub mod kahan;

pub use big::BigReal;
pub use extreal::ExtReal;
pub use kahan::{Accumulator, KahanSum};

pub(crate) use extreal::exp2i as extreal_exp2i;
