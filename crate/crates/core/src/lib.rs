pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod rounding;
pub mod system;
pub mod lockstep;
pub mod hyperbolic;
pub mod polar;
pub mod argand;
pub mod qbf;
pub mod rotation;
pub mod cli;
