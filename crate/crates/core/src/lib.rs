pub mod error;
pub mod family;
pub mod harness;
pub mod interp;
pub mod norms;
pub mod plap;
pub mod quad;
pub mod rearrange;

pub use error::{Error, Result};
