pub mod ch;
pub mod dense;
pub mod error;
pub mod io;
pub mod linop;
pub mod spectral;

pub use error::{Error, Result};
