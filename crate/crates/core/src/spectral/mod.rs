//! Periodic pseudospectral discretisation: grids, transforms, Fourier
//! multipliers and mode-wise 2×2 solves.

mod dump;
mod field;
mod grid;
mod symbol;
mod transform;

pub use dump::{read_field, sidecar_path, write_field, FieldMeta};
pub use field::{RealField, SpectralField};
pub use grid::GridSpec;
pub use symbol::DiagonalSymbol;
pub use transform::{forward, inverse, Spectral, DET_FLOOR};
