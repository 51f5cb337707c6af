pub mod bounds;
pub mod correlators;
pub mod dispersion;
pub mod error;
pub mod modes;
pub mod quadrature;
pub mod wavepackets;

pub use dispersion::{DispersionRelation, SpacetimePoint};
pub use error::{Error, Result};
