//! Grid and graph algorithms for monotone decompositions of plane continua,
//! their quotients and atlases, and continuum-wise expansive surface maps.

pub mod atlas;
pub mod decomposition;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod graphlike;
pub mod oracle;
pub mod raster;

pub use error::{Error, Result};
pub use geometry::{CellSet, Continuum, DistanceField, GridSpace, SpaceKind};
