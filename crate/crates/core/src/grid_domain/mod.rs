//! Uniform grids, domain geometry and gridded functions.

mod distance;
mod domain;
mod function;
mod grid;
mod shape;

pub use distance::{brute_force_distance, distance_transform};
pub use domain::DomainSpec;
pub use function::GriddedFunction;
pub use grid::{Grid, Point};
pub use shape::{unit, LevelSet, Shape};

pub(crate) use grid::dist;
