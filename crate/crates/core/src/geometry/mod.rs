//! Spatial triangulations of a rectangle and antipodally closed meshes of
//! the circle and sphere.

mod angular;
mod spatial;

pub use angular::{AngularCell, AngularDomain, AngularMesh, ElementRule};
pub use spatial::{BoundaryEdge, SpatialMesh};
