//! Star unfolding of convex polyhedra with respect to quasigeodesic loops.
//!
//! The pipeline: load and validate a convex polyhedron, construct (or accept)
//! a simple closed quasigeodesic loop `Q`, cut one shortest path from every
//! vertex to `Q`, develop the two halves bounded by `Q` into the plane, join
//! them at a supporting segment of `Q`, and certify with exact predicates
//! that the result is a simple planar polygon.

// `!(x > 0.0)` guards deliberately reject NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cuts;
pub mod fixtures;
pub mod geodesics;
pub mod geom;
pub mod hull;
pub mod io;
pub mod loops;
pub mod mesh;
pub mod pipeline;
pub mod predicates;
pub mod subdivide;
pub mod svg;
pub mod unfolding;

pub use geom::{Iso2, Vec2, Vec3};
pub use mesh::{
    total_angle_sides, MeshError, Polyhedron, SurfacePoint, TangentDirection, Tolerances, TriMesh,
};
