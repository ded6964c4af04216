//! Exact Newton-polyhedron invariants of polynomial singularities: dual fans,
//! graded face rings, socle degrees, Newton orders and Grothendieck residues,
//! together with checkers that evaluate the related identities on concrete
//! inputs.

pub mod arith;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod polylattice;
pub mod fan;
pub mod facering;
pub mod exec;
pub mod grobner;
pub mod localalg;
pub mod residue;
pub mod combid;
pub mod pipeline;

pub use arith::Q;
pub use error::{Error, Result};
pub use poly::{Exponent, SparsePoly};
pub use polylattice::{FaceDescriptor, NewtonOrder, NewtonPolyhedron, Polytope};
