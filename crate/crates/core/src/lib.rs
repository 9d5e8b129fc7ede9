//! Exact set-valued convex analysis over the lattice of upper closed sets.

pub mod cone;
pub mod conjugate;
pub mod continuity;
pub mod corpus;
pub mod dd;
pub mod duality;
pub mod error;
pub mod lp;
pub mod oracle;
pub mod polyhedron;
pub mod rational;
pub mod scalarize;
pub mod setmap;
pub mod upperset;
pub mod verdict;

pub use cone::{cone_contains, dual_cone, Cone};
pub use error::{Error, Result};
pub use lp::{Halfspace, LpOutcome};
pub use polyhedron::{lp_solve, support_value, Polyhedron, VRep, Window};
pub use rational::{ExtQ, Q};
