//! Construction and certification of Lagrangian tori in pseudotoric
//! Fano manifolds: projective geometry, Hamiltonian flows, pencil-map
//! models, Maslov and period certificates, and toric relation screening.

pub mod certify;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod par;
pub mod poly;
pub mod quadrature;
pub mod registry;
pub mod scenario;
pub mod symplectic;
pub mod toric;
pub mod torus;
pub mod winding;

pub use error::{Error, Result};
pub use geometry::{AmbientSpace, Chart, HomogeneousPoint, ProductPoint, TangentVector};
pub use poly::{MultiPoly, UniPoly};
pub use symplectic::MomentMap;
