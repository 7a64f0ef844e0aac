//! Cone spectral radius and cone spectrum of order-preserving homogeneous maps.

pub mod cone;
pub mod continuity;
pub mod error;
pub mod json;
pub mod linalg;
pub mod lp;
pub mod maps;
pub mod parts;
pub mod point;
pub mod spectral;

pub use cone::{Cone, DominationRatio, PolyhedralCone, DEFAULT_GRID, DEFAULT_TOL};
pub use error::{ConeError, Result};
pub use point::{Point, PointKind};
pub use parts::{enumerate_parts, heights, part_leq, part_of, Part, PartSignature, PartsLattice};
pub use maps::{MapDescriptor, PropertyReport};
pub use spectral::{EigenPair, RadiusEstimate, RadiusParams};
pub use continuity::{PerturbationReport, Verdict};
