//! K-theoretic Littlewood–Richardson coefficients for Grassmannian
//! Grothendieck classes, computed with Buch's set-valued tableau rule, and
//! machinery for checking them against Möbius functions of content posets.

pub mod error;
pub mod partition;
pub mod svt;
pub mod grothendieck;
pub mod poset;
pub mod richardson;
pub mod involutions;
pub mod cli;

pub use error::{Error, Result};
pub use partition::{AmbientBox, NearSide, Partition, ShapeClass};
