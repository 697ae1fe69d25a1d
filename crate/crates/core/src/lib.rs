//! Finite model theory toolkit.
//!
//! Finite relational structures, FO/MSO formulas, rank-m types and
//! Ehrenfeucht–Fraïssé games, translation schemes, tree representations
//! with height/degree pruning, and preservation-property checks over
//! finite families.

pub mod classes;
pub mod ebsp;
pub mod equivalence;
mod error;
pub mod logic;
pub mod preservation;
pub mod structures;
pub mod transl;
pub mod treerep;

pub use error::{Caps, Error, Result};
pub use equivalence::{Logic, RankType};
pub use treerep::Tree;
pub use logic::{Formula, Term};


pub use structures::{Element, ElementMap, PointedStructure, Structure, Vocabulary};

