//! Exact computer algebra for the supersingular elliptic curve `y^2 + y = x^3`
//! over `F_4`: Weierstrass curves and their automorphisms, formal group laws,
//! level-3 structures, and the Lubin–Tate deformation with its `C_3` and `C_2`
//! actions.

pub mod deformation;
pub mod error;
pub mod field;
pub mod formal;
pub mod groups;
pub mod level;
pub mod linalg;
pub mod ring;
pub mod series;
pub mod weierstrass;

pub use error::{Error, Result};
