//! Exact coefficient rings: finite fields, `W_k(F_4)`, `Z/n`, and towers
//! adjoining truncated power-series variables and Laurent units.

mod base;
mod endo;
mod filtration;
mod tower;

pub use base::{BaseRing, Scalar};
pub use endo::{reduce, residue_ring, teichmuller, teichmuller_lift, Ideal, RingEndo};
pub use filtration::{filtration_length, GradedBasis};
pub use tower::{Mono, Ring, RingValue, TowerRing, VarKind, VarSpec, MAX_VARS};
