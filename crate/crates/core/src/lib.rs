//! Exact symbolic computation of enumerative invariants of semistable
//! sheaves and pairs on a smooth projective curve.

pub mod error;
pub mod exact;
pub mod invariants;
pub mod laurent;
pub mod regsum;
pub mod superalg;
pub mod vertex;

pub use error::{Error, Result};
pub use exact::Rational;
pub use superalg::{Family, Mono, SuperPoly, Var};

/// Engine version; participates in cache keys.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
