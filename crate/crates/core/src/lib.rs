//! Exact norms of CM values of modular polynomials and the Green-function
//! lower bounds that certify them as non-units.

pub mod cmcycles;
pub mod error;
pub mod greens;
pub mod numerics;
pub mod modular;
pub mod quadforms;
pub mod verify;

pub use cmcycles::{CmCycle, CycleKind, CycleNorm};
pub use error::{Error, Result};
pub use numerics::{MpComplex, PrecisionContext};
pub use quadforms::{ClassGroup, CmPoint, Discriminant, QuadForm};
pub use verify::{Outcome, VerificationReport, VerifyOptions};
