//! Index, curvature, Stinespring structure and minimal isometric dilations
//! of contractive completely positive maps on matrix algebras.
//!
//! The entry point is [`Channel`], a Kraus tuple on `M_n` together with a
//! trace convention. Infinite-dimensional settings are approximated by
//! [`TruncationFamily`] instances that carry a horizon up to which defect
//! traces are exact.

pub mod channel;
pub mod cli;
pub mod dilation;
pub mod error;
pub mod invariants;
pub mod io;
pub mod numerics;
pub mod random;
pub mod stinespring;
pub mod verify;

pub use channel::family::{family_channel, TruncatedChannel, TruncationFamily};
pub use channel::{Channel, Source, TraceConvention};
pub use error::{Error, Result};
pub use numerics::{CMatrix, Tolerance, C64};
