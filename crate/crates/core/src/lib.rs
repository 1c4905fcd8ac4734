//! Estimate-sequence first-order methods.
//!
//! * [`ogm`]: generalized optimized gradient method with OGM, ITEM and TMM presets.
//! * [`ogmm`]: the same method with a bundle memory and a Newton adjustment of
//!   the convergence guarantee.
//! * [`eacgm`]: enhanced accelerated composite gradient method with fully
//!   adaptive line search and dampened strong-convexity bounds.
//! * [`bench`]: seeded synthetic benchmark problems.
//! * [`certify`]: invariant checks recomputed from run traces.

pub mod bench;
pub mod certify;
pub mod eacgm;
pub mod error;
pub mod linalg;
pub mod metric;
pub mod ogm;
pub mod ogmm;
pub mod oracle;
pub mod trace;

pub use error::{Error, Result};
pub use metric::Metric;
pub use oracle::{CompositeOracle, SmoothOracle};
pub use trace::{KnownOptimum, RunRecord, StoppingRule, TraceRow};
