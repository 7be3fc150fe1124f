//! Classical capacities of quantum channels with a limited entanglement budget.
//!
//! The crate is layered bottom-up:
//!
//! - [`qstate`]: density matrices, partial traces, purifications and entropies (all in bits).
//! - [`channels`]: Kraus-form CPTP maps and the constructors used throughout (classical
//!   symmetric channels, the embedding channel, qubit dephasing, Heisenberg-Weyl covariant
//!   extensions, flagged channels, tensor products, seeded random channels).
//! - [`functionals`]: Holevo quantity, entanglement-assisted Holevo quantity, entropy gain and
//!   minimum output entropy.
//! - [`optimizers`]: Blahut-Arimoto for classical channels and multi-start ensemble search for
//!   the one-shot capacities with and without an entanglement budget.
//! - [`tradeoff`]: sampled capacity/entanglement curves, time-sharing envelopes for flagged
//!   channels, slope analysis and the superadditivity witness.
//! - [`verify`]: randomized checks of the structural lemmas behind the construction.
//! - [`spec`] and [`report`]: JSON channel specifications and CSV/SVG/JSON output.
//!
//! Tensor factors are ordered row-major throughout: in `A ⊗ B` the index of `A` is the most
//! significant digit, matching `nalgebra`'s Kronecker product.

// `!(x > 0.0)` deliberately rejects NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod functionals;
mod optim;
pub mod optimizers;
mod par;
pub mod qstate;
pub mod random;
pub mod report;
pub mod spec;
pub mod tradeoff;
pub mod verify;

pub use channels::{Channel, FlaggedSpec};
pub use error::{Error, Result};
pub use functionals::Ensemble;
pub use optimizers::{CapacityResult, OptimizerConfig};
pub use qstate::{DensityMatrix, SubsystemShape};
pub use tradeoff::{CurveAnalysis, TradeoffCurve};
pub use verify::VerificationReport;
