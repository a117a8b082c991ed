//! Learning-augmented online packing with a separable concave objective.
//!
//! The centerpiece is [`switching::run_switching`], which combines any
//! [`subroutines::OnlineSubroutine`] with a stream of predicted values and
//! falls back to the subroutine alone in rounds where the prediction prefix
//! exceeds the subroutine's feasibility factor `β`.
//!
//! Supporting modules provide the instance model, offline optimum oracles,
//! prediction generators, builders for knapsack, throughput and inventory
//! problems, and the experiment harness behind the `augpack` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advice;
pub mod applications;
pub mod error;
pub mod harness;
pub mod model;
pub mod offline;
pub mod seed;
pub mod subroutines;
pub mod switching;

pub use error::{Error, Result};
pub use model::{Column, ConcavePiece, KappaTracker, PackingInstance};
pub use offline::OfflineResult;
pub use subroutines::{OnlineSubroutine, SubroutineConfig};
pub use switching::{AdviceStream, BetaPolicy, Mixing, QualityReport, SolutionTrace};
