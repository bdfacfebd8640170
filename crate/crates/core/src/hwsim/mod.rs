//! Functional emulator of the programmable-logic attitude core: the
//! IDLE/COMPUTE/DONE control state machine, the register map used for
//! host exchange, and the Q15.16 datapath (systolic matrix products and
//! Cramer's-rule inversion).
//!
//! The emulation is transaction-level. Its contract is bit-exact agreement
//! with [`crate::fixedpoint::fx_attitude_prime`] and protocol correctness;
//! per-cycle pipeline timing is replaced by [`CycleReport`] operation
//! accounting.

mod core;
pub mod registers;
mod state;
mod systolic;

pub use self::core::{core_run, core_run_traced, CoreRun, CycleModel, CycleReport, OltaeCore};
pub use registers::{RegisterFile, TraceEntry};
pub use state::{step_state, CoreState, Signals, State};
pub use systolic::{cramer_inverse3, systolic_matmul3, CramerInverse, OpCounts, ILL_CONDITIONED_RATIO};
