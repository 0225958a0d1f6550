//! Flag-based fault-tolerant syndrome extraction for small self-orthogonal
//! CSS codes: circuits, fault enumeration, lookup-table decoding and
//! Pauli-frame Monte Carlo.

pub mod circuits;
pub mod codes;
pub mod decode;
pub mod error;
pub mod faults;
pub mod gf2;
pub mod montecarlo;
pub mod nogo;
pub mod pauli;
pub mod table;

pub use circuits::{FlagPolicy, RoundSchedule};
pub use codes::{Classification, PauliType, StabilizerCode};
pub use decode::LookupTable;
pub use faults::{Counterexample, FaultContext};
pub use montecarlo::{SweepConfig, SweepRow};
pub use error::{Error, Result};
pub use pauli::PauliOp;
