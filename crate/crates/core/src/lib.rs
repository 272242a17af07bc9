//! Linear SDP tooling: instances and SDPA I/O, color refinement, a PDHG
//! solver with minimum-norm continuation, relaxation generators, seeded
//! neural forward passes and a verification harness.

pub mod color;
pub mod error;
pub mod instance;
pub mod matrix;
pub mod nn;
pub mod pdhg;
pub mod relax;
pub mod sdpa;
pub mod verify;

pub use color::{Algo, ColorState, Partition};
pub use error::{Error, Result};
pub use instance::{relative_obj_gap, InstanceMeta, SdpInstance, SolutionTriple};
pub use matrix::{symmetrize, SparseSymMatrix, SymMatrix};
pub use pdhg::{PdhgConfig, SolveStats};
pub use sdpa::{read_sdpa, write_sdpa};
