//! Exact contraction of matchgate tensor networks.
//!
//! Matchgate tensors are the tensors whose components satisfy a system of
//! quadratic identities; equivalently, they are exactly the tensors with a
//! Gaussian generating function over anticommuting variables, and exactly
//! the tensors realizable as matching sums of planar weighted graphs. This
//! crate represents matchgates in the canonical Gaussian form (A, B, C),
//! validates the identities, and contracts matchgate tensor networks on
//! planar and genus-g surfaces exactly:
//!
//! * a planar (or planar-cut) region is contracted in one shot as a single
//!   Gaussian integral over a Kasteleyn-oriented matching-sum graph,
//! * the leftover single-vertex network with self-loops on a genus-g
//!   surface is evaluated as a sum of at most 2^{2g} Pfaffians.
//!
//! The `grassmann` module is a brute-force Berezin-calculus engine used as
//! the independent oracle for every closed-form path; `linalg` holds the
//! Pfaffian and GF(2) kernels; `matchgate` the tensor representations;
//! `network`, `planar`, `genus` and `pipeline` the contraction machinery.
//!
//! See the `examples/` directory for runnable walkthroughs of each
//! capability, and the `mgc` binary for the file-based interface.

pub mod error;
pub mod genus;
pub mod grassmann;
pub mod io;
pub mod linalg;
pub mod matchgate;
pub mod network;
pub mod pipeline;
pub mod planar;

pub use error::{Error, Result};
pub use matchgate::{CanonicalMatchgate, DenseTensor, Parity};
pub use network::TensorNetwork;
pub use pipeline::ContractionReport;



