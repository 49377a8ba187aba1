//! General quantum measurements and numerical checks of the
//! information-disturbance tradeoff.
//!
//! The crate is organised bottom-up:
//!
//! - [`matcore`]: dense complex linear algebra (Jacobi Hermitian eigensolver,
//!   PSD square root, trace norm, Kronecker product, partial trace,
//!   isometry completion).
//! - [`qstate`]: density matrices, pure states, fidelity, trace distance and
//!   seeded random ensembles.
//! - [`qmeas`]: POVMs, Kraus instruments, the state-reduction rule and the
//!   superoperator of a measurement outcome.
//! - [`dilation`]: the indirect measurement model (system + ancilla + unitary
//!   + projective readout) and the no-signalling witness.
//! - [`discrim`]: Helstrom discrimination, binary entropy and the entropy
//!   inequality kit.
//! - [`tradeoff`]: the tradeoff relations as executable checks, plus the
//!   weak-measurement saturation scan.
//!
//! Tensor products always put the system first and the ancilla second, so a
//! joint basis index is `sys * dim_anc + anc`.

#![forbid(unsafe_code)]

pub mod dilation;
pub mod discrim;
pub mod error;
pub mod format;
pub mod json;
pub mod matcore;
pub mod qmeas;
pub mod qstate;
pub mod tradeoff;

pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, HermitianEigen, C64};
pub use qmeas::{KrausInstrument, Povm, Superoperator};
pub use qstate::{DensityMatrix, PureState};
