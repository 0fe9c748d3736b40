//! Certificates for ancilla-assisted process tomography.
//!
//! Given a bipartite state `rho` on `A (x) B`, this crate decides whether
//! applying an unknown channel to `A` leaves enough information in the joint
//! output to identify the channel (faithfulness), or at least to detect any
//! nontrivial action (sensitivity), and backs each verdict with constructive
//! evidence:
//!
//! - [`jamiolkowski::certify_faithful`]: rank of the state's induced map, with
//!   the singular-value gap around the threshold.
//! - [`witness::faithfulness_witness`]: two distinct channels with identical
//!   outputs when the state is not faithful.
//! - [`sensitivity::certify_sensitive`]: triviality of the local commutant,
//!   or an invariant local projective measurement when it is not trivial.
//! - [`reconstruct::reconstruct_channel`]: recovery of the channel from the
//!   output of a faithful probe.

pub mod channel;
pub mod error;
pub mod jamiolkowski;
pub mod linalg;
pub mod reconstruct;
pub mod sensitivity;
pub mod state;
pub mod witness;

pub use channel::{Channel, ChannelClassReport, ReprKind};
pub use error::{Error, Result};
pub use jamiolkowski::{Direction, FaithfulnessCertificate, TransferMatrix};
pub use linalg::{ComplexMatrix, DimPair, RandomSeed, SingularGap, Subsystem, C64};
pub use reconstruct::ReconstructionReport;
pub use sensitivity::{ChannelClass, CommutantBasis, ProjectiveMeasurement, SensitivityCertificate};
pub use state::BipartiteState;
pub use witness::{HermitianPreservingMap, Lemma1Decomposition, WitnessPair};
