//! Decoherence of entangled neutral kaon pairs.
//!
//! The crate evolves single kaons and K⁰K̄⁰ singlet pairs under a
//! Lindblad-type master equation whose generators project onto the mass
//! eigenstates, computes the strangeness correlation probabilities and
//! asymmetries that constrain the decoherence strength λ, fits λ to
//! asymmetry data, and evaluates the entanglement measures (entropy,
//! separability tests, concurrence, entanglement of formation) of the
//! decohering pair.
//!
//! Units: times in τ_S = 1/Γ_S, rates and λ in Γ_S.

pub mod cli;
pub mod constants;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod observables;
pub mod qmat;

pub use constants::Constants;
pub use error::{Error, Result};
pub use evolution::{EffectiveHamiltonian, KaonParams, LindbladOperatorSet};
pub use qmat::{CMatrix, DensityMatrix, Side};
