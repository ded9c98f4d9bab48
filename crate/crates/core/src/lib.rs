//! Entropy rates, moment-generating functions and large-deviation rate
//! functions of hidden Markov processes, computed through the cycle
//! expansion of the inverse zeta-function.
//!
//! A hidden Markov process is a mixing Markov chain observed through a
//! memoryless noisy channel. Its sequence probabilities are contractions of
//! transfer-matrix products, and its entropy rate equals the top Lyapunov
//! exponent of that random matrix product. This crate assembles a truncated
//! inverse zeta-function from the spectral radii of transfer products over
//! aperiodic necklaces (periodic orbits), and extracts from it:
//!
//! - the entropy rate, via an implicit derivative at the zero of the
//!   zeta-function ([`zeta`]);
//! - the moment-generating function, via root tracking in the truncation
//!   ([`genfun`]);
//! - Chernoff-bound rate functions for atypical sequences ([`genfun`]).
//!
//! Everything is cross-checkable: [`exact`] holds closed forms for two
//! exactly solvable aggregated families and the small-noise expansion of
//! the binary symmetric model, while [`oracle`] provides brute-force block
//! entropies, entropy bounds, and Monte Carlo estimators that are
//! independent of the cycle-expansion path.

pub mod dual;
pub mod eigen;
pub mod error;
pub mod exact;
pub mod genfun;
pub mod hmp;
pub mod markov;
pub mod matrix;
pub mod oracle;
pub mod orbits;
pub mod zeta;

pub use dual::DualScalar;
pub use error::{Error, Result};
pub use hmp::{HmpModel, ObservedSequence};
pub use markov::MarkovChain;
pub use matrix::Matrix;
pub use orbits::{Orbit, OrbitSet};
