//! Resource-theory thermodynamics on classical spectra.
//!
//! Rényi and non-additive (Tsallis) divergences with their limit orders,
//! the generalized free energies built from them, thermo-majorization
//! curves and the constructive channels around them, finite-size catalysis
//! bounds, and a two-qubit correlated-catalysis scenario.

pub mod catalysis;
pub mod correlated;
pub mod divergence;
pub mod error;
pub mod format;
pub mod free_energy;
pub mod majorization;
pub mod types;

pub use divergence::{divergence, renyi_divergence, tsallis_divergence, Family};
pub use error::{Error, Result};
pub use free_energy::{second_law_scan, ScanReport};
pub use majorization::{thermal_feasible, thermo_curve, ThermoCurve, Verdict};
pub use types::{gibbs_dist, AlphaValue, ExtReal, GibbsContext, ProbDist};
