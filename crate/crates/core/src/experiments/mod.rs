//! Scans, scalings and ensembles built on the rate models.

pub mod exec;
pub mod oscillation;
pub mod peak;
pub mod scaling;
pub mod scan;
pub mod voids;

pub use exec::{Executor, Serial};
pub use oscillation::{oscillation_frequency, OscillationEstimate};
pub use peak::{find_peak, Branch, PeakResult};
pub use scaling::{detuning_window, fit_power_law, n_scaling, policy_peak, PeakSearch, Policy, PowerLawFit};
pub use scan::{linspace, map_scan, spectrum_scan, MetaValue, RateModel, ScanResult, Tier};
pub use voids::{void_beta_sweep, void_ensemble, void_n_sweep, VoidDrive, VoidEnsembleResult, VoidEnsembleSpec};
