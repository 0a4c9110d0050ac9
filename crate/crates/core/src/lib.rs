//! Electron-transfer rates for donor-bridge-acceptor molecules coupled to a single cavity mode.
//!
//! Energies are in eV, temperatures in K and rates in s⁻¹. The numerical
//! core is generic over [`Real`] (`f32` or `f64`); the aliases at the crate
//! root fix it to `f64`, which is what the CLI and the sweep harness use.
//!
//! ```
//! use pmet::{config, pmet_rate, RateOptions};
//!
//! let rec = config::parse_record(config::bundled::RESONANT_REFERENCE).unwrap();
//! let spec = config::build_system(&rec).unwrap();
//! let result = pmet_rate(&spec, RateOptions::default()).unwrap();
//! assert!(result.total_rate > 0.0);
//! ```

// NaN must fail range checks, so `!(x > 0)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fock;
pub mod harness;
pub mod marcus;
pub mod model;
pub mod offres;
pub mod rate;
pub mod resonant;
pub mod scalar;
pub mod special;
pub mod units;

pub use error::{PmetError, PoleLocation, Result};
pub use model::{CavityMode, TruncationMode, TruncationPolicy};
pub use rate::{Convergence, Cutoffs, PathwayMode, PolePolicy, RateOptions};
pub use scalar::Real;

pub type SystemSpec = model::SystemSpec<f64>;
pub type MolecularParams = model::MolecularParams<f64>;
pub type CavityParams = model::CavityParams<f64>;
pub type DipoleSet = model::DipoleSet<f64>;
pub type ThermalParams = model::ThermalParams<f64>;
pub type DisplacementParam = fock::DisplacementParam<f64>;
pub type OverlapMatrix = fock::OverlapMatrix<f64>;
pub type MarcusResult = marcus::MarcusResult<f64>;
pub type ChannelRow = rate::ChannelRow<f64>;
pub type ChannelTable = rate::ChannelTable<f64>;
pub type RateResult = rate::RateResult<f64>;

/// Rate for whichever cavity regime `spec` describes.
pub fn pmet_rate<T: Real>(spec: &model::SystemSpec<T>, opts: RateOptions) -> Result<rate::RateResult<T>> {
    match spec.mode() {
        CavityMode::Resonant => resonant::pmet_rate_resonant_with(spec, opts),
        CavityMode::OffResonant => offres::pmet_rate_offres_with(spec, opts),
    }
}
