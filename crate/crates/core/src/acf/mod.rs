//! Weighted energies, the Alt-Caffarelli-Friedman functional with its Dini
//! correction, spherical-cap constants and the monotonicity audit.

pub mod audit;
pub mod caps;
pub mod dini;
pub mod energy;

pub use audit::{
    minimal_cbar, monotonicity_audit, phi_of, radial_report, AcfOptions, MonotonicityAudit,
    RadialReport,
};
pub use caps::{cap_characteristic, friedland_hayman_check, CapResult, FriedlandHayman, Phase};
pub use dini::modulus_psi_g;
pub use energy::{acf_phi, region_energy, weighted_energy};
