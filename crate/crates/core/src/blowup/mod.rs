//! Rescalings, two-plane fits, harmonic replacement and the flatness
//! cascade.

pub mod cascade;
pub mod envelope;
pub mod replacement;
pub mod rescale;
pub mod twoplane;

pub use cascade::{flatness_cascade, CascadeStep, FlatnessTrace};
pub use envelope::{graph_envelope_check, EnvelopeCheck};
pub use replacement::{harmonic_replacement, Replacement};
pub use rescale::{broken_harmonic, rescale, unit_grid, zoom, UNIT_CELLS};
pub use twoplane::{fit_two_plane, TwoPlane, TwoPlaneFit};
