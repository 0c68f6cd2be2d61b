//! Scalar-wave engine for RIS advanced wavefront engineering.
//!
//! The crate simulates a reconfigurable intelligent surface reflecting an
//! incident beam under four phase-profile families (steering, focusing,
//! self-healing, self-accelerating), propagates the reflected field with a
//! band-limited angular-spectrum method cross-checked against a direct
//! Rayleigh-Sommerfeld summation, extracts quantitative beam descriptors,
//! and runs the two-phase hierarchical RIS-assisted localization protocol
//! on top of simulated RSS measurements.

pub mod error;
pub mod field;
pub mod io;
pub mod localization;
pub mod metrics;
pub mod phase;
pub mod scene;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{ComplexFieldSlice, ObstacleMask};
pub use phase::{PhaseProfile, ProfileKind};
pub use scene::{IncidentBeamSpec, Medium, RisGeometry, Scenario};
pub use spectral::{IntensityMap, MarchConfig, SpectralPropagator, WindowSpec};
