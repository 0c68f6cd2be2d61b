//! Wavelength/geometry conventions and the ground-truth scenario.
//!
//! Coordinate frame: the RIS occupies z = 0 in the xy-plane, broadside along
//! +z, with beams steered in the xz-plane. Time convention exp(-j w t), so a
//! forward-propagating spherical wave carries phase +jkr.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexFieldSlice, ObstacleMask};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space propagation constants. `wavenumber * wavelength == 2 pi` holds
/// to machine precision by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub frequency: f64,
    pub wavelength: f64,
    pub wavenumber: f64,
}

impl Medium {
    pub fn from_frequency(frequency: f64) -> Result<Self> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "frequency must be positive and finite, got {frequency}"
            )));
        }
        let wavelength = SPEED_OF_LIGHT / frequency;
        Ok(Self {
            frequency,
            wavelength,
            wavenumber: 2.0 * std::f64::consts::PI / wavelength,
        })
    }

    /// The papers in this area often quote a rounded wavelength (e.g. 2 mm at
    /// "150 GHz"); accepting the wavelength directly keeps those numbers exact.
    pub fn from_wavelength(wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive and finite, got {wavelength}"
            )));
        }
        Ok(Self {
            frequency: SPEED_OF_LIGHT / wavelength,
            wavelength,
            wavenumber: 2.0 * std::f64::consts::PI / wavelength,
        })
    }
}

/// Discretized reflecting aperture: `nx` x `ny` elements of pitch `pitch`,
/// centered on the origin so element m has x = (m - (nx-1)/2) * pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGeometry {
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
}

impl RisGeometry {
    pub fn new(nx: usize, ny: usize, pitch: f64) -> Result<Self> {
        if nx < 1 || ny < 1 {
            return Err(Error::InvalidArgument(format!(
                "element counts must be >= 1, got {nx} x {ny}"
            )));
        }
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "pitch must be positive, got {pitch}"
            )));
        }
        Ok(Self { nx, ny, pitch })
    }

    /// Default element size of half a wavelength.
    pub fn half_wave(medium: &Medium, nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, medium.wavelength / 2.0)
    }

    pub fn element_x(&self, m: usize) -> f64 {
        (m as f64 - (self.nx as f64 - 1.0) / 2.0) * self.pitch
    }

    pub fn element_y(&self, m: usize) -> f64 {
        (m as f64 - (self.ny as f64 - 1.0) / 2.0) * self.pitch
    }

    /// Aperture size D = max(nx, ny) * pitch.
    pub fn aperture(&self) -> f64 {
        self.nx.max(self.ny) as f64 * self.pitch
    }

    pub fn x_min(&self) -> f64 {
        self.element_x(0)
    }

    pub fn x_max(&self) -> f64 {
        self.element_x(self.nx - 1)
    }
}

/// Incident beam sampled on the RIS plane: a circular Gaussian envelope of
/// 1/e amplitude radius `footprint_radius` with the linear phase ramp of an
/// oblique plane wave. The footprint radius is the single footprint
/// convention used everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentBeamSpec {
    /// 1/e amplitude radius on the RIS plane (m). `f64::INFINITY` gives a
    /// uniform plane wave.
    pub footprint_radius: f64,
    /// Incidence angle in the xz steering plane (rad).
    pub incidence_angle: f64,
    /// Peak amplitude (field units).
    pub amplitude: f64,
}

impl IncidentBeamSpec {
    pub fn new(footprint_radius: f64, incidence_angle: f64, amplitude: f64) -> Result<Self> {
        if !(footprint_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "footprint radius must be positive, got {footprint_radius}"
            )));
        }
        if incidence_angle.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidArgument(format!(
                "incidence angle must satisfy |theta_i| < pi/2, got {incidence_angle}"
            )));
        }
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Self {
            footprint_radius,
            incidence_angle,
            amplitude,
        })
    }

    /// E_i(x, y) = A exp(-(x^2+y^2)/w^2) exp(j k sin(theta_i) x).
    pub fn sample(&self, x: f64, y: f64, k: f64) -> Complex64 {
        let w = self.footprint_radius;
        let envelope = if w.is_infinite() {
            self.amplitude
        } else {
            self.amplitude * (-(x * x + y * y) / (w * w)).exp()
        };
        let phase = k * self.incidence_angle.sin() * x;
        Complex64::from_polar(envelope, phase)
    }

    /// Partial illumination iff the footprint is strictly smaller than half
    /// the aperture; the boundary w = D/2 classifies as full.
    pub fn is_partial_illumination(&self, ris: &RisGeometry) -> bool {
        self.footprint_radius < ris.aperture() / 2.0
    }
}

/// Sample the incident beam on every RIS element. The returned slice sits on
/// the z = 0 plane with spacing equal to the element pitch.
pub fn incident_field_on_ris(
    ris: &RisGeometry,
    beam: &IncidentBeamSpec,
    medium: &Medium,
) -> ComplexFieldSlice {
    let k = medium.wavenumber;
    ComplexFieldSlice::from_fn_centered(ris.nx, ris.ny, ris.pitch, 0.0, |x, y| {
        beam.sample(x, y, k)
    })
}

/// Ground truth for one experiment: medium, RIS, incident beam, UE probe and
/// obstacles. The UE is an isotropic point probe in the y = 0 plane; received
/// power is |E(ue)|^2 in field units squared.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub medium: Medium,
    pub ris: RisGeometry,
    pub incident: IncidentBeamSpec,
    /// UE position (x, z) in meters, y = 0 plane.
    pub ue_position: (f64, f64),
    /// Optional UE velocity (vx, vz) in m/s.
    pub ue_velocity: Option<(f64, f64)>,
    /// Absorbing screens, kept sorted by increasing z.
    pub obstacles: Vec<ObstacleMask>,
    pub seed: u64,
    /// Log-normal RSS noise sigma in dB; 0 disables noise.
    pub noise_sigma_db: f64,
}

impl Scenario {
    pub fn new(
        medium: Medium,
        ris: RisGeometry,
        incident: IncidentBeamSpec,
        ue_position: (f64, f64),
    ) -> Result<Self> {
        let s = Self {
            medium,
            ris,
            incident,
            ue_position,
            ue_velocity: None,
            obstacles: Vec::new(),
            seed: 0,
            noise_sigma_db: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_obstacles(mut self, mut obstacles: Vec<ObstacleMask>) -> Result<Self> {
        obstacles.sort_by(|a, b| a.z.total_cmp(&b.z));
        self.obstacles = obstacles;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ue_position.1 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "UE must sit in front of the RIS (z > 0), got z = {}",
                self.ue_position.1
            )));
        }
        let mut prev = 0.0;
        for m in &self.obstacles {
            if !(m.z > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "obstacle plane must satisfy z > 0, got {}",
                    m.z
                )));
            }
            if m.z < prev {
                return Err(Error::InvalidArgument(
                    "obstacles must be sorted by increasing z".into(),
                ));
            }
            prev = m.z;
            m.validate()?;
        }
        if self.noise_sigma_db < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be >= 0 dB, got {}",
                self.noise_sigma_db
            )));
        }
        Ok(())
    }

    /// UE position in polar form (theta from broadside, range).
    pub fn ue_polar(&self) -> (f64, f64) {
        let (x, z) = self.ue_position;
        (x.atan2(z), (x * x + z * z).sqrt())
    }

    /// Total incident power sum |E_i|^2 d^2 over the elements.
    pub fn incident_power(&self) -> f64 {
        incident_field_on_ris(&self.ris, &self.incident, &self.medium).power()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn medium_at_150_ghz() {
        let m = Medium::from_frequency(150e9).unwrap();
        assert_relative_eq!(m.wavelength, 1.9986e-3, max_relative = 1e-4);
        assert_relative_eq!(m.wavenumber, 3143.7, max_relative = 1e-4);
        // k * lambda = 2 pi exactly.
        assert_abs_diff_eq!(
            m.wavenumber * m.wavelength,
            2.0 * std::f64::consts::PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn medium_from_wavelength() {
        let m = Medium::from_wavelength(2e-3).unwrap();
        assert_relative_eq!(m.wavenumber, 3141.593, max_relative = 1e-6);
        let m1 = Medium::from_wavelength(1.0).unwrap();
        assert_relative_eq!(m1.wavenumber, 6.2832, max_relative = 1e-4);
    }

    #[test]
    fn medium_rejects_nonpositive_frequency() {
        assert!(Medium::from_frequency(0.0).is_err());
        assert!(Medium::from_frequency(-1.0).is_err());
        assert!(Medium::from_wavelength(f64::NAN).is_err());
    }

    #[test]
    fn ris_grid_is_centered() {
        let m = Medium::from_wavelength(2e-3).unwrap();
        let ris = RisGeometry::half_wave(&m, 5, 4).unwrap();
        assert_abs_diff_eq!(ris.element_x(2), 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(ris.element_x(0), -ris.element_x(4), epsilon = 1e-18);
        assert_abs_diff_eq!(ris.element_y(0), -ris.element_y(3), epsilon = 1e-18);
        assert_relative_eq!(ris.aperture(), 5.0 * 1e-3);
    }

    #[test]
    fn incident_samples_match_definition() {
        let m = Medium::from_wavelength(2e-3).unwrap();
        // Uniform limit: all samples equal A at normal incidence.
        let beam = IncidentBeamSpec::new(f64::INFINITY, 0.0, 1.0).unwrap();
        let v = beam.sample(0.01, -0.02, m.wavenumber);
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);

        // 1/e radius definition.
        let beam = IncidentBeamSpec::new(0.05, 0.0, 2.0).unwrap();
        let v = beam.sample(0.05, 0.0, m.wavenumber);
        assert_relative_eq!(v.norm(), 2.0 / std::f64::consts::E, max_relative = 1e-12);

        // Phase ramp: theta_i = 30 deg, x = 1 mm -> k * 0.5 * 0.001.
        let beam = IncidentBeamSpec::new(f64::INFINITY, 30f64.to_radians(), 1.0).unwrap();
        let v = beam.sample(1e-3, 0.0, m.wavenumber);
        assert_relative_eq!(v.arg(), 1.5708, max_relative = 1e-4);
    }

    #[test]
    fn amplitude_symmetric_about_origin() {
        let m = Medium::from_wavelength(2e-3).unwrap();
        let beam = IncidentBeamSpec::new(0.03, 0.4, 1.3).unwrap();
        for &(x, y) in &[(0.01, 0.002), (-0.004, 0.03), (0.02, -0.015)] {
            let a = beam.sample(x, y, m.wavenumber).norm();
            let b = beam.sample(-x, -y, m.wavenumber).norm();
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn illumination_flag_flips_at_half_aperture() {
        let m = Medium::from_wavelength(2e-3).unwrap();
        let ris = RisGeometry::half_wave(&m, 100, 100).unwrap(); // D = 0.1 m
        let half = ris.aperture() / 2.0;
        let partial = IncidentBeamSpec::new(half - 1e-12, 0.0, 1.0).unwrap();
        let full = IncidentBeamSpec::new(half, 0.0, 1.0).unwrap();
        assert!(partial.is_partial_illumination(&ris));
        assert!(!full.is_partial_illumination(&ris)); // boundary is full
        let uniform = IncidentBeamSpec::new(f64::INFINITY, 0.0, 1.0).unwrap();
        assert!(!uniform.is_partial_illumination(&ris));
    }

    #[test]
    fn sampled_power_converges_when_pitch_halved() {
        let m = Medium::from_wavelength(2e-3).unwrap();
        let w = 2.0 * m.wavelength;
        let beam = IncidentBeamSpec::new(w, 0.0, 1.0).unwrap();
        // Same physical aperture, twice the sampling density.
        let coarse = RisGeometry::new(64, 64, m.wavelength / 2.0).unwrap();
        let fine = RisGeometry::new(128, 128, m.wavelength / 4.0).unwrap();
        let p_coarse = incident_field_on_ris(&coarse, &beam, &m).power();
        let p_fine = incident_field_on_ris(&fine, &beam, &m).power();
        assert!(
            ((p_fine - p_coarse) / p_fine).abs() < 1e-3,
            "power did not converge: {p_coarse} vs {p_fine}"
        );
    }
}
