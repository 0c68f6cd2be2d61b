//! Per-element phase profiles: the four beam families plus wrap, compose,
//! quantize and the off-axis focus generalization.

use ndarray::Array2;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scene::{Medium, RisGeometry};

/// What a profile was synthesized as, with its parameters. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    Zero,
    /// Linear ramp k (sin theta_i - sin theta_r) x.
    Steering { theta_i: f64, theta_r: f64 },
    /// Parabolic profile -k r^2 / (2 f0).
    Focusing { f0: f64 },
    /// Radial power law -k C r^gamma.
    SelfHealing { c: f64, gamma: f64 },
    /// Transverse power law -k C u^gamma, u measured across the aperture.
    SelfAccelerating { c: f64, gamma: f64 },
    /// Exact spherical profile focusing on a point of the xz-plane.
    FocusAtPoint { x: f64, z: f64 },
    Composite,
}

/// Per-element phase map in radians, shape (ny, nx) matching the RIS grid it
/// was built for. Values are stored unwrapped unless produced by [`wrap`] or
/// [`quantize`].
#[derive(Debug, Clone)]
pub struct PhaseProfile {
    pub values: Array2<f64>,
    pub kind: ProfileKind,
    /// Present iff the profile was quantized to 2^bits levels.
    pub quantized_bits: Option<u8>,
}

impl PhaseProfile {
    pub fn shape(&self) -> (usize, usize) {
        let d = self.values.dim();
        (d.0, d.1)
    }

    pub fn zero(ris: &RisGeometry) -> Self {
        Self {
            values: Array2::zeros((ris.ny, ris.nx)),
            kind: ProfileKind::Zero,
            quantized_bits: None,
        }
    }
}

fn from_elements(
    ris: &RisGeometry,
    kind: ProfileKind,
    f: impl Fn(f64, f64) -> f64,
) -> PhaseProfile {
    let values = Array2::from_shape_fn((ris.ny, ris.nx), |(iy, ix)| {
        f(ris.element_x(ix), ris.element_y(iy))
    });
    PhaseProfile {
        values,
        kind,
        quantized_bits: None,
    }
}

/// r^gamma evaluated from r^2, with exact fast paths for the axicon
/// (gamma = 1) and parabolic (gamma = 2) cases so algebraic identities
/// between profiles hold bitwise.
fn radial_power(r2: f64, gamma: f64) -> f64 {
    if gamma == 2.0 {
        r2
    } else if gamma == 1.0 {
        r2.sqrt()
    } else {
        r2.sqrt().powf(gamma)
    }
}

/// Beam steering: phi = k (sin theta_i - sin theta_r) x.
pub fn steering_phase(
    ris: &RisGeometry,
    medium: &Medium,
    theta_i: f64,
    theta_r: f64,
) -> Result<PhaseProfile> {
    for (name, th) in [("theta_i", theta_i), ("theta_r", theta_r)] {
        if th.abs() >= PI / 2.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must satisfy |theta| < pi/2, got {th}"
            )));
        }
    }
    let slope = medium.wavenumber * (theta_i.sin() - theta_r.sin());
    Ok(from_elements(
        ris,
        ProfileKind::Steering { theta_i, theta_r },
        |x, _| slope * x,
    ))
}

/// Beam focusing: phi = -k r^2 / (2 f0). Shares its arithmetic with
/// [`self_healing_phase`] at gamma = 2, C = 1/(2 f0), so the two agree
/// elementwise to the last bit.
pub fn focusing_phase(ris: &RisGeometry, medium: &Medium, f0: f64) -> Result<PhaseProfile> {
    if !(f0 > 0.0) || !f0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "focal distance must be positive, got {f0}"
        )));
    }
    let k = medium.wavenumber;
    let c = 1.0 / (2.0 * f0);
    Ok(from_elements(ris, ProfileKind::Focusing { f0 }, |x, y| {
        -k * c * radial_power(x * x + y * y, 2.0)
    }))
}

/// Self-healing (diffraction-free) family: phi = -k C r^gamma. gamma = 1 is
/// the axicon generating a Bessel-like beam.
pub fn self_healing_phase(
    ris: &RisGeometry,
    medium: &Medium,
    c: f64,
    gamma: f64,
) -> Result<PhaseProfile> {
    if !(c > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "power-law parameters must be positive, got C = {c}, gamma = {gamma}"
        )));
    }
    let k = medium.wavenumber;
    Ok(from_elements(
        ris,
        ProfileKind::SelfHealing { c, gamma },
        |x, y| -k * c * radial_power(x * x + y * y, gamma),
    ))
}

/// Self-accelerating family: phi = -k C u^gamma with u >= 0 a shifted
/// coordinate spanning the aperture, independent of y.
///
/// The power law is launched from the aperture edge; u is measured from the
/// +x edge (u = x_max - x) so the local spatial frequency d phi/dx =
/// +k C gamma u^(gamma-1) is non-negative and the resulting caustic
/// accelerates toward +x, matching the ray family in
/// [`crate::metrics::caustic_trajectory`].
pub fn self_accelerating_phase(
    ris: &RisGeometry,
    medium: &Medium,
    c: f64,
    gamma: f64,
) -> Result<PhaseProfile> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "C must be positive, got {c}"
        )));
    }
    if !(gamma > 1.0 && gamma < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must satisfy 1 < gamma < 2, got {gamma}"
        )));
    }
    let k = medium.wavenumber;
    let x_max = ris.x_max();
    Ok(from_elements(
        ris,
        ProfileKind::SelfAccelerating { c, gamma },
        |x, _| {
            let u = x_max - x;
            -k * c * u.powf(gamma)
        },
    ))
}

/// Exact spherical focusing on an arbitrary point (x, z) of the xz-plane:
/// phi(p) = -k (|p - t| - |t|). On axis this reduces to the parabolic
/// profile to O(r^4 / f0^3).
pub fn focus_at_point(ris: &RisGeometry, medium: &Medium, target: (f64, f64)) -> Result<PhaseProfile> {
    let (tx, tz) = target;
    if !(tz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "focus target must satisfy z > 0, got z = {tz}"
        )));
    }
    let range = (tx * tx + tz * tz).sqrt();
    if range == 0.0 {
        return Err(Error::InvalidArgument("focus target at the origin".into()));
    }
    let k = medium.wavenumber;
    Ok(from_elements(
        ris,
        ProfileKind::FocusAtPoint { x: tx, z: tz },
        |x, y| {
            let dx = x - tx;
            let rho = (dx * dx + y * y + tz * tz).sqrt();
            -k * (rho - range)
        },
    ))
}

/// Elementwise sum of two profiles.
pub fn compose(p1: &PhaseProfile, p2: &PhaseProfile) -> Result<PhaseProfile> {
    if p1.shape() != p2.shape() {
        return Err(Error::ShapeMismatch {
            expected: p1.shape(),
            got: p2.shape(),
        });
    }
    Ok(PhaseProfile {
        values: &p1.values + &p2.values,
        kind: ProfileKind::Composite,
        quantized_bits: None,
    })
}

/// Map a phase into (-pi, pi].
pub fn wrap_angle(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = phi.rem_euclid(two_pi); // [0, 2 pi)
    if r > PI {
        r - two_pi
    } else {
        r
    }
}

/// Wrap every element into (-pi, pi].
pub fn wrap(p: &PhaseProfile) -> PhaseProfile {
    PhaseProfile {
        values: p.values.mapv(wrap_angle),
        kind: p.kind,
        quantized_bits: p.quantized_bits,
    }
}

/// Round (the wrapped representation of) every element to the nearest of the
/// 2^bits levels { 2 pi n / 2^bits - pi : n in [0, 2^bits) }.
pub fn quantize(p: &PhaseProfile, bits: u8) -> Result<PhaseProfile> {
    if bits < 1 {
        return Err(Error::InvalidArgument("quantizer needs bits >= 1".into()));
    }
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * PI / levels;
    let values = p.values.mapv(|phi| {
        let w = wrap_angle(phi);
        let n = ((w + PI) / step).round().rem_euclid(levels);
        n * step - PI
    });
    Ok(PhaseProfile {
        values,
        kind: p.kind,
        quantized_bits: Some(bits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn setup() -> (Medium, RisGeometry) {
        let m = Medium::from_wavelength(2e-3).unwrap();
        let ris = RisGeometry::half_wave(&m, 32, 16).unwrap();
        (m, ris)
    }

    #[test]
    fn steering_matches_closed_form() {
        let (m, ris) = setup();
        // Specular reflection needs no phase.
        let p = steering_phase(&ris, &m, 0.3, 0.3).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));

        // theta_i = 0, theta_r = 30 deg at x = 1 mm.
        let p = steering_phase(&ris, &m, 0.0, 30f64.to_radians()).unwrap();
        let slope = m.wavenumber * (0.0 - 0.5);
        for ix in 0..ris.nx {
            let x = ris.element_x(ix);
            assert_abs_diff_eq!(p.values[(0, ix)], slope * x, epsilon = 1e-12);
        }
        assert_relative_eq!(slope * 1e-3, -1.5708, max_relative = 1e-4);
        // Sign symmetry at x = 2 mm.
        let q = steering_phase(&ris, &m, 30f64.to_radians(), 0.0).unwrap();
        let slope_q = m.wavenumber * 0.5;
        assert_relative_eq!(slope_q * 2e-3, 3.1416, max_relative = 1e-4);
        let _ = q;
    }

    #[test]
    fn steering_is_linear_in_x() {
        let (m, ris) = setup();
        let p = steering_phase(&ris, &m, 0.1, -0.7).unwrap();
        // Second finite difference along x vanishes.
        for ix in 1..ris.nx - 1 {
            let d2 = p.values[(3, ix + 1)] - 2.0 * p.values[(3, ix)] + p.values[(3, ix - 1)];
            assert_abs_diff_eq!(d2, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn focusing_matches_closed_form() {
        let (m, ris) = setup();
        let p = focusing_phase(&ris, &m, 5.0).unwrap();
        for iy in 0..ris.ny {
            for ix in 0..ris.nx {
                let (x, y) = (ris.element_x(ix), ris.element_y(iy));
                let want = -m.wavenumber * (x * x + y * y) / (2.0 * 5.0);
                assert_relative_eq!(p.values[(iy, ix)], want, max_relative = 1e-12);
            }
        }
        // Pinned values: r = 0.1 m, f0 = 5 m and r = 0.05 m, f0 = 2.5 m.
        assert_relative_eq!(
            -m.wavenumber * 0.01 / 10.0,
            -3.1416,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            -m.wavenumber * 0.0025 / 5.0,
            -1.5708,
            max_relative = 1e-4
        );
        assert!(focusing_phase(&ris, &m, 0.0).is_err());
        assert!(focusing_phase(&ris, &m, -2.0).is_err());
    }

    #[test]
    fn focusing_is_radially_symmetric() {
        let m = Medium::from_wavelength(2e-3).unwrap();
        let ris = RisGeometry::half_wave(&m, 17, 17).unwrap();
        let p = focusing_phase(&ris, &m, 3.0).unwrap();
        // Equal r -> equal phase, bitwise; compare the 4 axis-mirrored copies.
        for iy in 0..ris.ny {
            for ix in 0..ris.nx {
                let v = p.values[(iy, ix)];
                assert_eq!(v, p.values[(ris.ny - 1 - iy, ix)]);
                assert_eq!(v, p.values[(iy, ris.nx - 1 - ix)]);
            }
        }
    }

    #[test]
    fn healing_gamma2_equals_focusing_bitwise() {
        let (m, ris) = setup();
        let f0 = 2.5;
        let heal = self_healing_phase(&ris, &m, 1.0 / (2.0 * f0), 2.0).unwrap();
        let foc = focusing_phase(&ris, &m, f0).unwrap();
        assert_eq!(heal.values, foc.values);
    }

    #[test]
    fn healing_axicon_value() {
        let (m, ris) = setup();
        let p = self_healing_phase(&ris, &m, 0.05, 1.0).unwrap();
        // r = 0 -> 0 rad.
        let v = p
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(v <= 0.0);
        // gamma = 1, C = 0.05, r = 0.02 -> -k C r = -3.1416.
        assert_relative_eq!(
            -m.wavenumber * 0.05 * 0.02,
            -3.1416,
            max_relative = 1e-4
        );
    }

    #[test]
    fn accelerating_profile_shape() {
        let (m, ris) = setup();
        let p = self_accelerating_phase(&ris, &m, 0.02, 1.5).unwrap();
        // Launch edge carries zero phase.
        assert_eq!(p.values[(0, ris.nx - 1)], 0.0);
        // y-independence.
        for ix in 0..ris.nx {
            for iy in 1..ris.ny {
                assert_eq!(p.values[(iy, ix)], p.values[(0, ix)]);
            }
        }
        // Pinned: u = 0.04 m, C = 0.02, gamma = 1.5 -> -k C 0.008.
        assert_relative_eq!(
            -m.wavenumber * 0.02 * 0.04f64.powf(1.5),
            -0.5027,
            max_relative = 1e-4
        );
        assert!(self_accelerating_phase(&ris, &m, 0.02, 2.5).is_err());
        assert!(self_accelerating_phase(&ris, &m, 0.02, 1.0).is_err());
    }

    #[test]
    fn focus_at_point_reduces_to_parabolic_on_axis() {
        let (m, ris) = setup();
        let p = focus_at_point(&ris, &m, (0.0, 5.0)).unwrap();
        // Element at r = 0: 0 rad (nx, ny even here so use exact formula).
        // Symmetric elements (+/- x) get equal phase.
        for ix in 0..ris.nx {
            assert_abs_diff_eq!(
                p.values[(0, ix)],
                p.values[(0, ris.nx - 1 - ix)],
                epsilon = 1e-12
            );
        }
        // Derived oracle: element at r = 0.05 m, target (0, 5 m):
        // exact -k (sqrt(25 + 0.0025) - 5) vs parabolic -0.78540.
        let exact = -m.wavenumber * ((25.0f64 + 0.0025).sqrt() - 5.0);
        assert_abs_diff_eq!(exact, -0.7854, epsilon = 1e-4);
        assert!(focus_at_point(&ris, &m, (0.0, 0.0)).is_err());
        assert!(focus_at_point(&ris, &m, (0.1, -1.0)).is_err());
    }

    #[test]
    fn compose_wrap_quantize_basics() {
        let (m, ris) = setup();
        let p = focusing_phase(&ris, &m, 1.0).unwrap();
        let z = PhaseProfile::zero(&ris);
        let sum = compose(&p, &z).unwrap();
        assert_eq!(sum.values, p.values);

        assert_abs_diff_eq!(wrap_angle(1.5 * PI), -0.5 * PI, epsilon = 1e-12);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);

        // quantize(0.3 rad, B=1): levels {-pi, 0} -> 0.
        let mut q = PhaseProfile::zero(&ris);
        q.values[(0, 0)] = 0.3;
        let qq = quantize(&q, 1).unwrap();
        assert_eq!(qq.values[(0, 0)], 0.0);
        assert_eq!(qq.quantized_bits, Some(1));

        let other = RisGeometry::new(3, 3, ris.pitch).unwrap();
        assert!(compose(&p, &PhaseProfile::zero(&other)).is_err());
    }

    proptest! {
        #[test]
        fn wrap_lands_in_half_open_interval(phi in -1e3f64..1e3) {
            let w = wrap_angle(phi);
            prop_assert!(w > -PI && w <= PI);
            // Wrapping is idempotent and preserves the angle mod 2 pi.
            prop_assert!((wrap_angle(w) - w).abs() < 1e-12);
            let diff = (phi - w) / (2.0 * PI);
            prop_assert!((diff - diff.round()).abs() < 1e-9);
        }

        #[test]
        fn wrap_absorbs_two_pi_offsets(phi in -40.0f64..40.0, n in -3i32..=3) {
            let shifted = phi + f64::from(n) * 2.0 * PI;
            prop_assert!((wrap_angle(shifted) - wrap_angle(phi)).abs() < 1e-9);
        }

        #[test]
        fn quantize_error_is_bounded(phi in -40.0f64..40.0, bits in 1u8..=10) {
            let m = Medium::from_wavelength(2e-3).unwrap();
            let ris = RisGeometry::half_wave(&m, 1, 1).unwrap();
            let mut p = PhaseProfile::zero(&ris);
            p.values[(0, 0)] = phi;
            let q = quantize(&p, bits).unwrap();
            let v = q.values[(0, 0)];
            let step = 2.0 * PI / f64::from(1u32 << bits);
            // Value sits on a level n * step - pi.
            let n = (v + PI) / step;
            prop_assert!((n - n.round()).abs() < 1e-9);
            // Circular distance to the wrapped input within half a step.
            let d = wrap_angle(v - wrap_angle(phi)).abs();
            prop_assert!(d <= step / 2.0 + 1e-9, "d = {d}, step = {step}");
        }
    }
}
