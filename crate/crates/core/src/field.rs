//! Sampled complex scalar fields, absorbing obstacles, the RIS reflection
//! operator and the direct Rayleigh-Sommerfeld summation used as the
//! engine's exactness oracle.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::PhaseProfile;

/// Complex scalar field sampled on a transverse plane z = const, square
/// sample spacing, y = 0 plane experiments read row [`ComplexFieldSlice::y0_row_index`].
#[derive(Debug, Clone)]
pub struct ComplexFieldSlice {
    /// Shape (ny, nx).
    pub samples: Array2<Complex64>,
    pub spacing: f64,
    /// Coordinate of column 0.
    pub x0: f64,
    /// Coordinate of row 0.
    pub y0: f64,
    /// Plane location along the propagation axis.
    pub z: f64,
}

impl ComplexFieldSlice {
    pub fn new(samples: Array2<Complex64>, spacing: f64, x0: f64, y0: f64, z: f64) -> Result<Self> {
        let (ny, nx) = samples.dim();
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!(
                "field needs >= 2 samples per axis, got {ny} x {nx}"
            )));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self {
            samples,
            spacing,
            x0,
            y0,
            z,
        })
    }

    /// Grid centered on the origin, the same centering convention as the RIS
    /// element grid.
    pub fn from_fn_centered(
        nx: usize,
        ny: usize,
        spacing: f64,
        z: f64,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Self {
        let x0 = -(nx as f64 - 1.0) / 2.0 * spacing;
        let y0 = -(ny as f64 - 1.0) / 2.0 * spacing;
        let samples = Array2::from_shape_fn((ny, nx), |(iy, ix)| {
            f(x0 + ix as f64 * spacing, y0 + iy as f64 * spacing)
        });
        Self {
            samples,
            spacing,
            x0,
            y0,
            z,
        }
    }

    pub fn nx(&self) -> usize {
        self.samples.dim().1
    }

    pub fn ny(&self) -> usize {
        self.samples.dim().0
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + ix as f64 * self.spacing
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y0 + iy as f64 * self.spacing
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx()).map(|i| self.x(i)).collect()
    }

    /// Row whose y-coordinate is closest to 0 (ties resolve to the lower row).
    pub fn y0_row_index(&self) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for iy in 0..self.ny() {
            let d = self.y(iy).abs();
            if d < best_d {
                best_d = d;
                best = iy;
            }
        }
        best
    }

    /// Total sampled power sum |E|^2 * spacing^2.
    pub fn power(&self) -> f64 {
        let d2 = self.spacing * self.spacing;
        self.samples.iter().map(|e| e.norm_sqr()).sum::<f64>() * d2
    }

    /// Zero-pad to a larger grid, keeping sample coordinates aligned.
    /// `left`/`bottom` count padding columns/rows before the existing data.
    pub fn padded(&self, left: usize, right: usize, bottom: usize, top: usize) -> Self {
        let (ny, nx) = self.samples.dim();
        let mut samples = Array2::zeros((ny + bottom + top, nx + left + right));
        samples
            .slice_mut(ndarray::s![bottom..bottom + ny, left..left + nx])
            .assign(&self.samples);
        Self {
            samples,
            spacing: self.spacing,
            x0: self.x0 - left as f64 * self.spacing,
            y0: self.y0 - bottom as f64 * self.spacing,
            z: self.z,
        }
    }
}

/// Absorbing screen at plane `z`: field samples inside the opaque x-intervals
/// (optionally restricted in y) are set to zero, all others pass unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleMask {
    pub z: f64,
    /// Closed intervals [lo, hi] of opaque x.
    pub x_intervals: Vec<(f64, f64)>,
    /// Optional closed y-interval; `None` blocks all y inside the x-intervals.
    pub y_interval: Option<(f64, f64)>,
}

impl ObstacleMask {
    pub fn strip(z: f64, x_lo: f64, x_hi: f64) -> Self {
        Self {
            z,
            x_intervals: vec![(x_lo, x_hi)],
            y_interval: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_intervals.is_empty() {
            return Ok(()); // empty mask is the identity
        }
        for &(lo, hi) in &self.x_intervals {
            if !(lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "opaque interval must be non-empty, got [{lo}, {hi}]"
                )));
            }
        }
        if let Some((lo, hi)) = self.y_interval {
            if !(lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "opaque y-interval must be non-empty, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn blocks(&self, x: f64, y: f64) -> bool {
        let in_y = self.y_interval.is_none_or(|(lo, hi)| y >= lo && y <= hi);
        in_y && self.x_intervals.iter().any(|&(lo, hi)| x >= lo && x <= hi)
    }

    /// Largest |x| the mask reaches, for window-sizing checks.
    pub fn max_extent(&self) -> f64 {
        self.x_intervals
            .iter()
            .flat_map(|&(lo, hi)| [lo.abs(), hi.abs()])
            .fold(0.0, f64::max)
    }
}

/// RIS transformation E_r = E_i exp(j phi), elementwise.
pub fn reflect(incident: &ComplexFieldSlice, profile: &PhaseProfile) -> Result<ComplexFieldSlice> {
    if incident.samples.dim() != profile.values.dim() {
        return Err(Error::ShapeMismatch {
            expected: incident.samples.dim(),
            got: profile.values.dim(),
        });
    }
    let mut out = incident.clone();
    ndarray::Zip::from(&mut out.samples)
        .and(&profile.values)
        .for_each(|e, &phi| *e *= Complex64::from_polar(1.0, phi));
    Ok(out)
}

/// Zero the samples covered by the mask. The mask plane must coincide with
/// the field plane.
pub fn apply_mask(field: &ComplexFieldSlice, mask: &ObstacleMask) -> Result<ComplexFieldSlice> {
    let tol = 1e-9 * field.z.abs().max(1.0);
    if (field.z - mask.z).abs() > tol {
        return Err(Error::InvalidArgument(format!(
            "mask plane z = {} does not match field plane z = {}",
            mask.z, field.z
        )));
    }
    mask.validate()?;
    let mut out = field.clone();
    for iy in 0..out.ny() {
        let y = out.y(iy);
        for ix in 0..out.nx() {
            if mask.blocks(out.x(ix), y) {
                out.samples[(iy, ix)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}

/// Direct Rayleigh-Sommerfeld (type I) summation from a source plane to
/// arbitrary points with z greater than the source plane:
///
///   E(p) = sum E(q) d^2 (dz/rho) (1 - j/(k rho)) exp(j k rho) / rho
///
/// The constant -j/lambda prefactor of the exact integral is absorbed into
/// the field units; multiply by it when comparing against the spectral
/// propagator. Elements are summed in fixed row-major order so results are
/// bitwise reproducible.
pub fn propagate_direct(
    source: &ComplexFieldSlice,
    k: f64,
    targets: &[(f64, f64, f64)],
) -> Result<Vec<Complex64>> {
    for &(_, _, z) in targets {
        if !(z > source.z) {
            return Err(Error::InvalidArgument(format!(
                "target z = {z} must lie beyond the source plane z = {}",
                source.z
            )));
        }
    }
    let d2 = source.spacing * source.spacing;
    let (ny, nx) = source.samples.dim();
    let mut out = Vec::with_capacity(targets.len());
    for &(tx, ty, tz) in targets {
        let dz = tz - source.z;
        let mut acc = Complex64::new(0.0, 0.0);
        for iy in 0..ny {
            let dy = ty - source.y(iy);
            for ix in 0..nx {
                let e = source.samples[(iy, ix)];
                if e.re == 0.0 && e.im == 0.0 {
                    continue;
                }
                let dx = tx - source.x(ix);
                let rho = (dx * dx + dy * dy + dz * dz).sqrt();
                let kernel = Complex64::from_polar(d2 * dz / (rho * rho), k * rho)
                    * Complex64::new(1.0, -1.0 / (k * rho));
                acc += e * kernel;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Units factor relating [`propagate_direct`] to the physical Rayleigh-
/// Sommerfeld field (and therefore to the spectral propagator):
/// E_physical = rs_prefactor(lambda) * E_direct.
pub fn rs_prefactor(wavelength: f64) -> Complex64 {
    Complex64::new(0.0, -1.0 / wavelength)
}
