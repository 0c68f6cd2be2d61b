//! Band-limited angular-spectrum propagation: single plane-to-plane hops and
//! the plane-by-plane march that renders xz intensity maps through obstacles.
//!
//! All propagation here solves the same scalar Rayleigh-Sommerfeld problem as
//! [`crate::field::propagate_direct`]; the spectral path is the fast route,
//! the direct sum is the oracle.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{apply_mask, ComplexFieldSlice, ObstacleMask};

/// Transverse extent of the simulated window. Coordinates are absolute; the
/// window may sit asymmetrically around the axis (curved-beam scenarios).
#[derive(Debug, Clone, Copy)]
pub struct WindowSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_half: f64,
}

impl WindowSpec {
    pub fn symmetric(x_half: f64, y_half: f64) -> Self {
        Self {
            x_lo: -x_half,
            x_hi: x_half,
            y_half,
        }
    }
}

/// Configuration for [`SpectralPropagator::march`].
///
/// `feature_x`/`feature_y` declare the largest transverse feature the run
/// must resolve (beam footprint diameter, obstacle strip width); the window
/// must be at least four times that, and must additionally contain the
/// declared `excursion` of the beam plus the source aperture. Undersized
/// windows are a configuration error, not silent wraparound.
#[derive(Debug, Clone)]
pub struct MarchConfig {
    /// Observation planes, strictly increasing, all beyond the source plane.
    pub z_grid: Vec<f64>,
    pub obstacles: Vec<ObstacleMask>,
    pub window: WindowSpec,
    /// Largest transverse feature along x (see struct docs).
    pub feature_x: f64,
    /// Largest transverse feature along y.
    pub feature_y: f64,
    /// Interval that must stay inside the window: beam path extremes along x.
    pub excursion: (f64, f64),
    /// Record per-plane propagating power (Parseval) alongside the map.
    pub track_power: bool,
}

impl MarchConfig {
    pub fn new(z_grid: Vec<f64>, window: WindowSpec) -> Self {
        Self {
            z_grid,
            obstacles: Vec::new(),
            window,
            feature_x: 0.0,
            feature_y: 0.0,
            excursion: (0.0, 0.0),
            track_power: false,
        }
    }
}

/// |E|^2 sampled on the y = 0 cut of the xz plane: one row per z plane.
#[derive(Debug, Clone)]
pub struct IntensityMap {
    /// Shape (nz, nx).
    pub rows: Array2<f64>,
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
    pub wavelength: f64,
    /// Propagating power per plane when tracking was requested.
    pub plane_power: Option<Vec<f64>>,
}

impl IntensityMap {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn nz(&self) -> usize {
        self.zs.len()
    }

    pub fn dx(&self) -> f64 {
        if self.xs.len() > 1 {
            self.xs[1] - self.xs[0]
        } else {
            0.0
        }
    }

    /// Index of the z sample nearest to `z`.
    pub fn z_index(&self, z: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &zi) in self.zs.iter().enumerate() {
            let d = (zi - z).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn same_grid(&self, other: &IntensityMap) -> bool {
        self.xs.len() == other.xs.len()
            && self.zs.len() == other.zs.len()
            && self
                .xs
                .iter()
                .zip(&other.xs)
                .all(|(a, b)| (a - b).abs() < 1e-12)
            && self
                .zs
                .iter()
                .zip(&other.zs)
                .all(|(a, b)| (a - b).abs() < 1e-12)
    }
}

/// Smallest FFT-friendly length (factors 2, 3, 5 only) >= n.
fn next_fast_len(n: usize) -> usize {
    let mut n = n.max(2);
    loop {
        let mut m = n;
        for f in [2usize, 3, 5] {
            while m % f == 0 {
                m /= f;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Signed spatial frequency of FFT bin `i` (fftfreq convention), times 2 pi.
fn k_of_bin(i: usize, n: usize, spacing: f64) -> f64 {
    let dk = 2.0 * PI / (n as f64 * spacing);
    if i <= n / 2 {
        i as f64 * dk
    } else {
        (i as f64 - n as f64) * dk
    }
}

pub struct SpectralPropagator {
    planner: FftPlanner<f64>,
}

impl Default for SpectralPropagator {
    fn default() -> Self {
        Self::new()
    }
}

impl SpectralPropagator {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
        }
    }

    fn plan(&mut self, len: usize, forward: bool) -> Arc<dyn rustfft::Fft<f64>> {
        if forward {
            self.planner.plan_fft_forward(len)
        } else {
            self.planner.plan_fft_inverse(len)
        }
    }

    /// Unnormalized 2D FFT over both axes.
    fn fft2(&mut self, a: &mut Array2<Complex64>, forward: bool) {
        let (ny, nx) = a.dim();
        let fx = self.plan(nx, forward);
        fx.process(a.as_slice_mut().expect("standard layout"));
        let mut t = a.t().to_owned();
        let fy = self.plan(ny, forward);
        fy.process(t.as_slice_mut().expect("standard layout"));
        *a = t.t().to_owned();
    }

    /// Plane-to-plane hop by `dz >= 0`. The input grid is zero-padded by a
    /// factor of two internally and cropped back, so the output lives on the
    /// same grid at z + dz. Evanescent components are hard-zeroed and the
    /// anti-aliasing band limit for the padded window is applied.
    pub fn propagate(
        &mut self,
        field: &ComplexFieldSlice,
        k: f64,
        dz: f64,
    ) -> Result<ComplexFieldSlice> {
        if dz < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "propagation distance must be >= 0, got {dz}"
            )));
        }
        if dz == 0.0 {
            return Ok(field.clone());
        }
        let (ny, nx) = field.samples.dim();
        let fnx = next_fast_len(2 * nx);
        let fny = next_fast_len(2 * ny);
        let (pl, pb) = ((fnx - nx) / 2, (fny - ny) / 2);
        let mut padded = field.padded(pl, fnx - nx - pl, pb, fny - ny - pb);

        self.fft2(&mut padded.samples, true);
        apply_transfer(&mut padded.samples, k, dz, dz, padded.spacing);
        self.fft2(&mut padded.samples, false);
        let scale = 1.0 / (fnx as f64 * fny as f64);
        padded.samples.mapv_inplace(|v| v * scale);

        let samples = padded
            .samples
            .slice(ndarray::s![pb..pb + ny, pl..pl + nx])
            .to_owned();
        Ok(ComplexFieldSlice {
            samples,
            spacing: field.spacing,
            x0: field.x0,
            y0: field.y0,
            z: field.z + dz,
        })
    }

    /// Step the reflected field plane-by-plane, applying each obstacle at its
    /// plane, and record the y = 0 row of |E|^2 at every z of the grid.
    ///
    /// Internally one spectrum is maintained per obstacle-free segment (the
    /// angular-spectrum transfer functions compose exactly), so accuracy does
    /// not degrade with the number of observation planes. The row at an
    /// obstacle plane is recorded after the mask is applied. Serial and
    /// deterministic.
    pub fn march(
        &mut self,
        source: &ComplexFieldSlice,
        k: f64,
        config: &MarchConfig,
    ) -> Result<IntensityMap> {
        validate_march(source, config)?;
        let dx = source.spacing;
        let win = &config.window;

        // Embed the source in the window, then pad the window by 2x for the
        // spectral steps.
        let left_w = ((source.x0 - win.x_lo) / dx).ceil().max(0.0) as usize;
        let right_w = ((win.x_hi - source.x(source.nx() - 1)) / dx).ceil().max(0.0) as usize;
        let bot_w = ((source.y0 + win.y_half) / dx).ceil().max(0.0) as usize;
        let top_w = ((win.y_half - source.y(source.ny() - 1)) / dx).ceil().max(0.0) as usize;
        let win_nx = source.nx() + left_w + right_w;
        let win_ny = source.ny() + bot_w + top_w;
        let fnx = next_fast_len(2 * win_nx);
        let fny = next_fast_len(2 * win_ny);
        let extra_l = (fnx - win_nx) / 2;
        let extra_b = (fny - win_ny) / 2;
        let mut grid = source.padded(
            left_w + extra_l,
            fnx - win_nx - (left_w + extra_l),
            bot_w + extra_b,
            fny - win_ny - (bot_w + extra_b),
        );
        let win_col0 = extra_l;
        let j0 = grid.y0_row_index();

        // March state: spectrum of the current segment plus caches.
        let wavelength = 2.0 * PI / k;
        let sy = fny as f64 * dx;
        let sx = fnx as f64 * dx;
        let kz = make_kz(fnx, fny, dx, k);
        let mut spectrum = grid.samples.clone();
        self.fft2(&mut spectrum, true);
        let mut z_cur = source.z;
        let mut seg_start = source.z;
        let mut step_cache: Option<(f64, Array2<Complex64>)> = None;
        let y_phases: Vec<Complex64> = (0..fny)
            .map(|ky| Complex64::from_polar(1.0, 2.0 * PI * ky as f64 * j0 as f64 / fny as f64))
            .collect();
        let inv_n = 1.0 / (fnx as f64 * fny as f64);
        let row_ifft = self.plan(fnx, false);

        let mut rows = Array2::zeros((config.z_grid.len(), win_nx));
        let mut powers = Vec::new();
        let mut obstacles = config.obstacles.iter().peekable();

        for (iz, &z) in config.z_grid.iter().enumerate() {
            // Cross any obstacle planes up to (and including) z.
            while let Some(m) = obstacles.peek() {
                if m.z > z {
                    break;
                }
                let m = obstacles.next().unwrap();
                let dz = m.z - z_cur;
                step_spectrum(&mut spectrum, &kz, dz, &mut step_cache);
                band_limit(&mut spectrum, fnx, fny, dx, k, m.z - seg_start, sx, sy);
                let mut field = spectrum.clone();
                self.fft2(&mut field, false);
                field.mapv_inplace(|v| v * inv_n);
                let slice = ComplexFieldSlice {
                    samples: field,
                    spacing: dx,
                    x0: grid.x0,
                    y0: grid.y0,
                    z: m.z,
                };
                let clipped = clip_mask_to_window(m, win);
                let masked = apply_mask(&slice, &clipped)?;
                spectrum = masked.samples;
                self.fft2(&mut spectrum, true);
                z_cur = m.z;
                seg_start = m.z;
                step_cache = None;
            }

            let dz = z - z_cur;
            step_spectrum(&mut spectrum, &kz, dz, &mut step_cache);
            band_limit(&mut spectrum, fnx, fny, dx, k, z - seg_start, sx, sy);
            z_cur = z;

            if config.track_power {
                let p: f64 = spectrum.iter().map(|s| s.norm_sqr()).sum();
                powers.push(p * dx * dx * inv_n);
            }

            // Extract the y ~ 0 spatial row without a full inverse FFT.
            let mut g = vec![Complex64::new(0.0, 0.0); fnx];
            for (ky, row) in spectrum.rows().into_iter().enumerate() {
                let w = y_phases[ky];
                let row = row.to_slice().expect("standard layout");
                for (gi, &s) in g.iter_mut().zip(row) {
                    *gi += s * w;
                }
            }
            row_ifft.process(&mut g);
            for ix in 0..win_nx {
                let v = g[win_col0 + ix] * inv_n;
                rows[(iz, ix)] = v.norm_sqr();
            }
        }

        let xs: Vec<f64> = (0..win_nx)
            .map(|i| grid.x0 + (win_col0 + i) as f64 * dx)
            .collect();
        Ok(IntensityMap {
            rows,
            xs,
            zs: config.z_grid.clone(),
            wavelength,
            plane_power: config.track_power.then_some(powers),
        })
    }

    /// Complex field at a single (x, y, z) point behind any number of
    /// obstacles, via the same segmented spectral stepping as [`march`].
    pub fn field_through_obstacles(
        &mut self,
        source: &ComplexFieldSlice,
        k: f64,
        obstacles: &[ObstacleMask],
        window: WindowSpec,
        point: (f64, f64, f64),
    ) -> Result<Complex64> {
        let (px, py, pz) = point;
        if !(pz > source.z) {
            return Err(Error::InvalidArgument(format!(
                "observation point must lie beyond the source plane, got z = {pz}"
            )));
        }
        let mut field = embed_in_window(source, &window)?;
        let mut z_cur = source.z;
        for m in obstacles {
            if m.z >= pz {
                break;
            }
            if m.z <= z_cur {
                continue;
            }
            field = self.propagate(&field, k, m.z - z_cur)?;
            field = apply_mask(&field, &clip_mask_to_window(m, &window))?;
            z_cur = m.z;
        }
        field = self.propagate(&field, k, pz - z_cur)?;
        bilinear_sample(&field, px, py)
    }
}

fn embed_in_window(source: &ComplexFieldSlice, win: &WindowSpec) -> Result<ComplexFieldSlice> {
    let dx = source.spacing;
    let left = ((source.x0 - win.x_lo) / dx).ceil().max(0.0) as usize;
    let right = ((win.x_hi - source.x(source.nx() - 1)) / dx).ceil().max(0.0) as usize;
    let bot = ((source.y0 + win.y_half) / dx).ceil().max(0.0) as usize;
    let top = ((win.y_half - source.y(source.ny() - 1)) / dx).ceil().max(0.0) as usize;
    Ok(source.padded(left, right, bot, top))
}

fn bilinear_sample(field: &ComplexFieldSlice, x: f64, y: f64) -> Result<Complex64> {
    let fx = (x - field.x0) / field.spacing;
    let fy = (y - field.y0) / field.spacing;
    if fx < 0.0 || fy < 0.0 || fx > (field.nx() - 1) as f64 || fy > (field.ny() - 1) as f64 {
        return Err(Error::MeasurementOutOfWindow(format!(
            "point ({x}, {y}) outside the simulated window"
        )));
    }
    let ix = (fx.floor() as usize).min(field.nx() - 2);
    let iy = (fy.floor() as usize).min(field.ny() - 2);
    let (tx, ty) = (fx - ix as f64, fy - iy as f64);
    let s = &field.samples;
    Ok(s[(iy, ix)] * (1.0 - tx) * (1.0 - ty)
        + s[(iy, ix + 1)] * tx * (1.0 - ty)
        + s[(iy + 1, ix)] * (1.0 - tx) * ty
        + s[(iy + 1, ix + 1)] * tx * ty)
}

fn validate_march(source: &ComplexFieldSlice, config: &MarchConfig) -> Result<()> {
    if config.z_grid.is_empty() {
        return Err(Error::Configuration("empty z grid".into()));
    }
    let mut prev = source.z;
    for &z in &config.z_grid {
        if !(z > prev) {
            return Err(Error::Configuration(format!(
                "z grid must be strictly increasing and beyond the source plane (z = {z})"
            )));
        }
        prev = z;
    }
    let win = &config.window;
    if !(win.x_lo < win.x_hi) || !(win.y_half > 0.0) {
        return Err(Error::Configuration("degenerate window".into()));
    }
    if win.x_lo > source.x0 || win.x_hi < source.x(source.nx() - 1) {
        return Err(Error::Configuration(
            "window must contain the source aperture along x".into(),
        ));
    }
    if -win.y_half > source.y0 || win.y_half < source.y(source.ny() - 1) {
        return Err(Error::Configuration(
            "window must contain the source aperture along y".into(),
        ));
    }
    let width_x = win.x_hi - win.x_lo;
    if width_x < 4.0 * config.feature_x {
        return Err(Error::Configuration(format!(
            "window width {width_x} m violates the sizing rule: >= 4 x largest x feature ({} m)",
            config.feature_x
        )));
    }
    if 2.0 * win.y_half < 4.0 * config.feature_y {
        return Err(Error::Configuration(format!(
            "window height {} m violates the sizing rule: >= 4 x largest y feature ({} m)",
            2.0 * win.y_half,
            config.feature_y
        )));
    }
    let (exc_lo, exc_hi) = config.excursion;
    if exc_lo < win.x_lo || exc_hi > win.x_hi {
        return Err(Error::Configuration(format!(
            "declared beam excursion [{exc_lo}, {exc_hi}] exceeds the window"
        )));
    }
    let (z_first, z_last) = (config.z_grid[0], *config.z_grid.last().unwrap());
    for m in &config.obstacles {
        m.validate()?;
        if !(m.z > z_first && m.z < z_last) {
            return Err(Error::Configuration(format!(
                "obstacle plane z = {} is not bracketed by the z grid [{z_first}, {z_last}]",
                m.z
            )));
        }
        if m
            .x_intervals
            .iter()
            .all(|&(lo, hi)| hi < win.x_lo || lo > win.x_hi)
        {
            return Err(Error::Configuration(format!(
                "obstacle at z = {} lies entirely outside the window",
                m.z
            )));
        }
    }
    let mut prev = 0.0;
    for m in &config.obstacles {
        if m.z < prev {
            return Err(Error::Configuration(
                "obstacles must be sorted by increasing z".into(),
            ));
        }
        prev = m.z;
    }
    Ok(())
}

fn clip_mask_to_window(mask: &ObstacleMask, win: &WindowSpec) -> ObstacleMask {
    let x_intervals = mask
        .x_intervals
        .iter()
        .filter_map(|&(lo, hi)| {
            let lo = lo.max(win.x_lo);
            let hi = hi.min(win.x_hi);
            (lo < hi).then_some((lo, hi))
        })
        .collect();
    ObstacleMask {
        z: mask.z,
        x_intervals,
        y_interval: mask.y_interval,
    }
}

/// kz for every bin; negative marker where evanescent.
fn make_kz(nx: usize, ny: usize, spacing: f64, k: f64) -> Array2<f64> {
    let kxs: Vec<f64> = (0..nx).map(|i| k_of_bin(i, nx, spacing)).collect();
    let kys: Vec<f64> = (0..ny).map(|i| k_of_bin(i, ny, spacing)).collect();
    Array2::from_shape_fn((ny, nx), |(iy, ix)| {
        let t = k * k - kxs[ix] * kxs[ix] - kys[iy] * kys[iy];
        if t > 0.0 {
            t.sqrt()
        } else {
            -1.0
        }
    })
}

/// Multiply the spectrum by exp(j dz kz), zeroing evanescent bins. The
/// per-bin transfer array is cached across equal steps (uniform z grids).
fn step_spectrum(
    spectrum: &mut Array2<Complex64>,
    kz: &Array2<f64>,
    dz: f64,
    cache: &mut Option<(f64, Array2<Complex64>)>,
) {
    if dz == 0.0 {
        // Still zero the evanescent bins for consistency.
        ndarray::Zip::from(spectrum).and(kz).for_each(|s, &kzv| {
            if kzv < 0.0 {
                *s = Complex64::new(0.0, 0.0);
            }
        });
        return;
    }
    let rebuild = match cache {
        Some((cdz, _)) => (*cdz - dz).abs() > 1e-15 * dz.abs().max(1e-300),
        None => true,
    };
    if rebuild {
        let t = kz.mapv(|kzv| {
            if kzv < 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(1.0, dz * kzv)
            }
        });
        *cache = Some((dz, t));
    }
    let (_, t) = cache.as_ref().unwrap();
    *spectrum *= t;
}

/// Apply the full transfer for a single hop (used by `propagate`).
fn apply_transfer(spectrum: &mut Array2<Complex64>, k: f64, dz: f64, total: f64, spacing: f64) {
    let (ny, nx) = spectrum.dim();
    let sx = nx as f64 * spacing;
    let sy = ny as f64 * spacing;
    let lim_x = band_limit_k(k, total, sx);
    let lim_y = band_limit_k(k, total, sy);
    for iy in 0..ny {
        let ky = k_of_bin(iy, ny, spacing);
        for ix in 0..nx {
            let kx = k_of_bin(ix, nx, spacing);
            let t = k * k - kx * kx - ky * ky;
            let s = &mut spectrum[(iy, ix)];
            if t <= 0.0 || kx.abs() > lim_x || ky.abs() > lim_y {
                *s = Complex64::new(0.0, 0.0);
            } else {
                *s *= Complex64::from_polar(1.0, dz * t.sqrt());
            }
        }
    }
}

/// Matsushima-style anti-aliasing bound for window size `s` after a total
/// distance `dist`: spectral content steeper than this wraps around the window.
fn band_limit_k(k: f64, dist: f64, s: f64) -> f64 {
    if dist <= 0.0 {
        return k;
    }
    k / (1.0 + (2.0 * dist / s).powi(2)).sqrt()
}

/// Zero all bins outside the anti-aliasing band for total distance `dist`.
fn band_limit(
    spectrum: &mut Array2<Complex64>,
    nx: usize,
    ny: usize,
    spacing: f64,
    k: f64,
    dist: f64,
    sx: f64,
    sy: f64,
) {
    let lim_x = band_limit_k(k, dist, sx);
    let lim_y = band_limit_k(k, dist, sy);
    let dkx = 2.0 * PI / sx;
    let dky = 2.0 * PI / sy;
    // Highest kept bin index per axis (mirrored for negative frequencies).
    let ix_keep = ((lim_x / dkx).floor() as usize).min(nx / 2);
    let iy_keep = ((lim_y / dky).floor() as usize).min(ny / 2);
    let zero = Complex64::new(0.0, 0.0);
    for iy in 0..ny {
        let iy_abs = iy.min(ny - iy);
        let row = spectrum.row_mut(iy);
        let row = row.into_slice().expect("standard layout");
        if iy_abs > iy_keep {
            row.fill(zero);
            continue;
        }
        for (ix, v) in row.iter_mut().enumerate() {
            let ix_abs = ix.min(nx - ix);
            if ix_abs > ix_keep {
                *v = zero;
            }
        }
    }
}
