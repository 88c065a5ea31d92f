//! Radon projections of momentum maps and filtered back-projection.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::analysis::{momentum_map, Domain, ScalarMap2D};
use crate::error::{invalid, Result};
use crate::field::{SpinDirection, SpinorField};
use crate::grid::GridSpec;

pub const MIN_ANGLES: usize = 8;
pub const DEFAULT_ANGLES: usize = 36;

/// Keys cubic convolution kernel, `a = -1/2`.
fn keys(t: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        (1.5 * t - 2.5) * t * t + 1.0
    } else if t < 2.0 {
        ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
    } else {
        0.0
    }
}

fn sample_keys(map: &ScalarMap2D, fi: f64, fj: f64) -> f64 {
    let g = map.grid();
    let (nx, ny) = (g.nx() as isize, g.ny() as isize);
    let (i0, j0) = (fi.floor() as isize, fj.floor() as isize);
    if i0 < -2 || j0 < -2 || i0 > nx || j0 > ny {
        return 0.0;
    }
    let v = map.values();
    let mut acc = 0.0;
    for dj in -1..=2 {
        let j = j0 + dj;
        if j < 0 || j >= ny {
            continue;
        }
        let wy = keys(fj - j as f64);
        let mut row = 0.0;
        for di in -1..=2 {
            let i = i0 + di;
            if i < 0 || i >= nx {
                continue;
            }
            row += keys(fi - i as f64) * v[(j * nx + i) as usize];
        }
        acc += wy * row;
    }
    acc
}

/// Number of projection samples: covers the map diagonal, even.
pub fn projection_len(n: usize) -> usize {
    ((n as f64 * std::f64::consts::SQRT_2 / 2.0).ceil() as usize) * 2
}

/// Cell-centred projection axis of `nt` samples at pitch `dk`.
pub fn projection_axis(nt: usize, dk: f64) -> Vec<f64> {
    (0..nt).map(|i| (i as f64 - nt as f64 / 2.0 + 0.5) * dk).collect()
}

/// Line integrals `p(t) = int P(t e_w + u e_w_perp) du` for a square map.
///
/// The map is resampled on a rotated `(t, u)` lattice of the same pitch with
/// Keys cubic convolution; the curve is then scaled to the exact map mass.
pub fn project_map(map: &ScalarMap2D, omega: f64) -> Result<Vec<f64>> {
    let g = map.grid();
    if !g.is_square() {
        return invalid("projections need a square map");
    }
    if !omega.is_finite() {
        return invalid("non-finite projection angle");
    }
    let dk = g.dx();
    let nt = projection_len(g.nx());
    let axis = projection_axis(nt, dk);
    let (s, c) = omega.sin_cos();
    let mut p: Vec<f64> = axis
        .par_iter()
        .map(|&t| {
            axis.iter()
                .map(|&u| {
                    let (fi, fj) = g.to_index_space(t * c - u * s, t * s + u * c);
                    sample_keys(map, fi, fj)
                })
                .sum::<f64>()
                * dk
        })
        .collect();
    let mass = map.integral();
    let got: f64 = p.iter().sum::<f64>() * dk;
    if got != 0.0 && mass != 0.0 {
        let k = mass / got;
        p.iter_mut().for_each(|v| *v *= k);
    }
    Ok(p)
}

/// Projection of the momentum distribution post-selected on `s`.
pub fn project_momentum(psi: &SpinorField, s: SpinDirection, omega: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let map = momentum_map(psi, s)?;
    let p = project_map(&map, omega)?;
    Ok((projection_axis(p.len(), map.grid().dx()), p))
}

/// Projections at uniformly spaced angles `i pi / n` in `[0, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    angles: Vec<f64>,
    k_axis: Vec<f64>,
    /// Row-major `n_angles x n_k`.
    projections: Vec<f64>,
    pub spin: Option<SpinDirection>,
    pub pipeline_id: String,
}

impl Sinogram {
    pub fn new(angles: Vec<f64>, k_axis: Vec<f64>, projections: Vec<f64>) -> Result<Self> {
        if angles.is_empty() || k_axis.len() < 2 || projections.len() != angles.len() * k_axis.len() {
            return invalid("sinogram dimensions do not match");
        }
        if angles.windows(2).any(|w| !(w[1] > w[0])) || angles[0] < 0.0 || *angles.last().unwrap() >= PI {
            return invalid("angles must increase strictly within [0, pi)");
        }
        Ok(Sinogram { angles, k_axis, projections, spin: None, pipeline_id: String::new() })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn k_axis(&self) -> &[f64] {
        &self.k_axis
    }

    pub fn dk(&self) -> f64 {
        self.k_axis[1] - self.k_axis[0]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        let n = self.k_axis.len();
        &self.projections[a * n..(a + 1) * n]
    }

    pub fn projections(&self) -> &[f64] {
        &self.projections
    }

    /// Riemann integral of each row.
    pub fn row_masses(&self) -> Vec<f64> {
        (0..self.angles.len()).map(|a| self.row(a).iter().sum::<f64>() * self.dk()).collect()
    }

    /// Header `omega_deg,<k values>`, then one row per angle.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "omega_deg")?;
        for k in &self.k_axis {
            write!(w, ",{k:.9}")?;
        }
        writeln!(w)?;
        for (a, om) in self.angles.iter().enumerate() {
            write!(w, "{:.6}", om.to_degrees())?;
            for v in self.row(a) {
                write!(w, ",{v:.12e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * PI / n as f64).collect()
}

pub fn sinogram_from_map(map: &ScalarMap2D, n_angles: usize) -> Result<Sinogram> {
    if n_angles < MIN_ANGLES {
        return invalid(format!("need at least {MIN_ANGLES} angles, got {n_angles}"));
    }
    let angles = uniform_angles(n_angles);
    let mut projections = Vec::new();
    for &w in &angles {
        projections.extend(project_map(map, w)?);
    }
    let nt = projection_len(map.grid().nx());
    Sinogram::new(angles, projection_axis(nt, map.grid().dx()), projections)
}

pub fn make_sinogram(psi: &SpinorField, s: SpinDirection, n_angles: usize) -> Result<Sinogram> {
    let mut sg = sinogram_from_map(&momentum_map(psi, s)?, n_angles)?;
    sg.spin = Some(s);
    Ok(sg)
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Unclamped back-projection.
    pub raw: ScalarMap2D,
    /// `raw` with negative values set to zero.
    pub display: ScalarMap2D,
}

/// Spatial Ram-Lak kernel (Kak & Slaney) times a Hann window that vanishes at
/// Nyquist, as a real frequency response of length `npad`.
fn ramp_hann(npad: usize, tau: f64) -> Vec<f64> {
    let mut h = vec![Complex64::default(); npad];
    h[0] = Complex64::new(1.0 / (4.0 * tau * tau), 0.0);
    for k in (1..=npad / 2).step_by(2) {
        let v = -1.0 / (PI * PI * (k * k) as f64 * tau * tau);
        h[k] = Complex64::new(v, 0.0);
        h[npad - k] = Complex64::new(v, 0.0);
    }
    FftPlanner::new().plan_fft_forward(npad).process(&mut h);
    (0..npad)
        .map(|m| {
            let nu = if m <= npad / 2 { m as f64 } else { m as f64 - npad as f64 } / npad as f64;
            h[m].re * tau * 0.5 * (1.0 + (2.0 * PI * nu).cos())
        })
        .collect()
}

/// Filtered back-projection onto an `out_size`^2 grid at the sinogram pitch.
pub fn reconstruct_fbp(sg: &Sinogram, out_size: usize) -> Result<Reconstruction> {
    let na = sg.angles.len();
    if na < MIN_ANGLES {
        return invalid(format!("need at least {MIN_ANGLES} angles, got {na}"));
    }
    let step = PI / na as f64;
    if sg.angles.iter().enumerate().any(|(i, a)| (a - i as f64 * step).abs() > 1e-9) {
        return invalid("angles must be uniformly spaced as i pi / n");
    }
    if out_size < 2 {
        return invalid("output must be at least 2x2");
    }
    let nt = sg.k_axis.len();
    let dk = sg.dk();
    let npad = (2 * nt).next_power_of_two();
    let filt = ramp_hann(npad, dk);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(npad);
    let inv = planner.plan_fft_inverse(npad);
    let filtered: Vec<Vec<f64>> = (0..na)
        .into_par_iter()
        .map(|a| {
            let mut buf: Vec<Complex64> = sg.row(a).iter().map(|&v| Complex64::new(v, 0.0)).collect();
            buf.resize(npad, Complex64::default());
            fwd.process(&mut buf);
            buf.iter_mut().zip(&filt).for_each(|(b, f)| *b *= f);
            inv.process(&mut buf);
            buf[..nt].iter().map(|z| z.re / npad as f64).collect()
        })
        .collect();

    let grid = GridSpec::new(out_size, out_size, out_size as f64 * dk / 2.0)?;
    let trig: Vec<(f64, f64)> = sg.angles.iter().map(|a| a.sin_cos()).collect();
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(out_size).enumerate().for_each(|(j, row)| {
        let y = grid.y(j);
        for (i, v) in row.iter_mut().enumerate() {
            let x = grid.x(i);
            let mut acc = 0.0;
            for (q, &(s, c)) in filtered.iter().zip(&trig) {
                let pos = (x * c + y * s) / dk + nt as f64 / 2.0 - 0.5;
                let i0 = pos.floor();
                let fr = pos - i0;
                let i0 = i0 as isize;
                let at = |k: isize| if k >= 0 && (k as usize) < nt { q[k as usize] } else { 0.0 };
                acc += (1.0 - fr) * at(i0) + fr * at(i0 + 1);
            }
            *v = acc * PI / na as f64;
        }
    });
    let raw = ScalarMap2D::new(grid, Domain::Momentum, values)?;
    let display = raw.clamped();
    Ok(Reconstruction { raw, display })
}

/// `||a - reference|| / ||reference||` over samples on identical grids.
pub fn nrmse(a: &ScalarMap2D, reference: &ScalarMap2D) -> Result<f64> {
    a.grid().ensure_same(reference.grid())?;
    let den: f64 = reference.values().iter().map(|v| v * v).sum::<f64>();
    if den == 0.0 {
        return invalid("reference map is zero");
    }
    let num: f64 = a.values().iter().zip(reference.values()).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((num / den).sqrt())
}
