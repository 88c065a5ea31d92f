//! Observables derived from a field: post-selected intensity and momentum
//! maps, spin textures, radial overlap curves and OAM diagnostics.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fft;
use crate::field::{SpinDirection, SpinorField, Warning};
use crate::grid::GridSpec;
use crate::reduce::sum_rows;

mod oam;
mod overlap;
mod symmetry;

pub use oam::{
    displaced_mode_probabilities, extrinsic_oam, gaussian_falloff_fit, write_displaced_csv, DisplacedModes,
    GaussianFit,
};
pub use overlap::{radial_overlap, RadialCurve};
pub use symmetry::{
    angular_harmonics, azimuthal_profile, estimate_rotation, rotational_symmetry_order, ANGULAR_SAMPLES,
};

/// Edge probability share above which transforms get a containment warning.
pub const EDGE_WARN_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Coordinates in units of sigma.
    Position,
    /// Wavevectors in units of 1/sigma.
    Momentum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap2D {
    grid: GridSpec,
    domain: Domain,
    values: Vec<f64>,
    warnings: Vec<Warning>,
}

impl ScalarMap2D {
    pub fn new(grid: GridSpec, domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("{} values for a {}-sample grid", values.len(), grid.len()));
        }
        Ok(ScalarMap2D { grid, domain, values, warnings: Vec::new() })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Riemann sum over the map.
    pub fn integral(&self) -> f64 {
        let nx = self.grid.nx();
        sum_rows(self.grid.ny(), |j| self.values[j * nx..(j + 1) * nx].iter().sum()) * self.grid.cell_area()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Bilinear interpolation at a physical point; zero outside the sampled area.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let (fi, fj) = self.grid.to_index_space(x, y);
        let (nx, ny) = (self.grid.nx() as isize, self.grid.ny() as isize);
        let (i0, j0) = (fi.floor() as isize, fj.floor() as isize);
        let (tx, ty) = (fi - i0 as f64, fj - j0 as f64);
        let at = |i: isize, j: isize| {
            if i < 0 || j < 0 || i >= nx || j >= ny {
                0.0
            } else {
                self.values[(j * nx + i) as usize]
            }
        };
        (1.0 - ty) * ((1.0 - tx) * at(i0, j0) + tx * at(i0 + 1, j0)) + ty * ((1.0 - tx) * at(i0, j0 + 1) + tx * at(i0 + 1, j0 + 1))
    }

    /// Central `size` x `size` window on the same sample positions.
    pub fn center_crop(&self, size: usize) -> Result<ScalarMap2D> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        if !self.grid.is_square() || size > nx || size < 2 || !(nx - size).is_multiple_of(2) {
            return invalid(format!("cannot crop {nx}x{ny} to {size}x{size} on the same samples"));
        }
        let off = (nx - size) / 2;
        let grid = GridSpec::new(size, size, size as f64 * self.grid.dx() / 2.0)?;
        let mut values = Vec::with_capacity(size * size);
        for j in 0..size {
            let row = (j + off) * nx + off;
            values.extend_from_slice(&self.values[row..row + size]);
        }
        Ok(ScalarMap2D { grid, domain: self.domain, values, warnings: self.warnings.clone() })
    }

    /// Negative values replaced by zero.
    pub fn clamped(&self) -> ScalarMap2D {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.max(0.0));
        out
    }
}

fn projection(psi: &SpinorField, s: SpinDirection) -> Vec<Complex64> {
    let sp = s.spinor();
    let (a, b) = (sp.up().conj(), sp.down().conj());
    psi.up().par_iter().zip(psi.down()).map(|(u, d)| a * u + b * d).collect()
}

/// `|<s|psi(x, y)>|^2`.
pub fn intensity_map(psi: &SpinorField, s: SpinDirection) -> ScalarMap2D {
    let values = projection(psi, s).iter().map(|p| p.norm_sqr()).collect();
    ScalarMap2D { grid: *psi.grid(), domain: Domain::Position, values, warnings: psi.warnings().to_vec() }
}

/// `arg <s|psi(x, y)>` in (-pi, pi].
pub fn phase_map(psi: &SpinorField, s: SpinDirection) -> ScalarMap2D {
    let values = projection(psi, s).iter().map(|p| p.arg()).collect();
    ScalarMap2D { grid: *psi.grid(), domain: Domain::Position, values, warnings: psi.warnings().to_vec() }
}

/// `|F{<s|psi>}(k)|^2` on the cell-centred reciprocal grid of pitch
/// `pi / half_width`. Integrates to the post-selection probability.
pub fn momentum_map(psi: &SpinorField, s: SpinDirection) -> Result<ScalarMap2D> {
    let grid = psi.grid();
    if !grid.is_square() {
        return invalid("momentum maps need a square grid");
    }
    let spec = fft::centered_transform(&projection(psi, s), grid);
    let mut map = ScalarMap2D {
        grid: fft::reciprocal_grid(grid),
        domain: Domain::Momentum,
        values: spec.iter().map(|z| z.norm_sqr()).collect(),
        warnings: psi.warnings().to_vec(),
    };
    let edge = psi.edge_fraction();
    if edge > EDGE_WARN_FRACTION {
        map.warnings.push(Warning::PoorlyContained { edge_fraction: edge });
    }
    Ok(map)
}

/// Per-pixel polarization vectors; `None` where the density is negligible.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMap2D {
    grid: GridSpec,
    values: Vec<Option<[f64; 3]>>,
}

impl VectorMap2D {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Option<[f64; 3]>] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<[f64; 3]> {
        self.values[self.grid.index(i, j)]
    }

    /// `x,y,Px,Py,Pz` for every `decimate`-th sample in both directions.
    pub fn write_csv<W: Write>(&self, mut w: W, decimate: usize) -> std::io::Result<()> {
        let step = decimate.max(1);
        writeln!(w, "x,y,Px,Py,Pz")?;
        for j in (0..self.grid.ny()).step_by(step) {
            for i in (0..self.grid.nx()).step_by(step) {
                if let Some([px, py, pz]) = self.get(i, j) {
                    writeln!(w, "{:.6},{:.6},{:.9},{:.9},{:.9}", self.grid.x(i), self.grid.y(j), px, py, pz)?;
                }
            }
        }
        Ok(())
    }
}

/// Relative density below which texture pixels are masked.
pub const TEXTURE_MASK: f64 = 1e-12;

pub fn spin_texture(psi: &SpinorField) -> VectorMap2D {
    let dens: Vec<f64> = psi.up().iter().zip(psi.down()).map(|(u, d)| u.norm_sqr() + d.norm_sqr()).collect();
    let floor = dens.iter().copied().fold(0.0, f64::max) * TEXTURE_MASK;
    let values = psi
        .up()
        .par_iter()
        .zip(psi.down())
        .zip(&dens)
        .map(|((u, d), &n)| {
            if n <= floor || n == 0.0 {
                return None;
            }
            let c = u.conj() * d;
            Some([2.0 * c.re / n, 2.0 * c.im / n, (u.norm_sqr() - d.norm_sqr()) / n])
        })
        .collect();
    VectorMap2D { grid: *psi.grid(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::gaussian_wavepacket;
    use crate::operators::{apply_magnetic_spp, apply_quadrupole};
    use std::f64::consts::PI;

    #[test]
    fn intensity_and_momentum_share_survival() {
        let g = GridSpec::new(128, 128, 8.0).unwrap();
        let psi = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_x()).unwrap();
        let psi = apply_magnetic_spp(&psi, 2.0, 0.4).unwrap();
        let s = SpinDirection::new(0.3, 0.9, -0.2).unwrap();
        let a = intensity_map(&psi, s).integral();
        let b = momentum_map(&psi, s).unwrap().integral();
        assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn gaussian_momentum_map_peaks_at_origin() {
        let g = GridSpec::new(64, 64, 8.0).unwrap();
        let psi = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_z()).unwrap();
        let m = momentum_map(&psi, SpinDirection::plus_z()).unwrap();
        let k = m.grid();
        for (i, j) in [(32, 32), (30, 35), (40, 20)] {
            let (kx, ky) = (k.x(i), k.y(j));
            assert!((m.get(i, j) - (-(kx * kx + ky * ky)).exp() / PI).abs() < 1e-12);
        }
        assert!(m.warnings().is_empty());
        assert!(intensity_map(&psi, SpinDirection::minus_z()).max() == 0.0);
    }

    #[test]
    fn texture_is_unit_and_flips_on_ring() {
        let g = GridSpec::new(128, 128, 8.0).unwrap();
        let psi = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_z()).unwrap();
        let out = apply_quadrupole(&psi, 1.82, 0.0).unwrap();
        let t = spin_texture(&out);
        for p in t.values().iter().flatten() {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-9);
        }
        // Pz = cos(pi rho / rho_c)
        let (i, j) = (100, 64);
        let rho = g.x(i).hypot(g.y(j));
        assert!((t.get(i, j).unwrap()[2] - (PI * rho / 1.82).cos()).abs() < 1e-12);
        let flat = spin_texture(&gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_x()).unwrap());
        let p = flat.get(70, 50).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14 && p[1].abs() < 1e-14 && p[2].abs() < 1e-14);
    }

    #[test]
    fn crop_keeps_sample_positions() {
        let g = GridSpec::new(48, 48, 4.0).unwrap();
        let m = ScalarMap2D::new(g, Domain::Position, (0..48 * 48).map(|v| v as f64).collect()).unwrap();
        let c = m.center_crop(32).unwrap();
        assert_eq!(c.grid().x(0), g.x(8));
        assert_eq!(c.get(0, 0), m.get(8, 8));
        assert!(m.center_crop(31).is_err());
    }
}
