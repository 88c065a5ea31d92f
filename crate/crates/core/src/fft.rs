//! 2-D FFT helpers: a centred transform with physical scaling and spectral
//! derivatives.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::GridSpec;

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft(n, dir)
}

fn rows_inplace(data: &mut [Complex64], width: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(width).for_each_init(
        || vec![Complex64::default(); fft.get_inplace_scratch_len()],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(src: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); src.len()];
    out.par_chunks_mut(h).enumerate().for_each(|(i, col)| {
        for (j, v) in col.iter_mut().enumerate() {
            *v = src[j * w + i];
        }
    });
    out
}

/// Unnormalized 2-D DFT of row-major `nx` x `ny` data.
pub fn fft2(data: &mut Vec<Complex64>, nx: usize, ny: usize, dir: FftDirection) {
    rows_inplace(data, nx, &plan(nx, dir));
    let mut t = transpose(data, nx, ny);
    rows_inplace(&mut t, ny, &plan(ny, dir));
    *data = transpose(&t, ny, nx);
}

fn half_shift_twiddle(n: usize) -> (Vec<Complex64>, Complex64) {
    let c = n as f64 / 2.0 - 0.5;
    let tw = (0..n).map(|m| Complex64::cis(2.0 * PI * c * m as f64 / n as f64)).collect();
    (tw, Complex64::cis(-2.0 * PI * c * c / n as f64))
}

/// Grid of the centred transform: same sample counts, pitch `pi / half_width`.
pub fn reciprocal_grid(grid: &GridSpec) -> GridSpec {
    let dk = PI / grid.half_width();
    GridSpec::new(grid.nx(), grid.ny(), grid.nx() as f64 * dk / 2.0)
        .expect("reciprocal of a valid grid is valid")
}

/// `psi~(k) = dx dy / 2pi * sum psi(x) exp(-i k.x)` sampled on cell-centred
/// wavevectors `k_m = (m - n/2 + 1/2) * 2pi / (n dx)`.
///
/// With this scaling Parseval holds as `sum |psi~|^2 dk^2 = sum |psi|^2 dx^2`
/// for square grids.
pub fn centered_transform(values: &[Complex64], grid: &GridSpec) -> Vec<Complex64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (twx, gx) = half_shift_twiddle(nx);
    let (twy, gy) = half_shift_twiddle(ny);
    let mut data: Vec<Complex64> = values.to_vec();
    data.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v *= twx[i] * twy[j];
        }
    });
    fft2(&mut data, nx, ny, FftDirection::Forward);
    let scale = gx * gy * (grid.cell_area() / (2.0 * PI));
    data.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v *= twx[i] * twy[j] * scale;
        }
    });
    data
}

fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    (0..n)
        .map(|m| {
            // Nyquist bin has no well-defined sign for an odd derivative.
            if 2 * m == n {
                0.0
            } else if m < n.div_ceil(2) {
                2.0 * PI * m as f64 / (n as f64 * d)
            } else {
                2.0 * PI * (m as f64 - n as f64) / (n as f64 * d)
            }
        })
        .collect()
}

/// Spectral `(d/dx, d/dy)` of a periodic sampled function.
pub fn gradient(values: &[Complex64], grid: &GridSpec) -> (Vec<Complex64>, Vec<Complex64>) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let kx = wavenumbers(nx, grid.dx());
    let ky = wavenumbers(ny, grid.dy());
    let mut spec = values.to_vec();
    fft2(&mut spec, nx, ny, FftDirection::Forward);
    let inv_n = 1.0 / (nx * ny) as f64;
    let mut dx = spec.clone();
    let mut dy = spec;
    dx.par_chunks_mut(nx).zip(dy.par_chunks_mut(nx)).enumerate().for_each(|(j, (rx, ry))| {
        for i in 0..nx {
            rx[i] *= Complex64::new(0.0, kx[i] * inv_n);
            ry[i] *= Complex64::new(0.0, ky[j] * inv_n);
        }
    });
    fft2(&mut dx, nx, ny, FftDirection::Inverse);
    fft2(&mut dy, nx, ny, FftDirection::Inverse);
    (dx, dy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(grid: &GridSpec, x0: f64, y0: f64) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x, y) = (grid.x(i) - x0, grid.y(j) - y0);
                v.push(Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0));
            }
        }
        v
    }

    #[test]
    fn gaussian_transforms_to_gaussian() {
        let g = GridSpec::new(64, 64, 8.0).unwrap();
        let k = reciprocal_grid(&g);
        let f = centered_transform(&gauss(&g, 0.0, 0.0), &g);
        for j in [0, 20, 31, 32, 40] {
            for i in [5, 31, 33, 63] {
                let (kx, ky) = (k.x(i), k.y(j));
                let expect = (-(kx * kx + ky * ky) / 2.0).exp();
                assert!((f[k.index(i, j)] - expect).norm() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn shifted_gaussian_picks_up_linear_phase() {
        let g = GridSpec::new(64, 64, 10.0).unwrap();
        let k = reciprocal_grid(&g);
        let f = centered_transform(&gauss(&g, 1.5, -0.5), &g);
        let (i, j) = (36, 30);
        let (kx, ky) = (k.x(i), k.y(j));
        let expect = Complex64::cis(-(kx * 1.5 - ky * 0.5)) * (-(kx * kx + ky * ky) / 2.0).exp();
        assert!((f[k.index(i, j)] - expect).norm() < 1e-10);
    }

    #[test]
    fn parseval() {
        let g = GridSpec::new(48, 48, 6.0).unwrap();
        let v: Vec<Complex64> = gauss(&g, 0.7, 0.2)
            .iter()
            .enumerate()
            .map(|(n, z)| z * Complex64::cis(0.3 * n as f64))
            .collect();
        let f = centered_transform(&v, &g);
        let k = reciprocal_grid(&g);
        let a: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell_area();
        let b: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>() * k.cell_area();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = GridSpec::new(64, 48, 6.0).unwrap();
        let (dx, dy) = gradient(&gauss(&g, 0.0, 0.0), &g);
        for (i, j) in [(10, 10), (40, 20), (31, 24)] {
            let (x, y) = (g.x(i), g.y(j));
            let e = (-(x * x + y * y) / 2.0).exp();
            assert!((dx[g.index(i, j)] + x * e).norm() < 1e-9);
            assert!((dy[g.index(i, j)] + y * e).norm() < 1e-9);
        }
    }
}
