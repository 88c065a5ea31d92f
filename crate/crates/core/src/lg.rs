//! Laguerre-Gauss modes, mode decomposition and orbital angular momentum.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::field::{ScalarField, Spin, SpinDirection, SpinorField};
use crate::grid::GridSpec;
use crate::reduce::{add_vecs, reduce_rows, sum_rows};

pub const MAX_RADIAL_ORDER: usize = 64;
pub const MAX_ABS_ELL: i32 = 64;

/// `L_n^alpha(t)` by upward recurrence.
pub fn laguerre(n: usize, alpha: f64, t: f64) -> f64 {
    let mut out = vec![0.0; n + 1];
    laguerre_all(alpha, t, &mut out);
    out[n]
}

/// Fills `out[k] = L_k^alpha(t)` for `k < out.len()`.
pub fn laguerre_all(alpha: f64, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 1.0 + alpha - t;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 + alpha - t) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Log of the continuum normalisation `sqrt(n! / (pi (n+a)!))`.
fn ln_norm(n: usize, a: usize) -> f64 {
    0.5 * (ln_factorial(n) - ln_factorial(n + a) - PI.ln())
}

fn check_indices(n: usize, ell: i32) -> Result<()> {
    if n > MAX_RADIAL_ORDER {
        return invalid(format!("radial index {n} exceeds {MAX_RADIAL_ORDER}"));
    }
    if ell.abs() > MAX_ABS_ELL {
        return invalid(format!("|ell| = {} exceeds {MAX_ABS_ELL}", ell.abs()));
    }
    Ok(())
}

/// Radial envelope `N xi^a e^{-xi^2/2} L_n^a(xi^2)`.
pub fn lg_radial(n: usize, a: usize, xi: f64) -> f64 {
    let env = if xi > 0.0 {
        (a as f64 * xi.ln() - xi * xi / 2.0 + ln_norm(n, a)).exp()
    } else if a == 0 {
        ln_norm(n, 0).exp()
    } else {
        0.0
    };
    env * laguerre(n, a as f64, xi * xi)
}

/// Mode `(n, ell)` centred on the origin, renormalized to unit grid norm.
pub fn lg_mode(grid: &GridSpec, n: usize, ell: i32) -> Result<ScalarField> {
    lg_mode_about(grid, n, ell, (0.0, 0.0))
}

pub fn lg_mode_about(grid: &GridSpec, n: usize, ell: i32, center: (f64, f64)) -> Result<ScalarField> {
    check_indices(n, ell)?;
    let a = ell.unsigned_abs() as usize;
    ScalarField::from_fn(*grid, |x, y| {
        let (dx, dy) = (x - center.0, y - center.1);
        let xi = dx.hypot(dy);
        Complex64::cis(ell as f64 * dy.atan2(dx)) * lg_radial(n, a, xi)
    })
    .normalized()
}

/// Mode label, ordered by `n`, then `ell`, then spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ModeIndex {
    pub n: usize,
    pub ell: i32,
    pub spin: Spin,
}

impl ModeIndex {
    pub fn new(n: usize, ell: i32, spin: Spin) -> Self {
        ModeIndex { n, ell, spin }
    }
}

/// Projections `<LG(n, ell) (x) spin | psi>` over a rectangular index window.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    grid: GridSpec,
    center: (f64, f64),
    n_max: usize,
    ell_range: (i32, i32),
    coefficients: BTreeMap<ModeIndex, Complex64>,
    total: f64,
}

impl ModeDecomposition {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn ell_range(&self) -> (i32, i32) {
        self.ell_range
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn coefficient(&self, n: usize, ell: i32, spin: Spin) -> Option<Complex64> {
        self.coefficients.get(&ModeIndex::new(n, ell, spin)).copied()
    }

    pub fn probability(&self, n: usize, ell: i32, spin: Spin) -> Option<f64> {
        self.coefficient(n, ell, spin).map(|c| c.norm_sqr())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.coefficients.iter().map(|(k, v)| (*k, *v))
    }

    /// Probability carried by the modes in the window.
    pub fn captured(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm_sqr()).sum()
    }

    /// Norm of the input minus the captured probability.
    pub fn residual(&self) -> f64 {
        self.total - self.captured()
    }

    pub fn input_norm_sqr(&self) -> f64 {
        self.total
    }

    /// Captured probability summed over the modes selected by `keep`.
    pub fn probability_where(&self, keep: impl Fn(&ModeIndex) -> bool) -> f64 {
        self.coefficients.iter().filter(|(k, _)| keep(k)).map(|(_, c)| c.norm_sqr()).sum()
    }

    /// Largest single-mode probability among the modes selected by `keep`.
    pub fn max_probability_where(&self, keep: impl Fn(&ModeIndex) -> bool) -> f64 {
        self.coefficients
            .iter()
            .filter(|(k, _)| keep(k))
            .map(|(_, c)| c.norm_sqr())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,ell,spin,re,im,prob")?;
        for (k, c) in &self.coefficients {
            writeln!(w, "{},{},{},{:.17e},{:.17e},{:.17e}", k.n, k.ell, k.spin, c.re, c.im, c.norm_sqr())?;
        }
        writeln!(w, "captured,{:.17e}", self.captured())?;
        writeln!(w, "residual,{:.17e}", self.residual())?;
        Ok(())
    }
}

pub fn decompose(field: &SpinorField, n_max: usize, ell_range: (i32, i32)) -> Result<ModeDecomposition> {
    decompose_about(field, n_max, ell_range, (0.0, 0.0))
}

/// Decomposition in modes centred on `center`.
///
/// One Laguerre recurrence per pixel and `|ell|` serves every radial order and
/// both signs of `ell`; each mode is renormalized on the grid so the result
/// agrees with `inner_product` against `lg_mode_about`.
pub fn decompose_about(
    field: &SpinorField,
    n_max: usize,
    ell_range: (i32, i32),
    center: (f64, f64),
) -> Result<ModeDecomposition> {
    let (ell_min, ell_max) = ell_range;
    if ell_min > ell_max {
        return invalid(format!("empty ell range [{ell_min}, {ell_max}]"));
    }
    check_indices(n_max, ell_min)?;
    check_indices(n_max, ell_max)?;
    if !(center.0.is_finite() && center.1.is_finite()) {
        return invalid("non-finite decomposition centre");
    }
    let grid = *field.grid();
    let nn = n_max + 1;
    let n_ell = (ell_max - ell_min + 1) as usize;

    let mut abs_vals: Vec<usize> = (ell_min..=ell_max).map(|l| l.unsigned_abs() as usize).collect();
    abs_vals.sort_unstable();
    abs_vals.dedup();
    let n_abs = abs_vals.len();
    // (a, ln N(0, a), ratios N(n, a) / N(0, a), ells with this |ell|)
    let plans: Vec<(usize, f64, Vec<f64>, Vec<i32>)> = abs_vals
        .iter()
        .map(|&a| {
            let l0 = ln_norm(0, a);
            let ratios = (0..nn).map(|n| (ln_norm(n, a) - l0).exp()).collect();
            let ells = [a as i32, -(a as i32)]
                .into_iter()
                .filter(|l| (ell_min..=ell_max).contains(l))
                .fold(Vec::new(), |mut v, l| {
                    if !v.contains(&l) {
                        v.push(l);
                    }
                    v
                });
            (a, l0, ratios, ells)
        })
        .collect();

    let slot = |ell: i32, n: usize, s: usize| (((ell - ell_min) as usize * nn + n) << 1) | s;
    let n_coef = n_ell * nn * 2;
    let nx = grid.nx();
    let (up, down) = (field.up(), field.down());

    let (coef, norms) = reduce_rows(
        grid.ny(),
        |j| {
            let mut coef = vec![Complex64::default(); n_coef];
            let mut norms = vec![0.0; n_abs * nn];
            let mut lag = vec![0.0; nn];
            let y = grid.y(j) - center.1;
            for i in 0..nx {
                let x = grid.x(i) - center.0;
                let t = x * x + y * y;
                let xi = t.sqrt();
                let phi = y.atan2(x);
                let k = j * nx + i;
                let (u, d) = (up[k], down[k]);
                for (p, (a, l0, ratios, ells)) in plans.iter().enumerate() {
                    let base = if xi > 0.0 {
                        (*a as f64 * xi.ln() - t / 2.0 + l0).exp()
                    } else if *a == 0 {
                        l0.exp()
                    } else {
                        0.0
                    };
                    if base == 0.0 {
                        continue;
                    }
                    laguerre_all(*a as f64, t, &mut lag);
                    let phases: Vec<(i32, Complex64)> =
                        ells.iter().map(|&l| (l, Complex64::cis(-(l as f64) * phi))).collect();
                    for n in 0..nn {
                        let r = base * ratios[n] * lag[n];
                        norms[p * nn + n] += r * r;
                        for &(l, e) in &phases {
                            let w = e * r;
                            coef[slot(l, n, 0)] += w * u;
                            coef[slot(l, n, 1)] += w * d;
                        }
                    }
                }
            }
            (coef, norms)
        },
        |(ca, na), (cb, nb)| (add_vecs(ca, cb), add_vecs(na, nb)),
    )
    .expect("grid has rows");

    let da = grid.cell_area();
    let mut coefficients = BTreeMap::new();
    for (p, (_, _, _, ells)) in plans.iter().enumerate() {
        for n in 0..nn {
            let norm = (norms[p * nn + n] * da).sqrt();
            for &l in ells {
                for (s, spin) in [(0, Spin::Up), (1, Spin::Down)] {
                    let c = if norm > 0.0 { coef[slot(l, n, s)] * (da / norm) } else { Complex64::default() };
                    coefficients.insert(ModeIndex::new(n, l, spin), c);
                }
            }
        }
    }
    Ok(ModeDecomposition {
        grid,
        center,
        n_max,
        ell_range,
        coefficients,
        total: field.norm_sqr(),
    })
}

/// Rebuilds the field carried by the decomposed modes.
pub fn synthesize(decomp: &ModeDecomposition, grid: &GridSpec) -> Result<SpinorField> {
    let mut up = vec![Complex64::default(); grid.len()];
    let mut down = vec![Complex64::default(); grid.len()];
    for (k, c) in decomp.iter() {
        if c == Complex64::default() {
            continue;
        }
        let m = lg_mode_about(grid, k.n, k.ell, decomp.center)?;
        let target = match k.spin {
            Spin::Up => &mut up,
            Spin::Down => &mut down,
        };
        for (t, v) in target.iter_mut().zip(m.values()) {
            *t += c * v;
        }
    }
    SpinorField::from_components(*grid, up, down)
}

fn component_lz(values: &[Complex64], grid: &GridSpec, axis: (f64, f64)) -> f64 {
    let (dpx, dpy) = fft::gradient(values, grid);
    let nx = grid.nx();
    sum_rows(grid.ny(), |j| {
        let y = grid.y(j) - axis.1;
        let mut s = 0.0;
        for i in 0..nx {
            let k = j * nx + i;
            let x = grid.x(i) - axis.0;
            // L = -i (x d/dy - y d/dx)
            let l = (dpy[k] * x - dpx[k] * y) * Complex64::new(0.0, -1.0);
            s += (values[k].conj() * l).re;
        }
        s
    }) * grid.cell_area()
}

/// `<psi| L_z |psi>` about `axis` without normalisation.
pub fn angular_momentum_about(field: &SpinorField, axis: (f64, f64)) -> f64 {
    let g = field.grid();
    component_lz(field.up(), g, axis) + component_lz(field.down(), g, axis)
}

/// `<L_z>` about the origin for a normalized field.
pub fn oam_expectation(field: &SpinorField) -> Result<f64> {
    field.ensure_normalized()?;
    Ok(angular_momentum_about(field, (0.0, 0.0)))
}

/// `<L_z>` of one spin component, normalized by that component's weight.
pub fn component_oam(field: &SpinorField, spin: Spin) -> Result<f64> {
    component_oam_about(field, spin, (0.0, 0.0))
}

pub fn component_oam_about(field: &SpinorField, spin: Spin, axis: (f64, f64)) -> Result<f64> {
    let w = field.component_norm_sqr(spin);
    if !(w > 0.0) {
        return Err(Error::InvalidParameter(format!("{spin} component is empty")));
    }
    Ok(component_lz(field.component(spin), field.grid(), axis) / w)
}

/// `<L_z>` of the part of the field projected on `direction`, per unit weight.
pub fn projected_oam(field: &SpinorField, direction: SpinDirection) -> Result<f64> {
    let s = direction.spinor();
    let (a, b) = (s.up().conj(), s.down().conj());
    let p: Vec<Complex64> = field.up().iter().zip(field.down()).map(|(u, d)| a * u + b * d).collect();
    let sf = ScalarField::new(*field.grid(), p)?;
    let w = sf.norm_sqr();
    if !(w > 0.0) {
        return invalid("projection is empty");
    }
    Ok(component_lz(sf.values(), field.grid(), (0.0, 0.0)) / w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gaussian_wavepacket, inner_product};

    #[test]
    fn laguerre_closed_forms() {
        for &t in &[0.0, 0.3, 1.7, 5.0] {
            for &a in &[0.0, 1.0, 2.5] {
                let l2 = ((a + 1.0) * (a + 2.0) / 2.0) - (a + 2.0) * t + t * t / 2.0;
                assert!((laguerre(2, a, t) - l2).abs() < 1e-12);
            }
        }
        // L_n(0) = binom(n + a, n)
        assert!((laguerre(5, 3.0, 0.0) - 56.0).abs() < 1e-12);
    }

    #[test]
    fn modes_are_orthonormal() {
        let g = GridSpec::new(192, 192, 9.0).unwrap();
        let modes: Vec<_> = [(0, 0), (1, 0), (0, 1), (2, -1), (1, 3)]
            .iter()
            .map(|&(n, l)| lg_mode(&g, n, l).unwrap())
            .collect();
        for (p, a) in modes.iter().enumerate() {
            for (q, b) in modes.iter().enumerate() {
                let ip = a.inner(b).unwrap();
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!((ip - expect).norm() < 1e-10, "{p} {q} {ip}");
            }
        }
    }

    #[test]
    fn decompose_matches_direct_projection() {
        let g = GridSpec::new(96, 96, 7.0).unwrap();
        let psi = gaussian_wavepacket(&g, (0.8, 0.4), SpinDirection::new(0.2, 0.5, 0.3).unwrap()).unwrap();
        let d = decompose_about(&psi, 3, (-2, 2), (0.1, -0.2)).unwrap();
        for (n, l) in [(0, 0), (2, -2), (3, 1), (1, 2)] {
            let m = lg_mode_about(&g, n, l, (0.1, -0.2)).unwrap();
            for spin in [Spin::Up, Spin::Down] {
                let basis = match spin {
                    Spin::Up => SpinorField::from_scalar(&m, SpinDirection::plus_z()),
                    Spin::Down => SpinorField::from_scalar(&m, SpinDirection::minus_z()),
                };
                let direct = inner_product(&basis, &psi).unwrap();
                let c = d.coefficient(n, l, spin).unwrap();
                assert!((c - direct).norm() < 1e-13, "{n} {l} {spin}: {c} vs {direct}");
            }
        }
    }

    #[test]
    fn synthesize_inverts_decompose_for_mode_content() {
        let g = GridSpec::new(96, 96, 7.0).unwrap();
        let m1 = lg_mode(&g, 1, -1).unwrap();
        let m2 = lg_mode(&g, 0, 2).unwrap();
        let up: Vec<Complex64> = m1.values().iter().map(|v| v * 0.6).collect();
        let down: Vec<Complex64> = m2.values().iter().map(|v| v * Complex64::new(0.0, 0.8)).collect();
        let psi = SpinorField::from_components(g, up, down).unwrap();
        let d = decompose(&psi, 2, (-2, 2)).unwrap();
        assert!((d.captured() - 1.0).abs() < 1e-10);
        let back = synthesize(&d, &g).unwrap();
        assert!(back.max_abs_diff(&psi).unwrap() < 1e-9);
    }

    #[test]
    fn oam_of_modes() {
        let g = GridSpec::new(128, 128, 8.0).unwrap();
        for ell in [-2, 0, 1, 3] {
            let m = lg_mode(&g, 1, ell).unwrap();
            let psi = SpinorField::from_scalar(&m, SpinDirection::plus_x());
            assert!((oam_expectation(&psi).unwrap() - ell as f64).abs() < 1e-8);
        }
        let g2 = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_z()).unwrap();
        let half = g2.map_pointwise(|_, _, u, d| (u * 0.5, d));
        assert!(matches!(oam_expectation(&half), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn rejects_out_of_range_indices() {
        let g = GridSpec::new(32, 32, 4.0).unwrap();
        assert!(lg_mode(&g, MAX_RADIAL_ORDER + 1, 0).is_err());
        assert!(lg_mode(&g, 0, MAX_ABS_ELL + 1).is_err());
        let psi = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_z()).unwrap();
        assert!(decompose(&psi, 2, (3, -3)).is_err());
    }
}
