//! Spinor and scalar fields on a grid.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::grid::GridSpec;
use crate::reduce::{reduce_rows, sum_rows};

/// Tolerance on `|norm^2 - 1|` for operations that require normalized input.
pub const NORM_TOL: f64 = 1e-8;

/// Distance from the packet centre to the window edge below which a
/// truncation warning is attached.
pub const CONTAINMENT_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "up",
            Spin::Down => "down",
        })
    }
}

/// Unit vector on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDirection {
    axis: [f64; 3],
}

impl SpinDirection {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return invalid(format!("spin direction ({x}, {y}, {z}) has no length"));
        }
        Ok(SpinDirection { axis: [x / n, y / n, z / n] })
    }

    /// Polar angle from +z and azimuth from +x.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return invalid("non-finite spin angles");
        }
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::new(st * cp, st * sp, ct)
    }

    pub const fn plus_z() -> Self {
        SpinDirection { axis: [0.0, 0.0, 1.0] }
    }
    pub const fn minus_z() -> Self {
        SpinDirection { axis: [0.0, 0.0, -1.0] }
    }
    pub const fn plus_x() -> Self {
        SpinDirection { axis: [1.0, 0.0, 0.0] }
    }
    pub const fn minus_x() -> Self {
        SpinDirection { axis: [-1.0, 0.0, 0.0] }
    }
    pub const fn plus_y() -> Self {
        SpinDirection { axis: [0.0, 1.0, 0.0] }
    }
    pub const fn minus_y() -> Self {
        SpinDirection { axis: [0.0, -1.0, 0.0] }
    }

    pub fn from_preset(name: &str) -> Option<Self> {
        Some(match name.trim() {
            "+z" | "z" | "up" => Self::plus_z(),
            "-z" | "down" => Self::minus_z(),
            "+x" | "x" => Self::plus_x(),
            "-x" => Self::minus_x(),
            "+y" | "y" => Self::plus_y(),
            "-y" => Self::minus_y(),
            _ => return None,
        })
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn opposite(&self) -> Self {
        let [x, y, z] = self.axis;
        SpinDirection { axis: [-x, -y, -z] }
    }

    /// `(cos(theta/2), e^{i phi} sin(theta/2))`, exact at both poles.
    pub fn spinor(&self) -> Spinor {
        let [x, y, z] = self.axis;
        let c = ((1.0 + z) / 2.0).max(0.0).sqrt();
        let s = ((1.0 - z) / 2.0).max(0.0).sqrt();
        let rho = x.hypot(y);
        let phase = if rho > 0.0 { Complex64::new(x / rho, y / rho) } else { Complex64::new(1.0, 0.0) };
        Spinor([Complex64::new(c, 0.0), phase * s])
    }
}

impl Serialize for SpinDirection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.axis.serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawDirection {
    Preset(String),
    Vector([f64; 3]),
    Angles {
        #[serde(deserialize_with = "crate::angle::deserialize")]
        theta: f64,
        #[serde(deserialize_with = "crate::angle::deserialize")]
        phi: f64,
    },
}

impl<'de> Deserialize<'de> for SpinDirection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RawDirection::deserialize(d).map_err(|_| {
            de::Error::custom("spin must be one of \"+z\",\"-z\",\"+x\",\"-x\",\"+y\",\"-y\", [x, y, z] or {theta, phi}")
        })? {
            RawDirection::Preset(p) => SpinDirection::from_preset(&p)
                .ok_or_else(|| de::Error::custom(format!("unknown spin preset {p:?}"))),
            RawDirection::Vector([x, y, z]) => SpinDirection::new(x, y, z).map_err(de::Error::custom),
            RawDirection::Angles { theta, phi } => {
                SpinDirection::from_angles(theta, phi).map_err(de::Error::custom)
            }
        }
    }
}

/// Normalized two-component spin state in the z basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor(pub(crate) [Complex64; 2]);

impl Spinor {
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let n = up.norm_sqr() + down.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return invalid(format!("spinor norm^2 is {n}, expected 1"));
        }
        Ok(Spinor([up, down]))
    }

    pub fn up(&self) -> Complex64 {
        self.0[0]
    }

    pub fn down(&self) -> Complex64 {
        self.0[1]
    }
}

impl From<SpinDirection> for Spinor {
    fn from(d: SpinDirection) -> Self {
        d.spinor()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Packet centre is closer than six widths to the window edge.
    PacketTruncated { margin: f64 },
    /// A phase plate with non-integer charge leaves a phase cut.
    NonIntegerCharge { q: f64 },
    /// Noticeable probability in the outer frame; periodic transforms will wrap.
    PoorlyContained { edge_fraction: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Warning::PacketTruncated { margin } => {
                write!(f, "packet centre only {margin:.3} widths from the window edge")
            }
            Warning::NonIntegerCharge { q } => write!(f, "non-integer topological charge {q}"),
            Warning::PoorlyContained { edge_fraction } => {
                write!(f, "{edge_fraction:.3e} of the probability sits on the window edge")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("{} values for a {}-sample grid", values.len(), grid.len()));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let mut values = vec![Complex64::default(); grid.len()];
        values.par_chunks_mut(grid.nx()).enumerate().for_each(|(j, row)| {
            let y = grid.y(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(grid.x(i), y);
            }
        });
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        let nx = self.grid.nx();
        sum_rows(self.grid.ny(), |j| self.values[j * nx..(j + 1) * nx].iter().map(|z| z.norm_sqr()).sum())
            * self.grid.cell_area()
    }

    pub fn inner(&self, other: &ScalarField) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(dot(&self.grid, &[(&self.values, &other.values)]))
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return invalid("cannot normalize a field with zero norm");
        }
        let s = 1.0 / n.sqrt();
        self.values.par_iter_mut().for_each(|v| *v *= s);
        Ok(self)
    }
}

fn dot(grid: &GridSpec, pairs: &[(&[Complex64], &[Complex64])]) -> Complex64 {
    let nx = grid.nx();
    reduce_rows(
        grid.ny(),
        |j| {
            let mut acc = Complex64::default();
            for (a, b) in pairs {
                for k in j * nx..(j + 1) * nx {
                    acc += a[k].conj() * b[k];
                }
            }
            acc
        },
        |a, b| a + b,
    )
    .unwrap_or_default()
        * grid.cell_area()
}

/// Two-component field: `up` and `down` amplitudes in the z basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: GridSpec,
    up: Vec<Complex64>,
    down: Vec<Complex64>,
    warnings: Vec<Warning>,
}

impl SpinorField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpinorField {
            grid,
            up: vec![Complex64::default(); grid.len()],
            down: vec![Complex64::default(); grid.len()],
            warnings: Vec::new(),
        }
    }

    pub fn from_components(grid: GridSpec, up: Vec<Complex64>, down: Vec<Complex64>) -> Result<Self> {
        if up.len() != grid.len() || down.len() != grid.len() {
            return invalid(format!(
                "component lengths {} and {} do not match a {}-sample grid",
                up.len(),
                down.len(),
                grid.len()
            ));
        }
        Ok(SpinorField { grid, up, down, warnings: Vec::new() })
    }

    /// `scalar (x) spinor`.
    pub fn from_scalar(scalar: &ScalarField, spinor: impl Into<Spinor>) -> Self {
        let s = spinor.into();
        let up = scalar.values.iter().map(|v| v * s.up()).collect();
        let down = scalar.values.iter().map(|v| v * s.down()).collect();
        SpinorField { grid: scalar.grid, up, down, warnings: Vec::new() }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn up(&self) -> &[Complex64] {
        &self.up
    }

    pub fn down(&self) -> &[Complex64] {
        &self.down
    }

    pub fn component(&self, spin: Spin) -> &[Complex64] {
        match spin {
            Spin::Up => &self.up,
            Spin::Down => &self.down,
        }
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn push_warning(&mut self, w: Warning) {
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    /// Fails on the first NaN or infinite amplitude.
    pub fn validate(&self) -> Result<()> {
        let bad = self
            .up
            .par_iter()
            .zip(self.down.par_iter())
            .position_first(|(u, d)| !(u.is_finite() && d.is_finite()));
        match bad {
            Some(k) => Err(Error::NonFinite(k)),
            None => Ok(()),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        let nx = self.grid.nx();
        sum_rows(self.grid.ny(), |j| {
            let r = j * nx..(j + 1) * nx;
            self.up[r.clone()].iter().zip(&self.down[r]).map(|(u, d)| u.norm_sqr() + d.norm_sqr()).sum()
        }) * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn component_norm_sqr(&self, spin: Spin) -> f64 {
        let c = self.component(spin);
        let nx = self.grid.nx();
        sum_rows(self.grid.ny(), |j| c[j * nx..(j + 1) * nx].iter().map(|z| z.norm_sqr()).sum())
            * self.grid.cell_area()
    }

    pub fn normalize(&self) -> Result<SpinorField> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return invalid("cannot normalize a field with zero norm");
        }
        let s = 1.0 / n.sqrt();
        let mut out = self.clone();
        out.up.par_iter_mut().for_each(|v| *v *= s);
        out.down.par_iter_mut().for_each(|v| *v *= s);
        Ok(out)
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL || !n.is_finite() {
            Err(Error::NotNormalized(n))
        } else {
            Ok(())
        }
    }

    /// Applies `f(x, y, up, down)` at every sample.
    pub fn map_pointwise<F>(&self, f: F) -> SpinorField
    where
        F: Fn(f64, f64, Complex64, Complex64) -> (Complex64, Complex64) + Sync,
    {
        let g = self.grid;
        let nx = g.nx();
        let mut up = vec![Complex64::default(); g.len()];
        let mut down = vec![Complex64::default(); g.len()];
        up.par_chunks_mut(nx).zip(down.par_chunks_mut(nx)).enumerate().for_each(|(j, (ru, rd))| {
            let y = g.y(j);
            for i in 0..nx {
                let k = j * nx + i;
                let (u, d) = f(g.x(i), y, self.up[k], self.down[k]);
                ru[i] = u;
                rd[i] = d;
            }
        });
        SpinorField { grid: g, up, down, warnings: self.warnings.clone() }
    }

    pub fn max_abs_diff(&self, other: &SpinorField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .up
            .par_iter()
            .zip(&other.up)
            .chain(self.down.par_iter().zip(&other.down))
            .map(|(a, b)| (a - b).norm())
            .reduce(|| 0.0, f64::max))
    }

    /// Share of probability in the outer two-sample frame of the window.
    pub fn edge_fraction(&self) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let total: f64 = self.norm_sqr() / self.grid.cell_area();
        if total <= 0.0 {
            return 0.0;
        }
        let edge = sum_rows(ny, |j| {
            let mut s = 0.0;
            for i in 0..nx {
                if i < 2 || i + 2 >= nx || j < 2 || j + 2 >= ny {
                    let k = j * nx + i;
                    s += self.up[k].norm_sqr() + self.down[k].norm_sqr();
                }
            }
            s
        });
        edge / total
    }
}

pub fn inner_product(a: &SpinorField, b: &SpinorField) -> Result<Complex64> {
    a.grid.ensure_same(&b.grid)?;
    Ok(dot(&a.grid, &[(&a.up, &b.up), (&a.down, &b.down)]))
}

/// Unit-width Gaussian at polar position `(xi0, phi0)` carrying `spin`,
/// normalized on the grid.
pub fn gaussian_wavepacket(grid: &GridSpec, center: (f64, f64), spin: impl Into<Spinor>) -> Result<SpinorField> {
    let (xi0, phi0) = center;
    if !(xi0.is_finite() && phi0.is_finite()) || xi0 < 0.0 {
        return invalid(format!("packet centre ({xi0}, {phi0}) is not a valid polar point"));
    }
    let (x0, y0) = (xi0 * phi0.cos(), xi0 * phi0.sin());
    let g = ScalarField::from_fn(*grid, |x, y| {
        let r2 = (x - x0).powi(2) + (y - y0).powi(2);
        Complex64::new((-r2 / 2.0).exp() / PI.sqrt(), 0.0)
    })
    .normalized()?;
    let mut psi = SpinorField::from_scalar(&g, spin);
    let margin = grid.half_width() - x0.abs().max(y0.abs());
    if margin < CONTAINMENT_SIGMAS {
        psi.push_warning(Warning::PacketTruncated { margin });
    }
    Ok(psi)
}
