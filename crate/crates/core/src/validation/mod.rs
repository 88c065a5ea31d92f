//! Acceptance criteria, runnable from tests and from the command line.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::analysis::{
    displaced_mode_probabilities, estimate_rotation, extrinsic_oam, gaussian_falloff_fit, intensity_map,
    momentum_map, radial_overlap, rotational_symmetry_order, RadialCurve,
};
use crate::error::Result;
use crate::field::{gaussian_wavepacket, Spin, SpinDirection, SpinorField};
use crate::grid::GridSpec;
use crate::lg::{decompose, oam_expectation};
use crate::operators::*;
use crate::tomography::{make_sinogram, nrmse, project_map, reconstruct_fbp};

pub mod oracle;

/// Quadrupole radius used by the figure-level criteria.
pub const RHO_C: f64 = 1.82;

/// Grid scale for a suite run. Every criterion derives its grids from `n`.
#[derive(Debug, Clone, Copy)]
pub struct Suite {
    pub n: usize,
}

impl Suite {
    pub fn full() -> Self {
        Suite { n: 512 }
    }

    pub fn reduced() -> Self {
        Suite { n: 256 }
    }

    fn base(&self) -> GridSpec {
        GridSpec::new(self.n, self.n, 8.0).expect("valid grid")
    }

    fn displaced(&self) -> GridSpec {
        GridSpec::new(3 * self.n / 2, 3 * self.n / 2, 12.0).expect("valid grid")
    }

    fn tomography(&self) -> (GridSpec, usize) {
        (GridSpec::new(self.n, self.n, 16.0).expect("valid grid"), self.n / 4)
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Check {
    fn le(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound: format!("<= {bound:e}"), passed: value <= bound }
    }

    fn ge(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound: format!(">= {bound}"), passed: value >= bound }
    }

    fn holds(name: impl Into<String>, passed: bool) -> Self {
        Check { name: name.into(), value: if passed { 1.0 } else { 0.0 }, bound: "true".into(), passed }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
    pub error: Option<String>,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn details(&self) -> String {
        let mut s = String::new();
        if let Some(e) = &self.error {
            s.push_str(&format!("    error: {e}\n"));
        }
        for c in &self.checks {
            s.push_str(&format!(
                "    [{}] {}: {:.6e} ({})\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.value,
                c.bound
            ));
        }
        s
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {} ({:.1} s)",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.seconds
        )
    }
}

type Runner = fn(&Suite) -> Result<Vec<Check>>;

const CRITERIA: [(&str, Runner); 12] = [
    ("unitarity of non-projecting operators", c01_unitarity),
    ("phase plate shifts OAM by q", c02_spp_oam),
    ("quadrupole power identity", c03_quadrupole_power),
    ("radial overlap curves: quadrupole and BB1", c04_overlap_curves),
    ("LOV Trotter convergence", c05_trotter),
    ("mode coefficient against quadrature", c06_mode_oracle),
    ("displaced packet mode probabilities", c07_displaced),
    ("extrinsic OAM about the plate axis", c08_extrinsic),
    ("rotational symmetry and pattern rotation", c09_symmetry),
    ("momentum tomography round trip", c10_tomography),
    ("higher-order quadrupole sequence", c11_higher_order),
    ("physical parameter converters", c12_converters),
];

/// `(id, title)` of every criterion.
pub fn criteria() -> Vec<(usize, &'static str)> {
    CRITERIA.iter().enumerate().map(|(i, (t, _))| (i + 1, *t)).collect()
}

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize, suite: &Suite) -> CriterionReport {
    let (title, run) = CRITERIA[id - 1];
    let start = Instant::now();
    let (checks, error) = match run(suite) {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    CriterionReport { id, title, checks, seconds: start.elapsed().as_secs_f64(), error }
}

fn gaussian(g: &GridSpec, spin: SpinDirection) -> Result<SpinorField> {
    gaussian_wavepacket(g, (0.0, 0.0), spin)
}

/// Spin-orbit target: magnetic plate `q = -1`, `beta = pi/2` on a +x packet.
fn mspp_target(g: &GridSpec) -> Result<SpinorField> {
    apply_magnetic_spp(&gaussian(g, SpinDirection::plus_x())?, -1.0, PI / 2.0)
}

fn curve_on(curve: &RadialCurve, lo: f64, hi: f64) -> Vec<(usize, f64, f64)> {
    curve
        .mean_radius
        .iter()
        .zip(&curve.values)
        .enumerate()
        .filter_map(|(b, (r, v))| Some((b, (*r)?, (*v)?)))
        .filter(|(_, r, _)| *r >= lo && *r <= hi)
        .collect()
}

fn c01_unitarity(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let spin = SpinDirection::from_angles(rng.gen_range(0.0..PI), rng.gen_range(-PI..PI))?;
        let psi = gaussian_wavepacket(&g, (rng.gen_range(0.0..1.5), rng.gen_range(-PI..PI)), spin)?;
        let rho_c = rng.gen_range(0.5..4.0);
        let angle = rng.gen_range(-PI..PI);
        let step = match case % 7 {
            0 => OperatorStep::Spp { q: rng.gen_range(-4..=4) as f64, alpha0: angle },
            1 => OperatorStep::MagneticSpp { q: rng.gen_range(-4..=4) as f64, beta: angle },
            2 => OperatorStep::Quadrupole { rho_c, delta: angle },
            3 => OperatorStep::Bb1 { rho_c },
            4 => OperatorStep::LinearGradient { phi_g: angle, phi_m: rng.gen_range(-PI..PI), rho_c },
            5 => OperatorStep::Lov {
                n: rng.gen_range(1..=8),
                signs: LovSigns {
                    gradient: if rng.gen_bool(0.5) { 1 } else { -1 },
                    field: if rng.gen_bool(0.5) { 1 } else { -1 },
                },
                rho_c,
            },
            _ => OperatorStep::SpinRotation {
                axis: SpinDirection::from_angles(rng.gen_range(0.0..PI), rng.gen_range(-PI..PI))?,
                angle: rng.gen_range(-2.0 * PI..2.0 * PI),
            },
        };
        let (out, _) = step.apply(&psi)?;
        worst = worst.max((out.norm() - psi.norm()).abs());
    }
    Ok(vec![Check::le("max |norm change| over 100 cases", worst, 1e-12)])
}

fn c02_spp_oam(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let psi = gaussian(&g, SpinDirection::plus_z())?;
    let mut checks = Vec::new();
    for q in -3..=3 {
        let out = apply_spp(&psi, q as f64, 0.0)?;
        checks.push(Check::le(format!("q={q}: |<Lz> - q|"), (oam_expectation(&out)? - q as f64).abs(), 1e-6));
        let d = decompose(&out, 20, (-8, 8))?;
        checks.push(Check::le(format!("q={q}: max |c|^2 off ell=q"), d.max_probability_where(|k| k.ell != q), 1e-8));
    }
    Ok(checks)
}

fn c03_quadrupole_power(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let psi = gaussian(&g, SpinDirection::new(0.6, -0.3, 0.74)?)?;
    let mut checks = Vec::new();
    for n in [2usize, 3, 4, 8] {
        let mut rep = psi.clone();
        for _ in 0..n {
            rep = apply_quadrupole(&rep, RHO_C, 0.0)?;
        }
        let direct = apply_quadrupole(&psi, RHO_C / n as f64, 0.0)?;
        checks.push(Check::le(format!("N={n}: max pointwise error"), rep.max_abs_diff(&direct)?, 1e-12));
    }
    Ok(checks)
}

fn width_at(curve: &RadialCurve, level: f64) -> f64 {
    curve.values.iter().flatten().filter(|v| **v >= level).count() as f64 * curve.bin_width
}

fn c04_overlap_curves(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let nbins = 16 * g.half_width() as usize;
    let target = mspp_target(&g)?;
    let up = gaussian(&g, SpinDirection::plus_z())?;
    let fq = radial_overlap(&target, &apply_quadrupole(&up, RHO_C, 0.0)?, nbins)?;
    let fb = radial_overlap(&target, &apply_bb1(&up, RHO_C)?, nbins)?;
    let dev = curve_on(&fq, 0.0, 3.0)
        .iter()
        .map(|(_, r, v)| (v - (PI * r / (2.0 * RHO_C) + PI / 4.0).sin().abs()).abs())
        .fold(0.0, f64::max);
    let margin = curve_on(&fq, 0.25 * RHO_C, 0.9 * RHO_C)
        .iter()
        .map(|&(b, _, v)| fb.values[b].unwrap_or(f64::NEG_INFINITY) - v)
        .fold(f64::INFINITY, f64::min);
    let (wq, wb) = (width_at(&fq, 0.99), width_at(&fb, 0.99));
    Ok(vec![
        Check::le("quadrupole vs closed form, max deviation on [0, 3]", dev, 5e-3),
        Check::ge("min(BB1 - quadrupole) on [0.25, 0.9] rho_c", margin, 0.0),
        Check::ge("width{f >= 0.99} BB1 / quadrupole", if wq > 0.0 { wb / wq } else { f64::INFINITY }, 2.0),
    ])
}

fn cell_error(a: &SpinorField, b: &SpinorField, half: f64) -> f64 {
    let g = a.grid();
    let mut s = 0.0;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            if g.x(i).abs() <= half && g.y(j).abs() <= half {
                let k = g.index(i, j);
                s += (a.up()[k] - b.up()[k]).norm_sqr() + (a.down()[k] - b.down()[k]).norm_sqr();
            }
        }
    }
    (s * g.cell_area()).sqrt()
}

fn c05_trotter(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let up = gaussian(&g, SpinDirection::plus_z())?;
    let q = apply_quadrupole(&up, RHO_C, 0.0)?;
    let mut errs = Vec::new();
    let mut checks = Vec::new();
    for n in [1u32, 2, 4] {
        let e = cell_error(&apply_lov(&up, n, LovSigns::default(), RHO_C)?, &q, RHO_C);
        checks.push(Check::ge(format!("N={n}: central-cell L2 error (reported)"), e, 0.0));
        errs.push(e);
    }
    checks.push(Check::holds("error strictly decreasing N=1,2,4", errs[1] < errs[0] && errs[2] < errs[1]));
    let nbins = 16 * g.half_width() as usize;
    let target = mspp_target(&g)?;
    let f1 = radial_overlap(&target, &apply_lov(&up, 1, LovSigns::default(), RHO_C)?, nbins)?;
    let f2 = radial_overlap(&target, &apply_lov(&up, 2, LovSigns::default(), RHO_C)?, nbins)?;
    let margin = curve_on(&f1, 0.2 * RHO_C, 0.8 * RHO_C)
        .iter()
        .map(|&(b, _, v)| f2.values[b].unwrap_or(f64::NEG_INFINITY) - v)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::ge("min(N=2 - N=1 overlap) on [0.2, 0.8] rho_c", margin, 0.0));
    Ok(checks)
}

fn c06_mode_oracle(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let psi = apply_spp(&gaussian(&g, SpinDirection::plus_z())?, 1.0, 0.0)?;
    let d = decompose(&psi, 20, (1, 1))?;
    let p01 = d.probability(0, 1, Spin::Up).unwrap_or(0.0);
    let oracle = oracle::spp_coefficient(0).powi(2);
    Ok(vec![
        Check::le("| |c(0,1)|^2 - pi/4 |", (p01 - PI / 4.0).abs(), 1e-3),
        Check::le("| |c(0,1)|^2 - quadrature |", (p01 - oracle).abs(), 1e-3),
        Check::ge("quadrature captured mass n <= 20 (reported)", oracle::spp_captured(20), 0.0),
        Check::ge("captured mass n <= 20, ell = 1", d.captured(), 0.999),
    ])
}

fn c07_displaced(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.displaced();
    let rho0s: Vec<f64> = (0..=12).map(|k| k as f64 * 0.5).collect();
    let rows = displaced_mode_probabilities(&g, 1, &rho0s)?;
    let p01: Vec<f64> = rows.iter().map(|r| r.p[0][1]).collect();
    let last = rows.last().expect("non-empty");
    let fit = gaussian_falloff_fit(&rho0s, &rows.iter().map(|r| r.intrinsic_oam).collect::<Vec<_>>())?;
    Ok(vec![
        Check::le("|P(0,1)(0) - pi/4|", (p01[0] - PI / 4.0).abs(), 1e-3),
        Check::holds("P(0,1) strictly decreasing", p01.windows(2).all(|w| w[1] < w[0])),
        Check::le("P(0,1) at rho0 = 6", last.p[0][1], 0.02),
        Check::ge("P(0,0) at rho0 = 6", last.p[0][0], 0.9),
        Check::ge("intrinsic OAM Gaussian fit R^2", fit.r_squared, 0.99),
    ])
}

fn c08_extrinsic(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let psi = apply_spp(&gaussian_wavepacket(&g, (4.0, 0.0), SpinDirection::plus_z())?, 1.0, 0.0)?;
    Ok(vec![Check::le("|<Lz> about plate axis - 1|", (extrinsic_oam(&psi, (0.0, 0.0))? - 1.0).abs(), 1e-2)])
}

fn wrap(v: f64, period: f64) -> f64 {
    let r = v.rem_euclid(period);
    if r > period / 2.0 {
        r - period
    } else {
        r
    }
}

fn c09_symmetry(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let plus_x = gaussian(&g, SpinDirection::plus_x())?;
    let s = SpinDirection::plus_x();
    let bin = 2.0 * PI / crate::analysis::ANGULAR_SAMPLES as f64;
    let chi = PI / 3.0;
    let mut checks = Vec::new();
    for q in [1i32, 2, 3] {
        let psi = apply_magnetic_spp(&plus_x, q as f64, PI / 2.0)?;
        let im = intensity_map(&psi, s);
        let mm = momentum_map(&psi, s)?;
        checks.push(Check::holds(
            format!("q={q}: intensity symmetry order = {q}"),
            rotational_symmetry_order(&im)? == q as usize,
        ));
        checks.push(Check::holds(
            format!("q={q}: momentum symmetry order = {q}"),
            rotational_symmetry_order(&mm)? == q as usize,
        ));
        let rotated = intensity_map(&apply_magnetic_spp(&plus_x, q as f64, PI / 2.0 + chi)?, s);
        let est = estimate_rotation(&im, &rotated)?;
        let period = 2.0 * PI / q as f64;
        checks.push(Check::le(
            format!("q={q}: |rotation - (-chi/q)| for chi = pi/3"),
            wrap(est + chi / q as f64, period).abs(),
            bin,
        ));
    }
    Ok(checks)
}

/// Test state for tomography: `|+x>`-projected magnetic plate output.
fn tomography_state(g: &GridSpec, q: i32) -> Result<SpinorField> {
    apply_magnetic_spp(&gaussian(g, SpinDirection::plus_x())?, q as f64, PI / 2.0)
}

fn c10_tomography(suite: &Suite) -> Result<Vec<Check>> {
    let (g, out) = suite.tomography();
    let s = SpinDirection::plus_x();
    let mut checks = Vec::new();
    for q in [1, 2] {
        let psi = tomography_state(&g, q)?;
        let direct = momentum_map(&psi, s)?.center_crop(out)?;
        let mut errs = Vec::new();
        for n in [12, 36, 72] {
            let rec = reconstruct_fbp(&make_sinogram(&psi, s, n)?, out)?;
            errs.push(nrmse(&rec.raw, &direct)?);
        }
        checks.push(Check::le(format!("q={q}: NRMSE, 36 angles"), errs[1], 0.10));
        checks.push(Check::holds(
            format!("q={q}: NRMSE 72 <= 36 <= 12 ({:.4}, {:.4}, {:.4})", errs[2], errs[1], errs[0]),
            errs[2] <= errs[1] && errs[1] <= errs[0],
        ));
        let sg = make_sinogram(&psi, s, 36)?;
        let (mut num, mut den) = (0.0, 0.0);
        for (a, &w) in sg.angles().iter().enumerate() {
            // Turning the analyser azimuth by -q w rotates the pattern by -w.
            let dir = SpinDirection::from_angles(PI / 2.0, -(q as f64) * w)?;
            let row = project_map(&momentum_map(&psi, dir)?, 0.0)?;
            for (x, y) in sg.row(a).iter().zip(&row) {
                num += (x - y).powi(2);
                den += x * x;
            }
        }
        checks.push(Check::le(format!("q={q}: filter-rotation sinogram rel. L2"), (num / den).sqrt(), 1e-3));
    }
    Ok(checks)
}

fn c11_higher_order(suite: &Suite) -> Result<Vec<Check>> {
    let g = suite.base();
    let up = gaussian(&g, SpinDirection::plus_z())?;
    let j0 = apply_higher_order(&up, 0, RHO_C)?;
    let j1 = apply_higher_order(&up, 1, RHO_C)?;
    let d = decompose(&j1.field, 20, (-8, 8))?;
    let leak = d.max_probability_where(|k| !matches!((k.ell, k.spin), (-1, Spin::Up) | (-2, Spin::Down)));
    Ok(vec![
        Check::holds("j=0 bitwise equal to quadrupole", j0.field == apply_quadrupole(&up, RHO_C, 0.0)?),
        Check::le("j=1 max |c|^2 outside {(-1,up), (-2,down)}", leak, 1e-8),
        Check::le("j=1 |survival - quadrature|", (j1.survival - oracle::higher_order_survival(RHO_C)).abs(), 1e-6),
    ])
}

fn c12_converters(_: &Suite) -> Result<Vec<Check>> {
    let rc = rho_c_meters(2000.0, 1.832e8, 10.0, 1.0)?;
    let a = lattice_constant_meters(2000.0, 1.832e8, 0.5, PI / 4.0)?;
    Ok(vec![
        Check::holds(format!("rho_c = {rc:.3e} m"), format!("{rc:.3e}") == "3.430e-6"),
        Check::holds(format!("a = {a:.3e} m"), format!("{a:.3e}") == "1.372e-4"),
    ])
}
