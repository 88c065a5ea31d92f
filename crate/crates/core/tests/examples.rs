//! Worked examples for each module, at the default grid unless noted.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use spinorbit::analysis::{
    displaced_mode_probabilities, extrinsic_oam, intensity_map, momentum_map, radial_overlap,
    rotational_symmetry_order, spin_texture,
};
use spinorbit::field::Spinor;
use spinorbit::lg::{component_oam, decompose, lg_mode, lg_radial, oam_expectation};
use spinorbit::operators::*;
use spinorbit::tomography::{make_sinogram, reconstruct_fbp};
use spinorbit::validation::oracle;
use spinorbit::{gaussian_wavepacket, inner_product, GridSpec, Spin, SpinDirection, SpinorField};

fn std_grid() -> GridSpec {
    GridSpec::standard()
}

fn gaussian(s: impl Into<Spinor>) -> SpinorField {
    gaussian_wavepacket(&std_grid(), (0.0, 0.0), s).unwrap()
}

fn nearest(g: &GridSpec, x: f64, y: f64) -> usize {
    let i = ((x / g.dx()) + g.nx() as f64 / 2.0 - 0.5).round() as usize;
    let j = ((y / g.dy()) + g.ny() as f64 / 2.0 - 0.5).round() as usize;
    g.index(i, j)
}

#[test]
fn grid_pitch_and_centering() {
    assert_eq!(std_grid().dx(), 0.03125);
    let g = GridSpec::new(32, 32, 4.0).unwrap();
    assert!((g.x(31) - (4.0 - g.dx() / 2.0)).abs() < 1e-15);
    assert!(GridSpec::new(33, 32, 4.0).is_err());
}

#[test]
fn gaussian_packets() {
    let up = gaussian(SpinDirection::plus_z());
    let mode = SpinorField::from_scalar(&lg_mode(&std_grid(), 0, 0).unwrap(), SpinDirection::plus_z());
    assert!(up.down().iter().all(|d| d.norm() == 0.0));
    assert!((inner_product(&mode, &up).unwrap().norm() - 1.0).abs() < 1e-10);

    let x = gaussian(SpinDirection::plus_x());
    assert!((x.component_norm_sqr(Spin::Up) - 0.5).abs() < 1e-12);
    assert!((x.component_norm_sqr(Spin::Down) - 0.5).abs() < 1e-12);

    let g = std_grid();
    let shifted = gaussian_wavepacket(&g, (3.0, PI / 2.0), SpinDirection::plus_z()).unwrap();
    let (mut cx, mut cy, mut m) = (0.0, 0.0, 0.0);
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let w = shifted.up()[g.index(i, j)].norm_sqr();
            cx += w * g.x(i);
            cy += w * g.y(j);
            m += w;
        }
    }
    assert!((cx / m).abs() < g.dx() / 2.0);
    assert!((cy / m - 3.0).abs() < g.dx() / 2.0);
}

#[test]
fn inner_products() {
    let g = std_grid();
    let l00 = SpinorField::from_scalar(&lg_mode(&g, 0, 0).unwrap(), SpinDirection::plus_z());
    let l01 = SpinorField::from_scalar(&lg_mode(&g, 0, 1).unwrap(), SpinDirection::plus_z());
    assert!(inner_product(&l00, &l01).unwrap().norm() < 1e-10);
    assert!((inner_product(&l00, &l00.normalize().unwrap()).unwrap().re - 1.0).abs() < 1e-12);

    // The vortex's projection onto the Gaussian vanishes by symmetry; its
    // weight sits on lg(0,1) with the radial-quadrature amplitude.
    let vortex = apply_spp(&gaussian(SpinDirection::plus_z()), 1.0, 0.0).unwrap();
    assert!(inner_product(&l00, &vortex).unwrap().norm() < 1e-10);
    let c = inner_product(&l01, &vortex).unwrap().norm();
    assert!((c - oracle::spp_coefficient(0)).abs() < 1e-6);
    assert!((c - PI.sqrt() / 2.0).abs() < 1e-6);
}

#[test]
fn mode_shapes() {
    assert!((lg_radial(0, 0, 1.0) / lg_radial(0, 0, 0.0) - (-0.5f64).exp()).abs() < 1e-15);
    let dx = std_grid().dx();
    assert!(lg_radial(1, 0, 1.0 - dx) * lg_radial(1, 0, 1.0 + dx) < 0.0);

    let mode = lg_mode(&std_grid(), 3, -2).unwrap();
    let psi = SpinorField::from_scalar(&mode, SpinDirection::minus_z());
    let d = decompose(&psi, 20, (-8, 8)).unwrap();
    assert!((d.coefficient(3, -2, Spin::Down).unwrap().norm() - 1.0).abs() < 1e-9);
    assert!(d.max_probability_where(|k| *k != spinorbit::ModeIndex::new(3, -2, Spin::Down)) < 1e-9);
}

#[test]
fn oam_examples() {
    assert!(oam_expectation(&gaussian(SpinDirection::plus_z())).unwrap().abs() < 1e-9);

    let g = std_grid();
    let displaced = gaussian_wavepacket(&g, (5.0, 0.0), SpinDirection::plus_z()).unwrap();
    let vortex = apply_spp(&displaced, 1.0, 0.0).unwrap();
    assert!((extrinsic_oam(&vortex, (0.0, 0.0)).unwrap() - 1.0).abs() < 1e-3);
    assert!(extrinsic_oam(&displaced, (-1.0, 2.0)).unwrap().abs() < 1e-9);
}

#[test]
fn own_axis_oam_matches_mode_probabilities() {
    let g = std_grid();
    let rho0 = 2.0;
    let psi = apply_spp(&gaussian_wavepacket(&g, (rho0, 0.0), SpinDirection::plus_z()).unwrap(), 1.0, 0.0).unwrap();
    let own = extrinsic_oam(&psi, (rho0, 0.0)).unwrap();
    let rows = displaced_mode_probabilities(&g, 1, &[rho0]).unwrap();
    assert!(own < 0.5);
    assert!((own - rows[0].intrinsic_oam).abs() < 1e-6);
}

#[test]
fn phase_plate_examples() {
    let psi = gaussian(SpinDirection::new(0.3, 0.4, 0.866).unwrap());
    assert!(apply_spp(&psi, 0.0, 0.0).unwrap().max_abs_diff(&psi).unwrap() <= 1e-15);
    let back = apply_spp(&apply_spp(&psi, 1.0, 0.0).unwrap(), -1.0, 0.0).unwrap();
    assert!(back.max_abs_diff(&psi).unwrap() <= 1e-14);
    let one = apply_spp(&gaussian(SpinDirection::plus_z()), 1.0, 0.0).unwrap();
    assert!((oam_expectation(&one).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn magnetic_plate_examples() {
    let psi = apply_magnetic_spp(&gaussian(SpinDirection::plus_x()), -1.0, PI / 2.0).unwrap();
    assert!((component_oam(&psi, Spin::Down).unwrap() + 1.0).abs() < 1e-6);
    assert!(component_oam(&psi, Spin::Up).unwrap().abs() < 1e-9);

    let beta = 0.7;
    let uniform = apply_magnetic_spp(&gaussian(SpinDirection::plus_x()), 0.0, beta).unwrap();
    for p in spin_texture(&uniform).values().iter().flatten() {
        assert!((p[0] - beta.cos()).abs() < 1e-9);
        assert!((p[1] - beta.sin()).abs() < 1e-9);
        assert!(p[2].abs() < 1e-9);
    }
}

#[test]
fn weak_quadrupole_is_identity() {
    let psi = gaussian(SpinDirection::plus_z());
    assert!(apply_quadrupole(&psi, 1e14, 0.0).unwrap().max_abs_diff(&psi).unwrap() <= 1e-10);
}

#[test]
fn product_order_adapter() {
    let psi = gaussian(SpinDirection::plus_z());
    let product: Vec<OperatorStep> = bb1_factors(1.82)
        .iter()
        .map(|&(rho_c, delta)| OperatorStep::Quadrupole { rho_c, delta })
        .collect();
    let run = run_pipeline(&psi, &traversal_order(&product)).unwrap();
    assert!(run.field.max_abs_diff(&apply_bb1(&psi, 1.82).unwrap()).unwrap() < 1e-14);
    assert_eq!(run_pipeline(&psi, &[]).unwrap().field, psi);
}

#[test]
fn converters_scale_and_reject() {
    let a = rho_c_meters(2000.0, GAMMA_N, 10.0, 1.0).unwrap();
    let b = rho_c_meters(2000.0, GAMMA_N, 20.0, 1.0).unwrap();
    assert_eq!(a, 2.0 * b);
    assert!(lattice_constant_meters(2000.0, GAMMA_N, 0.5, PI / 2.0).is_err());
}

#[test]
fn projected_views() {
    let up = gaussian(SpinDirection::plus_z());
    assert!(intensity_map(&up, SpinDirection::minus_z()).values().iter().all(|&v| v == 0.0));

    let mspp = apply_magnetic_spp(&gaussian(SpinDirection::plus_x()), -1.0, PI / 2.0).unwrap();
    let top = intensity_map(&mspp, SpinDirection::plus_z());
    let plain = intensity_map(&gaussian(SpinDirection::plus_x()), SpinDirection::plus_z());
    assert_eq!(top.values(), plain.values());
    assert_eq!(rotational_symmetry_order(&plain).unwrap(), 0);

    let q = apply_quadrupole(&up, 1.82, 0.0).unwrap();
    let ring = momentum_map(&q, SpinDirection::minus_z()).unwrap();
    let k = ring.grid();
    let n = k.nx();
    let peak = (0..k.len()).max_by(|&a, &b| ring.values()[a].total_cmp(&ring.values()[b])).unwrap();
    let (pi, pj) = (peak % n, peak / n);
    assert!(k.x(pi).hypot(k.y(pj)) > 1.0);
    assert!(ring.get(n / 2, n / 2) < 0.2 * ring.max());
}

#[test]
fn quadrupole_against_magnetic_plate_overlap() {
    let g = std_grid();
    let target = apply_magnetic_spp(&gaussian(SpinDirection::plus_x()), -1.0, PI / 2.0).unwrap();
    let q = apply_quadrupole(&gaussian(SpinDirection::plus_z()), 1.82, 0.0).unwrap();
    let curve = radial_overlap(&target, &q, 16 * g.half_width() as usize).unwrap();
    let at = |r: f64| {
        curve
            .points()
            .min_by(|a, b| (a.0 - r).abs().total_cmp(&(b.0 - r).abs()))
            .unwrap()
    };
    let (r, f) = at(0.91);
    assert!((f - (PI * r / (2.0 * 1.82) + PI / 4.0).sin()).abs() < 1e-3);
    let (r0, f0) = curve.points().next().unwrap();
    assert!(r0 < 0.1);
    assert!((f0 - FRAC_1_SQRT_2).abs() < 5e-3 + r0);
}

#[test]
fn textures() {
    let x = spin_texture(&gaussian(SpinDirection::plus_x()));
    for p in x.values().iter().flatten() {
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12 && p[2].abs() < 1e-12);
    }

    let g = std_grid();
    let flipped = spin_texture(&apply_quadrupole(&gaussian(SpinDirection::plus_z()), 1.82, 0.0).unwrap());
    let k = nearest(&g, 1.82, 0.0);
    assert!(flipped.values()[k].unwrap()[2] < -0.999);

    let radial = spin_texture(&apply_magnetic_spp(&gaussian(SpinDirection::plus_x()), 1.0, 0.0).unwrap());
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            if let Some(p) = radial.get(i, j) {
                let phi = g.y(j).atan2(g.x(i));
                assert!((p[0] * phi.cos() + p[1] * phi.sin()).abs() > 1.0 - 1e-9);
            }
        }
    }
}

#[test]
fn sinogram_angles() {
    let g = GridSpec::new(64, 64, 16.0).unwrap();
    let sg = make_sinogram(&gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_z()).unwrap(), SpinDirection::plus_z(), 36).unwrap();
    for (i, a) in sg.angles().iter().enumerate() {
        assert!((a.to_degrees() - 5.0 * i as f64).abs() < 1e-9);
    }
}

#[test]
fn reconstruction_keeps_symmetry_and_mass() {
    let g = GridSpec::new(512, 512, 16.0).unwrap();
    let plus_x = gaussian_wavepacket(&g, (0.0, 0.0), SpinDirection::plus_x()).unwrap();
    for q in 1..=3 {
        let psi = apply_magnetic_spp(&plus_x, q as f64, PI / 2.0).unwrap();
        let direct = momentum_map(&psi, SpinDirection::plus_x()).unwrap().center_crop(128).unwrap();
        let sg = make_sinogram(&psi, SpinDirection::plus_x(), 36).unwrap();
        let rec = reconstruct_fbp(&sg, 128).unwrap();
        assert_eq!(rotational_symmetry_order(&rec.raw).unwrap(), rotational_symmetry_order(&direct).unwrap());
        assert_eq!(rotational_symmetry_order(&rec.raw).unwrap(), q);
        let mass = sg.row_masses()[0];
        assert!((rec.raw.integral() - mass).abs() <= 0.05 * mass, "q={q}");
    }
}

#[test]
fn lov_sign_variants_flip_down_oam() {
    let up = gaussian(SpinDirection::plus_z());
    let oam = |signs| component_oam(&apply_lov(&up, 1, signs, 1.82).unwrap(), Spin::Down).unwrap();
    let quad = oam(LovSigns { gradient: -1, field: 1 });
    let mono = oam(LovSigns { gradient: 1, field: 1 });
    assert!(quad < -0.5 && mono > 0.5);
}
