use std::f64::consts::PI;

use spinorbit::analysis::{momentum_map, radial_overlap};
use spinorbit::lg::{decompose, oam_expectation};
use spinorbit::operators::*;
use spinorbit::tomography::{make_sinogram, reconstruct_fbp};
use spinorbit::{gaussian_wavepacket, GridSpec, SpinDirection};

#[derive(PartialEq, Debug)]
struct Outputs {
    norm: f64,
    oam: f64,
    captured: f64,
    coefficients: Vec<(f64, f64)>,
    overlap: Vec<Option<f64>>,
    momentum_integral: f64,
    reconstruction: Vec<f64>,
}

fn compute() -> Outputs {
    let g = GridSpec::new(128, 128, 8.0).unwrap();
    let psi = gaussian_wavepacket(&g, (0.3, 1.0), SpinDirection::plus_x()).unwrap();
    let steps = [
        OperatorStep::MagneticSpp { q: 2.0, beta: PI / 2.0 },
        OperatorStep::Bb1 { rho_c: 1.82 },
        OperatorStep::Lov { n: 2, signs: LovSigns::default(), rho_c: 1.82 },
    ];
    let out = run_pipeline(&psi, &steps).unwrap().field;
    let d = decompose(&out, 10, (-4, 4)).unwrap();
    let sg = make_sinogram(&out, SpinDirection::plus_x(), 12).unwrap();
    Outputs {
        norm: out.norm_sqr(),
        oam: oam_expectation(&out).unwrap(),
        captured: d.captured(),
        coefficients: d.iter().map(|(_, c)| (c.re, c.im)).collect(),
        overlap: radial_overlap(&psi, &out, 32).unwrap().values,
        momentum_integral: momentum_map(&out, SpinDirection::plus_x()).unwrap().integral(),
        reconstruction: reconstruct_fbp(&sg, 32).unwrap().raw.values().to_vec(),
    }
}

fn with_threads(n: usize) -> Outputs {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(compute)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let one = with_threads(1);
    for n in [2, 3, 8] {
        assert_eq!(with_threads(n), one, "{n} threads");
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    assert_eq!(compute(), compute());
}
