//! Radial quadratures that do not share code with the grid solvers.

use std::f64::consts::PI;

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Generalized Laguerre polynomial from its explicit finite sum.
pub fn laguerre_sum(n: usize, a: usize, t: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..=n {
        // binom(n + a, n - k) / k!
        let mut c = 1.0;
        for m in 1..=(n - k) {
            c *= (a + k + m) as f64 / m as f64;
        }
        for m in 1..=k {
            c /= m as f64;
        }
        s += if k % 2 == 0 { c } else { -c } * t.powi(k as i32);
    }
    s
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

const XI_MAX: f64 = 14.0;
const STEPS: usize = 40_000;

/// `<LG(n, 1) | e^{i phi} G>` for the unit Gaussian `G = e^{-xi^2/2} / sqrt(pi)`.
pub fn spp_coefficient(n: usize) -> f64 {
    let norm = (factorial(n) / (PI * factorial(n + 1))).sqrt();
    let radial = simpson(|xi| xi * xi * (-xi * xi).exp() * laguerre_sum(n, 1, xi * xi), 0.0, XI_MAX, STEPS);
    2.0 * PI * norm * radial / PI.sqrt()
}

/// `sum_{n <= n_max} |c_n|^2` of the above.
pub fn spp_captured(n_max: usize) -> f64 {
    (0..=n_max).map(|n| spp_coefficient(n).powi(2)).sum()
}

/// Retained probability of one post-selected quadrupole pass on a spin-up
/// Gaussian: `2 int sin^2(pi xi / 2 rho_c) e^{-xi^2} xi dxi`.
pub fn higher_order_survival(rho_c: f64) -> f64 {
    2.0 * simpson(|xi| (PI * xi / (2.0 * rho_c)).sin().powi(2) * (-xi * xi).exp() * xi, 0.0, XI_MAX, STEPS)
}
