//! Brute-force check of the strain-overlap closed form.

use std::f64::consts::PI;

use hqs_core::bounds::xi_33;

/// Composite Simpson rule on [a, b] with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Volume integral of z · u(r, z) over the resonator, with the normalised
/// Gaussian mode profile `u = √(2/(Lµ²)) √(2/π) e^{−r²/µ²} · s(nπz/L)`
/// (s = sin for odd n, cos for even n) centred on the slab midplane.
fn overlap_brute_force(length: f64, waist: f64, n: u32) -> f64 {
    let amp = (2.0 / (length * waist * waist)).sqrt() * (2.0 / PI).sqrt();
    let r_max = 8.0 * waist;
    let gauss = |x: f64| (-(x * x) / (waist * waist)).exp();
    // e^{−(x²+y²)/µ²} factorises, but integrate the 2D grid explicitly.
    let m = 400;
    let h = 2.0 * r_max / m as f64;
    let weight = |i: usize| match i {
        0 => 1.0,
        i if i == m => 1.0,
        i if i % 2 == 1 => 4.0,
        _ => 2.0,
    };
    let mut transverse = 0.0;
    for i in 0..=m {
        let x = -r_max + i as f64 * h;
        let gx = gauss(x);
        for j in 0..=m {
            let y = -r_max + j as f64 * h;
            transverse += weight(i) * weight(j) * gx * gauss(y);
        }
    }
    transverse *= h * h / 9.0;

    let k = n as f64 * PI / length;
    let odd = n % 2 == 1;
    let intervals = 200 * n as usize + 2_000;
    let axial = simpson(
        |z| z * if odd { (k * z).sin() } else { (k * z).cos() },
        -length / 2.0,
        length / 2.0,
        intervals + intervals % 2,
    );
    (amp * transverse * axial).abs()
}

#[test]
fn closed_form_matches_volume_integral() {
    let (l, mu) = (435e-6, 27e-6);
    for n in [1u32, 3, 401, 403] {
        let closed = xi_33(l, mu, n as i64).unwrap();
        let brute = overlap_brute_force(l, mu, n);
        let rel = (closed - brute).abs() / closed;
        assert!(rel < 1e-3, "n = {n}: closed {closed:e}, brute {brute:e}, rel {rel:e}");
    }
}

#[test]
fn even_modes_vanish() {
    let (l, mu) = (435e-6, 27e-6);
    for n in [2u32, 404] {
        assert_eq!(xi_33(l, mu, n as i64).unwrap(), 0.0);
        let brute = overlap_brute_force(l, mu, n);
        let scale = xi_33(l, mu, n as i64 - 1).unwrap();
        assert!(brute < 1e-9 * scale, "n = {n}: {brute:e}");
    }
}
