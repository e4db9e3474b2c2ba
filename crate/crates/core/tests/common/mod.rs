//! Shared instance generators and independent oracles for integration tests.
#![allow(dead_code)]

use mrpz_core::linalg::{diag, CMat, CRow, CVec};
use mrpz_core::moments::pole_annihilator;
use mrpz_core::sylvester::solve_pi;
use mrpz_core::synth::{random_points, random_spread_set, random_stable_system};
use mrpz_core::StateSpace;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn system(rng: &mut impl Rng, lo: usize, hi: usize) -> StateSpace {
    let n = rng.random_range(lo..=hi);
    random_stable_system(rng, n).unwrap()
}

/// Two disjoint conjugate-closed right half-plane point sets of sizes
/// `first` and `second`.
pub fn split_points(rng: &mut impl Rng, first: usize, second: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let a = if first == 0 { Vec::new() } else { random_points(rng, first) };
    let b = if second == 0 { Vec::new() } else { random_spread_set(rng, second, true, &a) };
    (a, b)
}

/// Conjugate-closed left half-plane set away from `avoid`.
pub fn lhp_set(rng: &mut impl Rng, count: usize, avoid: &[Complex64]) -> Vec<Complex64> {
    random_spread_set(rng, count, false, avoid)
}

/// Solves `(sI - M) X = rhs` with a dense partial-pivot LU of nalgebra's
/// generic implementation, independent of the library's factorization.
fn shifted_solve(m: &CMat, s: Complex64, rhs: &CMat) -> CMat {
    let n = m.nrows();
    (DMatrix::identity(n, n) * s - m).lu().solve(rhs).expect("shift is a pole")
}

fn real_parts(sys: &StateSpace) -> (CMat, CMat, CMat) {
    (
        sys.a().map(|x| c(x, 0.0)),
        CMat::from_fn(sys.order(), 1, |i, _| c(sys.b()[i], 0.0)),
        CMat::from_fn(1, sys.order(), |_, j| c(sys.c()[j], 0.0)),
    )
}

/// `K(s) = C (sI - A)^{-1} B`.
pub fn k_oracle(sys: &StateSpace, s: Complex64) -> Complex64 {
    let (a, b, cr) = real_parts(sys);
    (cr * shifted_solve(&a, s, &b))[(0, 0)]
}

/// `K'(s) = -C (sI - A)^{-2} B`.
pub fn dk_oracle(sys: &StateSpace, s: Complex64) -> Complex64 {
    let (a, b, cr) = real_parts(sys);
    let x = shifted_solve(&a, s, &b);
    -(cr * shifted_solve(&a, s, &x))[(0, 0)]
}

/// `C (sI - A)^{-(j+1)} B`.
pub fn moment_oracle(sys: &StateSpace, s: Complex64, j: usize) -> Complex64 {
    let (a, b, cr) = real_parts(sys);
    let mut x = b;
    for _ in 0..=j {
        x = shifted_solve(&a, s, &x);
    }
    (cr * x)[(0, 0)]
}

/// `W (sI - F)^{-1} G` and its derivative for a dense complex model.
pub fn model_oracle(f: &CMat, g: &CVec, w: &CRow, s: Complex64) -> (Complex64, Complex64) {
    let x = shifted_solve(f, s, &CMat::from_column_slice(g.len(), 1, g.as_slice()));
    let y = shifted_solve(f, s, &x);
    ((w * &x)[0], -(w * &y)[0])
}

/// `max |a - b| / max |b|`.
pub fn rel_err(a: &CMat, b: &CMat) -> f64 {
    let diff = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn vec_rel_err(a: &CVec, b: &CVec) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// First-order relative change of `W (sI - F)^{-1} G` under a backward
/// error of size `eps |F|` in `F`: `eps |F| |W R| |R G| / |K_G(s)|` with
/// `R = (sI - F)^{-1}`.
pub fn eval_sensitivity(f: &CMat, g: &CVec, w: &CRow, s: Complex64) -> f64 {
    let n = f.nrows();
    let lu = (CMat::identity(n, n) * s - f).lu();
    let Some(rg) = lu.solve(g) else { return f64::INFINITY };
    let Some(wr) = lu.solve(&w.adjoint()) else { return f64::INFINITY };
    let k = (w * &rg)[0].norm();
    f64::EPSILON * f.norm() * wr.norm() * rg.norm() / k
}

/// Worst `eps * kappa(lambda) * |F| / max(1, |lambda|)` over the prescribed
/// poles: the relative accuracy to which any eigensolver can locate them in
/// `F`, with `kappa = 1 / |y^H x|` from the unit singular vectors of
/// `mu I - F` at the nearest computed eigenvalue `mu`.
pub fn pole_resolution(f: &CMat, spectrum: &[Complex64], poles: &[Complex64]) -> f64 {
    let n = f.nrows();
    poles
        .iter()
        .map(|&l| {
            let mu = spectrum.iter().copied().min_by(|a, b| (a - l).norm().total_cmp(&(b - l).norm())).unwrap();
            let svd = (CMat::identity(n, n) * mu - f).svd(true, true);
            let last = svd.singular_values.imin();
            let x = svd.v_t.as_ref().unwrap().row(last).adjoint();
            let y = svd.u.as_ref().unwrap().column(last).clone_owned();
            let kappa = 1.0 / (y.adjoint() * x)[0].norm();
            f64::EPSILON * kappa * f.norm() / l.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Smallest `|C_P x_k| / |x_k|` over the resolvent images
/// `x_k = (lambda_k I - A)^{-1} B`. The Sylvester route forms its pole rows
/// as `C_P (lambda_k I - A)^{-1} Pi`, whose entries cancel down to this
/// scale, so it loses about `-log10(margin)` digits against the explicit rows.
pub fn annihilation_margin(sys: &StateSpace, pts: &[Complex64], poles: &[Complex64]) -> f64 {
    let pi = solve_pi(sys, &diag(pts), &CRow::from_element(pts.len(), c(1.0, 0.0))).unwrap();
    let Ok(c_p) = pole_annihilator(sys, &pi, poles) else { return 0.0 };
    let b = sys.b().map(|x| c(x, 0.0));
    let a = sys.a().map(|x| c(x, 0.0));
    poles
        .iter()
        .map(|&l| {
            let x = (CMat::identity(sys.order(), sys.order()) * l - &a).lu().solve(&b).unwrap();
            (&c_p * &x)[0].norm() / x.norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `0` and `j omega` for `count` log-spaced `omega` in `[1e-3, 1e3]`.
pub fn probe_grid(count: usize) -> Vec<Complex64> {
    std::iter::once(c(0.0, 0.0))
        .chain((0..count).map(|i| c(0.0, 10f64.powf(-3.0 + 6.0 * i as f64 / (count - 1) as f64))))
        .collect()
}

/// `max |K(j omega)|` on `count` log-spaced frequencies in `[1e-4, 1e4]`
/// (both signs, plus zero).
pub fn hinf_grid(eval: impl Fn(Complex64) -> Complex64, count: usize) -> f64 {
    (0..count)
        .flat_map(|i| {
            let w = 10f64.powf(-4.0 + 8.0 * i as f64 / (count - 1) as f64);
            [c(0.0, w), c(0.0, -w)]
        })
        .chain([c(0.0, 0.0)])
        .map(|s| eval(s).norm())
        .fold(0.0, f64::max)
}

/// `||K||_2^2 = (1/2 pi) int |K(j omega)|^2 d omega` by adaptive Simpson on
/// `omega = tan(theta)`, `theta in (-pi/2, pi/2)`.
pub fn h2_quadrature(eval: impl Fn(Complex64) -> Complex64, rtol: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let f = |t: f64| {
        if t.abs() >= FRAC_PI_2 {
            return 0.0;
        }
        let w = t.tan();
        let sec2 = 1.0 + w * w;
        eval(c(0.0, w)).norm_sqr() * sec2
    };
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    // Split into panels so narrow resonances are not skipped.
    let panels = 64;
    let (a, b) = (-FRAC_PI_2, FRAC_PI_2);
    let h = (b - a) / panels as f64;
    let coarse: f64 = (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(0.5 * (x0 + x1)) + f(x1))
        })
        .sum();
    let tol = rtol * coarse.abs().max(f64::MIN_POSITIVE) / panels as f64;
    let total: f64 = (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson(&f, x0, x1, f0, fm, f1, whole, tol, 40)
        })
        .sum();
    (total / (2.0 * std::f64::consts::PI)).sqrt()
}
