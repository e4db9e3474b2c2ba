mod common;

use common::*;
use mrpz_core::baselines::{balanced_truncation, hankel_singular_values, irka, IrkaOptions, IrkaStatus};
use mrpz_core::compare::{compare, CompareOptions, MethodConfig};
use mrpz_core::constraints::{ConstraintSpec, SolveOptions};
use mrpz_core::metrics::{dc_gain, h2_error, h2_norm, hinf_error, hinf_norm, HINF_RTOL};
use mrpz_core::moments::InterpolationSpec;
use mrpz_core::synth::{random_points, random_stable_system, rng};
use mrpz_core::StateSpace;
use num_complex::Complex64;
use rand::Rng;
use std::time::{Duration, Instant};

/// `max |K|` over `count` log-spaced frequencies in `[1e-4, 1e4]`, then
/// refined by golden-section search around the best grid point.
fn hinf_oracle(eval: impl Fn(Complex64) -> Complex64, count: usize) -> f64 {
    let gain = |w: f64| eval(c(0.0, w)).norm();
    let grid: Vec<f64> = (0..count).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / (count - 1) as f64)).collect();
    let (best, peak) = grid.iter().enumerate().map(|(i, &w)| (i, gain(w))).fold((0, gain(0.0)), |a, b| if b.1 > a.1 { b } else { a });
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(count - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (x1, x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        if gain(x1) > gain(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    peak.max(gain(0.5 * (lo + hi))).max(gain(0.0))
}

fn difference<'a>(full: &'a StateSpace, red: &'a StateSpace) -> impl Fn(Complex64) -> Complex64 + 'a {
    move |s| k_oracle(full, s) - k_oracle(red, s)
}

#[test]
fn truncation_error_is_within_twice_the_tail() {
    // 1/((s+1)(s+10)).
    let sys = StateSpace::from_rows(&[&[-1.0, 1.0], &[0.0, -10.0]], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
    let hsv = hankel_singular_values(&sys).unwrap();
    let (bt, bound) = balanced_truncation(&sys, 1).unwrap();
    assert!((bound - 2.0 * hsv[1]).abs() <= 1e-14 * bound);
    // A single discarded state attains the bound (at DC here), so equality
    // holds up to rounding.
    assert!(hinf_error(&sys, &bt, HINF_RTOL) <= bound * (1.0 + 1e-12));

    for seed in 0..20 {
        let mut r = rng(seed);
        let sys = random_stable_system(&mut r, 20).unwrap();
        let (bt, bound) = balanced_truncation(&sys, 6).unwrap();
        let err = hinf_error(&sys, &bt, HINF_RTOL);
        assert!(err <= bound, "seed {seed}: {err} > {bound}");
        // The lower Hankel bound: the error is at least the first discarded value.
        let hsv = hankel_singular_values(&sys).unwrap();
        assert!(err >= hsv[6] * (1.0 - 1e-6), "seed {seed}");
    }
}

#[test]
fn gramian_h2_matches_quadrature() {
    for seed in 0..15 {
        let mut r = rng(100 + seed);
        let sys = system(&mut r, 4, 20);
        // Small orders keep the discarded Hankel values well above rounding.
        let nu = r.random_range(1..sys.order().min(4));
        let (bt, _) = balanced_truncation(&sys, nu).unwrap();
        let want = h2_quadrature(difference(&sys, &bt), 1e-8);
        let got = h2_error(&sys, &bt);
        assert!((got - want).abs() <= 1e-4 * want, "seed {seed}: {got} vs {want}");
        let norm = h2_quadrature(|s| k_oracle(&sys, s), 1e-8);
        assert!((h2_norm(&sys) - norm).abs() <= 1e-4 * norm, "seed {seed}");
    }
}

#[test]
fn hamiltonian_bisection_matches_dense_grid() {
    for seed in 0..15 {
        let mut r = rng(200 + seed);
        let sys = system(&mut r, 4, 20);
        // Small orders keep the discarded Hankel values well above rounding.
        let nu = r.random_range(1..sys.order().min(4));
        let (bt, _) = balanced_truncation(&sys, nu).unwrap();
        for (got, want) in [
            (hinf_norm(&sys, HINF_RTOL), hinf_oracle(|s| k_oracle(&sys, s), 100_000)),
            (hinf_error(&sys, &bt, HINF_RTOL), hinf_oracle(difference(&sys, &bt), 100_000)),
        ] {
            assert!((got - want).abs() <= HINF_RTOL * want, "seed {seed}: {got} vs {want}");
        }
    }
}

#[test]
fn converged_irka_satisfies_hermite_conditions() {
    let mut converged = 0;
    for seed in 0..40 {
        let mut r = rng(300 + seed);
        let sys = system(&mut r, 10, 30);
        let nu = r.random_range(2..=6);
        let init = random_points(&mut r, nu);
        let res = irka(&sys, nu, &init, &IrkaOptions::default()).unwrap();
        if res.status != IrkaStatus::Converged {
            continue;
        }
        converged += 1;
        for p in res.model.poles() {
            let s = -p;
            let (k, dk) = (k_oracle(&sys, s), dk_oracle(&sys, s));
            let (kr, dkr) = (k_oracle(&res.model, s), dk_oracle(&res.model, s));
            assert!((k - kr).norm() <= 1e-6 * k.norm(), "seed {seed}: value at {s}");
            assert!((dk - dkr).norm() <= 1e-6 * dk.norm(), "seed {seed}: derivative at {s}");
        }
    }
    assert!(converged >= 20, "only {converged} of 40 runs converged");
}

#[test]
fn irka_on_two_pole_system_is_h2_optimal_among_first_order_models() {
    // 1/((s+1)(s+2)); first-order candidates b/(s+p) are swept on a grid.
    let sys = StateSpace::from_rows(&[&[-1.0, 1.0], &[0.0, -2.0]], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
    let res = irka(&sys, 1, &[c(1.0, 0.0)], &IrkaOptions::default()).unwrap();
    assert_eq!(res.status, IrkaStatus::Converged);
    let got = h2_error(&sys, &res.model);
    let mut best = f64::INFINITY;
    for i in 1..=400 {
        let p = 0.01 * i as f64;
        for j in 1..=400 {
            let b = 0.005 * j as f64;
            let cand = StateSpace::from_rows(&[&[-p]], &[b], &[1.0]).unwrap();
            best = best.min(h2_error(&sys, &cand));
        }
    }
    assert!(got <= best * (1.0 + 1e-6), "{got} vs swept {best}");
}

#[test]
fn dc_column_and_three_method_budget() {
    let mut r = rng(400);
    let sys = random_stable_system(&mut r, 30).unwrap();
    let pts = [c(0.0, 0.0), c(0.5, 1.0), c(0.5, -1.0), c(2.0, 0.0), c(5.0, 0.0), c(1.0, 3.0)];
    let pts: Vec<Complex64> = pts.iter().copied().chain([c(1.0, -3.0)]).collect();
    let configs = vec![
        MethodConfig::MomentMatching {
            name: None,
            points: InterpolationSpec::simple(&pts).unwrap(),
            constraints: ConstraintSpec { poles: vec![c(-1.0, 0.0)], ..Default::default() },
        },
        MethodConfig::BalancedTruncation { order: 7 },
        MethodConfig::Irka { order: 7, init: Vec::new(), tol: None, max_iter: None },
    ];
    let opts = CompareOptions { solve: SolveOptions { least_norm: true, ..Default::default() }, ..Default::default() };
    let start = Instant::now();
    let rows = compare(&sys, &configs, &opts).unwrap();
    assert!(start.elapsed() < Duration::from_secs(5), "{:?}", start.elapsed());
    assert_eq!(rows.len(), 3);
    let k0 = k_oracle(&sys, c(0.0, 0.0)).re;
    // The moment-matching row interpolates at zero.
    let mm = rows[0].dc_gain.unwrap();
    assert!((mm - k0).abs() <= 1e-10 * k0.abs(), "{mm} vs {k0}");
    let (bt, _) = balanced_truncation(&sys, 7).unwrap();
    let dc_bt = dc_gain(&bt).unwrap().re;
    assert_eq!(rows[1].dc_gain, Some(dc_bt));
    assert!((dc_bt - k_oracle(&bt, c(0.0, 0.0)).re).abs() <= 1e-12 * dc_bt.abs().max(1.0));
    for row in &rows {
        assert!(row.error.is_none(), "{row:?}");
        assert!(row.h2_error.is_finite() || row.max_real_pole >= 0.0);
    }
}
