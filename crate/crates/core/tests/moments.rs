mod common;

use common::*;
use mrpz_core::linalg::{diag, CVec};
use mrpz_core::lti::eval_tf;
use mrpz_core::moments::{moment, moment_table_direct, moment_table_via_pi, InterpolationPoint, InterpolationSpec};
use mrpz_core::sylvester::{solve_pi, solve_upsilon};
use mrpz_core::synth::{random_points, rng};
use proptest::prelude::*;
use rand::Rng;

/// Conjugate-closed spec with random multiplicities (equal within a pair).
fn random_spec(r: &mut impl Rng, max_order: usize) -> InterpolationSpec {
    let count = r.random_range(1..=max_order.min(6));
    let pts = random_points(r, count);
    let mut out: Vec<InterpolationPoint> = Vec::new();
    let mut order = 0;
    for &p in &pts {
        let m = match out.iter().find(|q| (q.point - p.conj()).norm() < 1e-12) {
            Some(q) => q.multiplicity,
            None => r.random_range(1..=3),
        };
        out.push(InterpolationPoint { point: p, multiplicity: m });
        order += m;
    }
    while order > max_order {
        // Trim multiplicities pairwise until the order fits.
        let i = out.iter().position(|q| q.multiplicity > 1).expect("simple points fit");
        let p = out[i].point;
        for q in out.iter_mut().filter(|q| (q.point - p).norm() < 1e-12 || (q.point - p.conj()).norm() < 1e-12) {
            q.multiplicity -= 1;
            order -= 1;
        }
    }
    InterpolationSpec::new(out).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn order_zero_moment_is_eval_tf(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = system(&mut r, 2, 30);
        for s in random_points(&mut r, 8) {
            prop_assert_eq!(moment(&sys, s, 0).unwrap(), eval_tf(&sys, s).unwrap());
        }
    }

    #[test]
    fn table_via_pi_matches_direct_moments(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = system(&mut r, 8, 30);
        let spec = random_spec(&mut r, 8);
        let via = moment_table_via_pi(&sys, &spec).unwrap();
        let direct = moment_table_direct(&sys, &spec).unwrap();
        prop_assert_eq!(via.entries.len(), spec.order());
        for (a, b) in via.entries.iter().zip(&direct.entries) {
            prop_assert_eq!((a.point, a.order), (b.point, b.order));
            let oracle = moment_oracle(&sys, a.point, a.order);
            prop_assert!((a.value - oracle).norm() <= 1e-9 * oracle.norm(), "{a:?} vs {oracle}");
            prop_assert!((b.value - oracle).norm() <= 1e-9 * oracle.norm());
        }
    }

    #[test]
    fn derivative_upsilon_tabulates_divided_differences(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = system(&mut r, 8, 30);
        let nu = r.random_range(2..=8);
        let pts = random_points(&mut r, nu);
        let ones = CVec::from_element(nu, c(1.0, 0.0));
        let y = solve_upsilon(&diag(&pts), &sys, &ones, &sys.c_complex()).unwrap();
        let pi = solve_pi(&sys, &diag(&pts), &ones.transpose()).unwrap();
        let yb = &y * sys.b_complex();
        let ypi = &y * &pi;
        let k: Vec<_> = pts.iter().map(|&s| k_oracle(&sys, s)).collect();
        let scale = ypi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..nu {
            prop_assert!((yb[i] - k[i]).norm() <= 1e-10 * k[i].norm());
            for j in 0..nu {
                let want = if i == j {
                    -dk_oracle(&sys, pts[i])
                } else {
                    -(k[i] - k[j]) / (pts[i] - pts[j])
                };
                prop_assert!((ypi[(i, j)] - want).norm() <= 1e-9 * scale, "({i}, {j})");
            }
        }
    }
}
