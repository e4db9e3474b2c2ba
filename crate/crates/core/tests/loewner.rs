mod common;

use common::*;
use mrpz_core::constraints::{assemble, solve_g, ConstraintSpec, SolveOptions};
use mrpz_core::linalg::{cond2, distance_to_set, CMat};
use mrpz_core::loewner::{
    build_loewner_from_data, build_loewner_from_realization, eval_loewner_tf, reduce_from_loewner, transform_loewner,
    LoewnerData, LoewnerPair, SignConvention,
};
use mrpz_core::moments::InterpolationSpec;
use mrpz_core::synth::rng;
use mrpz_core::{StateSpace, TransferSample};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

struct Instance {
    sys: StateSpace,
    poles: Vec<Complex64>,
    points: Vec<Complex64>,
}

impl Instance {
    fn draw(r: &mut impl Rng) -> Self {
        let sys = system(r, 8, 30);
        let nu = r.random_range(1..=8);
        let ell = r.random_range(0..=nu);
        let (p_block, d_block) = split_points(r, ell, nu - ell);
        let points: Vec<Complex64> = p_block.into_iter().chain(d_block).collect();
        let poles = lhp_set(r, ell, &[]);
        Self { sys, poles, points }
    }

    fn ell(&self) -> usize {
        self.poles.len()
    }

    /// Plain samples: values everywhere, derivatives on the derivative block.
    fn samples(&self) -> Vec<TransferSample> {
        self.points
            .iter()
            .map(|&p| TransferSample::new(p, k_oracle(&self.sys, p), 0))
            .chain(self.points[self.ell()..].iter().map(|&p| TransferSample::new(p, dk_oracle(&self.sys, p), 1)))
            .collect()
    }

    fn data_pair(&self) -> LoewnerPair {
        let data = LoewnerData::from_samples(&self.samples(), &self.poles, Some(&self.points)).unwrap();
        build_loewner_from_data(&data, SignConvention::Consistent).unwrap()
    }
}

fn max_rel(a: &CMat, b: &CMat) -> f64 {
    rel_err(a, b)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn data_and_realization_routes_agree(seed in any::<u64>()) {
        let inst = Instance::draw(&mut rng(seed));
        // Numerically singular pairs are refused by the realization route.
        let realized = build_loewner_from_realization(&inst.sys, &inst.poles, &inst.points);
        prop_assume!(realized.is_ok());
        let realized = realized.unwrap();
        let data = LoewnerData::from_realization(&inst.sys, &inst.poles, &inst.points).unwrap();
        let from_data = build_loewner_from_data(&data, SignConvention::Consistent).unwrap();
        prop_assert!(max_rel(&from_data.ll, &realized.ll) <= 1e-9);
        prop_assert!(max_rel(&from_data.sll, &realized.sll) <= 1e-9);
        let (v1, v2) = (CMat::from_column_slice(inst.points.len(), 1, from_data.v.as_slice()), CMat::from_column_slice(inst.points.len(), 1, realized.v.as_slice()));
        prop_assert!(max_rel(&v1, &v2) <= 1e-9);
        let (w1, w2) = (CMat::from_row_slice(1, inst.points.len(), from_data.w.as_slice()), CMat::from_row_slice(1, inst.points.len(), realized.w.as_slice()));
        prop_assert!(max_rel(&w1, &w2) <= 1e-9);
    }

    #[test]
    fn shifted_matrix_identity_holds_by_construction(seed in any::<u64>()) {
        let pair = Instance::draw(&mut rng(seed)).data_pair();
        prop_assert!(pair.shift_residual() <= 1e-12, "{:.2e}", pair.shift_residual());
        let (first, second) = pair.sylvester_residuals();
        prop_assert!(first <= 1e-12 && second <= 1e-12, "{first:.2e} {second:.2e}");
    }

    #[test]
    fn coordinate_changes_leave_the_transfer_function(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = Instance::draw(&mut r);
        let pair = inst.data_pair();
        prop_assume!(cond2(&pair.ll) <= 1e6);
        let nu = pair.order();
        let mut perturbed = || {
            CMat::identity(nu, nu) + CMat::from_fn(nu, nu, |_, _| c(r.sample::<f64, _>(StandardNormal) * 0.2, r.sample::<f64, _>(StandardNormal) * 0.2))
        };
        let (t_q, t_s) = (perturbed(), perturbed());
        prop_assume!(cond2(&t_q) <= 1e3 && cond2(&t_s) <= 1e3);
        let moved = transform_loewner(&pair, &t_q, &t_s).unwrap();
        let (first, second) = moved.sylvester_residuals();
        prop_assert!(first <= 1e-9 && second <= 1e-9, "{first:.2e} {second:.2e}");
        for s in probe_grid(20) {
            if cond2(&(&pair.sll - &pair.ll * s)) > 1e6 {
                continue;
            }
            let (Ok(a), Ok(b)) = (eval_loewner_tf(&pair, s), eval_loewner_tf(&moved, s)) else { continue };
            prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-12), "at {s}: {a} vs {b}");
        }
    }
}

#[test]
fn reduced_model_interpolates_and_places_poles() {
    let mut checked = 0;
    for seed in 0.. {
        if checked == 30 {
            break;
        }
        let inst = Instance::draw(&mut rng(900 + seed));
        let pair = inst.data_pair();
        if cond2(&pair.ll) > 1e6 {
            continue;
        }
        let (_, model) = reduce_from_loewner(&pair).unwrap();
        for (j, &s) in inst.points.iter().enumerate() {
            let k = k_oracle(&inst.sys, s);
            let got = eval_loewner_tf(&pair, s).unwrap();
            assert!((got - k).norm() <= 1e-8 * k.norm(), "seed {seed}: value at {s}");
            if j >= inst.ell() {
                // First moment is -K'.
                let dk = dk_oracle(&inst.sys, s);
                let got = -model.moment(s, 1).unwrap();
                assert!((got - dk).norm() <= 1e-7 * dk.norm(), "seed {seed}: derivative at {s}");
            }
        }
        let spectrum = pair.pencil_eigenvalues().unwrap();
        for &l in &inst.poles {
            assert!(distance_to_set(l, &spectrum) <= 1e-8 * l.norm().max(1.0), "seed {seed}: pole {l}");
        }
        checked += 1;
    }
}

#[test]
fn loewner_g_equals_constraint_g() {
    let mut checked = 0;
    for seed in 0.. {
        if checked == 30 {
            break;
        }
        let inst = Instance::draw(&mut rng(1900 + seed));
        let Ok(pair) = build_loewner_from_realization(&inst.sys, &inst.poles, &inst.points) else { continue };
        let spec = InterpolationSpec::simple(&inst.points).unwrap();
        let cons = ConstraintSpec {
            poles: inst.poles.clone(),
            derivative_points: inst.points[inst.ell()..].to_vec(),
            ..Default::default()
        };
        let opts = SolveOptions::default();
        let Ok(system) = assemble(&inst.sys, &spec, &cons, &opts) else { continue };
        if cond2(&system.stacked().rows) > 1e6 || cond2(&pair.ll) > 1e6 {
            continue;
        }
        let g = solve_g(&system, &opts).unwrap();
        let (g_loewner, _) = reduce_from_loewner(&pair).unwrap();
        assert!(vec_rel_err(&g_loewner, &g) <= 1e-8, "seed {seed}");
        checked += 1;
    }
}
