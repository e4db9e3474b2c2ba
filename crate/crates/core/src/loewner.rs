//! Generalized Loewner matrices: the data-driven form of the moment-matching
//! family with `ell` prescribed poles and `nu - ell` first-order matches.
//!
//! Left points are `lambda_1..lambda_ell` followed by `s_{ell+1}..s_nu`;
//! right points are `s_1..s_nu`. With `LL = -Y Pi`, `sLL = LL S + V L`,
//! `V = Y B`, `W = C Pi`:
//!
//! * derivative rows hold divided differences of `K` (`K'(s_i)` on the
//!   diagonal) and of `sK` (`K(s_i) + s_i K'(s_i)` on the diagonal);
//! * pole rows hold `w_i / (lambda_i - s_j)` and `w_i lambda_i / (lambda_i - s_j)`
//!   with `V_i = w_i`. The weight `w_i = C_P (lambda_i I - A)^{-1} B` only
//!   scales the row, so data-only reduction uses `w_i = 1`.
//!
//! Then `G = -LL^{-1} V` and `K_G(s) = W (sLL - s LL)^{-1} V`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{cond2, diag, eigenvalues, sort_spectrum, CMat, CRow, CVec, Factored, ONE};
use crate::constraints::{build_reduced, ReducedModel};
use crate::lti::{StateSpace, TransferSample, CONJ_TOL};
use crate::moments::{build_upsilon_blocks, check_distinct_poles, pole_annihilator};
use crate::sylvester::solve_pi;

fn same(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= CONJ_TOL * a.norm().max(b.norm()).max(1.0)
}

/// Which sign pattern fills the matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// The convention under which `LL = -Y Pi` and `G = -LL^{-1} V` hold.
    #[default]
    Consistent,
    /// Pole rows from samples `K(lambda_i)` and negated derivative rows, as
    /// in the original published tables. The resulting pair does not place
    /// the prescribed poles; kept for comparison only.
    PaperLiteral,
}

/// Samples for the generalized Loewner construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerData {
    /// `lambda_1..lambda_ell`.
    pub poles: Vec<Complex64>,
    /// Row weights of the pole block (ones unless taken from a realization).
    pub pole_weights: Vec<Complex64>,
    /// `s_1..s_nu`.
    pub points: Vec<Complex64>,
    /// `K(s_j)`.
    pub values: Vec<Complex64>,
    /// `K'(s_i)` for `i = ell+1..nu`.
    pub derivatives: Vec<Complex64>,
    /// `K(lambda_i)`, used only by [`SignConvention::PaperLiteral`].
    pub pole_values: Option<Vec<Complex64>>,
}

fn closed(set: &[Complex64]) -> bool {
    set.iter().all(|&p| set.iter().any(|&q| same(q, p.conj())))
}

impl LoewnerData {
    pub fn ell(&self) -> usize {
        self.poles.len()
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (ell, nu) = (self.ell(), self.order());
        if ell > nu {
            return Err(Error::Invalid(format!("{ell} poles exceed the order {nu}")));
        }
        if self.values.len() != nu || self.pole_weights.len() != ell || self.derivatives.len() != nu - ell {
            return Err(Error::Dimension("Loewner data lengths disagree".into()));
        }
        check_distinct_poles(&self.poles)?;
        for (i, &s) in self.points.iter().enumerate() {
            if self.points[..i].iter().any(|&t| same(s, t)) {
                return Err(Error::Invalid(format!("interpolation point {s} is repeated")));
            }
        }
        if !closed(&self.poles) {
            return Err(Error::NotConjugateSymmetric("prescribed poles".into()));
        }
        if !closed(&self.points[..ell]) || !closed(&self.points[ell..]) {
            return Err(Error::NotConjugateSymmetric(
                "the pole block s_1..s_ell and the derivative block must each be closed under conjugation".into(),
            ));
        }
        Ok(())
    }

    /// Gathers values and derivatives from a sample set.
    ///
    /// With `points` given, the first `ell` form the pole block and the rest
    /// the derivative block. Otherwise the points are every order-0 sample
    /// that is not a prescribed pole, those without a derivative sample
    /// first, each group in spectral order.
    pub fn from_samples(
        samples: &[TransferSample],
        poles: &[Complex64],
        points: Option<&[Complex64]>,
    ) -> Result<Self> {
        crate::lti::validate_samples(samples)?;
        let find = |p: Complex64, order: usize| {
            samples.iter().find(|t| t.order == order && same(t.point, p)).map(|t| t.value)
        };
        let points: Vec<Complex64> = match points {
            Some(p) => p.to_vec(),
            None => {
                let (mut plain, mut with_deriv): (Vec<Complex64>, Vec<Complex64>) = samples
                    .iter()
                    .filter(|t| t.order == 0 && !poles.iter().any(|&l| same(l, t.point)))
                    .map(|t| t.point)
                    .partition(|&p| find(p, 1).is_none());
                sort_spectrum(&mut plain);
                sort_spectrum(&mut with_deriv);
                plain.extend(with_deriv);
                plain
            }
        };
        let ell = poles.len();
        if ell > points.len() {
            return Err(Error::Invalid(format!(
                "{ell} poles but only {} interpolation points",
                points.len()
            )));
        }
        let values = points
            .iter()
            .map(|&p| find(p, 0).ok_or(Error::MissingSample(p)))
            .collect::<Result<Vec<_>>>()?;
        let derivatives = points[ell..]
            .iter()
            .map(|&p| find(p, 1).ok_or(Error::MissingDerivative(p)))
            .collect::<Result<Vec<_>>>()?;
        let pole_values = poles.iter().map(|&p| find(p, 0)).collect::<Option<Vec<_>>>();
        let data = Self {
            poles: poles.to_vec(),
            pole_weights: vec![ONE; ell],
            points,
            values,
            derivatives,
            pole_values,
        };
        data.validate()?;
        Ok(data)
    }

    /// Samples of `sys` at the given points, with pole weights taken from the
    /// realization so that the data route reproduces `-Y Pi` entrywise.
    pub fn from_realization(sys: &StateSpace, poles: &[Complex64], points: &[Complex64]) -> Result<Self> {
        let ell = poles.len();
        let values = points.iter().map(|&p| crate::lti::eval_tf(sys, p)).collect::<Result<Vec<_>>>()?;
        let derivatives = points[ell.min(points.len())..]
            .iter()
            .map(|&p| crate::lti::eval_tf_deriv(sys, p, 1))
            .collect::<Result<Vec<_>>>()?;
        let pole_weights = if ell == 0 {
            Vec::new()
        } else {
            let l = CRow::from_element(points.len(), ONE);
            let pi = solve_pi(sys, &diag(points), &l)?;
            let c_p = pole_annihilator(sys, &pi, poles)?;
            poles
                .iter()
                .map(|&p| {
                    let x = sys.resolvent(p)?.solve_vec(&sys.b_complex()).ok_or(Error::SingularShift {
                        shift: p,
                        rcond: 0.0,
                    })?;
                    Ok((&c_p * x)[0])
                })
                .collect::<Result<Vec<_>>>()?
        };
        let pole_values = poles.iter().map(|&p| crate::lti::eval_tf(sys, p).ok()).collect();
        let data = Self {
            poles: poles.to_vec(),
            pole_weights,
            points: points.to_vec(),
            values,
            derivatives,
            pole_values,
        };
        data.validate()?;
        Ok(data)
    }
}

/// Approximates `K'(point)` from the value at `point` and its two nearest
/// other order-0 samples: the derivative of the interpolating quadratic.
pub fn estimate_derivative(samples: &[TransferSample], point: Complex64) -> Result<Complex64> {
    let here = samples
        .iter()
        .find(|t| t.order == 0 && same(t.point, point))
        .ok_or(Error::MissingSample(point))?;
    let mut others: Vec<&TransferSample> = samples
        .iter()
        .filter(|t| t.order == 0 && !same(t.point, point))
        .collect();
    if others.len() < 2 {
        return Err(Error::MissingDerivative(point));
    }
    others.sort_by(|a, b| (a.point - point).norm().total_cmp(&(b.point - point).norm()));
    let (p0, f0) = (here.point, here.value);
    let (p1, f1) = (others[0].point, others[0].value);
    let (p2, f2) = (others[1].point, others[1].value);
    let d01 = (f1 - f0) / (p1 - p0);
    let d12 = (f2 - f1) / (p2 - p1);
    let d012 = (d12 - d01) / (p2 - p0);
    Ok(d01 + d012 * (p0 - p1))
}

/// Loewner and shifted Loewner matrices with the generator data.
#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerPair {
    pub ll: CMat,
    pub sll: CMat,
    pub v: CVec,
    pub w: CRow,
    pub s: CMat,
    pub q: CMat,
    pub l: CRow,
    /// Input of the left equation on `C`: zero on pole rows, one on
    /// derivative rows.
    pub r: CVec,
}

fn generator(poles: &[Complex64], points: &[Complex64]) -> (CMat, CMat, CRow, CVec) {
    let ell = poles.len();
    let nu = points.len();
    let left: Vec<Complex64> = poles.iter().chain(&points[ell..]).copied().collect();
    let r = CVec::from_fn(nu, |i, _| if i < ell { Complex64::new(0.0, 0.0) } else { ONE });
    (diag(points), diag(&left), CRow::from_element(nu, ONE), r)
}

/// Fills the pair cell by cell from samples.
pub fn build_loewner_from_data(data: &LoewnerData, convention: SignConvention) -> Result<LoewnerPair> {
    data.validate()?;
    let (ell, nu) = (data.ell(), data.order());
    let pole_values = match convention {
        SignConvention::Consistent => None,
        SignConvention::PaperLiteral => Some(
            data.pole_values
                .clone()
                .ok_or_else(|| Error::MissingSample(data.poles[0]))?,
        ),
    };
    let k = &data.values;
    let s = &data.points;
    let cell = |i: usize, j: usize| -> Result<(Complex64, Complex64)> {
        if i < ell {
            let lambda = data.poles[i];
            if same(lambda, s[j]) {
                return Err(Error::CoincidentPoints { left: lambda, right: s[j] });
            }
            let den = lambda - s[j];
            return Ok(match &pole_values {
                None => {
                    let w = data.pole_weights[i];
                    (w / den, w * lambda / den)
                }
                Some(kl) => ((kl[i] - k[j]) / den, -(lambda * kl[i] - s[j] * k[j]) / den),
            });
        }
        let sign = if pole_values.is_some() { -1.0 } else { 1.0 };
        if i == j {
            let d = data.derivatives[i - ell];
            let shifted = match pole_values {
                None => k[i] + s[i] * d,
                Some(_) => -s[i] * d,
            };
            return Ok((d * sign, shifted));
        }
        if same(s[i], s[j]) {
            return Err(Error::CoincidentPoints { left: s[i], right: s[j] });
        }
        let den = s[i] - s[j];
        Ok(((k[i] - k[j]) / den * sign, (s[i] * k[i] - s[j] * k[j]) / den * sign))
    };
    let cells: Vec<(Complex64, Complex64)> = (0..nu * nu)
        .into_par_iter()
        .map(|idx| cell(idx / nu, idx % nu))
        .collect::<Result<Vec<_>>>()?;
    let ll = CMat::from_fn(nu, nu, |i, j| cells[i * nu + j].0);
    let sll = CMat::from_fn(nu, nu, |i, j| cells[i * nu + j].1);
    let v = CVec::from_fn(nu, |i, _| match &pole_values {
        _ if i >= ell => k[i],
        None => data.pole_weights[i],
        Some(kl) => kl[i],
    });
    let (s_mat, q, l, r) = generator(&data.poles, s);
    Ok(LoewnerPair { ll, sll, v, w: CRow::from_row_slice(k), s: s_mat, q, l, r })
}

/// The same pair from a realization: `(-Y Pi, -Y Pi S + Y B L, Y B, C Pi)`.
pub fn build_loewner_from_realization(
    sys: &StateSpace,
    poles: &[Complex64],
    points: &[Complex64],
) -> Result<LoewnerPair> {
    let ell = poles.len();
    if ell > points.len() {
        return Err(Error::Invalid("more poles than interpolation points".into()));
    }
    let (s, q, l, r) = generator(poles, points);
    let pi = solve_pi(sys, &s, &l)?;
    let c_p = if ell > 0 { Some(pole_annihilator(sys, &pi, poles)?) } else { None };
    let q_d = diag(&points[ell..]);
    let r_d = CVec::from_element(points.len() - ell, ONE);
    let up = build_upsilon_blocks(sys, &q_d, &r_d, poles, c_p.as_ref())?;
    let ypi = &up.stacked * &pi;
    if Factored::new(&ypi).is_singular() {
        return Err(Error::SingularLoewner { cond: cond2(&ypi) });
    }
    let ll = -&ypi;
    let sll = &ll * &s + &up.yb * &l;
    Ok(LoewnerPair { ll, sll, v: up.yb, w: sys.c_complex() * &pi, s, q, l, r })
}

impl LoewnerPair {
    pub fn order(&self) -> usize {
        self.ll.nrows()
    }

    /// Relative residuals of `LL S - Q LL = r W - V L` and
    /// `sLL S - Q sLL = r W S - Q V L`.
    pub fn sylvester_residuals(&self) -> (f64, f64) {
        let rw = &self.r * &self.w;
        let vl = &self.v * &self.l;
        let first = &self.ll * &self.s - &self.q * &self.ll - (&rw - &vl);
        let scale1 = self.ll.norm() * (self.s.norm() + self.q.norm()) + rw.norm() + vl.norm();
        let second = &self.sll * &self.s - &self.q * &self.sll - (&rw * &self.s - &self.q * &vl);
        let scale2 = self.sll.norm() * (self.s.norm() + self.q.norm())
            + rw.norm() * self.s.norm()
            + self.q.norm() * vl.norm();
        (first.norm() / scale1.max(f64::MIN_POSITIVE), second.norm() / scale2.max(f64::MIN_POSITIVE))
    }

    /// Relative residual of `sLL = LL S + V L`.
    pub fn shift_residual(&self) -> f64 {
        let rhs = &self.ll * &self.s + &self.v * &self.l;
        (&self.sll - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE)
    }

    /// Eigenvalues of the pencil `sLL - s LL`.
    pub fn pencil_eigenvalues(&self) -> Result<Vec<Complex64>> {
        let f = Factored::new(&self.ll);
        if f.is_singular() {
            return Err(Error::SingularLoewner { cond: cond2(&self.ll) });
        }
        let m = f.solve(&self.sll).ok_or(Error::SingularLoewner { cond: f64::INFINITY })?;
        let mut e = eigenvalues(&m);
        sort_spectrum(&mut e);
        Ok(e)
    }
}

/// `G = -LL^{-1} V` and the family member it selects.
pub fn reduce_from_loewner(pair: &LoewnerPair) -> Result<(CVec, ReducedModel)> {
    let f = Factored::new(&pair.ll);
    if f.is_singular() {
        return Err(Error::SingularLoewner { cond: cond2(&pair.ll) });
    }
    let g = -f.solve_vec(&pair.v).ok_or(Error::SingularLoewner { cond: f64::INFINITY })?;
    let model = build_reduced(pair.s.clone(), pair.l.clone(), g.clone(), pair.w.clone())?;
    Ok((g, model))
}

/// `W (sLL - s LL)^{-1} V`.
pub fn eval_loewner_tf(pair: &LoewnerPair, s: Complex64) -> Result<Complex64> {
    let m = &pair.sll - &pair.ll * s;
    let f = Factored::new(&m);
    if f.is_singular() {
        return Err(Error::SingularPencil(s));
    }
    let x = f.solve_vec(&pair.v).ok_or(Error::SingularPencil(s))?;
    Ok((&pair.w * x)[0])
}

/// Change of coordinates `LL -> T_Q^{-1} LL T_S` (and likewise for every
/// other member of the pair); the reduced transfer function is invariant.
pub fn transform_loewner(pair: &LoewnerPair, t_q: &CMat, t_s: &CMat) -> Result<LoewnerPair> {
    let nu = pair.order();
    if t_q.shape() != (nu, nu) || t_s.shape() != (nu, nu) {
        return Err(Error::Dimension("transformations must be nu x nu".into()));
    }
    let inv = |t: &CMat| -> Result<CMat> {
        let f = Factored::new(t);
        if f.is_singular() {
            return Err(Error::SingularTransform);
        }
        f.solve(&CMat::identity(nu, nu)).ok_or(Error::SingularTransform)
    };
    let tq_inv = inv(t_q)?;
    let ts_inv = inv(t_s)?;
    Ok(LoewnerPair {
        ll: &tq_inv * &pair.ll * t_s,
        sll: &tq_inv * &pair.sll * t_s,
        v: &tq_inv * &pair.v,
        w: &pair.w * t_s,
        s: &ts_inv * &pair.s * t_s,
        q: &tq_inv * &pair.q * t_q,
        l: &pair.l * t_s,
        r: &tq_inv * &pair.r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn first_order() -> StateSpace {
        StateSpace::from_rows(&[&[-1.0]], &[1.0], &[1.0]).unwrap()
    }

    fn k(s: Complex64) -> Complex64 {
        ONE / (s + 1.0)
    }

    #[test]
    fn divided_difference_cell() {
        // Left point 2 against right point 0 in a derivative row: nu = 2,
        // s = (0, 2), no poles, so cell (1, 0) pairs a = 2 with s = 0.
        let data = LoewnerData {
            poles: vec![],
            pole_weights: vec![],
            points: vec![c(0.0, 0.0), c(2.0, 0.0)],
            values: vec![k(c(0.0, 0.0)), k(c(2.0, 0.0))],
            derivatives: vec![c(-1.0, 0.0), c(-1.0 / 9.0, 0.0)],
            pole_values: None,
        };
        let p = build_loewner_from_data(&data, SignConvention::Consistent).unwrap();
        assert!((p.ll[(1, 0)] - c(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((p.sll[(1, 0)] - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((p.ll[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(p.shift_residual() < 1e-15);
    }

    #[test]
    fn derivative_diagonal() {
        let data = LoewnerData::from_realization(&first_order(), &[], &[c(1.0, 0.0)]).unwrap();
        let p = build_loewner_from_data(&data, SignConvention::Consistent).unwrap();
        assert!((p.ll[(0, 0)] - c(-0.25, 0.0)).norm() < 1e-15);
        let r = build_loewner_from_realization(&first_order(), &[], &[c(1.0, 0.0)]).unwrap();
        assert!((r.ll[(0, 0)] - c(-0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_pole_walkthrough() {
        let samples = vec![
            TransferSample::new(c(0.0, 0.0), c(1.0, 0.0), 0),
            TransferSample::new(c(-2.0, 0.0), c(-1.0, 0.0), 0),
        ];
        let data = LoewnerData::from_samples(&samples, &[c(-2.0, 0.0)], Some(&[c(0.0, 0.0)])).unwrap();
        let pair = build_loewner_from_data(&data, SignConvention::Consistent).unwrap();
        assert_eq!(pair.ll[(0, 0)], c(-0.5, 0.0));
        let (g, model) = reduce_from_loewner(&pair).unwrap();
        assert_eq!(g[0], c(2.0, 0.0));
        assert_eq!(model.f()[(0, 0)], c(-2.0, 0.0));
        let probe = c(0.7, 0.3);
        let expect = 2.0 / (probe + 2.0);
        assert!((eval_loewner_tf(&pair, probe).unwrap() - expect).norm() < 1e-15);

        // The literal sign pattern interpolates K(-2) instead of placing -2.
        let literal = build_loewner_from_data(&data, SignConvention::PaperLiteral).unwrap();
        assert_eq!(literal.ll[(0, 0)], c(1.0, 0.0));
        let (_, m) = reduce_from_loewner(&literal).unwrap();
        assert_eq!(m.f()[(0, 0)], c(-1.0, 0.0));
    }

    #[test]
    fn missing_derivative_and_coincidence() {
        let samples = vec![
            TransferSample::new(c(0.0, 0.0), c(1.0, 0.0), 0),
            TransferSample::new(c(1.0, 0.0), c(0.5, 0.0), 0),
        ];
        assert!(matches!(
            LoewnerData::from_samples(&samples, &[], Some(&[c(0.0, 0.0), c(1.0, 0.0)])),
            Err(Error::MissingDerivative(_))
        ));
        let data = LoewnerData {
            poles: vec![c(0.0, 0.0)],
            pole_weights: vec![ONE],
            points: vec![c(0.0, 0.0)],
            values: vec![ONE],
            derivatives: vec![],
            pole_values: None,
        };
        assert!(matches!(
            build_loewner_from_data(&data, SignConvention::Consistent),
            Err(Error::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn identity_transform_is_a_no_op() {
        let pair = build_loewner_from_realization(&first_order(), &[], &[c(1.0, 0.0)]).unwrap();
        let id = CMat::identity(1, 1);
        assert_eq!(transform_loewner(&pair, &id, &id).unwrap(), pair);
        let zero = CMat::zeros(1, 1);
        assert!(matches!(transform_loewner(&pair, &zero, &id), Err(Error::SingularTransform)));
    }

    #[test]
    fn derivative_estimate_is_exact_for_quadratics() {
        let f = |s: Complex64| s * s * 0.5 - s + 2.0;
        let pts = [c(0.0, 0.0), c(0.1, 0.0), c(-0.2, 0.0), c(3.0, 0.0)];
        let samples: Vec<TransferSample> = pts.iter().map(|&p| TransferSample::new(p, f(p), 0)).collect();
        let d = estimate_derivative(&samples, c(0.0, 0.0)).unwrap();
        assert!((d - c(-1.0, 0.0)).norm() < 1e-13);
    }
}
