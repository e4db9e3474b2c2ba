//! Linear conditions on the free vector `G` of the moment-matching family
//! `F = S - GL`, input `G`, output `W = C Pi`, and the family member they pin.
//!
//! Three row groups are stacked into one square system:
//! pole rows (`det(lambda I - S + GL) = 0`), zero rows (`K_G(z) = 0`) and
//! derivative rows (`Y_D Pi G = Y_D B`, first-order moments).

use log::warn;
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::serde_complex;
use crate::error::{Error, Result};
use crate::linalg::{
    cond2, distance_to_set, eigenvalues, is_diagonal, min_separation, numerical_rank, rank_tol, CMat, CRow,
    CVec, Factored, ONE,
};
use crate::lti::{eval_deriv_complex, ComplexStateSpace, Pairing, StateSpace, CONJ_TOL};
use crate::moments::{
    build_upsilon_blocks, check_distinct_poles, derivative_block, pole_annihilator,
    InterpolationSpec,
};
use crate::sylvester::solve_pi;

/// Default relative tolerance of the constraint solve.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Gap below which `sigma(S - GL)` is considered to meet `sigma(S)`, relative
/// to `max(1, max |s_i|)`.
pub const FAMILY_GAP: f64 = 1e-8;

fn same(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= CONJ_TOL * a.norm().max(b.norm()).max(1.0)
}

/// Prescribed poles, zeros and first-order matching points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    #[serde(default, with = "serde_complex::vec")]
    pub poles: Vec<Complex64>,
    #[serde(default, with = "serde_complex::vec")]
    pub zeros: Vec<Complex64>,
    #[serde(default, with = "serde_complex::vec")]
    pub derivative_points: Vec<Complex64>,
}

fn check_conjugate_closed(what: &str, set: &[Complex64]) -> Result<()> {
    for &p in set {
        if !set.iter().any(|&q| same(q, p.conj())) {
            return Err(Error::NotConjugateSymmetric(format!("{what} {p} has no conjugate partner")));
        }
    }
    Ok(())
}

impl ConstraintSpec {
    pub fn ell(&self) -> usize {
        self.poles.len()
    }

    pub fn k(&self) -> usize {
        self.zeros.len()
    }

    /// Number of derivative rows: the sizes of the Jordan blocks selected by
    /// the derivative points.
    pub fn mu(&self, spec: &InterpolationSpec) -> usize {
        self.derivative_points
            .iter()
            .filter_map(|&p| spec.find(p))
            .map(|i| spec.block(i).len())
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        check_conjugate_closed("pole", &self.poles)?;
        check_conjugate_closed("zero", &self.zeros)?;
        check_conjugate_closed("derivative point", &self.derivative_points)?;
        check_distinct_poles(&self.poles)?;
        for (i, &z) in self.zeros.iter().enumerate() {
            if self.zeros[..i].iter().any(|&y| same(y, z)) {
                return Err(Error::Invalid(format!("prescribed zero {z} is repeated")));
            }
        }
        Ok(())
    }
}

/// A group of linear conditions `rows * G = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowBlock {
    pub rows: CMat,
    pub rhs: CVec,
}

impl RowBlock {
    pub fn empty(nu: usize) -> Self {
        Self { rows: CMat::zeros(0, nu), rhs: CVec::zeros(0) }
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    fn stack(blocks: &[&RowBlock], nu: usize) -> Self {
        let total: usize = blocks.iter().map(|b| b.len()).sum();
        let mut rows = CMat::zeros(total, nu);
        let mut rhs = CVec::zeros(total);
        let mut at = 0;
        for b in blocks {
            rows.view_mut((at, 0), (b.len(), nu)).copy_from(&b.rows);
            rhs.rows_mut(at, b.len()).copy_from(&b.rhs);
            at += b.len();
        }
        Self { rows, rhs }
    }
}

fn require_canonical(s: &CMat, l: &CRow, what: &str) -> Result<()> {
    if !is_diagonal(s) || l.iter().any(|&x| x != ONE) {
        return Err(Error::Invalid(format!(
            "{what} require a diagonal S with L = [1, ..., 1]"
        )));
    }
    Ok(())
}

/// Rows `1 / (lambda_k - s_i)`, right-hand side `-1`: the Sherman-Morrison
/// form `1 + L D_k^{-1} G = 0` of `det(D_k + GL) = 0`, `D_k = lambda_k I - S`.
pub fn pole_rows_diagonal(s: &CMat, l: &CRow, poles: &[Complex64]) -> Result<RowBlock> {
    require_canonical(s, l, "explicit pole rows")?;
    let nu = s.nrows();
    let mut rows = CMat::zeros(poles.len(), nu);
    for (k, &lambda) in poles.iter().enumerate() {
        for i in 0..nu {
            let theta = lambda - s[(i, i)];
            if same(lambda, s[(i, i)]) {
                return Err(Error::PoleCoincidesWithPoint { pole: lambda, point: s[(i, i)] });
            }
            rows[(k, i)] = ONE / theta;
        }
    }
    Ok(RowBlock { rows, rhs: CVec::from_element(poles.len(), -ONE) })
}

/// Rows `Y_P Pi`, right-hand side `Y_P B`, for any generator.
pub fn pole_rows_general(y_p: &CMat, pi: &CMat, b: &CVec) -> Result<RowBlock> {
    let rows = y_p * pi;
    let ell = rows.nrows();
    let rank = numerical_rank(&rows);
    if rank < ell {
        return Err(Error::RankDeficient { what: "Y_P Pi".into(), rank, expected: ell });
    }
    Ok(RowBlock { rows, rhs: y_p * b })
}

/// Rows `eta_i / (z_j - s_i)` with zero right-hand side, where `eta = W`.
pub fn zero_rows(w: &CRow, s: &CMat, l: &CRow, zeros: &[Complex64]) -> Result<RowBlock> {
    require_canonical(s, l, "zero rows")?;
    let nu = s.nrows();
    let mut rows = CMat::zeros(zeros.len(), nu);
    let scale = w.norm();
    for (j, &z) in zeros.iter().enumerate() {
        for i in 0..nu {
            if same(z, s[(i, i)]) {
                return Err(Error::ZeroCoincidesWithPoint { zero: z, point: s[(i, i)] });
            }
            rows[(j, i)] = w[i] / (z - s[(i, i)]);
        }
        let row_norm = rows.row(j).norm();
        if row_norm == 0.0 || row_norm <= f64::EPSILON * scale {
            return Err(Error::DegenerateRow(z));
        }
    }
    Ok(RowBlock { rows, rhs: CVec::zeros(zeros.len()) })
}

/// Rows `Y_D Pi`, right-hand side `Y_D B`.
pub fn deriv_rows(y_d: &CMat, pi: &CMat, b: &CVec) -> RowBlock {
    RowBlock { rows: y_d * pi, rhs: y_d * b }
}

/// Which construction produces the pole rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoleRoute {
    /// Explicit rows when the generator is canonical, otherwise `Y_P Pi`.
    #[default]
    Auto,
    Explicit,
    Sylvester,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Accept fewer conditions than `nu` and return the minimum-norm `G`.
    pub least_norm: bool,
    pub pole_route: PoleRoute,
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { least_norm: false, pole_route: PoleRoute::Auto, tol: DEFAULT_TOL }
    }
}

/// Everything needed to solve for `G` and build the model.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub s: CMat,
    pub l: CRow,
    pub pi: CMat,
    pub w: CRow,
    pub poles: RowBlock,
    pub zeros: RowBlock,
    pub derivs: RowBlock,
}

impl ConstraintSystem {
    pub fn order(&self) -> usize {
        self.s.nrows()
    }

    /// All rows stacked in pole, zero, derivative order.
    pub fn stacked(&self) -> RowBlock {
        RowBlock::stack(&[&self.poles, &self.zeros, &self.derivs], self.order())
    }
}

pub fn assemble(
    sys: &StateSpace,
    spec: &InterpolationSpec,
    cons: &ConstraintSpec,
    opts: &SolveOptions,
) -> Result<ConstraintSystem> {
    cons.validate()?;
    sys.warn_if_not_minimal();
    let nu = spec.order();
    let (s, l) = spec.generator();
    let mu = cons.mu(spec);
    let rows = cons.ell() + cons.k() + mu;
    if rows > nu || (rows < nu && !opts.least_norm) {
        return Err(Error::NonSquare { rows, order: nu });
    }
    let diag = spec.diagonal();
    for &p in &cons.poles {
        if let Some(&point) = diag.iter().find(|&&s| same(s, p)) {
            return Err(Error::PoleCoincidesWithPoint { pole: p, point });
        }
    }
    for &z in &cons.zeros {
        if let Some(&point) = diag.iter().find(|&&s| same(s, z)) {
            return Err(Error::ZeroCoincidesWithPoint { zero: z, point });
        }
    }
    let pi = solve_pi(sys, &s, &l)?;
    let b = sys.b_complex();
    let w = sys.c_complex() * &pi;

    let explicit = match opts.pole_route {
        PoleRoute::Auto => spec.is_diagonal(),
        PoleRoute::Explicit => true,
        PoleRoute::Sylvester => false,
    };
    let (q_d, r_d) = derivative_block(spec, &cons.derivative_points)?;
    let (poles, derivs) = if explicit || cons.poles.is_empty() {
        let up = build_upsilon_blocks(sys, &q_d, &r_d, &[], None)?;
        let poles = if cons.poles.is_empty() {
            RowBlock::empty(nu)
        } else {
            pole_rows_diagonal(&s, &l, &cons.poles)?
        };
        (poles, deriv_rows(&up.deriv, &pi, &b))
    } else {
        let c_p = pole_annihilator(sys, &pi, &cons.poles)?;
        let up = build_upsilon_blocks(sys, &q_d, &r_d, &cons.poles, Some(&c_p))?;
        (pole_rows_general(&up.pole, &pi, &b)?, deriv_rows(&up.deriv, &pi, &b))
    };
    let zeros = if cons.zeros.is_empty() {
        RowBlock::empty(nu)
    } else {
        zero_rows(&w, &s, &l, &cons.zeros)?
    };
    Ok(ConstraintSystem { s, l, pi, w, poles, zeros, derivs })
}

/// Solves the stacked conditions. Square systems use one LU solve; the
/// least-norm mode returns the minimum 2-norm solution of an underdetermined
/// system of full row rank.
pub fn solve_g(system: &ConstraintSystem, opts: &SolveOptions) -> Result<CVec> {
    let nu = system.order();
    let RowBlock { rows, rhs } = system.stacked();
    let g = if rows.nrows() == nu {
        let f = Factored::new(&rows);
        if f.is_singular() {
            return Err(Error::SingularSystem { cond: cond2(&rows) });
        }
        f.solve_vec(&rhs).ok_or(Error::SingularSystem { cond: f64::INFINITY })?
    } else if opts.least_norm && rows.nrows() < nu {
        if rows.nrows() == 0 {
            CVec::zeros(nu)
        } else {
            let rank = numerical_rank(&rows);
            if rank < rows.nrows() {
                return Err(Error::SingularSystem { cond: cond2(&rows) });
            }
            // SVD rather than normal equations, which would square the condition number.
            let svd = rows.clone().svd(true, true);
            let eps = rank_tol(rows.nrows(), rows.ncols(), svd.singular_values.max());
            svd.solve(&rhs, eps).map_err(|_| Error::SingularSystem { cond: cond2(&rows) })?
        }
    } else {
        return Err(Error::NonSquare { rows: rows.nrows(), order: nu });
    };
    let residual = (&rows * &g - &rhs).norm();
    let bound = opts.tol * (rows.norm() * g.norm() + rhs.norm());
    if !(residual <= bound) {
        return Err(Error::SingularSystem { cond: cond2(&rows) });
    }
    Ok(g)
}

/// A member of the moment-matching family, kept in the coordinates of the
/// generator: `F = S - GL`, input `G`, output `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub s: CMat,
    pub l: CRow,
    pub g: CVec,
    pub w: CRow,
}

/// Checks the family validity condition `sigma(S - GL) ∩ sigma(S) = ∅`.
pub fn build_reduced(s: CMat, l: CRow, g: CVec, w: CRow) -> Result<ReducedModel> {
    let nu = s.nrows();
    if !s.is_square() || l.len() != nu || g.len() != nu || w.len() != nu {
        return Err(Error::Dimension("S, L, G and W sizes disagree".into()));
    }
    let model = ReducedModel { s, l, g, w };
    let s_eigs = eigenvalues(&model.s);
    let scale = s_eigs.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let gap = min_separation(&model.poles(), &s_eigs);
    if gap < FAMILY_GAP * scale {
        return Err(Error::FamilyInvalid { gap });
    }
    Ok(model)
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.s.nrows()
    }

    /// `S - GL`.
    pub fn f(&self) -> CMat {
        &self.s - &self.g * &self.l
    }

    pub fn poles(&self) -> Vec<Complex64> {
        let mut p = eigenvalues(&self.f());
        crate::linalg::sort_spectrum(&mut p);
        p
    }

    pub fn complex(&self) -> ComplexStateSpace {
        ComplexStateSpace { a: self.f(), b: self.g.clone(), c: self.w.clone() }
    }

    /// `K_G(s) = W (sI - S + GL)^{-1} G`.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        eval_deriv_complex(&self.f(), &self.g, &self.w, s, 0)
    }

    /// `W (sI - F)^{-(j+1)} G`, the order-`j` moment of the model.
    pub fn moment(&self, s: Complex64, j: usize) -> Result<Complex64> {
        let scale = crate::lti::deriv_scale(j);
        Ok(eval_deriv_complex(&self.f(), &self.g, &self.w, s, j)? / scale)
    }

    pub fn pairing(&self) -> Result<Pairing> {
        let d: Vec<Complex64> = self.s.diagonal().iter().copied().collect();
        Pairing::from_values(&d)
    }

    /// `G` in the real coordinates of the pairing transform.
    pub fn g_real(&self) -> Result<DVector<f64>> {
        self.pairing()?.realify_vec(&self.g)
    }

    /// Real state-space realization of the model.
    pub fn realify(&self) -> Result<StateSpace> {
        crate::lti::realify_with(&self.complex(), &self.pairing()?)
    }
}

/// Solves for `G` and builds the model: the whole pipeline from a
/// realization and constraint data.
pub fn reduce(
    sys: &StateSpace,
    spec: &InterpolationSpec,
    cons: &ConstraintSpec,
    opts: &SolveOptions,
) -> Result<ReducedModel> {
    let system = assemble(sys, spec, cons, opts)?;
    let g = solve_g(&system, opts)?;
    let cg = CVec::from_iterator(g.len(), g.iter().map(|z| z.conj()));
    if spec.is_diagonal() {
        // Conjugate-symmetric data must give a conjugate-symmetric G.
        let pairing = Pairing::from_values(&spec.diagonal())?;
        let mirrored = CVec::from_fn(g.len(), |i, _| cg[pairing.partner(i)]);
        let drift = (&g - mirrored).norm();
        if drift > CONJ_TOL * g.norm().max(1.0) {
            warn!("solved G departs from conjugate symmetry by {drift:.3e}");
        }
    }
    build_reduced(system.s, system.l, g, system.w)
}

/// One residual entry of a [`ConstraintReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    #[serde(with = "serde_complex")]
    pub point: Complex64,
    pub order: usize,
    pub abs: f64,
    pub rel: f64,
}

/// Per-constraint residuals of a reduced model against the full system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// Distance from each prescribed pole to the model spectrum.
    pub poles: Vec<Residual>,
    /// `|K_G(z)|`, relative to the largest `|K_G|` on the probe grid.
    pub zeros: Vec<Residual>,
    /// Moment mismatches at every interpolation point and order.
    pub moments: Vec<Residual>,
    /// Mismatch of the next moment at each derivative point.
    pub derivatives: Vec<Residual>,
    /// Prescribed zeros that are also model poles (possible cancellation).
    #[serde(with = "serde_complex::vec")]
    pub cancellations: Vec<Complex64>,
    pub max_real_pole: f64,
}

impl ConstraintReport {
    pub fn max_relative(&self) -> f64 {
        self.poles
            .iter()
            .chain(&self.zeros)
            .chain(&self.moments)
            .chain(&self.derivatives)
            .map(|r| r.rel)
            .fold(0.0, f64::max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_relative() <= tol
    }
}

/// Frequencies used to scale zero residuals: `0` and `j 10^k`,
/// `k in [-3, 3]` in steps of 0.05.
pub fn probe_points() -> Vec<Complex64> {
    std::iter::once(Complex64::new(0.0, 0.0))
        .chain((0..=120).map(|i| Complex64::new(0.0, 10f64.powf(-3.0 + 0.05 * i as f64))))
        .collect()
}

/// Largest `|K_G|` over [`probe_points`] and the interpolation points.
pub fn probe_scale(model: &ReducedModel) -> f64 {
    let f = model.f();
    let diag: Vec<Complex64> = model.s.diagonal().iter().copied().collect();
    probe_points()
        .into_par_iter()
        .chain(diag.into_par_iter())
        .filter_map(|s| eval_deriv_complex(&f, &model.g, &model.w, s, 0).ok())
        .map(|v| v.norm())
        .reduce(|| 0.0, f64::max)
}

fn rel(abs: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        abs / reference
    } else {
        abs
    }
}

/// Evaluates every constraint of `cons` (and every interpolation moment)
/// on `model`.
pub fn verify_constraints(
    model: &ReducedModel,
    spec: &InterpolationSpec,
    cons: &ConstraintSpec,
    full: &StateSpace,
) -> ConstraintReport {
    let spectrum = model.poles();
    let poles = cons
        .poles
        .iter()
        .map(|&p| {
            let abs = distance_to_set(p, &spectrum);
            Residual { point: p, order: 0, abs, rel: abs / p.norm().max(1.0) }
        })
        .collect();

    let scale = probe_scale(model);
    let zeros = cons
        .zeros
        .iter()
        .map(|&z| {
            let abs = model.eval(z).map(|v| v.norm()).unwrap_or(f64::INFINITY);
            Residual { point: z, order: 0, abs, rel: rel(abs, scale) }
        })
        .collect();

    let moment_pairs: Vec<(Complex64, usize)> = spec
        .points()
        .iter()
        .flat_map(|p| (0..p.multiplicity).map(move |j| (p.point, j)))
        .collect();
    let compare = |&(s, j): &(Complex64, usize)| {
        let want = crate::moments::moment(full, s, j);
        let got = model.moment(s, j);
        match (want, got) {
            (Ok(a), Ok(b)) => {
                let abs = (a - b).norm();
                Residual { point: s, order: j, abs, rel: rel(abs, a.norm()) }
            }
            _ => Residual { point: s, order: j, abs: f64::INFINITY, rel: f64::INFINITY },
        }
    };
    let moments = moment_pairs.par_iter().map(compare).collect();

    let deriv_pairs: Vec<(Complex64, usize)> = cons
        .derivative_points
        .iter()
        .filter_map(|&p| spec.find(p).map(|i| (p, spec.points()[i].multiplicity)))
        .collect();
    let derivatives = deriv_pairs.par_iter().map(compare).collect();

    let cancellations = cons
        .zeros
        .iter()
        .copied()
        .filter(|&z| distance_to_set(z, &spectrum) <= FAMILY_GAP * z.norm().max(1.0))
        .collect();

    ConstraintReport {
        poles,
        zeros,
        moments,
        derivatives,
        cancellations,
        max_real_pole: spectrum.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diag};

    fn first_order() -> StateSpace {
        StateSpace::from_rows(&[&[-1.0]], &[1.0], &[1.0]).unwrap()
    }

    fn ones(n: usize) -> CRow {
        CRow::from_element(n, ONE)
    }

    #[test]
    fn explicit_pole_row_examples() {
        let r = pole_rows_diagonal(&diag(&[c(0.0, 0.0)]), &ones(1), &[c(-2.0, 0.0)]).unwrap();
        assert_eq!(r.rows[(0, 0)], c(-0.5, 0.0));
        assert_eq!(r.rhs[0], c(-1.0, 0.0));
        let r = pole_rows_diagonal(&diag(&[c(0.0, 0.0), c(1.0, 0.0)]), &ones(2), &[c(-2.0, 0.0)]).unwrap();
        assert_eq!(r.rows[(0, 0)], c(-0.5, 0.0));
        assert!((r.rows[(0, 1)] - c(-1.0 / 3.0, 0.0)).norm() < 1e-16);
        assert!(matches!(
            pole_rows_diagonal(&diag(&[c(0.0, 0.0)]), &ones(1), &[c(0.0, 0.0)]),
            Err(Error::PoleCoincidesWithPoint { .. })
        ));
    }

    #[test]
    fn zero_row_example() {
        let w = CRow::from_row_slice(&[c(1.0, 0.0), c(0.5, 0.0)]);
        let r = zero_rows(&w, &diag(&[c(0.0, 0.0), c(1.0, 0.0)]), &ones(2), &[c(-1.0, 0.0)]).unwrap();
        assert_eq!(r.rows[(0, 0)], c(-1.0, 0.0));
        assert_eq!(r.rows[(0, 1)], c(-0.25, 0.0));
        assert_eq!(r.rhs[0], c(0.0, 0.0));
        let zero_w = CRow::zeros(2);
        assert!(matches!(
            zero_rows(&zero_w, &diag(&[c(0.0, 0.0), c(1.0, 0.0)]), &ones(2), &[c(-1.0, 0.0)]),
            Err(Error::DegenerateRow(_))
        ));
    }

    #[test]
    fn derivative_row_example() {
        let sys = first_order();
        let spec = InterpolationSpec::simple(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cons = ConstraintSpec { derivative_points: vec![c(1.0, 0.0)], ..Default::default() };
        let opts = SolveOptions { least_norm: true, ..Default::default() };
        let system = assemble(&sys, &spec, &cons, &opts).unwrap();
        assert!((system.derivs.rows[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((system.derivs.rows[(0, 1)] - c(0.25, 0.0)).norm() < 1e-15);
        assert!((system.derivs.rhs[0] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_pole_placement() {
        let spec = InterpolationSpec::simple(&[c(0.0, 0.0)]).unwrap();
        let cons = ConstraintSpec { poles: vec![c(-2.0, 0.0)], ..Default::default() };
        let m = reduce(&first_order(), &spec, &cons, &SolveOptions::default()).unwrap();
        assert!((m.g[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((m.f()[(0, 0)] - c(-2.0, 0.0)).norm() < 1e-15);
        assert!((m.eval(c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn second_order_pole_and_derivative() {
        let spec = InterpolationSpec::simple(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cons = ConstraintSpec {
            poles: vec![c(-2.0, 0.0)],
            derivative_points: vec![c(1.0, 0.0)],
            ..Default::default()
        };
        let sys = first_order();
        let m = reduce(&sys, &spec, &cons, &SolveOptions::default()).unwrap();
        assert!((m.g[0] - c(-2.0, 0.0)).norm() < 1e-13);
        assert!((m.g[1] - c(6.0, 0.0)).norm() < 1e-13);
        let p = m.poles();
        assert!((p[0] - c(-1.0, 0.0)).norm() < 1e-12 && (p[1] - c(-2.0, 0.0)).norm() < 1e-12);
        let d = eval_deriv_complex(&m.f(), &m.g, &m.w, c(1.0, 0.0), 1).unwrap();
        assert!((d - c(-0.25, 0.0)).norm() < 1e-13);
        let report = verify_constraints(&m, &spec, &cons, &sys);
        assert!(report.within(1e-12), "{report:?}");
    }

    #[test]
    fn non_square_needs_least_norm() {
        let spec = InterpolationSpec::simple(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cons = ConstraintSpec { poles: vec![c(-2.0, 0.0)], ..Default::default() };
        assert!(matches!(
            reduce(&first_order(), &spec, &cons, &SolveOptions::default()),
            Err(Error::NonSquare { rows: 1, order: 2 })
        ));
        let opts = SolveOptions { least_norm: true, ..Default::default() };
        let m = reduce(&first_order(), &spec, &cons, &opts).unwrap();
        assert!(distance_to_set(c(-2.0, 0.0), &m.poles()) < 1e-12);
    }

    #[test]
    fn zero_g_is_not_a_valid_member() {
        let s = diag(&[c(0.0, 0.0)]);
        assert!(matches!(
            build_reduced(s, ones(1), CVec::zeros(1), ones(1)),
            Err(Error::FamilyInvalid { .. })
        ));
    }

    #[test]
    fn perturbed_g_keeps_moments_but_moves_poles() {
        let spec = InterpolationSpec::simple(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let cons = ConstraintSpec {
            poles: vec![c(-2.0, 0.0)],
            derivative_points: vec![c(1.0, 0.0)],
            ..Default::default()
        };
        let sys = first_order();
        let m = reduce(&sys, &spec, &cons, &SolveOptions::default()).unwrap();
        let g = &m.g + CVec::from_element(2, c(1e-2, 0.0));
        let p = build_reduced(m.s.clone(), m.l.clone(), g, m.w.clone()).unwrap();
        let report = verify_constraints(&p, &spec, &cons, &sys);
        assert!(report.moments.iter().all(|r| r.rel < 1e-13));
        assert!(report.poles[0].abs > 1e-4 && report.poles[0].abs < 1e-1);
    }
}
