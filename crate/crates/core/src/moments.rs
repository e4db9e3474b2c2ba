//! Moments of the transfer function and the structural matrices built from
//! them: the generator pair `(S, L)`, the moment row `C Pi`, the annihilator
//! `C_P` of `Pi`, and the stacked left solution `Y` with `Y B`.

use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::serde_complex;
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, CMat, CRow, CVec, ONE};
use crate::lti::{resolvent_powers, StateSpace, CONJ_TOL};
use crate::sylvester::{solve_pi, solve_upsilon};

fn same(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= CONJ_TOL * a.norm().max(b.norm()).max(1.0)
}

fn one() -> usize {
    1
}

/// An interpolation point with the number of consecutive moments
/// (orders `0..multiplicity`) matched there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationPoint {
    #[serde(with = "serde_complex")]
    pub point: Complex64,
    #[serde(default = "one")]
    pub multiplicity: usize,
}

impl InterpolationPoint {
    pub fn simple(point: Complex64) -> Self {
        Self { point, multiplicity: 1 }
    }
}

/// Distinct, conjugate-closed interpolation points. The generator `S` is
/// block diagonal with one Jordan block per point (`-1` on the
/// superdiagonal) and `L` carries `[1, 0, ..., 0]` per block, so the columns
/// of `Pi` for a block at `s` are `(sI - A)^{-1} B, (sI - A)^{-2} B, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<InterpolationPoint>", into = "Vec<InterpolationPoint>")]
pub struct InterpolationSpec {
    points: Vec<InterpolationPoint>,
}

impl TryFrom<Vec<InterpolationPoint>> for InterpolationSpec {
    type Error = Error;

    fn try_from(points: Vec<InterpolationPoint>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<InterpolationSpec> for Vec<InterpolationPoint> {
    fn from(spec: InterpolationSpec) -> Self {
        spec.points
    }
}

impl InterpolationSpec {
    pub fn new(points: Vec<InterpolationPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("at least one interpolation point is required".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.multiplicity == 0 {
                return Err(Error::Invalid(format!("point {} has multiplicity 0", p.point)));
            }
            if !p.point.is_finite() {
                return Err(Error::Invalid("interpolation points must be finite".into()));
            }
            if points[..i].iter().any(|q| same(q.point, p.point)) {
                return Err(Error::Invalid(format!("interpolation point {} is repeated", p.point)));
            }
            let mirrored = points
                .iter()
                .any(|q| same(q.point, p.point.conj()) && q.multiplicity == p.multiplicity);
            if !mirrored {
                return Err(Error::NotConjugateSymmetric(format!(
                    "interpolation point {} (multiplicity {}) has no conjugate partner",
                    p.point, p.multiplicity
                )));
            }
        }
        Ok(Self { points })
    }

    /// One moment per point.
    pub fn simple(points: &[Complex64]) -> Result<Self> {
        Self::new(points.iter().copied().map(InterpolationPoint::simple).collect())
    }

    pub fn points(&self) -> &[InterpolationPoint] {
        &self.points
    }

    /// `nu`, the sum of the multiplicities.
    pub fn order(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Every multiplicity is one, so `S` is diagonal and `L` is all ones.
    pub fn is_diagonal(&self) -> bool {
        self.points.iter().all(|p| p.multiplicity == 1)
    }

    /// Diagonal of `S`, each point repeated by its multiplicity.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.point, p.multiplicity))
            .collect()
    }

    /// Columns of `S` occupied by the block of point `index`.
    pub fn block(&self, index: usize) -> Range<usize> {
        let start: usize = self.points[..index].iter().map(|p| p.multiplicity).sum();
        start..start + self.points[index].multiplicity
    }

    /// Index of the point equal to `s`, if any.
    pub fn find(&self, s: Complex64) -> Option<usize> {
        self.points.iter().position(|p| same(p.point, s))
    }

    /// `(S, L)`.
    pub fn generator(&self) -> (CMat, CRow) {
        let nu = self.order();
        let mut s = CMat::zeros(nu, nu);
        let mut l = CRow::zeros(nu);
        for (i, p) in self.points.iter().enumerate() {
            let r = self.block(i);
            l[r.start] = ONE;
            for k in r.clone() {
                s[(k, k)] = p.point;
                if k + 1 < r.end {
                    s[(k, k + 1)] = -ONE;
                }
            }
        }
        (s, l)
    }
}

/// `eta_j(s) = (-1)^j / j! d^j K / ds^j (s) = C (sI - A)^{-(j+1)} B`.
///
/// Order zero is computed exactly like [`crate::lti::eval_tf`].
pub fn moment(sys: &StateSpace, s: Complex64, j: usize) -> Result<Complex64> {
    let powers = resolvent_powers(sys, s, j)?;
    Ok((sys.c_complex() * &powers[j])[0])
}

/// One tabulated moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEntry {
    pub point: Complex64,
    pub order: usize,
    pub value: Complex64,
}

/// Moments laid out like the columns of `C Pi`: per point, orders
/// `0..multiplicity`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub entries: Vec<MomentEntry>,
}

impl MomentTable {
    pub fn values(&self) -> CRow {
        CRow::from_iterator(self.entries.len(), self.entries.iter().map(|e| e.value))
    }

    fn from_row(spec: &InterpolationSpec, w: &CRow) -> Self {
        let mut entries = Vec::with_capacity(w.len());
        for (i, p) in spec.points().iter().enumerate() {
            for (order, k) in spec.block(i).enumerate() {
                entries.push(MomentEntry { point: p.point, order, value: w[k] });
            }
        }
        Self { entries }
    }
}

/// `C Pi` for the generator of `spec`.
pub fn moment_table_via_pi(sys: &StateSpace, spec: &InterpolationSpec) -> Result<MomentTable> {
    let (s, l) = spec.generator();
    let pi = solve_pi(sys, &s, &l)?;
    Ok(MomentTable::from_row(spec, &(sys.c_complex() * pi)))
}

/// The same table evaluated moment by moment from derivatives of `K`.
pub fn moment_table_direct(sys: &StateSpace, spec: &InterpolationSpec) -> Result<MomentTable> {
    let mut entries = Vec::with_capacity(spec.order());
    for p in spec.points() {
        let powers = resolvent_powers(sys, p.point, p.multiplicity - 1)?;
        let c = sys.c_complex();
        for (order, x) in powers.iter().enumerate() {
            entries.push(MomentEntry { point: p.point, order, value: (&c * x)[0] });
        }
    }
    Ok(MomentTable { entries })
}

fn normalize_sign(v: &mut CRow) {
    let scale = v.norm();
    if let Some(first) = v.iter().copied().find(|z| z.norm() > 1e-12 * scale) {
        let phase = first.conj() / first.norm();
        *v *= phase;
    }
}

/// Unit row `C_P` with `C_P Pi = 0`: the left singular direction of `Pi`
/// belonging to its smallest singular value, scaled so that its first
/// nonzero entry is real positive.
///
/// When the columns of `Pi` are closed under conjugation the row is chosen
/// real, from the real matrix `[Re Pi, Im Pi]`.
pub fn annihilating_row(pi: &CMat) -> Result<CRow> {
    let (n, nu) = pi.shape();
    if nu >= n {
        return Err(Error::NoLeftNullspace(n));
    }
    let stacked = DMatrix::from_fn(n, 2 * nu, |i, j| {
        if j < nu {
            pi[(i, j)].re
        } else {
            pi[(i, j - nu)].im
        }
    });
    let real_rank = numerical_rank(&stacked.map(|x| Complex64::new(x, 0.0)));
    let mut row = if real_rank < n {
        let padded = DMatrix::from_fn(n, n.max(2 * nu), |i, j| if j < 2 * nu { stacked[(i, j)] } else { 0.0 });
        let svd = padded.svd(true, false);
        let u = svd.u.expect("requested U");
        let k = svd.singular_values.argmin().0;
        CRow::from_iterator(n, u.column(k).iter().map(|&x| Complex64::new(x, 0.0)))
    } else {
        let padded = CMat::from_fn(n, n, |i, j| if j < nu { pi[(i, j)] } else { Complex64::new(0.0, 0.0) });
        let svd = padded.svd(true, false);
        let u = svd.u.expect("requested U");
        let k = svd.singular_values.argmin().0;
        u.column(k).adjoint()
    };
    normalize_sign(&mut row);
    Ok(row)
}

/// Orthonormal basis of the left nullspace of `Pi`, real when the columns
/// of `Pi` are closed under conjugation (then `[Re Pi, Im Pi]` is rank
/// deficient).
fn left_nullspace(pi: &CMat) -> Result<CMat> {
    let (n, nu) = pi.shape();
    if nu >= n {
        return Err(Error::NoLeftNullspace(n));
    }
    let stacked = CMat::from_fn(n, 2 * nu, |i, j| {
        Complex64::new(if j < nu { pi[(i, j)].re } else { pi[(i, j - nu)].im }, 0.0)
    });
    let real_rank = numerical_rank(&stacked);
    let (m, rank) = if real_rank < n { (stacked, real_rank) } else { (pi.clone(), numerical_rank(pi)) };
    let padded = CMat::from_fn(n, n.max(m.ncols()), |i, j| if j < m.ncols() { m[(i, j)] } else { ONE * 0.0 });
    let svd = padded.svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let keep = &order[..n - rank];
    Ok(CMat::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]))
}

/// Annihilating row for pole placement: among unit rows with `C_P Pi = 0`,
/// the one best aligned with the resolvent images `(lambda_k I - A)^{-1} B`.
/// Pole rows scale with `C_P (lambda_k I - A)^{-1} B`, so a row nearly
/// orthogonal to those images loses accuracy to cancellation.
pub fn pole_annihilator(sys: &StateSpace, pi: &CMat, poles: &[Complex64]) -> Result<CRow> {
    let basis = left_nullspace(pi)?;
    let n = sys.order();
    let mut images = CMat::zeros(n, 2 * poles.len());
    for (k, &p) in poles.iter().enumerate() {
        let x = sys
            .resolvent(p)?
            .solve_vec(&sys.b_complex())
            .ok_or(Error::SingularShift { shift: p, rcond: 0.0 })?;
        images.set_column(2 * k, &x.map(|z| Complex64::new(z.re, 0.0)));
        images.set_column(2 * k + 1, &x.map(|z| Complex64::new(z.im, 0.0)));
    }
    let real = basis.iter().all(|z| z.im == 0.0);
    let projected = if real { basis.transpose() * &images } else { basis.adjoint() * &images };
    let svd = projected.svd(true, false);
    let u = svd.u.expect("requested U");
    let y = u.column(svd.singular_values.argmax().0).into_owned();
    let mut row = if real { (&basis * y).transpose() } else { (&basis * y).adjoint() };
    row /= Complex64::new(row.norm(), 0.0);
    normalize_sign(&mut row);
    Ok(row)
}

/// Rows of the Jordan blocks of `S` belonging to the derivative points:
/// the generator `Q_D` and the input `R` (last entry of every block set, so
/// that `(Q_D, R)` is controllable).
pub fn derivative_block(spec: &InterpolationSpec, points: &[Complex64]) -> Result<(CMat, CVec)> {
    let (s, _) = spec.generator();
    let mut blocks = Vec::with_capacity(points.len());
    for (i, &p) in points.iter().enumerate() {
        let idx = spec.find(p).ok_or_else(|| {
            Error::Invalid(format!("derivative point {p} is not an interpolation point"))
        })?;
        if points[..i].iter().any(|&q| same(q, p)) {
            return Err(Error::Invalid(format!("derivative point {p} is repeated")));
        }
        blocks.push(spec.block(idx));
    }
    let mu: usize = blocks.iter().map(|r| r.len()).sum();
    let mut q = CMat::zeros(mu, mu);
    let mut r = CVec::zeros(mu);
    let mut at = 0;
    for b in blocks {
        let len = b.len();
        q.view_mut((at, at), (len, len)).copy_from(&s.view((b.start, b.start), (len, len)));
        r[at + len - 1] = ONE;
        at += len;
    }
    Ok((q, r))
}

/// Stacked left solutions: `Y_P` for the pole block (`diag(poles) Y_P =
/// Y_P A + 1 C_P`), `Y_D` for the derivative block (`Q_D Y_D = Y_D A + R C`).
#[derive(Debug, Clone)]
pub struct UpsilonBlocks {
    pub pole: CMat,
    pub deriv: CMat,
    pub stacked: CMat,
    /// `Y B`.
    pub yb: CVec,
    /// `diag(Q_P, Q_D)`.
    pub q: CMat,
    /// Input of the stacked equation restricted to `C`: zero on the pole
    /// rows and `R` on the derivative rows.
    pub r_c: CVec,
}

pub fn check_distinct_poles(poles: &[Complex64]) -> Result<()> {
    for (i, &p) in poles.iter().enumerate() {
        if poles[..i].iter().any(|&q| same(p, q)) {
            return Err(Error::DuplicatePole(p));
        }
    }
    Ok(())
}

pub fn build_upsilon_blocks(
    sys: &StateSpace,
    q_d: &CMat,
    r_d: &CVec,
    poles: &[Complex64],
    c_p: Option<&CRow>,
) -> Result<UpsilonBlocks> {
    check_distinct_poles(poles)?;
    let n = sys.order();
    let ell = poles.len();
    let mu = q_d.nrows();
    let pole = if ell == 0 {
        CMat::zeros(0, n)
    } else {
        let c_p = c_p.ok_or_else(|| Error::Invalid("pole rows need the annihilating row C_P".into()))?;
        let q_p = crate::linalg::diag(poles);
        solve_upsilon(&q_p, sys, &CVec::from_element(ell, ONE), c_p)?
    };
    let deriv = if mu == 0 {
        CMat::zeros(0, n)
    } else {
        solve_upsilon(q_d, sys, r_d, &sys.c_complex())?
    };
    let mut stacked = CMat::zeros(ell + mu, n);
    stacked.view_mut((0, 0), (ell, n)).copy_from(&pole);
    stacked.view_mut((ell, 0), (mu, n)).copy_from(&deriv);
    let yb = &stacked * sys.b_complex();
    let mut q = CMat::zeros(ell + mu, ell + mu);
    for (i, &p) in poles.iter().enumerate() {
        q[(i, i)] = p;
    }
    q.view_mut((ell, ell), (mu, mu)).copy_from(q_d);
    let mut r_c = CVec::zeros(ell + mu);
    r_c.rows_mut(ell, mu).copy_from(r_d);
    Ok(UpsilonBlocks { pole, deriv, stacked, yb, q, r_c })
}
