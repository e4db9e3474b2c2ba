//! Dense solvers for `M X - X N = RHS` and the three structured instances
//! behind the moment matrices: `A Pi + B L = Pi S` and `Q Y = Y A + R C`.
//!
//! The production path is Bartels-Stewart over complex Schur forms; a
//! Kronecker linearization is kept as an independent reference for small
//! problems. Diagonal generators take a direct resolvent path with one LU
//! solve per column (or row).

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, is_diagonal, krylov_dimension, min_separation, numerical_rank, CMat, CRow, CVec,
    Factored, ZERO,
};
use crate::lti::StateSpace;

/// Relative eigenvalue gap below which two spectra are treated as overlapping.
pub const OVERLAP_TOL: f64 = 1e-10;

/// Largest unknown count the Kronecker reference accepts.
pub const KRON_MAX_UNKNOWNS: usize = 400;

/// `M X - X N = RHS`.
#[derive(Debug, Clone)]
pub struct SylvesterProblem {
    pub m: CMat,
    pub n: CMat,
    pub rhs: CMat,
}

impl SylvesterProblem {
    pub fn new(m: CMat, n: CMat, rhs: CMat) -> Result<Self> {
        if !m.is_square() || !n.is_square() || rhs.shape() != (m.nrows(), n.nrows()) {
            return Err(Error::Dimension(format!(
                "M {:?}, N {:?}, RHS {:?} do not form a Sylvester equation",
                m.shape(),
                n.shape(),
                rhs.shape()
            )));
        }
        Ok(Self { m, n, rhs })
    }

    fn scale(&self) -> f64 {
        self.m.norm() + self.n.norm()
    }

    /// `||M X - X N - RHS||_F`.
    pub fn residual(&self, x: &CMat) -> f64 {
        (&self.m * x - x * &self.n - &self.rhs).norm()
    }
}

/// Schur form `M = U T U^*`; diagonal input skips the QR iteration.
struct Triangular {
    u: Option<CMat>,
    t: CMat,
}

impl Triangular {
    fn new(m: &CMat) -> Self {
        if is_diagonal(m) {
            return Self { u: None, t: m.clone() };
        }
        let (u, t) = m
            .clone()
            .try_schur(f64::EPSILON, 0)
            .expect("complex Schur iteration without an iteration cap always terminates")
            .unpack();
        Self { u: Some(u), t }
    }

    fn to_schur(&self, x: CMat, left: bool) -> CMat {
        match (&self.u, left) {
            (None, _) => x,
            (Some(u), true) => u.adjoint() * x,
            (Some(u), false) => x * u,
        }
    }

    fn unschur(&self, x: CMat, left: bool) -> CMat {
        match (&self.u, left) {
            (None, _) => x,
            (Some(u), true) => u * x,
            (Some(u), false) => x * u.adjoint(),
        }
    }
}

fn check_gap(m_eigs: &[Complex64], n_eigs: &[Complex64], scale: f64) -> Result<()> {
    let gap = min_separation(m_eigs, n_eigs);
    let tol = OVERLAP_TOL * scale.max(f64::MIN_POSITIVE);
    if gap < tol {
        return Err(Error::SpectraOverlap { gap, tol });
    }
    Ok(())
}

fn warn_on_residual(prob: &SylvesterProblem, x: &CMat) {
    let res = prob.residual(x);
    let bound = OVERLAP_TOL * prob.scale() * x.norm();
    if res > bound && res > f64::EPSILON * prob.rhs.norm() {
        warn!("ill-conditioned Sylvester equation: residual {res:.3e} exceeds {bound:.3e}");
    }
}

/// Bartels-Stewart: reduce both coefficients to upper triangular Schur form
/// and sweep the columns of the transformed unknown left to right.
pub fn solve_sylvester(prob: &SylvesterProblem) -> Result<CMat> {
    let (p, q) = prob.rhs.shape();
    if p == 0 || q == 0 {
        return Ok(CMat::zeros(p, q));
    }
    let tm = Triangular::new(&prob.m);
    let tn = Triangular::new(&prob.n);
    check_gap(
        tm.t.diagonal().as_slice(),
        tn.t.diagonal().as_slice(),
        prob.scale(),
    )?;

    // T Y - Y R = F with F = U^* RHS V.
    let f = tn.to_schur(tm.to_schur(prob.rhs.clone(), true), false);
    let t = &tm.t;
    let r = &tn.t;
    let mut y = CMat::zeros(p, q);
    for k in 0..q {
        let mut col = f.column(k).into_owned();
        for i in 0..k {
            let rik = r[(i, k)];
            if rik != ZERO {
                col += y.column(i) * rik;
            }
        }
        let mut shifted = t.clone();
        for i in 0..p {
            shifted[(i, i)] -= r[(k, k)];
        }
        let sol = shifted
            .solve_upper_triangular(&col)
            .ok_or(Error::SpectraOverlap { gap: 0.0, tol: OVERLAP_TOL * prob.scale() })?;
        y.set_column(k, &sol);
    }
    let x = tm.unschur(tn.unschur(y, false), true);
    warn_on_residual(prob, &x);
    Ok(x)
}

/// Reference solve of `(I (x) M - N^T (x) I) vec X = vec RHS` with one dense
/// LU factorization; limited to [`KRON_MAX_UNKNOWNS`] unknowns.
pub fn solve_sylvester_kron(prob: &SylvesterProblem) -> Result<CMat> {
    let (p, q) = prob.rhs.shape();
    if p * q > KRON_MAX_UNKNOWNS {
        return Err(Error::Invalid(format!(
            "Kronecker reference limited to {KRON_MAX_UNKNOWNS} unknowns, got {}",
            p * q
        )));
    }
    check_gap(&eigenvalues(&prob.m), &eigenvalues(&prob.n), prob.scale())?;
    let dim = p * q;
    let mut k = CMat::zeros(dim, dim);
    for j in 0..q {
        for i in 0..p {
            let row = j * p + i;
            for l in 0..p {
                k[(row, j * p + l)] += prob.m[(i, l)];
            }
            for l in 0..q {
                k[(row, l * p + i)] -= prob.n[(l, j)];
            }
        }
    }
    let rhs = CVec::from_column_slice(prob.rhs.as_slice());
    let x = Factored::new(&k)
        .solve_vec(&rhs)
        .ok_or(Error::SpectraOverlap { gap: 0.0, tol: OVERLAP_TOL * prob.scale() })?;
    Ok(CMat::from_column_slice(p, q, x.as_slice()))
}

fn resolvent_or_overlap(sys: &StateSpace, s: Complex64, scale: f64) -> Result<Factored> {
    sys.resolvent(s).map_err(|_| {
        let gap = crate::linalg::distance_to_set(s, sys.poles());
        Error::SpectraOverlap { gap, tol: OVERLAP_TOL * scale }
    })
}

/// `Pi` with `A Pi + B L = Pi S`; `rank Pi = min(nu, n)` is enforced.
///
/// For diagonal `S` the columns are `L_j (s_j I - A)^{-1} B` directly.
pub fn solve_pi(sys: &StateSpace, s: &CMat, l: &CRow) -> Result<CMat> {
    let nu = s.nrows();
    if !s.is_square() || l.len() != nu {
        return Err(Error::Dimension(format!(
            "generator S {:?} and L of length {} do not match",
            s.shape(),
            l.len()
        )));
    }
    let observable = krylov_dimension(&s.transpose(), &l.transpose());
    if observable < nu {
        return Err(Error::RankDeficient {
            what: "(L, S) observability".into(),
            rank: observable,
            expected: nu,
        });
    }
    let a = sys.a_complex();
    let b = sys.b_complex();
    let scale = a.norm() + s.norm();
    check_gap(sys.poles(), &eigenvalues(s), scale)?;
    let pi = if is_diagonal(s) {
        let mut pi = CMat::zeros(sys.order(), nu);
        for j in 0..nu {
            let f = resolvent_or_overlap(sys, s[(j, j)], scale)?;
            let col = f
                .solve_vec(&(&b * l[j]))
                .ok_or(Error::SpectraOverlap { gap: 0.0, tol: OVERLAP_TOL * scale })?;
            pi.set_column(j, &col);
        }
        pi
    } else {
        let prob = SylvesterProblem::new(a, s.clone(), -(&b * l))?;
        solve_sylvester(&prob)?
    };
    // Full column rank is only attainable for nu <= n.
    let rank = numerical_rank(&pi);
    let expected = nu.min(sys.order());
    if rank < expected {
        return Err(Error::RankDeficient { what: "Pi".into(), rank, expected });
    }
    Ok(pi)
}

/// `Y` with `Q Y = Y A + R Cmat`.
///
/// `(Q, R)` must be controllable and the solution must have full row rank;
/// the homogeneous case `R = 0` returns the zero solution.
pub fn solve_upsilon(q: &CMat, sys: &StateSpace, r: &CVec, cmat: &CRow) -> Result<CMat> {
    let m = q.nrows();
    let n = sys.order();
    if !q.is_square() || r.len() != m || cmat.len() != n {
        return Err(Error::Dimension(format!(
            "Q {:?}, R of length {}, row of length {} against order {n}",
            q.shape(),
            r.len(),
            cmat.len()
        )));
    }
    let a = sys.a_complex();
    let scale = a.norm() + q.norm();
    check_gap(&eigenvalues(q), sys.poles(), scale)?;
    if r.iter().all(|z| *z == ZERO) {
        return Ok(CMat::zeros(m, n));
    }
    let controllable = krylov_dimension(q, r);
    if controllable < m {
        return Err(Error::RankDeficient {
            what: "(Q, R) controllability".into(),
            rank: controllable,
            expected: m,
        });
    }
    let y = if is_diagonal(q) {
        // Row i is R_i Cmat (q_i I - A)^{-1}.
        let mut y = CMat::zeros(m, n);
        for i in 0..m {
            let f = resolvent_or_overlap(sys, q[(i, i)], scale)?;
            let row = f
                .solve_transpose_vec(&(cmat.transpose() * r[i]))
                .ok_or(Error::SpectraOverlap { gap: 0.0, tol: OVERLAP_TOL * scale })?;
            y.set_row(i, &row.transpose());
        }
        y
    } else {
        let prob = SylvesterProblem::new(q.clone(), a, r * cmat)?;
        solve_sylvester(&prob)?
    };
    let rank = numerical_rank(&y);
    let expected = m.min(n);
    if rank < expected {
        return Err(Error::RankDeficient { what: "Upsilon".into(), rank, expected });
    }
    Ok(y)
}

/// Real Lyapunov solve `A P + P A^T + Q = 0` through the Sylvester solver.
pub fn solve_lyapunov(a: &nalgebra::DMatrix<f64>, q: &nalgebra::DMatrix<f64>) -> Result<nalgebra::DMatrix<f64>> {
    let ac = crate::linalg::to_complex(a);
    let prob = SylvesterProblem::new(ac.clone(), -ac.transpose(), -crate::linalg::to_complex(q))?;
    let p = solve_sylvester(&prob)?.map(|z| z.re);
    Ok((&p + p.transpose()) * 0.5)
}
