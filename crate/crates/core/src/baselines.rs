//! Reference reduction methods: square-root balanced truncation and the
//! iterative rational Krylov algorithm (IRKA).

use log::debug;
use nalgebra::{DMatrix, DVector, RowDVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{multiset_distance, real_eigenvalues, sort_spectrum};
use crate::lti::{Pairing, StateSpace};
use crate::sylvester::solve_lyapunov;

/// Controllability and observability Gramians `(P, Q)`:
/// `A P + P A^T + B B^T = 0`, `A^T Q + Q A + C^T C = 0`.
pub fn gramians(sys: &StateSpace) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !sys.is_stable() {
        return Err(Error::UnstableInput);
    }
    let p = solve_lyapunov(sys.a(), &(sys.b() * sys.b().transpose()))?;
    let q = solve_lyapunov(&sys.a().transpose(), &(sys.c().transpose() * sys.c()))?;
    Ok((p, q))
}

/// `L` with `M ≈ L L^T` for a symmetric positive semidefinite `M`; negative
/// eigenvalues from rounding are clipped to zero.
fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let mut f = eig.eigenvectors;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        f.column_mut(j).scale_mut(lambda.max(0.0).sqrt());
    }
    f
}

struct Balancing {
    hsv: Vec<f64>,
    left: DMatrix<f64>,
    right: DMatrix<f64>,
}

fn balance(sys: &StateSpace) -> Result<Balancing> {
    let (p, q) = gramians(sys)?;
    let u = psd_factor(&p);
    let z = psd_factor(&q);
    let svd = (z.transpose() * &u).svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let hsv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let w = svd.u.ok_or_else(|| Error::Invalid("SVD did not return U".into()))?;
    let x = svd.v_t.ok_or_else(|| Error::Invalid("SVD did not return V".into()))?.transpose();
    let w = DMatrix::from_columns(&order.iter().map(|&i| w.column(i).into_owned()).collect::<Vec<_>>());
    let x = DMatrix::from_columns(&order.iter().map(|&i| x.column(i).into_owned()).collect::<Vec<_>>());
    Ok(Balancing { left: w.transpose() * z.transpose(), right: u * x, hsv })
}

/// Hankel singular values in decreasing order.
pub fn hankel_singular_values(sys: &StateSpace) -> Result<Vec<f64>> {
    Ok(balance(sys)?.hsv)
}

/// Order-`nu` balanced truncation and the bound `2 * sum_{i > nu} sigma_i`
/// on its H-infinity error.
pub fn balanced_truncation(sys: &StateSpace, nu: usize) -> Result<(StateSpace, f64)> {
    if !sys.is_stable() {
        return Err(Error::UnstableInput);
    }
    if nu == 0 {
        return Err(Error::Invalid("reduced order must be positive".into()));
    }
    if nu >= sys.order() {
        return Ok((sys.clone(), 0.0));
    }
    let bal = balance(sys)?;
    if bal.hsv[nu - 1] <= f64::EPSILON * bal.hsv[0] {
        return Err(Error::RankDeficient {
            what: "Hankel singular values".into(),
            rank: bal.hsv.iter().filter(|&&s| s > f64::EPSILON * bal.hsv[0]).count(),
            expected: nu,
        });
    }
    let scale = DVector::from_iterator(nu, bal.hsv[..nu].iter().map(|s| 1.0 / s.sqrt()));
    let mut tl = bal.left.rows(0, nu).into_owned();
    let mut tr = bal.right.columns(0, nu).into_owned();
    for i in 0..nu {
        tl.row_mut(i).scale_mut(scale[i]);
        tr.column_mut(i).scale_mut(scale[i]);
    }
    let a = &tl * sys.a() * &tr;
    let b = &tl * sys.b();
    let c: RowDVector<f64> = sys.c() * &tr;
    let bound = 2.0 * bal.hsv[nu..].iter().sum::<f64>();
    Ok((StateSpace::new(a, b, c)?, bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrkaStatus {
    Converged,
    MaxIter,
    /// The shift update stopped shrinking for `stagnation_window` iterations.
    Stagnated,
    /// A projected or shifted matrix became singular.
    Breakdown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrkaOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations without a new smallest shift change before giving up.
    pub stagnation_window: usize,
    /// When the shift change fails to shrink, step only halfway (in the
    /// coefficients of the shift polynomial) towards the mirrored poles.
    pub damping: bool,
}

impl Default for IrkaOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, stagnation_window: 10, damping: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrkaResult {
    pub model: StateSpace,
    pub status: IrkaStatus,
    pub iterations: usize,
    /// Final shifts; at a fixed point these mirror the model's poles.
    pub shifts: Vec<Complex64>,
}

/// Real basis of `span{(sigma_i I - M)^{-1} v}` over a conjugate-closed
/// shift set: real part and imaginary part for each conjugate pair.
fn real_krylov_basis(m: &DMatrix<f64>, v: &DVector<f64>, shifts: &[Complex64]) -> Option<DMatrix<f64>> {
    let pairing = Pairing::from_values(shifts).ok()?;
    let n = m.nrows();
    let mc = m.map(|x| Complex64::new(x, 0.0));
    let vc = v.map(|x| Complex64::new(x, 0.0));
    let mut cols = Vec::with_capacity(shifts.len());
    for (i, &s) in shifts.iter().enumerate() {
        let p = pairing.partner(i);
        if p < i {
            continue;
        }
        let shifted = DMatrix::<Complex64>::identity(n, n) * s - &mc;
        let x = shifted.lu().solve(&vc)?;
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return None;
        }
        cols.push(x.map(|z| z.re));
        if p != i {
            cols.push(x.map(|z| z.im));
        }
    }
    // Orthonormalize for conditioning; the projection only depends on the span.
    let q = DMatrix::from_columns(&cols).qr().q();
    Some(q)
}

/// Real coefficients of `prod (x - z)`, lowest degree first.
fn real_poly(roots: &[Complex64]) -> Vec<f64> {
    let mut coef = vec![Complex64::new(1.0, 0.0)];
    for &z in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coef.len() + 1];
        for (i, &a) in coef.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * z;
        }
        coef = next;
    }
    coef.into_iter().map(|z| z.re).collect()
}

/// Roots of the average of the two monic shift polynomials.
fn blend_shifts(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let (pa, pb) = (real_poly(a), real_poly(b));
    let mut companion = DMatrix::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -0.5 * (pa[i] + pb[i]);
    }
    real_eigenvalues(&companion)
}

fn conjugate_clean(values: &mut [Complex64]) {
    sort_spectrum(values);
    for z in values.iter_mut() {
        if z.im.abs() <= 1e-12 * z.norm().max(1.0) {
            z.im = 0.0;
        }
    }
}

/// IRKA with real projection bases, started from `init` (conjugate-closed).
/// Non-convergence is reported through the status, never as an error.
pub fn irka(sys: &StateSpace, nu: usize, init: &[Complex64], opts: &IrkaOptions) -> Result<IrkaResult> {
    if !sys.is_stable() {
        return Err(Error::UnstableInput);
    }
    if init.len() != nu || nu == 0 {
        return Err(Error::Dimension(format!("{} initial shifts for order {nu}", init.len())));
    }
    Pairing::from_values(init)?;
    if nu >= sys.order() {
        return Ok(IrkaResult {
            model: sys.clone(),
            status: IrkaStatus::Converged,
            iterations: 0,
            shifts: init.to_vec(),
        });
    }
    let at = sys.a().transpose();
    let ct = sys.c().transpose();
    let mut shifts = init.to_vec();
    conjugate_clean(&mut shifts);
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut previous = f64::INFINITY;
    let mut last: Option<StateSpace> = None;
    for it in 1..=opts.max_iter {
        let project = || -> Option<StateSpace> {
            let v = real_krylov_basis(sys.a(), sys.b(), &shifts)?;
            let w = real_krylov_basis(&at, &ct, &shifts)?;
            let e = w.transpose() * &v;
            let lu = e.clone().lu();
            let a = lu.solve(&(w.transpose() * sys.a() * &v))?;
            let b = lu.solve(&(w.transpose() * sys.b()))?;
            let c = sys.c() * &v;
            if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
                return None;
            }
            StateSpace::new(a, b, c).ok()
        };
        let Some(model) = project() else {
            let model = last.unwrap_or_else(|| sys.clone());
            return Ok(IrkaResult { model, status: IrkaStatus::Breakdown, iterations: it, shifts });
        };
        let mut next: Vec<Complex64> = real_eigenvalues(model.a()).into_iter().map(|p| -p).collect();
        conjugate_clean(&mut next);
        let scale = shifts.iter().fold(1e-300f64, |m, z| m.max(z.norm()));
        let change = multiset_distance(&next, &shifts) / scale;
        debug!("irka iteration {it}: relative shift change {change:.3e}");
        if change < opts.tol {
            return Ok(IrkaResult { model, status: IrkaStatus::Converged, iterations: it, shifts: next });
        }
        shifts = if opts.damping && change >= previous {
            let mut blended = blend_shifts(&shifts, &next);
            conjugate_clean(&mut blended);
            // A blend that leaves the right half-plane is no better than the plain step.
            if blended.iter().all(|z| z.re > 0.0) { blended } else { next }
        } else {
            next
        };
        previous = change;
        if change < best {
            best = change;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.stagnation_window {
                return Ok(IrkaResult { model, status: IrkaStatus::Stagnated, iterations: it, shifts });
            }
        }
        last = Some(model);
    }
    let model = last.unwrap_or_else(|| sys.clone());
    Ok(IrkaResult { model, status: IrkaStatus::MaxIter, iterations: opts.max_iter, shifts })
}
