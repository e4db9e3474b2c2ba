//! SISO state-space systems `x' = Ax + Bu, y = Cx`: transfer-function and
//! derivative evaluation, spectra, invariant zeros, and realification of
//! conjugate-symmetric complex models.

use log::warn;
use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, krylov_dimension, real_eigenvalues, row_kernel_basis, sort_spectrum, to_complex,
    to_complex_row, to_complex_vec, CMat, CRow, CVec, Factored, ONE,
};

/// Relative tolerance used when pairing conjugate values and when accepting
/// the imaginary residue of a realified model.
pub const CONJ_TOL: f64 = 1e-10;

/// Minimal SISO realization with cached stability and minimality flags.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: RowDVector<f64>,
    poles: Vec<Complex64>,
    stable: bool,
    minimal: bool,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: RowDVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(Error::Dimension(format!("A is {}x{}, not square", a.nrows(), a.ncols())));
        }
        if b.len() != n || c.len() != n {
            return Err(Error::Dimension(format!(
                "A is {n}x{n} but B has {} rows and C has {} columns",
                b.len(),
                c.len()
            )));
        }
        if a.iter().chain(b.iter()).chain(c.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Invalid("system matrices contain non-finite entries".into()));
        }
        let mut poles = real_eigenvalues(&a);
        sort_spectrum(&mut poles);
        let stable = poles.iter().all(|l| l.re < 0.0);
        let ac = to_complex(&a);
        let controllable = krylov_dimension(&ac, &to_complex_vec(&b)) == n;
        let observable = krylov_dimension(&ac.transpose(), &to_complex_row(&c).transpose()) == n;
        Ok(Self {
            a,
            b,
            c,
            poles,
            stable,
            minimal: controllable && observable,
        })
    }

    /// Builds from row-major slices; convenient for small literal systems.
    pub fn from_rows(a: &[&[f64]], b: &[f64], c: &[f64]) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("A rows have inconsistent length".into()));
        }
        let flat: Vec<f64> = a.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(
            DMatrix::from_row_slice(n, n, &flat),
            DVector::from_column_slice(b),
            RowDVector::from_row_slice(c),
        )
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &RowDVector<f64> {
        &self.c
    }

    /// Eigenvalues of `A`, sorted as by [`spectrum`].
    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// Every eigenvalue of `A` in the open left half plane.
    pub fn is_stable(&self) -> bool {
        self.stable
    }

    /// Controllable and observable (staircase rank test).
    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    pub fn a_complex(&self) -> CMat {
        to_complex(&self.a)
    }

    pub fn b_complex(&self) -> CVec {
        to_complex_vec(&self.b)
    }

    pub fn c_complex(&self) -> CRow {
        to_complex_row(&self.c)
    }

    /// Factors `sI - A`, refusing shifts that are numerically eigenvalues.
    pub fn resolvent(&self, s: Complex64) -> Result<Factored> {
        let mut m = -self.a_complex();
        for i in 0..self.order() {
            m[(i, i)] += s;
        }
        let f = Factored::new(&m);
        if f.is_singular() {
            return Err(Error::SingularShift { shift: s, rcond: f.rcond });
        }
        Ok(f)
    }

    /// `K(s) = C (sI - A)^{-1} B`.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        eval_tf(self, s)
    }

    /// Warns once when the system violates the standing assumptions.
    pub fn warn_if_not_minimal(&self) {
        if !self.minimal {
            warn!("system of order {} is not minimal; proceeding anyway", self.order());
        }
    }
}

/// Transfer function value `C (sI - A)^{-1} B` from one LU solve.
pub fn eval_tf(sys: &StateSpace, s: Complex64) -> Result<Complex64> {
    eval_tf_deriv(sys, s, 0)
}

/// `d^j K / ds^j (s) = (-1)^j j! C (sI - A)^{-(j+1)} B`, via `j + 1` solves
/// against a single factorization.
pub fn eval_tf_deriv(sys: &StateSpace, s: Complex64, j: usize) -> Result<Complex64> {
    let powers = resolvent_powers(sys, s, j)?;
    let x = powers.last().expect("at least one power");
    Ok((sys.c_complex() * x)[0] * deriv_scale(j))
}

/// `(-1)^j j!`.
pub(crate) fn deriv_scale(j: usize) -> f64 {
    (1..=j).fold(1.0, |acc, k| -acc * k as f64)
}

/// Derivative of `c (sI - a)^{-1} b` for complex data.
pub fn eval_deriv_complex(a: &CMat, b: &CVec, c: &CRow, s: Complex64, j: usize) -> Result<Complex64> {
    let mut m = -a.clone();
    for i in 0..a.nrows() {
        m[(i, i)] += s;
    }
    let f = Factored::new(&m);
    if f.is_singular() {
        return Err(Error::SingularShift { shift: s, rcond: f.rcond });
    }
    let mut x = b.clone();
    for _ in 0..=j {
        x = f
            .solve_vec(&x)
            .ok_or(Error::SingularShift { shift: s, rcond: f.rcond })?;
    }
    Ok((c * x)[0] * deriv_scale(j))
}

/// `[(sI-A)^{-1} B, (sI-A)^{-2} B, ..., (sI-A)^{-(j+1)} B]`.
pub(crate) fn resolvent_powers(sys: &StateSpace, s: Complex64, j: usize) -> Result<Vec<CVec>> {
    let f = sys.resolvent(s)?;
    let mut out = Vec::with_capacity(j + 1);
    let mut x = sys.b_complex();
    for _ in 0..=j {
        x = f
            .solve_vec(&x)
            .ok_or(Error::SingularShift { shift: s, rcond: f.rcond })?;
        out.push(x.clone());
    }
    Ok(out)
}

/// Eigenvalues of `A`, sorted by real part (descending) then imaginary part.
pub fn spectrum(sys: &StateSpace) -> Vec<Complex64> {
    sys.poles.clone()
}

/// Finite invariant zeros: the finite generalized eigenvalues of the pencil
/// `([[A, B], [C, 0]], diag(I, 0))`.
///
/// The infinite eigenvalues are deflated exactly by orthogonal compression
/// onto `ker C`: while `CB` vanishes the system `(Z'AZ, Z'B, CAZ)` has the
/// same finite zeros; once `CB != 0` the zeros are the eigenvalues of
/// `Z'(I - B C / CB) A Z`.
pub fn invariant_zeros(sys: &StateSpace) -> Vec<Complex64> {
    let mut a = sys.a().clone();
    let mut b = sys.b().clone();
    let mut c = sys.c().clone();
    loop {
        let n = a.nrows();
        let (bn, cn) = (b.norm(), c.norm());
        if n == 0 || bn == 0.0 || cn == 0.0 {
            return Vec::new();
        }
        let cb = (&c * &b)[0];
        let tol = 100.0 * n as f64 * f64::EPSILON * bn * cn;
        if n == 1 {
            return Vec::new();
        }
        let z = row_kernel_basis(&c);
        if cb.abs() > tol {
            let proj = DMatrix::<f64>::identity(n, n) - (&b * &c) / cb;
            let m = z.transpose() * proj * &a * &z;
            let mut v = real_eigenvalues(&m);
            sort_spectrum(&mut v);
            return v;
        }
        let next_c = &c * &a * &z;
        if next_c.norm() <= tol * linalg::spectral_norm(&to_complex(&a)).max(1.0) {
            // Every Markov parameter vanishes: K is identically zero.
            warn!("transfer function is numerically zero; no finite zeros reported");
            return Vec::new();
        }
        b = z.transpose() * &b;
        a = z.transpose() * &a * &z;
        c = next_c;
    }
}

/// One transfer-function sample: `value = d^order K / ds^order (point)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSample {
    pub point: Complex64,
    pub value: Complex64,
    pub order: usize,
}

impl TransferSample {
    pub fn new(point: Complex64, value: Complex64, order: usize) -> Self {
        Self { point, value, order }
    }
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= CONJ_TOL * a.norm().max(b.norm()).max(1.0)
}

/// Index of the first sample whose conjugate partner (same order,
/// conjugate point and value) is missing.
pub fn find_unpaired_sample(samples: &[TransferSample]) -> Option<usize> {
    samples.iter().position(|s| {
        !samples.iter().any(|t| {
            t.order == s.order && close(t.point, s.point.conj()) && close(t.value, s.value.conj())
        })
    })
}

/// Checks uniqueness of `(point, order)` and conjugate closure of a sample set.
pub fn validate_samples(samples: &[TransferSample]) -> Result<()> {
    for (i, s) in samples.iter().enumerate() {
        if samples[..i]
            .iter()
            .any(|t| t.order == s.order && close(t.point, s.point))
        {
            return Err(Error::Invalid(format!(
                "duplicate sample of order {} at {}",
                s.order, s.point
            )));
        }
    }
    if let Some(i) = find_unpaired_sample(samples) {
        let s = &samples[i];
        return Err(Error::NotConjugateSymmetric(format!(
            "sample of order {} at {} has no conjugate partner",
            s.order, s.point
        )));
    }
    Ok(())
}

/// Complex-valued SISO model, typically with conjugate-symmetric structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStateSpace {
    pub a: CMat,
    pub b: CVec,
    pub c: CRow,
}

impl ComplexStateSpace {
    pub fn new(a: CMat, b: CVec, c: CRow) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || b.len() != n || c.len() != n {
            return Err(Error::Dimension("inconsistent complex model dimensions".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        eval_deriv_complex(&self.a, &self.b, &self.c, s, 0)
    }

    pub fn eval_deriv(&self, s: Complex64, j: usize) -> Result<Complex64> {
        eval_deriv_complex(&self.a, &self.b, &self.c, s, j)
    }
}

/// Conjugation partner of every coordinate: `partner[i] == i` for real
/// coordinates, otherwise `partner[partner[i]] == i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    partner: Vec<usize>,
}

impl Pairing {
    pub fn new(partner: Vec<usize>) -> Result<Self> {
        let ok = partner
            .iter()
            .enumerate()
            .all(|(i, &p)| p < partner.len() && partner[p] == i);
        if !ok {
            return Err(Error::Invalid("pairing is not an involution".into()));
        }
        Ok(Self { partner })
    }

    /// All coordinates real.
    pub fn real(n: usize) -> Self {
        Self { partner: (0..n).collect() }
    }

    /// Pairs each value with an unused conjugate partner.
    pub fn from_values(values: &[Complex64]) -> Result<Self> {
        let n = values.len();
        let mut partner = vec![usize::MAX; n];
        for i in 0..n {
            if partner[i] != usize::MAX {
                continue;
            }
            let v = values[i];
            if v.im.abs() <= CONJ_TOL * v.norm().max(1.0) {
                partner[i] = i;
                continue;
            }
            let j = (i + 1..n)
                .find(|&j| partner[j] == usize::MAX && close(values[j], v.conj()))
                .ok_or_else(|| {
                    Error::NotConjugateSymmetric(format!("{v} has no conjugate partner"))
                })?;
            partner[i] = j;
            partner[j] = i;
        }
        Ok(Self { partner })
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    pub fn partner(&self, i: usize) -> usize {
        self.partner[i]
    }

    /// `T` with `x = T xi`: per pair `(p, q)`, `x_p = xi_p - j xi_q` and
    /// `x_q = xi_p + j xi_q`, so `a + bj` maps to the block `[[a, b], [-b, a]]`.
    pub fn transform(&self) -> CMat {
        let n = self.len();
        let mut t = CMat::zeros(n, n);
        for p in 0..n {
            let q = self.partner[p];
            if q == p {
                t[(p, p)] = ONE;
            } else if p < q {
                t[(p, p)] = ONE;
                t[(p, q)] = Complex64::new(0.0, -1.0);
                t[(q, p)] = ONE;
                t[(q, q)] = Complex64::new(0.0, 1.0);
            }
        }
        t
    }

    /// `T^{-1}`, written out in closed form.
    pub fn inverse_transform(&self) -> CMat {
        let n = self.len();
        let half = Complex64::new(0.5, 0.0);
        let mut t = CMat::zeros(n, n);
        for p in 0..n {
            let q = self.partner[p];
            if q == p {
                t[(p, p)] = ONE;
            } else if p < q {
                t[(p, p)] = half;
                t[(p, q)] = half;
                t[(q, p)] = Complex64::new(0.0, 0.5);
                t[(q, q)] = Complex64::new(0.0, -0.5);
            }
        }
        t
    }

    /// Maps a conjugate-symmetric coordinate vector to real coordinates.
    pub fn realify_vec(&self, v: &CVec) -> Result<DVector<f64>> {
        let r = self.inverse_transform() * v;
        check_real(&CMat::from_column_slice(r.len(), 1, r.as_slice()), "vector")?;
        Ok(r.map(|z| z.re))
    }
}

fn check_real(m: &CMat, what: &str) -> Result<()> {
    let scale = linalg::max_abs(m).max(1.0);
    let im = linalg::max_imag(m);
    if im > CONJ_TOL * scale {
        return Err(Error::NotConjugateSymmetric(format!(
            "realified {what} keeps imaginary parts of size {im:.3e}"
        )));
    }
    Ok(())
}

/// Realifies a model whose state matrix is complex diagonal, pairing the
/// coordinates by conjugate diagonal entries.
pub fn realify(model: &ComplexStateSpace) -> Result<StateSpace> {
    if !linalg::is_diagonal(&model.a) {
        return Err(Error::Invalid(
            "realify expects a diagonal state matrix; use realify_with for general models".into(),
        ));
    }
    let d: Vec<Complex64> = model.a.diagonal().iter().copied().collect();
    realify_with(model, &Pairing::from_values(&d)?)
}

/// Similarity `T^{-1} A T`, `T^{-1} B`, `C T` with the pairing's transform;
/// residual imaginary parts up to [`CONJ_TOL`] (relative) are dropped.
pub fn realify_with(model: &ComplexStateSpace, pairing: &Pairing) -> Result<StateSpace> {
    if pairing.len() != model.order() {
        return Err(Error::Dimension("pairing size differs from model order".into()));
    }
    let t = pairing.transform();
    let ti = pairing.inverse_transform();
    let a = &ti * &model.a * &t;
    let b = &ti * &model.b;
    let c = &model.c * &t;
    check_real(&a, "state matrix")?;
    check_real(&CMat::from_column_slice(b.len(), 1, b.as_slice()), "input map")?;
    check_real(&CMat::from_row_slice(1, c.len(), c.as_slice()), "output map")?;
    StateSpace::new(a.map(|z| z.re), b.map(|z| z.re), c.map(|z| z.re))
}
