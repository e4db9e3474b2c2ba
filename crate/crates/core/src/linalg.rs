//! Dense linear-algebra helpers shared by every module: complex aliases,
//! checked LU solves, spectra, rank tests and spectral-set comparisons.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type CRow = RowDVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Reciprocal condition (pivot-ratio estimate) below which a shifted matrix
/// `sI - A` is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-14;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn to_complex_vec(v: &DVector<f64>) -> CVec {
    v.map(|x| Complex64::new(x, 0.0))
}

pub fn to_complex_row(v: &RowDVector<f64>) -> CRow {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Largest absolute imaginary part of any entry.
pub fn max_imag(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn real_part(m: &CMat) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn is_diagonal(m: &CMat) -> bool {
    m.is_square()
        && m.iter()
            .enumerate()
            .all(|(k, z)| k % m.nrows() == k / m.nrows() || *z == ZERO)
}

pub fn diag(values: &[Complex64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(values))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// LU factorization together with a cheap reciprocal-condition estimate
/// (ratio of smallest to largest pivot magnitude).
pub struct Factored {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    pub rcond: f64,
}

impl Factored {
    pub fn new(m: &CMat) -> Self {
        let lu = m.clone().lu();
        let u = lu.u();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..u.nrows().min(u.ncols()) {
            let p = u[(i, i)].norm();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let rcond = if m.is_empty() {
            1.0
        } else if hi == 0.0 || !lo.is_finite() {
            0.0
        } else {
            lo / hi
        };
        Self { lu, rcond }
    }

    pub fn is_singular(&self) -> bool {
        !(self.rcond > SINGULAR_RCOND)
    }

    pub fn solve(&self, rhs: &CMat) -> Option<CMat> {
        self.lu.solve(rhs)
    }

    pub fn solve_vec(&self, rhs: &CVec) -> Option<CVec> {
        self.lu.solve(rhs)
    }

    /// Solves `x^T M = rhs^T`, i.e. `M^T x = rhs`, reusing the factors of `M`.
    pub fn solve_transpose_vec(&self, rhs: &CVec) -> Option<CVec> {
        // P M = L U  =>  M^T = U^T L^T P
        let l = self.lu.l();
        let u = self.lu.u();
        let y = u.transpose().solve_lower_triangular(rhs)?;
        let mut z = l.transpose().solve_upper_triangular(&y)?;
        self.lu.p().inv_permute_rows(&mut z);
        Some(z)
    }
}

/// 2-norm condition number via SVD (`inf` for singular input).
pub fn cond2(m: &CMat) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let hi = sv.max();
    let lo = sv.min();
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.clone().singular_values().max()
    }
}

/// Rank tolerance: `max(rows, cols) * eps * sigma_max`.
pub fn rank_tol(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

pub fn numerical_rank(m: &CMat) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let tol = rank_tol(m.nrows(), m.ncols(), sv.max());
    sv.iter().filter(|&&s| s > tol).count()
}

/// Eigenvalues of a complex square matrix via the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<Complex64> {
    if m.is_empty() {
        return Vec::new();
    }
    if is_diagonal(m) {
        return m.diagonal().iter().copied().collect();
    }
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, 0)
        .expect("complex Schur iteration without an iteration cap always terminates");
    let (_, t) = schur.unpack();
    t.diagonal().iter().copied().collect()
}

/// Eigenvalues of a real square matrix (conjugate pairs exact).
pub fn real_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Sorts by real part descending, then imaginary part descending.
pub fn sort_spectrum(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// Smallest distance between an element of `a` and an element of `b`.
pub fn min_separation(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (x - y).norm()))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `z` to the nearest element of `set`.
pub fn distance_to_set(z: Complex64, set: &[Complex64]) -> f64 {
    set.iter().map(|y| (z - y).norm()).fold(f64::INFINITY, f64::min)
}

/// Greedy multiset comparison: the largest distance incurred when pairing
/// each element of `a` with its closest unused element of `b`. Returns `inf`
/// for sets of different size.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    // Pair the most isolated elements first.
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| {
        let di = distance_to_set(a[i], b);
        let dj = distance_to_set(a[j], b);
        dj.total_cmp(&di)
    });
    for i in order {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (a[i] - y).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("sizes match");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Dimension of the Krylov space `span{b, Mb, M^2 b, ...}` computed by
/// Arnoldi with full reorthogonalization (the single-input staircase form).
/// Breakdown is declared when the new direction falls below
/// `10 * max-dim * eps * sigma_max(M)` relative to a unit vector.
pub fn krylov_dimension(m: &CMat, b: &CVec) -> usize {
    let n = m.nrows();
    let bnorm = b.norm();
    if n == 0 || bnorm == 0.0 {
        return 0;
    }
    // Ten times the plain rank tolerance absorbs the Gram-Schmidt round-off.
    let tol = 10.0 * rank_tol(n, n, spectral_norm(m));
    let mut basis: Vec<CVec> = vec![b / Complex64::new(bnorm, 0.0)];
    while basis.len() < n {
        let mut w = m * basis.last().expect("nonempty");
        for _ in 0..2 {
            for q in &basis {
                let h = q.dotc(&w);
                w -= q * h;
            }
        }
        let h = w.norm();
        if h <= tol {
            break;
        }
        basis.push(w / Complex64::new(h, 0.0));
    }
    basis.len()
}

/// Orthonormal basis (as columns) of the null space of the nonzero real row
/// `r`, built from one Householder reflector.
pub fn row_kernel_basis(r: &RowDVector<f64>) -> DMatrix<f64> {
    let n = r.len();
    let norm = r.norm();
    let mut v = r.transpose() / norm;
    // Reflector H with H e_1 = +-v; columns 2..n of H span v's complement.
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vv = v.dot(&v);
    let h = DMatrix::<f64>::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, n - 1).into_owned()
}
