//! Seeded random instances: stable minimal systems and conjugate-closed
//! point sets for tests, benchmarks and the bundled example data.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{distance_to_set, sort_spectrum, CVec};
use crate::lti::{Pairing, StateSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random stable minimal system of order `n` with poles in
/// `[-10, -0.1] x [-10i, 10i]`, hidden behind a random orthogonal basis.
pub fn random_stable_system(rng: &mut impl Rng, n: usize) -> Result<StateSpace> {
    loop {
        let mut a = DMatrix::zeros(n, n);
        let mut i = 0;
        while i < n {
            let re = -rng.random_range(0.1..10.0);
            if i + 1 < n && rng.random_bool(0.5) {
                let im = rng.random_range(0.1..10.0);
                a[(i, i)] = re;
                a[(i + 1, i + 1)] = re;
                a[(i, i + 1)] = im;
                a[(i + 1, i)] = -im;
                i += 2;
            } else {
                a[(i, i)] = re;
                i += 1;
            }
        }
        let q = gaussian_matrix(rng, n, n).qr().q();
        let a = q.transpose() * a * &q;
        let b = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        let c = RowDVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        let sys = StateSpace::new(a, b, c)?;
        if sys.is_minimal() && sys.is_stable() {
            return Ok(sys);
        }
    }
}

/// Conjugate-closed set of `count` points with real parts in `re` and
/// imaginary parts of complex members in `im`, each at least `gap` away
/// from `avoid` and from one another. Returned in spectral order.
pub fn random_conjugate_set(
    rng: &mut impl Rng,
    count: usize,
    re: (f64, f64),
    im: (f64, f64),
    avoid: &[Complex64],
    gap: f64,
) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(count);
    while out.len() < count {
        let x = rng.random_range(re.0..re.1);
        let pair = out.len() + 2 <= count && rng.random_bool(0.5);
        let z = if pair {
            Complex64::new(x, rng.random_range(im.0..im.1))
        } else {
            Complex64::new(x, 0.0)
        };
        let taken: Vec<Complex64> = out.iter().chain(avoid).copied().collect();
        if distance_to_set(z, &taken) < gap || (pair && z.im < gap) {
            continue;
        }
        out.push(z);
        if pair {
            out.push(z.conj());
        }
    }
    sort_spectrum(&mut out);
    out
}

/// Conjugate-closed set of `count` points spread over two decades of
/// magnitude: real members `±10^u`, complex members `±(a + j) 10^u` with
/// `u ∈ [-1, 1]`, `a ∈ [0.05, 0.5]`, the sign picking the half-plane. Every
/// two members are at least a quarter of the larger magnitude apart and at
/// least that far from `avoid`. Returned in spectral order.
pub fn random_spread_set(rng: &mut impl Rng, count: usize, right_half: bool, avoid: &[Complex64]) -> Vec<Complex64> {
    let sign = if right_half { 1.0 } else { -1.0 };
    let mut out: Vec<Complex64> = Vec::with_capacity(count);
    while out.len() < count {
        let pair = out.len() + 2 <= count && rng.random_bool(0.5);
        let mag = 10f64.powf(rng.random_range(-1.0..1.0));
        let z = if pair {
            Complex64::new(sign * mag * rng.random_range(0.05..0.5), mag)
        } else {
            Complex64::new(sign * mag, 0.0)
        };
        let crowded = out
            .iter()
            .chain(avoid)
            .any(|t| (t - z).norm() < 0.25 * t.norm().max(z.norm()));
        if crowded {
            continue;
        }
        out.push(z);
        if pair {
            out.push(z.conj());
        }
    }
    sort_spectrum(&mut out);
    out
}

/// Interpolation points in the open right half-plane, away from every pole
/// of a stable system; see [`random_spread_set`].
pub fn random_points(rng: &mut impl Rng, count: usize) -> Vec<Complex64> {
    random_spread_set(rng, count, true, &[])
}

/// Random `G` that is real in the coordinates of the pairing of `points`,
/// so the family member it selects has a real realization.
pub fn random_family_g(rng: &mut impl Rng, points: &[Complex64]) -> Result<CVec> {
    let pairing = Pairing::from_values(points)?;
    let xi = CVec::from_fn(points.len(), |_, _| Complex64::new(rng.sample(StandardNormal), 0.0));
    Ok(pairing.transform() * xi)
}
