//! Seeded random instances for audits and searches.
//!
//! Trial `k` of a run seeded with `s` draws from ChaCha8 seeded with `s` on
//! stream `k`, so trials are independent of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::kernels::{Domain, Point};
use crate::linalg::{self, CMatrix, C64};

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |_, _| complex_gaussian(rng))
}

/// Gaussian matrix rescaled to operator norm `cap·u` with `u` uniform in (0, 1].
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, m: usize, cap: f64) -> CMatrix {
    let x = gaussian_matrix(rng, m);
    let u: f64 = 1.0 - rng.random::<f64>();
    let norm = linalg::spectral_norm(&x);
    if norm == 0.0 {
        return x;
    }
    x.scale(cap * u / norm)
}

/// Uniform point in the radius-`radius` copy of the domain.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, domain: Domain, radius: f64) -> Point {
    match domain {
        Domain::Ball(d) => {
            let dir: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
            let len = dir.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            // Real dimension 2d: radial law r^{2d}.
            let r = radius * rng.random::<f64>().powf(1.0 / (2 * d) as f64);
            Point::new(dir.into_iter().map(|z| z * (r / len)).collect())
        }
        Domain::Polydisc(d) => Point::new(
            (0..d)
                .map(|_| {
                    let r = radius * rng.random::<f64>().sqrt();
                    C64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
                })
                .collect(),
        ),
    }
}

pub fn random_points<R: Rng + ?Sized>(rng: &mut R, domain: Domain, radius: f64, n: usize) -> Vec<Point> {
    (0..n).map(|_| random_point(rng, domain, radius)).collect()
}

/// Uniformly random subset of `0..n` with exactly `k` elements, ascending.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k.min(n) {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut out = idx[..k.min(n)].to_vec();
    out.sort_unstable();
    out
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}
