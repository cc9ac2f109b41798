//! Seeded sampling of matrices, unitaries and states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64, ZERO};

pub type SeededRng = ChaCha8Rng;

/// Independent stream for `(seed, stream)`; used to key restarts so that
/// parallel and serial schedules draw the same numbers.
pub fn stream_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal_c64(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| normal_c64(rng))
}

pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ginibre(d, d, rng).hermitian_part()
}

/// Haar-random unitary via QR of a Ginibre matrix with the R-diagonal phase
/// correction.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(d, d, rng).to_nalgebra();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = ComplexMatrix::from_nalgebra(&q);
    for c in 0..d {
        let rd = r[(c, c)];
        let ph = if rd.norm() > 0.0 { rd / rd.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..d {
            u[(row, c)] *= ph;
        }
    }
    u
}

pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d).map(|_| normal_c64(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= n;
    }
    v
}

/// Random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    let p = &g * &g.adjoint();
    let t = p.trace().re;
    p.scale_re(1.0 / t)
}

pub fn projector(v: &[C64]) -> ComplexMatrix {
    ComplexMatrix::outer(v, v)
}

/// Random complex vector of length `n`.
pub fn random_vector(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    for z in &mut v {
        *z = normal_c64(rng);
    }
    v
}
