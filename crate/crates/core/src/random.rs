//! Seeded random instances: Hermitian observables, density operators,
//! commuting pairs. Everything draws from a caller-owned generator so a single
//! seed fixes a whole verification run.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{diag_real, outer, symmetrize, CMatrix, CVector};
use crate::spectral::{DensityOperator, HermitianOperator};

pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    HermitianOperator::new(symmetrize(&g)).expect("symmetrized matrix is Hermitian")
}

/// Haar-ish unitary from the QR factorisation of a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let q = qr.q();
    let r = qr.r();
    // fix the phase ambiguity of QR so the distribution does not depend on it
    CMatrix::from_fn(dim, dim, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        q[(i, j)] * phase
    })
}

pub fn ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| complex_normal(rng));
    let n = v.norm();
    v.unscale(n)
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    DensityOperator::new(outer(&ket(rng, dim))).expect("rank-one projector is a state")
}

/// Full-rank mixed state G G^dagger / Tr[G G^dagger].
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = ginibre(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(symmetrize(&m.unscale(tr))).expect("normalised Gram matrix is a state")
}

/// Two observables diagonal in a common random basis. Eigenvalues are drawn
/// from a small integer set so degeneracies show up regularly.
pub fn commuting_pair<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
) -> (HermitianOperator, HermitianOperator) {
    let u = unitary(rng, dim);
    let draw = |rng: &mut R| -> Vec<f64> {
        (0..dim)
            .map(|_| rng.random_range(-3i32..=3) as f64)
            .collect()
    };
    let a = draw(rng);
    let b = draw(rng);
    let conj = |d: &[f64]| symmetrize(&(&u * diag_real(d) * u.adjoint()));
    (
        HermitianOperator::new(conj(&a)).expect("unitary conjugate of a real diagonal"),
        HermitianOperator::new(conj(&b)).expect("unitary conjugate of a real diagonal"),
    )
}

pub fn real_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn alpha<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
}
