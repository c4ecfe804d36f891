//! Standard wavefunctions and analytic Gaussian phase-space densities.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Axis, PhaseSpaceGrid, WavefunctionGrid};
use crate::error::{Error, Result};

/// Normalised Hermite functions `psi_0 .. psi_{k}` at `q`, by the stable
/// three-term recurrence.
fn hermite_functions(k: usize, q: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(PI.powf(-0.25) * (-q * q / 2.0).exp());
    if k >= 1 {
        out.push(2f64.sqrt() * q * out[0]);
    }
    for m in 1..k {
        let next = (2.0 / (m + 1) as f64).sqrt() * q * out[m]
            - (m as f64 / (m + 1) as f64).sqrt() * out[m - 1];
        out.push(next);
    }
    out
}

pub fn vacuum(n: usize, lo: f64, hi: f64) -> Result<WavefunctionGrid> {
    fock(0, n, lo, hi)
}

/// Number state `|k>` of the unit-frequency oscillator.
pub fn fock(k: usize, n: usize, lo: f64, hi: f64) -> Result<WavefunctionGrid> {
    WavefunctionGrid::sample(
        |q| Complex64::new(hermite_functions(k, q)[k], 0.0),
        n,
        lo,
        hi,
    )
}

/// `sum_k c_k |k>`, normalised.
pub fn superposition(
    coefficients: &[Complex64],
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<WavefunctionGrid> {
    if coefficients.is_empty() {
        return Err(Error::InvalidArgument(
            "no superposition coefficients".into(),
        ));
    }
    let top = coefficients.len() - 1;
    WavefunctionGrid::sample(
        |q| {
            hermite_functions(top, q)
                .iter()
                .zip(coefficients)
                .map(|(h, c)| c * h)
                .sum()
        },
        n,
        lo,
        hi,
    )
}

/// Squeezed vacuum `(e^{2r}/pi)^{1/4} exp(-e^{2r} q^2 / 2)`; position
/// variance `e^{-2r}/2`.
pub fn squeezed_vacuum(r: f64, n: usize, lo: f64, hi: f64) -> Result<WavefunctionGrid> {
    if !r.is_finite() {
        return Err(Error::InvalidArgument(format!("bad squeezing {r}")));
    }
    let a = (2.0 * r).exp();
    WavefunctionGrid::sample(
        |q| Complex64::new((a / PI).powf(0.25) * (-a * q * q / 2.0).exp(), 0.0),
        n,
        lo,
        hi,
    )
}

/// Centred Gaussian density with position variance `vq` and momentum
/// variance `vp`, as a `dm_2` density: `exp(-q^2/(2vq) - p^2/(2vp)) / sqrt(vq vp)`.
/// Vacuum is `vq = vp = 1/2`; a thermal state has `vq = vp = nbar + 1/2`.
pub fn gaussian_grid(q: Axis, vq: f64, vp: f64) -> Result<PhaseSpaceGrid> {
    if !(vq > 0.0 && vp > 0.0 && vq.is_finite() && vp.is_finite()) {
        return Err(Error::InvalidArgument(
            "Gaussian variances must be positive".into(),
        ));
    }
    let c = 1.0 / (vq * vp).sqrt();
    PhaseSpaceGrid::from_fn(q, |x, p| {
        Complex64::new(c * (-x * x / (2.0 * vq) - p * p / (2.0 * vp)).exp(), 0.0)
    })
}

/// Eigen-decomposition of a density operator written in the number basis,
/// as `(probability, wavefunction)` components for [`super::wigner_mixture`].
pub fn fock_mixture(
    rho: &crate::spectral::DensityOperator,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<Vec<(f64, WavefunctionGrid)>> {
    let (values, vectors) = crate::linalg::hermitian_eigen(rho.matrix());
    let mut out = Vec::new();
    for (k, p) in values.iter().enumerate() {
        if *p <= 1e-14 {
            continue;
        }
        let coefficients: Vec<Complex64> = vectors.column(k).iter().copied().collect();
        out.push((*p, superposition(&coefficients, n, lo, hi)?));
    }
    Ok(out)
}
