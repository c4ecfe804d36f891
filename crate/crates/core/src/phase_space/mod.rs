//! The canonical pair (Q, P) sampled on Fourier-conjugate grids.
//!
//! Grid values are densities with respect to `dm_2 = dq dp / (2 pi)`, so the
//! vacuum Wigner function is `2 exp(-(q^2 + p^2))` and every normalised
//! representation integrates to one as `sum W dq dp / (2 pi)`.

mod states;

pub use states::{fock, fock_mixture, gaussian_grid, squeezed_vacuum, superposition, vacuum};

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};

/// Tag written next to every grid so readers know the density convention.
pub const CONVENTION: &str = "density w.r.t. dm2 = dq dp / (2 pi), hbar = 1";

/// Default q-domain.
pub const DEFAULT_DOMAIN: (f64, f64) = (-10.0, 10.0);

/// Vacuum-width variance of the Husimi smoothing Gaussian.
pub const VACUUM_VARIANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub origin: f64,
    pub step: f64,
    pub length: usize,
}

impl Axis {
    pub fn value(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.length).map(|j| self.value(j)).collect()
    }

    /// Uniform axis of `n` points on `[lo, hi)`.
    pub fn over(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_length(n)?;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidGrid(format!("bad domain [{lo}, {hi})")));
        }
        Ok(Self {
            origin: lo,
            step: (hi - lo) / n as f64,
            length: n,
        })
    }

    /// The momentum axis Fourier-conjugate to this one, centred on zero.
    pub fn conjugate(&self) -> Self {
        let step = 2.0 * PI / (self.length as f64 * self.step);
        Self {
            origin: -((self.length / 2) as f64) * step,
            step,
            length: self.length,
        }
    }

    /// Angular FFT frequencies in standard (unshifted) order.
    fn frequencies(&self) -> Vec<f64> {
        let n = self.length;
        let scale = 2.0 * PI / (n as f64 * self.step);
        (0..n)
            .map(|k| {
                let k = if k < n.div_ceil(2) {
                    k as f64
                } else {
                    k as f64 - n as f64
                };
                k * scale
            })
            .collect()
    }
}

fn check_length(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "grid length must be a power of two of at least 2, got {n}"
        )));
    }
    Ok(())
}

/// Position-space samples `psi(q0 + j dq)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid {
    q0: f64,
    dq: f64,
    samples: Vec<Complex64>,
}

impl WavefunctionGrid {
    pub const NORM_TOL: f64 = 1e-8;

    pub fn new(q0: f64, dq: f64, samples: Vec<Complex64>) -> Result<Self> {
        check_length(samples.len())?;
        if !(dq.is_finite() && dq > 0.0 && q0.is_finite()) {
            return Err(Error::InvalidGrid(format!("bad origin {q0} or step {dq}")));
        }
        if samples
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidState {
                reason: "non-finite wavefunction sample".into(),
                residual: f64::INFINITY,
            });
        }
        let psi = Self { q0, dq, samples };
        let residual = (psi.norm_squared() - 1.0).abs();
        if residual > Self::NORM_TOL {
            return Err(Error::InvalidState {
                reason: "wavefunction is not normalised".into(),
                residual,
            });
        }
        Ok(psi)
    }

    /// Rescales the samples to unit discrete norm.
    pub fn normalised(q0: f64, dq: f64, mut samples: Vec<Complex64>) -> Result<Self> {
        let norm = (samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * dq).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState {
                reason: "wavefunction has zero or non-finite norm".into(),
                residual: norm,
            });
        }
        samples.iter_mut().for_each(|z| *z /= norm);
        Self::new(q0, dq, samples)
    }

    /// Samples `f` on `n` points of `[lo, hi)` and normalises.
    pub fn sample<F: Fn(f64) -> Complex64>(f: F, n: usize, lo: f64, hi: f64) -> Result<Self> {
        let axis = Axis::over(lo, hi, n)?;
        Self::normalised(
            axis.origin,
            axis.step,
            axis.values().into_iter().map(f).collect(),
        )
    }

    pub fn axis(&self) -> Axis {
        Axis {
            origin: self.q0,
            step: self.dq,
            length: self.samples.len(),
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dq
    }

    /// `|psi(q_j)|^2`
    pub fn position_density(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `|psi_hat(p_l)|^2` on the conjugate axis, where
    /// `psi_hat(p) = (2 pi)^{-1/2} sum_j psi_j e^{-i p q_j} dq`.
    pub fn momentum_density(&self) -> Vec<f64> {
        self.momentum_amplitudes()
            .iter()
            .map(|z| z.norm_sqr())
            .collect()
    }

    pub fn momentum_amplitudes(&self) -> Vec<Complex64> {
        let p = self.axis().conjugate();
        let q = self.axis();
        let norm = self.dq / (2.0 * PI).sqrt();
        (0..p.length)
            .into_par_iter()
            .map(|l| {
                let pl = p.value(l);
                self.samples
                    .iter()
                    .enumerate()
                    .map(|(j, z)| z * Complex64::from_polar(norm, -pl * q.value(j)))
                    .sum()
            })
            .collect()
    }

    /// Column vector on the orthonormal grid basis (`sqrt(dq) psi_j`).
    pub fn to_ket(&self) -> crate::linalg::CVector {
        let s = self.dq.sqrt();
        crate::linalg::CVector::from_iterator(self.len(), self.samples.iter().map(|z| z * s))
    }

    /// Band-limited interpolation to the half-step grid `q0 + k dq / 2`,
    /// `k = 0 .. 2N`.
    fn half_step(&self, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
        let n = self.len();
        let mut spec = self.samples.clone();
        planner.plan_fft_forward(n).process(&mut spec);
        let mut padded = vec![ZERO; 2 * n];
        let half = n / 2;
        padded[..half].copy_from_slice(&spec[..half]);
        padded[2 * n - half + 1..].copy_from_slice(&spec[half + 1..]);
        // the Nyquist bin is shared between +/- frequencies
        padded[half] = spec[half] * 0.5;
        padded[2 * n - half] = spec[half] * 0.5;
        planner.plan_fft_inverse(2 * n).process(&mut padded);
        let scale = 1.0 / n as f64;
        padded.iter().map(|z| z * scale).collect()
    }
}

/// Complex values on a (q, p) grid, row-major with p fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub q: Axis,
    pub p: Axis,
    pub values: Vec<Complex64>,
    pub convention: String,
}

impl PhaseSpaceGrid {
    /// Relative tolerance on `dq dp N = 2 pi`.
    pub const CONJUGACY_TOL: f64 = 1e-9;

    pub fn new(q: Axis, p: Axis, values: Vec<Complex64>) -> Result<Self> {
        let g = Self {
            q,
            p,
            values,
            convention: CONVENTION.to_string(),
        };
        g.check()?;
        Ok(g)
    }

    /// Samples `f(q, p)` on the grid conjugate to `q`.
    pub fn from_fn<F: Fn(f64, f64) -> Complex64 + Sync>(q: Axis, f: F) -> Result<Self> {
        let p = q.conjugate();
        let values = (0..q.length * p.length)
            .into_par_iter()
            .map(|i| f(q.value(i / p.length), p.value(i % p.length)))
            .collect();
        Self::new(q, p, values)
    }

    pub fn check(&self) -> Result<()> {
        check_length(self.q.length)?;
        if self.q.length != self.p.length {
            return Err(Error::InvalidGrid("q and p axes differ in length".into()));
        }
        if !(self.q.step > 0.0 && self.p.step > 0.0) {
            return Err(Error::InvalidGrid("axis steps must be positive".into()));
        }
        let product = self.q.step * self.p.step * self.q.length as f64;
        if ((product - 2.0 * PI) / (2.0 * PI)).abs() > Self::CONJUGACY_TOL {
            return Err(Error::InvalidGrid(format!(
                "axes are not Fourier-conjugate: dq dp N = {product}"
            )));
        }
        Error::check_dim(self.q.length * self.p.length, self.values.len())
    }

    pub fn n(&self) -> usize {
        self.q.length
    }

    pub fn at(&self, j: usize, l: usize) -> Complex64 {
        self.values[j * self.p.length + l]
    }

    fn cell(&self) -> f64 {
        self.q.step * self.p.step / (2.0 * PI)
    }

    /// `sum W dq dp / (2 pi)`
    pub fn mass(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.cell()
    }

    /// Position density: `sum_p W dp / (2 pi)` at each `q_j`.
    pub fn q_marginal(&self) -> Vec<Complex64> {
        let w = self.p.step / (2.0 * PI);
        self.values
            .chunks(self.p.length)
            .map(|row| row.iter().sum::<Complex64>() * w)
            .collect()
    }

    /// Momentum density: `sum_q W dq / (2 pi)` at each `p_l`.
    pub fn p_marginal(&self) -> Vec<Complex64> {
        let w = self.q.step / (2.0 * PI);
        let mut out = vec![ZERO; self.p.length];
        for row in self.values.chunks(self.p.length) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter().map(|z| z * w).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, z| m.min(z.re))
    }

    pub fn max_abs_diff(&self, other: &PhaseSpaceGrid) -> f64 {
        if self.values.len() != other.values.len() {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `sum f W dq dp / (2 pi)` for `f` tabulated on the same grid.
    pub fn pair(&self, f: &PhaseSpaceGrid) -> Result<Complex64> {
        Error::check_dim(self.values.len(), f.values.len())?;
        Ok(self
            .values
            .iter()
            .zip(&f.values)
            .map(|(w, v)| w * v)
            .sum::<Complex64>()
            * self.cell())
    }

    fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self {
            q: self.q,
            p: self.p,
            values,
            convention: self.convention.clone(),
        }
    }

    /// Applies a multiplier on the 2-D spectrum. The multiplier receives the
    /// angular frequencies `(s, t)` conjugate to `(q, p)`.
    fn filter<M: Fn(f64, f64) -> Complex64 + Sync>(&self, multiplier: M) -> Self {
        let n = self.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut data = self.values.clone();
        fft2(&mut data, n, &forward);
        let s = self.q.frequencies();
        let t = self.p.frequencies();
        data.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (l, z) in row.iter_mut().enumerate() {
                *z *= multiplier(s[j], t[l]);
            }
        });
        fft2(&mut data, n, &inverse);
        let scale = 1.0 / (n * n) as f64;
        self.with_values(data.iter().map(|z| z * scale).collect())
    }
}

/// In-place 2-D transform: rows, then columns.
fn fft2(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(n).for_each(|row| plan.process(row));
    let mut columns: Vec<Vec<Complex64>> = (0..n)
        .map(|l| (0..n).map(|j| data[j * n + l]).collect())
        .collect();
    columns.par_iter_mut().for_each(|c| plan.process(c));
    for (l, c) in columns.iter().enumerate() {
        for (j, z) in c.iter().enumerate() {
            data[j * n + l] = *z;
        }
    }
}

/// Imaginary parts above this fraction of the peak make [`wigner`] fail.
pub const WIGNER_REALNESS_TOL: f64 = 1e-9;

/// Wigner function `W(q, p) = int psi*(q + t/2) psi(q - t/2) e^{ipt} dt`.
pub fn wigner(psi: &WavefunctionGrid) -> Result<PhaseSpaceGrid> {
    wigner_mixture(&[(1.0, psi.clone())])
}

/// Wigner function of `sum_k w_k |psi_k><psi_k|`; weights must be
/// non-negative, sum to one, and all wavefunctions share one grid.
pub fn wigner_mixture(components: &[(f64, WavefunctionGrid)]) -> Result<PhaseSpaceGrid> {
    let Some((_, first)) = components.first() else {
        return Err(Error::InvalidArgument("empty mixture".into()));
    };
    let q = first.axis();
    for (w, psi) in components {
        if psi.axis() != q {
            return Err(Error::InvalidGrid(
                "mixture components use different grids".into(),
            ));
        }
        if !(w.is_finite() && *w >= 0.0) {
            return Err(Error::InvalidState {
                reason: "mixture weight is negative".into(),
                residual: *w,
            });
        }
    }
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > WavefunctionGrid::NORM_TOL {
        return Err(Error::InvalidState {
            reason: "mixture weights do not sum to one".into(),
            residual: (total - 1.0).abs(),
        });
    }
    let n = q.length;
    let p = q.conjugate();
    let mut planner = FftPlanner::new();
    let halves: Vec<(f64, Vec<Complex64>)> = components
        .iter()
        .map(|(w, psi)| (*w, psi.half_step(&mut planner)))
        .collect();
    let inverse = planner.plan_fft_inverse(n);
    let half = (n / 2) as isize;
    let mut values = vec![ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let centre = 2 * j as isize;
        for (w, f) in &halves {
            let sample = |k: isize| -> Complex64 {
                if k >= 0 && (k as usize) < f.len() {
                    f[k as usize]
                } else {
                    ZERO
                }
            };
            let mut kernel = vec![ZERO; n];
            for m in -half..half {
                let mut k = sample(centre + m).conj() * sample(centre - m);
                if m == -half {
                    // unpaired end of the lag window: keep the part that
                    // pairs with the missing +N/2 lag
                    k = Complex64::new(k.re, 0.0);
                }
                let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                kernel[m.rem_euclid(n as isize) as usize] = k * (sign * q.step * w);
            }
            inverse.process(&mut kernel);
            for (r, k) in row.iter_mut().zip(&kernel) {
                *r += k;
            }
        }
    });
    let peak = values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let imag = values.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if imag > WIGNER_REALNESS_TOL * peak.max(1.0) {
        return Err(Error::InvalidState {
            reason: "Wigner function has a non-negligible imaginary part".into(),
            residual: imag,
        });
    }
    let values = values
        .into_iter()
        .map(|z| Complex64::new(z.re, 0.0))
        .collect();
    PhaseSpaceGrid::new(q, p, values)
}

/// Cohen-class kernel `g_hat(omega)`, with `g_hat(omega) = int g(k) e^{-ik omega} dk`
/// so that a point mass at `k` selects the k-ordered member of the family.
#[derive(Debug, Clone, PartialEq)]
pub enum CohenKernel {
    Wigner,
    KirkwoodDirac,
    AntiKirkwoodDirac,
    MargenauHill,
    BornJordan,
    Kappa(f64),
    /// `g_hat` sampled at increasing `omega`, linearly interpolated and held
    /// constant outside the table.
    Tabulated(Vec<(f64, Complex64)>),
}

impl CohenKernel {
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        Ok(match name {
            "wigner" | "weyl" => Self::Wigner,
            "kd" => Self::KirkwoodDirac,
            "anti-kd" => Self::AntiKirkwoodDirac,
            "mh" => Self::MargenauHill,
            "born-jordan" | "bj" => Self::BornJordan,
            _ => {
                let Some(v) = name.strip_prefix("kappa:") else {
                    return Err(Error::InvalidArgument(format!("unknown kernel {name:?}")));
                };
                let k: f64 = v
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad kappa value {v:?}")))?;
                if !k.is_finite() {
                    return Err(Error::InvalidArgument(format!("bad kappa value {v:?}")));
                }
                Self::Kappa(k)
            }
        })
    }

    pub fn eval(&self, omega: f64) -> Complex64 {
        match self {
            Self::Wigner => Complex64::new(1.0, 0.0),
            Self::KirkwoodDirac => Complex64::from_polar(1.0, -omega),
            Self::AntiKirkwoodDirac => Complex64::from_polar(1.0, omega),
            Self::MargenauHill => Complex64::new(omega.cos(), 0.0),
            Self::BornJordan => {
                if omega.abs() < 1e-8 {
                    Complex64::new(1.0 - omega * omega / 6.0, 0.0)
                } else {
                    Complex64::new(omega.sin() / omega, 0.0)
                }
            }
            Self::Kappa(k) => Complex64::from_polar(1.0, -k * omega),
            Self::Tabulated(table) => interpolate(table, omega),
        }
    }

    /// The transform requires `g_hat(0) = 1` within this tolerance.
    pub const UNIT_TOL: f64 = 1e-9;
}

fn interpolate(table: &[(f64, Complex64)], x: f64) -> Complex64 {
    let Some(first) = table.first() else {
        return ZERO;
    };
    if x <= first.0 {
        return first.1;
    }
    for w in table.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x <= x1 {
            let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
            return y0 + (y1 - y0) * t;
        }
    }
    table[table.len() - 1].1
}

/// Cohen-class member `h * W` with `h_hat(s, t) = g_hat(-st/2)` on the
/// transform `int W e^{-i(sq + tp)} dm_2`. The argument sign makes the
/// kernel `e^{-i kappa omega}` reproduce the ordering
/// `e^{-i(1-kappa)sQ/2} e^{-itP} e^{-i(1+kappa)sQ/2}`.
pub fn cohen_transform(w: &PhaseSpaceGrid, kernel: &CohenKernel) -> Result<PhaseSpaceGrid> {
    w.check()?;
    let at_zero = kernel.eval(0.0);
    if (at_zero - Complex64::new(1.0, 0.0)).norm() > CohenKernel::UNIT_TOL {
        return Err(Error::KernelMass {
            mass: at_zero.norm(),
        });
    }
    if let CohenKernel::Tabulated(table) = kernel {
        if table.windows(2).any(|p| p[1].0 <= p[0].0) {
            return Err(Error::InvalidArgument(
                "tabulated kernel abscissae must increase".into(),
            ));
        }
    }
    let s_nyquist = -PI / w.q.step;
    let t_nyquist = -PI / w.p.step;
    Ok(w.filter(|s, t| {
        // Nyquist rows and columns stand for both signs of the frequency
        if s == s_nyquist || t == t_nyquist {
            0.5 * (kernel.eval(-s * t / 2.0) + kernel.eval(s * t / 2.0))
        } else {
            kernel.eval(-s * t / 2.0)
        }
    }))
}

fn gaussian_hat(variance: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |s, t| (-variance * (s * s + t * t) / 2.0).exp()
}

fn check_variance(variance: f64) -> Result<()> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing variance must be positive, got {variance}"
        )));
    }
    Ok(())
}

/// Husimi function: convolution with the unit-mass Gaussian
/// `G(x) = exp(-|x|^2 / (2 v)) / v` on `dm_2`, `v = 1/2` giving the Q-function.
pub fn husimi(w: &PhaseSpaceGrid) -> Result<PhaseSpaceGrid> {
    husimi_with_variance(w, VACUUM_VARIANCE)
}

pub fn husimi_with_variance(w: &PhaseSpaceGrid, variance: f64) -> Result<PhaseSpaceGrid> {
    w.check()?;
    check_variance(variance)?;
    let g = gaussian_hat(variance);
    Ok(w.filter(|s, t| Complex64::new(g(s, t), 0.0)))
}

/// Tikhonov-regularised deconvolution by the Husimi Gaussian: the spectrum is
/// multiplied by `G_hat / (G_hat^2 + eps)`. An approximation; the exact
/// inverse is unbounded.
pub fn glauber_sudarshan(w: &PhaseSpaceGrid, eps: f64) -> Result<PhaseSpaceGrid> {
    glauber_sudarshan_with_variance(w, eps, VACUUM_VARIANCE)
}

pub fn glauber_sudarshan_with_variance(
    w: &PhaseSpaceGrid,
    eps: f64,
    variance: f64,
) -> Result<PhaseSpaceGrid> {
    w.check()?;
    check_variance(variance)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "regularisation must be positive, got {eps}"
        )));
    }
    let g = gaussian_hat(variance);
    Ok(w.filter(|s, t| {
        let gh = g(s, t);
        Complex64::new(gh / (gh * gh + eps), 0.0)
    }))
}

/// Weyl quantisation of `f` tabulated on a phase-space grid, as a matrix on
/// the position grid basis restricted to the `basis_dim` central points:
/// `M_jk = (1/N) sum_l f((q_j + q_k)/2, p_l) e^{i p_l (q_j - q_k)}`.
/// Midpoints between grid rows are linearly interpolated.
pub fn weyl_quantise_grid(f: &PhaseSpaceGrid, basis_dim: usize) -> Result<CMatrix> {
    f.check()?;
    let n = f.n();
    if basis_dim == 0 || basis_dim > n {
        return Err(Error::InvalidArgument(format!(
            "basis dimension must lie in 1..={n}, got {basis_dim}"
        )));
    }
    let offset = (n - basis_dim) / 2;
    let dq = f.q.step;
    let symbol = |sum: usize, l: usize| -> Complex64 {
        if sum.is_multiple_of(2) {
            f.values[(sum / 2) * n + l]
        } else {
            0.5 * (f.values[(sum / 2) * n + l] + f.values[(sum / 2 + 1) * n + l])
        }
    };
    let entries: Vec<Complex64> = (0..basis_dim * basis_dim)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / basis_dim + offset, idx % basis_dim + offset);
            let lag = (j as f64 - k as f64) * dq;
            (0..n)
                .map(|l| symbol(j + k, l) * Complex64::from_polar(1.0, f.p.value(l) * lag))
                .sum::<Complex64>()
                / n as f64
        })
        .collect();
    Ok(CMatrix::from_row_slice(basis_dim, basis_dim, &entries))
}

#[cfg(test)]
mod tests;
