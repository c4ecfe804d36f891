//! Quantisation and quasi-classicalisation against an operator measure, plus
//! the representation changes built on them: affine maps, convolution with
//! smoothing kernels on a raster, and the faithfulness rank.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, trace_product, CMatrix, ZERO};
use crate::qjsd::{euclidean, merge_support, OperatorMeasure, SupportPoint};
use crate::spectral::DensityOperator;

/// A scalar function evaluated on support points.
pub trait PointFunction {
    fn eval(&self, point: &[f64]) -> Result<Complex64>;
}

impl<F> PointFunction for F
where
    F: Fn(&[f64]) -> Complex64,
{
    fn eval(&self, point: &[f64]) -> Result<Complex64> {
        Ok(self(point))
    }
}

/// Function given as a value table; lookups match the nearest tabulated
/// point within `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFunction {
    pub entries: Vec<(Vec<f64>, Complex64)>,
    pub tol: f64,
}

impl TabulatedFunction {
    pub const DEFAULT_TOL: f64 = 1e-9;

    pub fn new(entries: Vec<(Vec<f64>, Complex64)>) -> Self {
        Self {
            entries,
            tol: Self::DEFAULT_TOL,
        }
    }

    /// Values keyed by support index.
    pub fn on_support<M: OperatorMeasure + ?Sized>(q: &M, values: &[Complex64]) -> Result<Self> {
        Error::check_dim(q.support().len(), values.len())?;
        Ok(Self::new(
            q.support()
                .iter()
                .zip(values)
                .map(|(s, v)| (s.point.clone(), *v))
                .collect(),
        ))
    }
}

impl PointFunction for TabulatedFunction {
    fn eval(&self, point: &[f64]) -> Result<Complex64> {
        self.entries
            .iter()
            .filter(|(p, _)| p.len() == point.len())
            .map(|(p, v)| (euclidean(p, point), *v))
            .filter(|(d, _)| *d <= self.tol)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, v)| v)
            .ok_or_else(|| Error::InvalidArgument(format!("no tabulated value at point {point:?}")))
    }
}

fn finite_value<F: PointFunction + ?Sized>(f: &F, point: &[f64]) -> Result<Complex64> {
    let v = f.eval(point)?;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            point: point.to_vec(),
        })
    }
}

/// Sum over the support of `f(point) * weight`.
pub fn quantise<F, M>(f: &F, q: &M) -> Result<CMatrix>
where
    F: PointFunction + ?Sized,
    M: OperatorMeasure + ?Sized,
{
    let d = q.dim();
    let mut out = CMatrix::zeros(d, d);
    for s in q.support() {
        let v = finite_value(f, &s.point)?;
        out += s.weight.map(|z| z * v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QjpPoint {
    pub point: Vec<f64>,
    pub value: Complex64,
}

/// Complex quasi-joint-probability distribution, sorted by point.
#[derive(Debug, Clone, PartialEq)]
pub struct QjpDistribution {
    pub support: Vec<QjpPoint>,
}

impl QjpDistribution {
    pub fn total(&self) -> Complex64 {
        self.support.iter().map(|p| p.value).sum()
    }

    pub fn value_at(&self, point: &[f64], tol: f64) -> Option<Complex64> {
        self.support
            .iter()
            .find(|p| euclidean(&p.point, point) <= tol)
            .map(|p| p.value)
    }

    /// Sum of `f(point) * value`.
    pub fn pair<F: PointFunction + ?Sized>(&self, f: &F) -> Result<Complex64> {
        self.support.iter().try_fold(
            ZERO,
            |acc, p| Ok(acc + finite_value(f, &p.point)? * p.value),
        )
    }

    pub fn rasterize(&self, spec: &RasterSpec) -> Result<Raster<Complex64>> {
        let mut raster = Raster::filled(spec.clone(), ZERO);
        for p in &self.support {
            let cell = spec.cell_of(&p.point)?;
            raster.values[cell] += p.value;
        }
        Ok(raster)
    }
}

/// Tr[weight rho] at every support point.
pub fn quasi_classicalise<M: OperatorMeasure + ?Sized>(
    q: &M,
    rho: &DensityOperator,
) -> Result<QjpDistribution> {
    Error::check_dim(q.dim(), rho.dim())?;
    Ok(QjpDistribution {
        support: q
            .support()
            .iter()
            .map(|s| QjpPoint {
                point: s.point.clone(),
                value: trace_product(&s.weight, rho.matrix()),
            })
            .collect(),
    })
}

/// |Tr[f_Q rho] - sum f QJP|
pub fn verify_adjointness<F, M>(f: &F, q: &M, rho: &DensityOperator) -> Result<f64>
where
    F: PointFunction + ?Sized,
    M: OperatorMeasure + ?Sized,
{
    let quantum = rho.expectation(&quantise(f, q)?);
    let classical = quasi_classicalise(q, rho)?.pair(f)?;
    Ok((quantum - classical).norm())
}

/// Operator measure obtained by moving support points; weights are unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedMeasure {
    n_axes: usize,
    dim: usize,
    support: Vec<SupportPoint>,
}

impl OperatorMeasure for TransformedMeasure {
    fn n_axes(&self) -> usize {
        self.n_axes
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self) -> &[SupportPoint] {
        &self.support
    }
}

impl TransformedMeasure {
    pub fn distance(&self, other: &TransformedMeasure) -> f64 {
        crate::qjsd::support_distance(&self.support, &other.support)
    }
}

/// Pushes every support point through `x -> T x + b`, merging collisions.
/// `T` may be singular or rectangular.
pub fn affine_transform<M: OperatorMeasure + ?Sized>(
    q: &M,
    t: &DMatrix<f64>,
    b: &[f64],
) -> Result<TransformedMeasure> {
    Error::check_dim(q.n_axes(), t.ncols())?;
    Error::check_dim(t.nrows(), b.len())?;
    let mut scale = 0.0f64;
    let moved: Vec<SupportPoint> = q
        .support()
        .iter()
        .map(|s| {
            let point: Vec<f64> = (0..t.nrows())
                .map(|r| b[r] + (0..t.ncols()).map(|c| t[(r, c)] * s.point[c]).sum::<f64>())
                .collect();
            scale = point.iter().fold(scale, |m, x| m.max(x.abs()));
            SupportPoint {
                point,
                weight: s.weight.clone(),
            }
        })
        .collect();
    Ok(TransformedMeasure {
        n_axes: t.nrows(),
        dim: q.dim(),
        support: merge_support(moved, 1e-9 * (1.0 + scale)),
    })
}

/// Uniform rectangular grid of cells; index order is row-major with the last
/// axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterSpec {
    pub origin: Vec<f64>,
    pub step: Vec<f64>,
    pub shape: Vec<usize>,
}

impl RasterSpec {
    pub fn new(origin: Vec<f64>, step: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if origin.len() != step.len() || origin.len() != shape.len() {
            return Err(Error::InvalidGrid(
                "origin, step and shape must have one entry per axis".into(),
            ));
        }
        if step.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidGrid("grid steps must be positive".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) || shape.contains(&0) {
            return Err(Error::InvalidGrid(
                "grid must be finite and non-empty".into(),
            ));
        }
        Ok(Self {
            origin,
            step,
            shape,
        })
    }

    /// Grid with cell centres `lo[k] + j step[k]` covering `[lo, hi]`.
    pub fn covering(lo: &[f64], hi: &[f64], step: &[f64]) -> Result<Self> {
        Error::check_dim(lo.len(), hi.len())?;
        Error::check_dim(lo.len(), step.len())?;
        let shape = lo
            .iter()
            .zip(hi)
            .zip(step)
            .map(|((l, h), s)| ((h - l) / s).round().max(0.0) as usize + 1)
            .collect();
        Self::new(lo.to_vec(), step.to_vec(), shape)
    }

    pub fn n_axes(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.step.iter().product()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for k in (0..self.shape.len()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.origin[k] + i as f64 * self.step[k])
            .collect()
    }

    /// Nearest cell to `point`.
    pub fn cell_of(&self, point: &[f64]) -> Result<usize> {
        Error::check_dim(self.n_axes(), point.len())?;
        let mut idx = Vec::with_capacity(point.len());
        for (k, x) in point.iter().enumerate() {
            let j = ((x - self.origin[k]) / self.step[k]).round();
            if !(j >= 0.0 && j < self.shape[k] as f64) {
                return Err(Error::InvalidGrid(format!(
                    "point {point:?} lies outside the raster"
                )));
            }
            idx.push(j as usize);
        }
        Ok(self.flat_index(&idx))
    }
}

/// Values that can be accumulated on a raster: scalars and operator weights.
pub trait Mass: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, w: f64, x: &Self);
}

impl Mass for Complex64 {
    fn zero_like(&self) -> Self {
        ZERO
    }

    fn add_scaled(&mut self, w: f64, x: &Self) {
        *self += x * w;
    }
}

impl Mass for CMatrix {
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }

    fn add_scaled(&mut self, w: f64, x: &Self) {
        self.zip_apply(x, |a, b| *a += b * w);
    }
}

/// Cell masses (not densities) on a raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    pub spec: RasterSpec,
    pub values: Vec<T>,
}

impl<T: Mass> Raster<T> {
    pub fn filled(spec: RasterSpec, value: T) -> Self {
        let n = spec.len();
        Self {
            spec,
            values: vec![value; n],
        }
    }

    pub fn total(&self) -> Option<T> {
        let first = self.values.first()?;
        let mut acc = first.zero_like();
        for v in &self.values {
            acc.add_scaled(1.0, v);
        }
        Some(acc)
    }
}

impl Raster<CMatrix> {
    pub fn classicalise(&self, rho: &DensityOperator) -> Result<Raster<Complex64>> {
        if let Some(w) = self.values.first() {
            Error::check_dim(w.nrows(), rho.dim())?;
        }
        Ok(Raster {
            spec: self.spec.clone(),
            values: self
                .values
                .iter()
                .map(|w| trace_product(w, rho.matrix()))
                .collect(),
        })
    }
}

/// Operator weights deposited into their nearest cells.
pub fn rasterize_measure<M: OperatorMeasure + ?Sized>(
    q: &M,
    spec: &RasterSpec,
) -> Result<Raster<CMatrix>> {
    let d = q.dim();
    let mut raster = Raster::filled(spec.clone(), CMatrix::zeros(d, d));
    for s in q.support() {
        let cell = spec.cell_of(&s.point)?;
        raster.values[cell] += &s.weight;
    }
    Ok(raster)
}

/// Kernel density sampled on a centred odd-sized grid: index `j` on axis `k`
/// sits at `(j - half[k]) step[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridKernel {
    pub step: Vec<f64>,
    pub half: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridKernel {
    pub const MASS_TOL: f64 = 1e-6;

    pub fn new(step: Vec<f64>, half: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let k = Self { step, half, values };
        let spec = k.spec()?;
        Error::check_dim(spec.len(), k.values.len())?;
        if k.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("kernel values must be finite".into()));
        }
        Ok(k)
    }

    pub fn sample<F: Fn(&[f64]) -> f64>(f: F, step: Vec<f64>, half: Vec<usize>) -> Result<Self> {
        let spec = Self::spec_of(&step, &half)?;
        let values = (0..spec.len()).map(|i| f(&spec.center(i))).collect();
        Self::new(step, half, values)
    }

    /// Unit mass in the central cell.
    pub fn impulse(step: Vec<f64>) -> Result<Self> {
        let half = vec![0; step.len()];
        let vol: f64 = step.iter().product();
        Self::new(step, half, vec![1.0 / vol])
    }

    fn spec_of(step: &[f64], half: &[usize]) -> Result<RasterSpec> {
        RasterSpec::new(
            step.iter()
                .zip(half)
                .map(|(s, &h)| -(h as f64) * s)
                .collect(),
            step.to_vec(),
            half.iter().map(|&h| 2 * h + 1).collect(),
        )
    }

    pub fn spec(&self) -> Result<RasterSpec> {
        Self::spec_of(&self.step, &self.half)
    }

    pub fn mass(&self) -> f64 {
        let vol: f64 = self.step.iter().product();
        self.values.iter().sum::<f64>() * vol
    }

    pub fn check_mass(&self) -> Result<()> {
        let mass = self.mass();
        if (mass - 1.0).abs() > Self::MASS_TOL {
            return Err(Error::KernelMass { mass });
        }
        Ok(())
    }

    /// Largest deviation, in mass units, of the kernel's marginal on `axes`
    /// from a unit point mass at the origin. Zero means the necessary
    /// condition for `h * Q` to keep the marginal property on those axes
    /// holds on this grid.
    pub fn marginal_condition_residual(&self, axes: &[usize]) -> Result<f64> {
        let spec = self.spec()?;
        let n = spec.n_axes();
        if let Some(&bad) = axes.iter().find(|&&a| a >= n) {
            return Err(Error::AxisOutOfRange {
                axis: bad,
                n_axes: n,
            });
        }
        let kept_shape: Vec<usize> = axes.iter().map(|&a| spec.shape[a]).collect();
        let kept = RasterSpec::new(
            axes.iter().map(|_| 0.0).collect(),
            axes.iter().map(|_| 1.0).collect(),
            kept_shape.clone(),
        )?;
        let vol = spec.cell_volume();
        let mut marginal = vec![0.0; kept_shape.iter().product()];
        for (i, v) in self.values.iter().enumerate() {
            let idx = spec.multi_index(i);
            let sub: Vec<usize> = axes.iter().map(|&a| idx[a]).collect();
            marginal[kept.flat_index(&sub)] += v * vol;
        }
        let centre: Vec<usize> = axes.iter().map(|&a| self.half[a]).collect();
        let centre = kept.flat_index(&centre);
        Ok(marginal
            .iter()
            .enumerate()
            .map(|(i, m)| (m - if i == centre { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max))
    }
}

/// Full discrete convolution of cell masses with a kernel density. The output
/// grid extends the input by the kernel half-width on every side, so no mass
/// is lost at the edges. The kernel is checked to unit mass within
/// [`GridKernel::MASS_TOL`] and then rescaled to exactly one.
pub fn convolve<T: Mass>(h: &GridKernel, p: &Raster<T>) -> Result<Raster<T>> {
    h.check_mass()?;
    let n = p.spec.n_axes();
    Error::check_dim(n, h.step.len())?;
    for (a, b) in h.step.iter().zip(&p.spec.step) {
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
            return Err(Error::InvalidGrid("kernel and raster steps differ".into()));
        }
    }
    let Some(first) = p.values.first() else {
        return Err(Error::InvalidGrid("empty raster".into()));
    };
    let kspec = h.spec()?;
    let out_spec = RasterSpec::new(
        p.spec
            .origin
            .iter()
            .zip(&kspec.origin)
            .map(|(a, b)| a + b)
            .collect(),
        p.spec.step.clone(),
        p.spec
            .shape
            .iter()
            .zip(&kspec.shape)
            .map(|(a, b)| a + b - 1)
            .collect(),
    )?;
    let weights: Vec<f64> = {
        let total: f64 = h.values.iter().sum();
        h.values.iter().map(|v| v / total).collect()
    };
    let zero = first.zero_like();
    let kidx: Vec<Vec<usize>> = (0..kspec.len()).map(|j| kspec.multi_index(j)).collect();
    let values: Vec<T> = (0..out_spec.len())
        .into_par_iter()
        .map(|o| {
            let oi = out_spec.multi_index(o);
            let mut acc = zero.clone();
            'kernel: for (j, kj) in kidx.iter().enumerate() {
                if weights[j] == 0.0 {
                    continue;
                }
                let mut src = Vec::with_capacity(n);
                for k in 0..n {
                    let Some(s) = oi[k].checked_sub(kj[k]) else {
                        continue 'kernel;
                    };
                    if s >= p.spec.shape[k] {
                        continue 'kernel;
                    }
                    src.push(s);
                }
                acc.add_scaled(weights[j], &p.values[p.spec.flat_index(&src)]);
            }
            acc
        })
        .collect();
    Ok(Raster {
        spec: out_spec,
        values,
    })
}

/// Rasterizes a measure's operator weights and convolves them with `h`.
pub fn convolve_measure<M: OperatorMeasure + ?Sized>(
    h: &GridKernel,
    q: &M,
    spec: &RasterSpec,
) -> Result<Raster<CMatrix>> {
    convolve(h, &rasterize_measure(q, spec)?)
}

/// Hermitian basis of d x d matrices, orthonormal for the Hilbert-Schmidt
/// inner product.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        let mut e = CMatrix::zeros(d, d);
        e[(j, j)] = Complex64::new(1.0, 0.0);
        basis.push(e);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut s = CMatrix::zeros(d, d);
            s[(j, k)] = Complex64::new(r, 0.0);
            s[(k, j)] = Complex64::new(r, 0.0);
            basis.push(s);
            let mut a = CMatrix::zeros(d, d);
            a[(j, k)] = Complex64::new(0.0, r);
            a[(k, j)] = Complex64::new(0.0, -r);
            basis.push(a);
        }
    }
    basis
}

/// Relative singular-value cut for [`faithfulness_rank`].
pub const RANK_TOL: f64 = 1e-10;

/// Rank of the real-linear map from Hermitian operators to the quasi-
/// probability values over the support. The representation is faithful iff
/// this equals `dim^2`.
pub fn faithfulness_rank<M: OperatorMeasure + ?Sized>(q: &M) -> usize {
    let d = q.dim();
    let basis = hermitian_basis(d);
    let support = q.support();
    let rows = 2 * support.len();
    let columns: Vec<Vec<f64>> = basis
        .par_iter()
        .map(|h| {
            let mut col = Vec::with_capacity(rows);
            for s in support {
                let v = trace_product(&s.weight, h);
                col.push(v.re);
                col.push(v.im);
            }
            col
        })
        .collect();
    if rows == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows, basis.len(), |r, c| columns[c][r]);
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

/// Riemann-sum inverse Fourier transform of characteristic-function samples:
/// `(2 pi)^-n sum chi(s) e^{i <s, x>} cell` evaluated at each of `points`.
pub fn invert_characteristic(
    samples: &[(Vec<f64>, Complex64)],
    cell: f64,
    points: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    let n = samples.first().map_or(0, |(s, _)| s.len());
    for (s, _) in samples {
        Error::check_dim(n, s.len())?;
    }
    for x in points {
        Error::check_dim(n, x.len())?;
    }
    let norm = cell / (2.0 * std::f64::consts::PI).powi(n as i32);
    Ok(points
        .par_iter()
        .map(|x| {
            samples.iter().fold(ZERO, |acc, (s, chi)| {
                let phase: f64 = s.iter().zip(x).map(|(a, b)| a * b).sum();
                acc + chi * Complex64::from_polar(norm, phase)
            })
        })
        .collect())
}

/// max-abs of a matrix-valued raster difference.
pub fn raster_distance(a: &Raster<CMatrix>, b: &Raster<CMatrix>) -> f64 {
    if a.spec != b.spec {
        return f64::INFINITY;
    }
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| max_abs(&(x - y)))
        .fold(0.0, f64::max)
}
