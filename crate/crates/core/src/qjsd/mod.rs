//! Quasi-joint-spectral distributions (QJSDs).
//!
//! In finite dimension every hashed operator built from ordered products of
//! `exp(-i c s_k A_k)` is a finite Fourier sum, so its inverse transform is a
//! finite family of operator-weighted point masses. [`build_qjsd`] obtains
//! that family exactly by expanding each factor over the spectral measure of
//! its observable.

mod hashing;

pub use hashing::{parse_complex, HashingFactor, HashingSpec, HashingTerm};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, hermiticity_residual, identity, max_abs, max_abs_diff, trace_product,
    unitary_exp, CMatrix, ZERO,
};
use crate::spectral::{
    eigendecompose, DensityOperator, HermitianOperator, SpectralAtom, SpectralMeasure,
};

/// Contributions whose operator weight is below this (max-abs) are dropped.
pub const ZERO_WEIGHT: f64 = 1e-12;

/// Default cap on projector products per build.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub point: Vec<f64>,
    pub weight: CMatrix,
}

/// Anything that pairs points of R^n with operator weights: QJSDs and their
/// affine images alike.
pub trait OperatorMeasure {
    fn n_axes(&self) -> usize;
    fn dim(&self) -> usize;
    fn support(&self) -> &[SupportPoint];

    /// Sum of all weights (the identity for a QJSD).
    fn total_weight(&self) -> CMatrix {
        let d = self.dim();
        self.support()
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, s| acc + &s.weight)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteQjsd {
    n_axes: usize,
    dim: usize,
    support: Vec<SupportPoint>,
    observables: Vec<SpectralMeasure>,
    merge_tol: f64,
}

impl OperatorMeasure for DiscreteQjsd {
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

impl DiscreteQjsd {
    pub fn observables(&self) -> &[SpectralMeasure] {
        &self.observables
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// max |sum of weights - Id|
    pub fn normalisation_residual(&self) -> f64 {
        max_abs_diff(&self.total_weight(), &identity(self.dim))
    }

    /// Weight at the support point within `tol` (Euclidean) of `point`.
    pub fn weight_at(&self, point: &[f64], tol: f64) -> Option<&CMatrix> {
        self.support
            .iter()
            .find(|s| euclidean(&s.point, point) <= tol)
            .map(|s| &s.weight)
    }

    /// Largest discrepancy between two supports: point positions and weights
    /// are compared pairwise in sorted order. Differing support sizes give
    /// infinity.
    pub fn distance(&self, other: &DiscreteQjsd) -> f64 {
        support_distance(&self.support, &other.support)
    }

    /// Reads a one-axis distribution back as a spectral measure.
    pub fn to_spectral_measure(&self) -> Result<SpectralMeasure> {
        if self.n_axes != 1 {
            return Err(Error::InvalidArgument(format!(
                "a spectral measure needs one axis, distribution has {}",
                self.n_axes
            )));
        }
        let atoms = self
            .support
            .iter()
            .map(|s| SpectralAtom {
                value: s.point[0],
                projector: s.weight.clone(),
            })
            .collect();
        Ok(SpectralMeasure::from_atoms(self.dim, atoms, self.merge_tol))
    }

    /// Internal constructor for derived measures sharing the same observables.
    pub(crate) fn with_support(&self, support: Vec<SupportPoint>) -> Self {
        Self {
            n_axes: self.n_axes,
            dim: self.dim,
            support,
            observables: self.observables.clone(),
            merge_tol: self.merge_tol,
        }
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

pub(crate) fn support_distance(a: &[SupportPoint], b: &[SupportPoint]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).fold(0.0f64, |worst, (x, y)| {
        if x.point.len() != y.point.len() {
            return f64::INFINITY;
        }
        worst
            .max(euclidean(&x.point, &y.point))
            .max(max_abs_diff(&x.weight, &y.weight))
    })
}

/// Sorts contributions lexicographically and adds together those whose points
/// lie within `tol` of a cluster's first (smallest) point. Clusters whose total
/// weight vanishes are dropped.
pub(crate) fn merge_support(mut contributions: Vec<SupportPoint>, tol: f64) -> Vec<SupportPoint> {
    contributions.sort_by(|a, b| lex_cmp(&a.point, &b.point));
    let mut clusters: Vec<SupportPoint> = Vec::new();
    for c in contributions {
        let lead = c.point.first().copied().unwrap_or(0.0);
        let hit = clusters
            .iter_mut()
            .rev()
            .take_while(|k| k.point.first().copied().unwrap_or(0.0) >= lead - tol)
            .find(|k| euclidean(&k.point, &c.point) <= tol);
        match hit {
            Some(k) => k.weight += &c.weight,
            None => clusters.push(c),
        }
    }
    clusters.retain(|k| max_abs(&k.weight) > ZERO_WEIGHT);
    clusters.sort_by(|a, b| lex_cmp(&a.point, &b.point));
    clusters
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Eigenvalue grouping tolerance; `None` uses the spectral default.
    pub eigen_tol: Option<f64>,
    /// Support-point merge tolerance; `None` uses `1e-9 (1 + max |eigenvalue|)`.
    pub merge_tol: Option<f64>,
    pub budget: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            eigen_tol: None,
            merge_tol: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

pub fn build_qjsd(
    spec: &HashingSpec,
    observables: &[HermitianOperator],
    options: &BuildOptions,
) -> Result<DiscreteQjsd> {
    let measures = observables
        .iter()
        .map(|h| eigendecompose(h, options.eigen_tol))
        .collect::<Result<Vec<_>>>()?;
    build_from_measures(spec, &measures, options)
}

/// Same as [`build_qjsd`] for observables already in spectral form.
pub fn build_from_measures(
    spec: &HashingSpec,
    measures: &[SpectralMeasure],
    options: &BuildOptions,
) -> Result<DiscreteQjsd> {
    if measures.len() != spec.n_axes() {
        return Err(Error::InvalidHashing(format!(
            "hashing has {} axes but {} observables were given",
            spec.n_axes(),
            measures.len()
        )));
    }
    let Some(first) = measures.first() else {
        return Err(Error::InvalidArgument("no observables".into()));
    };
    let dim = first.dim();
    for m in measures {
        Error::check_dim(dim, m.dim())?;
    }
    // revalidate: HashingSpec values can be assembled through `reduced`
    let spec = HashingSpec::new(spec.n_axes(), spec.terms().to_vec())?;

    let sizes: Vec<usize> = measures.iter().map(|m| m.len()).collect();
    let products = spec.expansion_size(&sizes);
    if products > options.budget as u128 {
        return Err(Error::ResourceBudget {
            products,
            budget: options.budget,
        });
    }

    let radius = measures
        .iter()
        .fold(0.0f64, |r, m| r.max(m.spectral_radius()));
    let merge_tol = options.merge_tol.unwrap_or(1e-9 * (1.0 + radius));

    let mut contributions = Vec::new();
    for term in spec.terms() {
        if term.coefficient == ZERO {
            continue;
        }
        contributions.extend(expand_term(term, measures, spec.n_axes(), dim));
    }
    Ok(DiscreteQjsd {
        n_axes: spec.n_axes(),
        dim,
        support: merge_support(contributions, merge_tol),
        observables: measures.to_vec(),
        merge_tol,
    })
}

/// All `coefficient * P_1 P_2 ... P_m` for one choice of atom per factor.
/// Blocks keyed by the first factor's atom run in parallel; the ordered
/// collect keeps the output independent of scheduling.
fn expand_term(
    term: &HashingTerm,
    measures: &[SpectralMeasure],
    n_axes: usize,
    dim: usize,
) -> Vec<SupportPoint> {
    let factors = &term.factors;
    if factors.is_empty() {
        return vec![SupportPoint {
            point: vec![0.0; n_axes],
            weight: identity(dim).map(|z| z * term.coefficient),
        }];
    }
    let head = &measures[factors[0].axis];
    let blocks: Vec<Vec<SupportPoint>> = head
        .atoms()
        .par_iter()
        .map(|atom| {
            let mut point = vec![0.0; n_axes];
            point[factors[0].axis] += factors[0].fraction * atom.value;
            let mut out = Vec::new();
            descend(term, measures, 1, atom.projector.clone(), point, &mut out);
            out
        })
        .collect();
    blocks.into_iter().flatten().collect()
}

fn descend(
    term: &HashingTerm,
    measures: &[SpectralMeasure],
    depth: usize,
    prefix: CMatrix,
    point: Vec<f64>,
    out: &mut Vec<SupportPoint>,
) {
    if max_abs(&prefix) <= ZERO_WEIGHT {
        return;
    }
    if depth == term.factors.len() {
        out.push(SupportPoint {
            point,
            weight: prefix.map(|z| z * term.coefficient),
        });
        return;
    }
    let factor = term.factors[depth];
    for atom in measures[factor.axis].atoms() {
        let mut p = point.clone();
        p[factor.axis] += factor.fraction * atom.value;
        descend(term, measures, depth + 1, &prefix * &atom.projector, p, out);
    }
}

/// Integrates out `drop_axis` (zero-based).
pub fn marginal_qjsd(q: &DiscreteQjsd, drop_axis: usize) -> Result<DiscreteQjsd> {
    if drop_axis >= q.n_axes {
        return Err(Error::AxisOutOfRange {
            axis: drop_axis,
            n_axes: q.n_axes,
        });
    }
    let contributions = q
        .support
        .iter()
        .map(|s| {
            let mut point = s.point.clone();
            point.remove(drop_axis);
            SupportPoint {
                point,
                weight: s.weight.clone(),
            }
        })
        .collect();
    let mut observables = q.observables.clone();
    observables.remove(drop_axis);
    Ok(DiscreteQjsd {
        n_axes: q.n_axes - 1,
        dim: q.dim,
        support: merge_support(contributions, q.merge_tol),
        observables,
        merge_tol: q.merge_tol,
    })
}

/// Replaces every weight by its adjoint; the QJSD of the involuted hashing.
pub fn conjugate_qjsd(q: &DiscreteQjsd) -> DiscreteQjsd {
    q.with_support(
        q.support
            .iter()
            .map(|s| SupportPoint {
                point: s.point.clone(),
                weight: s.weight.adjoint(),
            })
            .collect(),
    )
}

/// True iff every weight is Hermitian within `tol`.
pub fn is_real_qjsd(q: &DiscreteQjsd, tol: f64) -> bool {
    q.support
        .iter()
        .all(|s| hermiticity_residual(&s.weight) <= tol)
}

/// Observables pre-diagonalised once so that each `exp(-i theta A)` is a
/// pair of matrix products.
struct Diagonalised {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl Diagonalised {
    fn new(h: &HermitianOperator) -> Self {
        let (values, vectors) = hermitian_eigen(h.matrix());
        Self { values, vectors }
    }

    fn exp(&self, theta: f64) -> CMatrix {
        let v = &self.vectors;
        let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |r, c| {
            v[(r, c)] * Complex64::from_polar(1.0, -theta * self.values[c])
        });
        scaled * v.adjoint()
    }
}

/// Tr[#(s) rho] on every grid point, using matrix exponentials of the
/// factors directly (no spectral expansion).
pub fn characteristic_function(
    spec: &HashingSpec,
    observables: &[HermitianOperator],
    rho: &DensityOperator,
    s_grid: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    if observables.len() != spec.n_axes() {
        return Err(Error::InvalidHashing(format!(
            "hashing has {} axes but {} observables were given",
            spec.n_axes(),
            observables.len()
        )));
    }
    let dim = rho.dim();
    for h in observables {
        Error::check_dim(dim, h.dim())?;
    }
    for s in s_grid {
        Error::check_dim(spec.n_axes(), s.len())?;
    }
    let diag: Vec<Diagonalised> = observables.iter().map(Diagonalised::new).collect();
    Ok(s_grid
        .par_iter()
        .map(|s| {
            let mut hashed = CMatrix::zeros(dim, dim);
            for term in spec.terms() {
                let mut product = identity(dim);
                for f in &term.factors {
                    product *= diag[f.axis].exp(f.fraction * s[f.axis]);
                }
                hashed += product.map(|z| z * term.coefficient);
            }
            rho.expectation(&hashed)
        })
        .collect())
}

/// Sum over the support of exp(-i <s, point>) Tr[weight rho].
pub fn fourier_sum<M: OperatorMeasure + ?Sized>(
    q: &M,
    rho: &DensityOperator,
    s: &[f64],
) -> Complex64 {
    q.support().iter().fold(ZERO, |acc, sp| {
        let phase: f64 = sp.point.iter().zip(s).map(|(a, b)| a * b).sum();
        acc + Complex64::from_polar(1.0, -phase) * trace_product(&sp.weight, rho.matrix())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrotterMode {
    /// exp(-i (sA + tB)) from the eigen-decomposition of sA + tB.
    Exact,
    /// (exp(-isA/N) exp(-itB/N))^N.
    Product(usize),
}

/// Characteristic function of the symmetric (Weyl-type) hashing of a pair.
pub fn trotter_characteristic(
    a: &HermitianOperator,
    b: &HermitianOperator,
    rho: &DensityOperator,
    grid: &[(f64, f64)],
    mode: TrotterMode,
) -> Result<Vec<Complex64>> {
    Error::check_dim(a.dim(), b.dim())?;
    Error::check_dim(a.dim(), rho.dim())?;
    if mode == TrotterMode::Product(0) {
        return Err(Error::InvalidArgument(
            "Trotter order must be at least 1".into(),
        ));
    }
    let da = Diagonalised::new(a);
    let db = Diagonalised::new(b);
    Ok(grid
        .par_iter()
        .map(|&(s, t)| {
            let u = match mode {
                TrotterMode::Exact => {
                    let h = a.matrix().scale(s) + b.matrix().scale(t);
                    unitary_exp(&h, 1.0)
                }
                TrotterMode::Product(n) => {
                    let step = da.exp(s / n as f64) * db.exp(t / n as f64);
                    let mut u = identity(a.dim());
                    for _ in 0..n {
                        u *= &step;
                    }
                    u
                }
            };
            rho.expectation(&u)
        })
        .collect())
}
