//! Hermitian eigenstructure: spectral measures, joint-spectral measures of
//! commuting families, functional calculus and the Born rule.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, hermiticity_residual, identity, max_abs, max_abs_diff, outer, symmetrize,
    trace_product, CMatrix, CVector,
};

/// Projector-level tolerance used for idempotence, orthogonality and
/// commutation checks.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// A dense complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Largest tolerated `max |H - H^dagger|`.
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidOperator(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        let residual = hermiticity_residual(&matrix);
        if residual > Self::TOLERANCE {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self {
            matrix: symmetrize(&matrix),
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            matrix: crate::linalg::diag_real(values),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAtom {
    pub value: f64,
    pub projector: CMatrix,
}

/// Eigenvalue-to-projector map of a Hermitian operator, one atom per distinct
/// eigenvalue, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<SpectralAtom>,
    tol: f64,
    dim: usize,
}

impl SpectralMeasure {
    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    pub fn values(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.value).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Grouping tolerance the measure was built with.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn spectral_radius(&self) -> f64 {
        self.atoms.iter().fold(0.0, |m, a| m.max(a.value.abs()))
    }

    /// Projector of the atom whose eigenvalue lies within `tol` of `value`.
    pub fn projector_at(&self, value: f64, tol: f64) -> Option<&CMatrix> {
        self.atoms
            .iter()
            .find(|a| (a.value - value).abs() <= tol)
            .map(|a| &a.projector)
    }

    /// sum_i a_i P_i
    pub fn reconstruct(&self) -> CMatrix {
        self.atoms
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, a| {
                acc + a.projector.scale(a.value)
            })
    }

    /// Largest deviation over idempotence, hermiticity, mutual orthogonality
    /// and completeness.
    pub fn projector_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut total = CMatrix::zeros(self.dim, self.dim);
        for (i, a) in self.atoms.iter().enumerate() {
            let p = &a.projector;
            worst = worst.max(max_abs_diff(&(p * p), p));
            worst = worst.max(hermiticity_residual(p));
            for b in &self.atoms[i + 1..] {
                worst = worst.max(max_abs(&(p * &b.projector)));
            }
            total += p;
        }
        worst.max(max_abs_diff(&total, &identity(self.dim)))
    }

    /// Builds a measure directly from atoms, e.g. a marginal of a
    /// quasi-joint-spectral distribution. Atoms are sorted by value.
    pub fn from_atoms(dim: usize, mut atoms: Vec<SpectralAtom>, tol: f64) -> Self {
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        Self { atoms, tol, dim }
    }
}

/// Spectral measure of `h`. Eigenvalues closer than `tol` are chained into
/// one atom (single linkage); `None` selects `1e-8 * spectral radius`.
pub fn eigendecompose(h: &HermitianOperator, tol: Option<f64>) -> Result<SpectralMeasure> {
    if let Some(t) = tol {
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grouping tolerance must be positive, got {t}"
            )));
        }
    }
    let dim = h.dim();
    let (values, vectors) = hermitian_eigen(h.matrix());
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = tol.unwrap_or(1e-8 * radius.max(f64::MIN_POSITIVE));

    let mut atoms = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        let value = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        let mut projector = CMatrix::zeros(dim, dim);
        for k in start..end {
            let v: CVector = vectors.column(k).into_owned();
            projector += outer(&v);
        }
        atoms.push(SpectralAtom {
            value,
            projector: symmetrize(&projector),
        });
        start = end;
    }
    Ok(SpectralMeasure { atoms, tol, dim })
}

/// Largest `max |PQ - QP|` over all projector pairs of the two measures.
pub fn commutation_residual(e: &SpectralMeasure, f: &SpectralMeasure) -> Result<f64> {
    Error::check_dim(e.dim(), f.dim())?;
    let mut worst = 0.0f64;
    for a in e.atoms() {
        for b in f.atoms() {
            let pq = &a.projector * &b.projector;
            let qp = &b.projector * &a.projector;
            worst = worst.max(max_abs_diff(&pq, &qp));
        }
    }
    Ok(worst)
}

/// True iff every projector of `e` commutes with every projector of `f`.
pub fn strongly_commutes(e: &SpectralMeasure, f: &SpectralMeasure) -> Result<bool> {
    Ok(commutation_residual(e, f)? <= PROJECTOR_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointAtom {
    pub values: Vec<f64>,
    pub projector: CMatrix,
}

/// Product measure of pairwise commuting spectral measures. Atoms are the
/// non-zero products, lexicographically ordered by eigenvalue tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralMeasure {
    axes: Vec<SpectralMeasure>,
    atoms: Vec<JointAtom>,
}

impl JointSpectralMeasure {
    pub fn single(measure: &SpectralMeasure) -> Self {
        let atoms = measure
            .atoms()
            .iter()
            .map(|a| JointAtom {
                values: vec![a.value],
                projector: a.projector.clone(),
            })
            .collect();
        Self {
            axes: vec![measure.clone()],
            atoms,
        }
    }

    pub fn axes(&self) -> &[SpectralMeasure] {
        &self.axes
    }

    pub fn atoms(&self) -> &[JointAtom] {
        &self.atoms
    }

    pub fn n_axes(&self) -> usize {
        self.axes.len()
    }

    pub fn dim(&self) -> usize {
        self.axes[0].dim()
    }
}

pub fn joint_spectral_measure(measures: &[SpectralMeasure]) -> Result<JointSpectralMeasure> {
    let Some(first) = measures.first() else {
        return Err(Error::InvalidArgument(
            "joint spectral measure needs at least one observable".into(),
        ));
    };
    let dim = first.dim();
    for (i, e) in measures.iter().enumerate() {
        Error::check_dim(dim, e.dim())?;
        for (j, f) in measures.iter().enumerate().skip(i + 1) {
            let residual = commutation_residual(e, f)?;
            if residual > PROJECTOR_TOL {
                return Err(Error::CommutativityViolation {
                    first: i,
                    second: j,
                    residual,
                });
            }
        }
    }

    // odometer over atom indices; the last axis varies fastest, which keeps
    // the output in lexicographic order
    let mut atoms = Vec::new();
    let mut index = vec![0usize; measures.len()];
    'outer: loop {
        let mut product = measures[0].atoms()[index[0]].projector.clone();
        for (k, m) in measures.iter().enumerate().skip(1) {
            product *= &m.atoms()[index[k]].projector;
        }
        if max_abs(&product) > PROJECTOR_TOL {
            atoms.push(JointAtom {
                values: index
                    .iter()
                    .zip(measures)
                    .map(|(&i, m)| m.atoms()[i].value)
                    .collect(),
                projector: symmetrize(&product),
            });
        }
        for k in (0..measures.len()).rev() {
            index[k] += 1;
            if index[k] < measures[k].len() {
                continue 'outer;
            }
            index[k] = 0;
        }
        break;
    }
    Ok(JointSpectralMeasure {
        axes: measures.to_vec(),
        atoms,
    })
}

/// sum_a f(a) E(a)
pub fn functional_calculus<F>(f: F, joint: &JointSpectralMeasure) -> Result<CMatrix>
where
    F: Fn(&[f64]) -> Complex64,
{
    let dim = joint.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for atom in joint.atoms() {
        let v = f(&atom.values);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite {
                point: atom.values.clone(),
            });
        }
        out += atom.projector.map(|z| z * v);
    }
    Ok(out)
}

/// Positive semi-definite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidState {
                reason: format!("matrix is {}x{}", matrix.nrows(), matrix.ncols()),
                residual: f64::INFINITY,
            });
        }
        let residual = hermiticity_residual(&matrix);
        if residual > HermitianOperator::TOLERANCE {
            return Err(Error::InvalidState {
                reason: "not Hermitian".into(),
                residual,
            });
        }
        let matrix = symmetrize(&matrix);
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState {
                reason: "trace differs from 1".into(),
                residual: (trace - 1.0).abs(),
            });
        }
        let (values, _) = hermitian_eigen(&matrix);
        if let Some(&min) = values.first() {
            if min < -Self::POSITIVITY_TOL {
                return Err(Error::InvalidState {
                    reason: "negative eigenvalue".into(),
                    residual: -min,
                });
            }
        }
        Ok(Self { matrix })
    }

    /// Rank-one state |psi><psi|. With `renormalize` the ket is scaled to unit
    /// norm first; otherwise a norm off by more than 1e-10 is an error.
    pub fn from_ket(ket: &CVector, renormalize: bool) -> Result<Self> {
        let norm_sq = ket.norm_squared();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::InvalidState {
                reason: "ket has zero or non-finite norm".into(),
                residual: norm_sq,
            });
        }
        let ket = if renormalize {
            ket.unscale(norm_sq.sqrt())
        } else {
            if (norm_sq - 1.0).abs() > Self::TRACE_TOL {
                return Err(Error::InvalidState {
                    reason: "ket is not normalised".into(),
                    residual: (norm_sq - 1.0).abs(),
                });
            }
            ket.clone()
        };
        Ok(Self {
            matrix: symmetrize(&outer(&ket)),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: identity(dim).unscale(dim as f64),
        }
    }

    /// Basis projector |k><k|.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix[(k, k)] = Complex64::new(1.0, 0.0);
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Tr[X rho]
    pub fn expectation(&self, x: &CMatrix) -> Complex64 {
        trace_product(x, &self.matrix)
    }
}

/// Joint outcome probabilities Tr[E(a) rho] of a commuting family.
#[derive(Debug, Clone, PartialEq)]
pub struct BornDistribution {
    entries: Vec<(Vec<f64>, f64)>,
}

impl BornDistribution {
    /// Values in [-1e-12, 0) are reported as 0.
    pub const CLAMP: f64 = 1e-12;

    /// Unclamped probabilities.
    pub fn raw(&self) -> &[(Vec<f64>, f64)] {
        &self.entries
    }

    pub fn reported(&self) -> Vec<(Vec<f64>, f64)> {
        self.entries
            .iter()
            .map(|(a, p)| {
                let p = if *p < 0.0 && *p >= -Self::CLAMP {
                    0.0
                } else {
                    *p
                };
                (a.clone(), p)
            })
            .collect()
    }

    pub fn probability(&self, values: &[f64], tol: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|(a, _)| {
                a.len() == values.len() && a.iter().zip(values).all(|(x, y)| (x - y).abs() <= tol)
            })
            .map(|(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// Sums out every axis except `axis`.
    pub fn marginal(&self, axis: usize, tol: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (a, p) in &self.entries {
            match out.iter_mut().find(|(v, _)| (v - a[axis]).abs() <= tol) {
                Some(slot) => slot.1 += p,
                None => out.push((a[axis], *p)),
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }
}

pub fn born_distribution(
    joint: &JointSpectralMeasure,
    rho: &DensityOperator,
) -> Result<BornDistribution> {
    Error::check_dim(joint.dim(), rho.dim())?;
    let entries = joint
        .atoms()
        .iter()
        .map(|atom| (atom.values.clone(), rho.expectation(&atom.projector).re))
        .collect();
    Ok(BornDistribution { entries })
}

/// Convenience: eigendecompose then wrap as a one-axis joint measure.
pub fn joint_of(ops: &[&HermitianOperator]) -> Result<JointSpectralMeasure> {
    let measures = ops
        .iter()
        .map(|h| eigendecompose(h, None))
        .collect::<Result<Vec<_>>>()?;
    joint_spectral_measure(&measures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, pauli_x, pauli_z, ZERO};
    use crate::random;
    use nalgebra::DMatrix;

    fn op(m: CMatrix) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn sigma_z_atoms() {
        let e = eigendecompose(&op(pauli_z()), None).unwrap();
        assert_eq!(e.values(), vec![-1.0, 1.0]);
        assert!(max_abs_diff(&e.atoms()[0].projector, &diag_real(&[0.0, 1.0])) < 1e-14);
        assert!(max_abs_diff(&e.atoms()[1].projector, &diag_real(&[1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn identity_merges_into_one_atom() {
        let e = eigendecompose(&op(identity(2)), Some(1e-8)).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e.atoms()[0].value - 1.0).abs() < 1e-14);
        assert!(max_abs_diff(&e.atoms()[0].projector, &identity(2)) < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(
            HermitianOperator::new(rect),
            Err(Error::InvalidOperator(_))
        ));
        let mut m = pauli_x();
        m[(0, 1)] += Complex64::new(1e-3, 0.0);
        match HermitianOperator::new(m) {
            Err(Error::NotHermitian { residual }) => assert!((residual - 1e-3).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(eigendecompose(&op(pauli_z()), Some(0.0)).is_err());
    }

    /// Complex Hermitian H = X + iY has the same spectrum (doubled) as the
    /// real symmetric [[X, -Y], [Y, X]]; nalgebra's real solver is the oracle.
    fn realified_spectrum(h: &CMatrix) -> Vec<f64> {
        let n = h.nrows();
        let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = h[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
    }

    #[test]
    fn random_hermitian_reconstruction_and_spectrum() {
        let mut rng = random::seeded(11);
        let h = random::hermitian(&mut rng, 6);
        let e = eigendecompose(&h, None).unwrap();
        assert!(max_abs_diff(&e.reconstruct(), h.matrix()) <= 1e-10);
        assert!(e.projector_residual() <= 1e-10);
        let oracle = realified_spectrum(h.matrix());
        assert_eq!(e.len(), 6);
        for (a, b) in e.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        let vals = e.values();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degenerate_spectrum_groups() {
        let mut rng = random::seeded(5);
        let u = random::unitary(&mut rng, 5);
        let h = op(symmetrize(
            &(&u * diag_real(&[2.0, -1.0, 2.0, 0.5, -1.0]) * u.adjoint()),
        ));
        let e = eigendecompose(&h, None).unwrap();
        assert_eq!(e.len(), 3);
        let ranks: Vec<f64> = e.atoms().iter().map(|a| a.projector.trace().re).collect();
        assert!((ranks[0] - 2.0).abs() < 1e-10);
        assert!((ranks[1] - 1.0).abs() < 1e-10);
        assert!((ranks[2] - 2.0).abs() < 1e-10);
        assert!(e.projector_residual() < 1e-10);
    }

    #[test]
    fn strong_commutativity_examples() {
        let z = eigendecompose(&op(pauli_z()), None).unwrap();
        let x = eigendecompose(&op(pauli_x()), None).unwrap();
        assert!(strongly_commutes(&z, &z).unwrap());
        // oracle: [X, Z] = -2i Y, nonzero
        assert!(max_abs(&crate::linalg::commutator(&pauli_x(), &pauli_z())) > 1.0);
        assert!(!strongly_commutes(&x, &z).unwrap());
        let d1 = eigendecompose(&HermitianOperator::diagonal(&[1.0, 2.0, 3.0]), None).unwrap();
        let d2 = eigendecompose(&HermitianOperator::diagonal(&[5.0, 5.0, 7.0]), None).unwrap();
        assert!(strongly_commutes(&d1, &d2).unwrap());
        assert!(matches!(
            strongly_commutes(&d1, &z),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn functional_calculus_examples() {
        let z = eigendecompose(&op(pauli_z()), None).unwrap();
        let fz = functional_calculus(|a| a[0].into(), &JointSpectralMeasure::single(&z)).unwrap();
        assert!(max_abs_diff(&fz, &pauli_z()) < 1e-14);

        let x = eigendecompose(&op(pauli_x()), None).unwrap();
        let x2 = functional_calculus(|a| (a[0] * a[0]).into(), &JointSpectralMeasure::single(&x))
            .unwrap();
        assert!(max_abs_diff(&x2, &identity(2)) < 1e-14);

        let j = joint_of(&[
            &HermitianOperator::diagonal(&[1.0, 2.0]),
            &HermitianOperator::diagonal(&[3.0, 4.0]),
        ])
        .unwrap();
        let ab = functional_calculus(|a| (a[0] * a[1]).into(), &j).unwrap();
        assert!(max_abs_diff(&ab, &diag_real(&[3.0, 8.0])) < 1e-14);

        let bad = functional_calculus(|a| (1.0 / (a[0] - 1.0)).into(), &j);
        assert!(matches!(bad, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn joint_measure_examples() {
        let z = eigendecompose(&op(pauli_z()), None).unwrap();
        let j = joint_spectral_measure(std::slice::from_ref(&z)).unwrap();
        assert_eq!(j.atoms().len(), 2);
        for (ja, a) in j.atoms().iter().zip(z.atoms()) {
            assert_eq!(ja.values, vec![a.value]);
            assert_eq!(ja.projector, a.projector);
        }

        let j = joint_of(&[
            &HermitianOperator::diagonal(&[1.0, 2.0]),
            &HermitianOperator::diagonal(&[3.0, 3.0]),
        ])
        .unwrap();
        assert_eq!(j.atoms().len(), 2);
        assert_eq!(j.atoms()[0].values, vec![1.0, 3.0]);
        assert_eq!(j.atoms()[1].values, vec![2.0, 3.0]);
        assert!(max_abs_diff(&j.atoms()[0].projector, &diag_real(&[1.0, 0.0])) < 1e-14);

        let err = joint_of(&[&op(pauli_x()), &op(pauli_z())]);
        assert!(matches!(err, Err(Error::CommutativityViolation { .. })));
    }

    #[test]
    fn born_examples() {
        let j = joint_of(&[&op(pauli_z())]).unwrap();
        let p = born_distribution(&j, &DensityOperator::basis(2, 0)).unwrap();
        assert_eq!(p.probability(&[1.0], 1e-12), Some(1.0));
        assert_eq!(p.probability(&[-1.0], 1e-12), Some(0.0));
        let p = born_distribution(&j, &DensityOperator::maximally_mixed(2)).unwrap();
        assert!((p.probability(&[1.0], 1e-12).unwrap() - 0.5).abs() < 1e-15);

        let mut rng = random::seeded(3);
        let rho = random::density(&mut rng, 2);
        let j = joint_of(&[
            &HermitianOperator::diagonal(&[1.0, 2.0]),
            &HermitianOperator::diagonal(&[3.0, 4.0]),
        ])
        .unwrap();
        let p = born_distribution(&j, &rho).unwrap();
        assert!(
            (p.probability(&[1.0, 3.0], 1e-12).unwrap() - rho.matrix()[(0, 0)].re).abs() < 1e-14
        );
        assert!(
            (p.probability(&[2.0, 4.0], 1e-12).unwrap() - rho.matrix()[(1, 1)].re).abs() < 1e-14
        );
        assert!((p.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn born_marginals_match_single_observables() {
        let mut rng = random::seeded(21);
        for _ in 0..10 {
            let (a, b) = random::commuting_pair(&mut rng, 5);
            let rho = random::density(&mut rng, 5);
            let j = joint_of(&[&a, &b]).unwrap();
            let joint = born_distribution(&j, &rho).unwrap();
            for (axis, obs) in [(0, &a), (1, &b)] {
                let single = born_distribution(&joint_of(&[obs]).unwrap(), &rho).unwrap();
                let marginal = joint.marginal(axis, 1e-8);
                assert_eq!(marginal.len(), single.raw().len());
                for ((v, p), (w, q)) in marginal.iter().zip(single.raw()) {
                    assert!((v - w[0]).abs() < 1e-8);
                    assert!((p - q).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn state_validation() {
        let ket = CVector::from_vec(vec![Complex64::new(0.9, 0.0), ZERO]);
        assert!(matches!(
            DensityOperator::from_ket(&ket, false),
            Err(Error::InvalidState { .. })
        ));
        let rho = DensityOperator::from_ket(&ket, true).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(DensityOperator::new(diag_real(&[1.5, -0.5])).is_err());
        assert!(DensityOperator::new(diag_real(&[0.5, 0.4])).is_err());
    }

    #[test]
    fn clamped_reporting_keeps_raw() {
        let d = BornDistribution {
            entries: vec![(vec![0.0], -5e-13), (vec![1.0], 1.0 + 5e-13)],
        };
        assert_eq!(d.reported()[0].1, 0.0);
        assert_eq!(d.raw()[0].1, -5e-13);
    }
}
