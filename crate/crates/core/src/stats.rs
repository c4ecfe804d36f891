//! Quasi-correlations, covariances, conditional quasi-expectations and weak
//! values of a pair (A, B) read off a two-axis QJSD.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{trace_product, CMatrix, ZERO};
use crate::qjsd::{euclidean, marginal_qjsd, DiscreteQjsd, OperatorMeasure};
use crate::spectral::{eigendecompose, DensityOperator, HermitianOperator, SpectralMeasure};
use crate::transform::{quasi_classicalise, PointFunction, QjpDistribution};

/// Default absolute cut on `rho_B(b)` below which an atom is not conditioned on.
pub const DEFAULT_THRESHOLD: f64 = 1e-12;

fn require_pair(q: &DiscreteQjsd) -> Result<()> {
    if q.n_axes() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a two-axis distribution, got {} axes",
            q.n_axes()
        )));
    }
    Ok(())
}

fn eval1<F: PointFunction + ?Sized>(f: &F, x: f64) -> Result<Complex64> {
    let v = f.eval(&[x])?;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: vec![x] })
    }
}

/// `f(A) = sum f(a) E_A(a)`.
pub fn apply<F: PointFunction + ?Sized>(f: &F, measure: &SpectralMeasure) -> Result<CMatrix> {
    let d = measure.dim();
    measure
        .atoms()
        .iter()
        .try_fold(CMatrix::zeros(d, d), |acc, atom| {
            let v = eval1(f, atom.value)?;
            Ok(acc + atom.projector.map(|z| z * v))
        })
}

/// `Tr[f(A) rho]` for the observable on `axis`.
pub fn expectation<F: PointFunction + ?Sized>(
    f: &F,
    q: &DiscreteQjsd,
    axis: usize,
    rho: &DensityOperator,
) -> Result<Complex64> {
    let measure = q.observables().get(axis).ok_or(Error::AxisOutOfRange {
        axis,
        n_axes: q.n_axes(),
    })?;
    Error::check_dim(measure.dim(), rho.dim())?;
    Ok(rho.expectation(&apply(f, measure)?))
}

/// `<g, f> = sum g*(x) f(x) QJP(x)` for functions of the full point.
pub fn sesquilinear_form<F, G>(f: &F, g: &G, qjp: &QjpDistribution) -> Result<Complex64>
where
    F: PointFunction + ?Sized,
    G: PointFunction + ?Sized,
{
    qjp.support.iter().try_fold(ZERO, |acc, p| {
        let (fv, gv) = (f.eval(&p.point)?, g.eval(&p.point)?);
        if !(fv.re.is_finite() && fv.im.is_finite() && gv.re.is_finite() && gv.im.is_finite()) {
            return Err(Error::NonFinite {
                point: p.point.clone(),
            });
        }
        Ok(acc + gv.conj() * fv * p.value)
    })
}

/// `<g(B), f(A)> = sum g*(b) f(a) QJP(a, b)`.
pub fn quasi_correlation<F, G>(
    f: &F,
    g: &G,
    q: &DiscreteQjsd,
    rho: &DensityOperator,
) -> Result<Complex64>
where
    F: PointFunction + ?Sized,
    G: PointFunction + ?Sized,
{
    require_pair(q)?;
    let qjp = quasi_classicalise(q, rho)?;
    qjp.support.iter().try_fold(ZERO, |acc, p| {
        Ok(acc + eval1(g, p.point[1])?.conj() * eval1(f, p.point[0])? * p.value)
    })
}

/// Quasi-correlation minus `E[g(B)]* E[f(A)]`.
pub fn quantum_covariance<F, G>(
    f: &F,
    g: &G,
    q: &DiscreteQjsd,
    rho: &DensityOperator,
) -> Result<Complex64>
where
    F: PointFunction + ?Sized,
    G: PointFunction + ?Sized,
{
    let corr = quasi_correlation(f, g, q, rho)?;
    let ef = expectation(f, q, 0, rho)?;
    let eg = expectation(g, q, 1, rho)?;
    Ok(corr - eg.conj() * ef)
}

/// `Tr[{A, B}/2 rho] - <A><B>`
pub fn symmetric_covariance(
    a: &HermitianOperator,
    b: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    Error::check_dim(a.dim(), b.dim())?;
    Error::check_dim(a.dim(), rho.dim())?;
    let anti = (a.matrix() * b.matrix() + b.matrix() * a.matrix()) * Complex64::new(0.5, 0.0);
    let ea = rho.expectation(a.matrix()).re;
    let eb = rho.expectation(b.matrix()).re;
    Ok(rho.expectation(&anti).re - ea * eb)
}

/// `Tr[[B, A]/(2i) rho]`, the part of the covariance carried by `i alpha`.
pub fn antisymmetric_covariance(
    a: &HermitianOperator,
    b: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    Error::check_dim(a.dim(), b.dim())?;
    Error::check_dim(a.dim(), rho.dim())?;
    let comm = b.matrix() * a.matrix() - a.matrix() * b.matrix();
    Ok((rho.expectation(&comm) / Complex64::new(0.0, 2.0)).re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalExpectation {
    /// `(b, E[f(A) | B = b])` for every retained atom, ascending in `b`.
    pub atoms: Vec<(f64, Complex64)>,
    /// `(b, rho_B(b))` for atoms at or below the threshold.
    pub excluded: Vec<(f64, f64)>,
    /// `sum_b E[f(A) | B = b] E_B(b)` over retained atoms.
    pub operator_form: CMatrix,
    /// Retained `rho_B(b)`, aligned with `atoms`.
    pub weights: Vec<f64>,
}

impl ConditionalExpectation {
    pub fn value_at(&self, b: f64, tol: f64) -> Option<Complex64> {
        self.atoms
            .iter()
            .find(|(x, _)| (x - b).abs() <= tol)
            .map(|(_, v)| *v)
    }
}

/// `E[f(A) | B = b] = sum_a f(a) QJP(a, b) / rho_B(b)`.
pub fn conditional_expectation<F: PointFunction + ?Sized>(
    f: &F,
    q: &DiscreteQjsd,
    rho: &DensityOperator,
    threshold: f64,
) -> Result<ConditionalExpectation> {
    require_pair(q)?;
    let qjp = quasi_classicalise(q, rho)?;
    let b_measure = marginal_qjsd(q, 0)?;
    let tol = q.merge_tol();
    let mut retained = Vec::new();
    let mut excluded = Vec::new();
    let mut weights = Vec::new();
    let mut operator_form = CMatrix::zeros(q.dim(), q.dim());
    for atom in b_measure.support() {
        let b = atom.point[0];
        let mut numerator = ZERO;
        for p in &qjp.support {
            if euclidean(&p.point[1..], &[b]) <= tol {
                numerator += eval1(f, p.point[0])? * p.value;
            }
        }
        let prob = trace_product(&atom.weight, rho.matrix()).re;
        if prob <= threshold {
            excluded.push((b, prob));
            continue;
        }
        let value = numerator / prob;
        operator_form += atom.weight.map(|z| z * value);
        retained.push((b, value));
        weights.push(prob);
    }
    if retained.is_empty() {
        return Err(Error::DegenerateConditioning { threshold });
    }
    Ok(ConditionalExpectation {
        atoms: retained,
        excluded,
        operator_form,
        weights,
    })
}

/// `|<g(B), E[f(A)|B]>_{rho_B} - <g(B), f(A)>_{rho_#}|`.
pub fn verify_correlation_preservation<F, G>(
    f: &F,
    g: &G,
    q: &DiscreteQjsd,
    rho: &DensityOperator,
    threshold: f64,
) -> Result<f64>
where
    F: PointFunction + ?Sized,
    G: PointFunction + ?Sized,
{
    let ce = conditional_expectation(f, q, rho, threshold)?;
    let mut lhs = ZERO;
    for ((b, v), w) in ce.atoms.iter().zip(&ce.weights) {
        lhs += eval1(g, *b)?.conj() * v * *w;
    }
    Ok((lhs - quasi_correlation(f, g, q, rho)?).norm())
}

/// Projector and post-selection probability for `B = b`.
fn post_selection(
    b_op: &HermitianOperator,
    b: f64,
    rho: &DensityOperator,
    threshold: f64,
) -> Result<(CMatrix, f64)> {
    Error::check_dim(b_op.dim(), rho.dim())?;
    let measure = eigendecompose(b_op, None)?;
    let tol = 1e-9 * (1.0 + measure.spectral_radius());
    let projector = measure
        .projector_at(b, tol)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{b} is not an eigenvalue of the post-selected observable"
            ))
        })?
        .clone();
    let probability = trace_product(&projector, rho.matrix()).re;
    if probability <= threshold {
        return Err(Error::DegeneratePostSelection {
            probability,
            threshold,
        });
    }
    Ok((projector, probability))
}

/// `Tr[E_B(b) A rho] / Tr[E_B(b) rho]`.
pub fn weak_value(
    a: &HermitianOperator,
    b_op: &HermitianOperator,
    b: f64,
    rho: &DensityOperator,
    threshold: f64,
) -> Result<Complex64> {
    Error::check_dim(a.dim(), b_op.dim())?;
    let (projector, probability) = post_selection(b_op, b, rho, threshold)?;
    Ok(trace_product(&(projector * a.matrix()), rho.matrix()) / probability)
}

/// `Re[A_w] + i alpha Im[A_w]`.
pub fn two_state_value(
    a: &HermitianOperator,
    b_op: &HermitianOperator,
    b: f64,
    rho: &DensityOperator,
    alpha: Complex64,
    threshold: f64,
) -> Result<Complex64> {
    let w = weak_value(a, b_op, b, rho, threshold)?;
    Ok(Complex64::new(w.re, 0.0) + Complex64::new(0.0, 1.0) * alpha * w.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, CVector, ONE};
    use crate::qjsd::{build_qjsd, BuildOptions, HashingSpec};
    use crate::random;
    use crate::spectral::{born_distribution, joint_of};
    use proptest::prelude::*;
    use rand::Rng;

    fn sx() -> HermitianOperator {
        HermitianOperator::new(pauli_x()).unwrap()
    }

    fn sz() -> HermitianOperator {
        HermitianOperator::new(pauli_z()).unwrap()
    }

    fn alpha_qjsd(alpha: Complex64, a: &HermitianOperator, b: &HermitianOperator) -> DiscreteQjsd {
        build_qjsd(
            &HashingSpec::alpha(alpha),
            &[a.clone(), b.clone()],
            &BuildOptions::default(),
        )
        .unwrap()
    }

    fn id(x: &[f64]) -> Complex64 {
        Complex64::new(x[0], 0.0)
    }

    fn one(_: &[f64]) -> Complex64 {
        ONE
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn correlation_normalisation_and_commuting_case() {
        let mut rng = random::seeded(1);
        let (a, b) = random::commuting_pair(&mut rng, 4);
        let rho = random::density(&mut rng, 4);
        let q = alpha_qjsd(c(0.4, 0.9), &a, &b);
        assert!((quasi_correlation(&one, &one, &q, &rho).unwrap() - ONE).norm() < 1e-12);
        let f = |x: &[f64]| c(x[0] * x[0] - 1.0, 0.0);
        let g = |x: &[f64]| c(x[0].sin(), 0.0);
        let born = born_distribution(&joint_of(&[&a, &b]).unwrap(), &rho).unwrap();
        let classical: f64 = born
            .raw()
            .iter()
            .map(|(v, p)| (v[0] * v[0] - 1.0) * v[1].sin() * p)
            .sum();
        assert!((quasi_correlation(&f, &g, &q, &rho).unwrap() - c(classical, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pauli_alpha_correlation() {
        let mut rng = random::seeded(2);
        let rho = random::density(&mut rng, 2);
        let (x, z) = (pauli_x(), pauli_z());
        let anti = rho.expectation(&((&x * &z + &z * &x) * c(0.5, 0.0)));
        let comm = rho.expectation(&((&z * &x - &x * &z) / c(0.0, 2.0)));
        for alpha in [
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(-1.0, 0.0),
            c(0.3, 0.7),
            c(0.0, 1.0),
        ] {
            let q = alpha_qjsd(alpha, &sx(), &sz());
            let corr = quasi_correlation(&id, &id, &q, &rho).unwrap();
            let expected = anti + c(0.0, 1.0) * alpha * comm;
            assert!((corr - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn covariance_decomposition() {
        let mut rng = random::seeded(3);
        for _ in 0..50 {
            let d = rng.random_range(2..6);
            let (a, b) = (
                random::hermitian(&mut rng, d),
                random::hermitian(&mut rng, d),
            );
            let rho = random::density(&mut rng, d);
            let alpha = random::alpha(&mut rng);
            let cv = quantum_covariance(&id, &id, &alpha_qjsd(alpha, &a, &b), &rho).unwrap();
            let cs = symmetric_covariance(&a, &b, &rho).unwrap();
            let ca = antisymmetric_covariance(&a, &b, &rho).unwrap();
            assert!((cv - (c(cs, 0.0) + c(0.0, 1.0) * alpha * ca)).norm() < 1e-9);
        }
    }

    #[test]
    fn covariance_of_an_observable_with_itself_is_its_variance() {
        let mut rng = random::seeded(4);
        let a = random::hermitian(&mut rng, 4);
        let rho = random::density(&mut rng, 4);
        let q = alpha_qjsd(c(0.3, -1.2), &a, &a);
        let cv = quantum_covariance(&id, &id, &q, &rho).unwrap();
        let mean = rho.expectation(a.matrix()).re;
        let second = rho.expectation(&(a.matrix() * a.matrix())).re;
        assert!((cv - c(second - mean * mean, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn covariance_is_affine_in_alpha_at_an_eigenstate_of_b() {
        let mut rng = random::seeded(5);
        let a = random::hermitian(&mut rng, 3);
        let b_vals = [1.0, -0.5, 2.0];
        let u = random::unitary(&mut rng, 3);
        let b = HermitianOperator::new(crate::linalg::symmetrize(
            &(&u * crate::linalg::diag_real(&b_vals) * u.adjoint()),
        ))
        .unwrap();
        let ket = u.column(1).into_owned();
        let rho = DensityOperator::from_ket(&ket, true).unwrap();
        let cov = |alpha: Complex64| {
            quantum_covariance(&id, &id, &alpha_qjsd(alpha, &a, &b), &rho).unwrap()
        };
        let (c0, c1, ci) = (cov(c(0.0, 0.0)), cov(c(1.0, 0.0)), cov(c(0.0, 1.0)));
        // affine in alpha: the slope read at 1 and at i agrees
        let slope = c1 - c0;
        assert!((ci - c0 - c(0.0, 1.0) * slope).norm() < 1e-12);
        let ca = antisymmetric_covariance(&a, &b, &rho).unwrap();
        assert!((slope - c(0.0, ca)).norm() < 1e-12);
        for _ in 0..3 {
            let alpha = random::alpha(&mut rng);
            assert!((cov(alpha) - c0 - alpha * slope).norm() < 1e-12);
        }
    }

    fn closed_form(
        a: &HermitianOperator,
        b: &HermitianOperator,
        rho: &DensityOperator,
        alpha: Complex64,
        f: &dyn Fn(f64) -> f64,
    ) -> Vec<(f64, Complex64)> {
        let fa = apply(
            &|x: &[f64]| c(f(x[0]), 0.0),
            &eigendecompose(a, None).unwrap(),
        )
        .unwrap();
        eigendecompose(b, None)
            .unwrap()
            .atoms()
            .iter()
            .map(|atom| {
                let t = trace_product(&(&atom.projector * &fa), rho.matrix())
                    / trace_product(&atom.projector, rho.matrix());
                (atom.value, c(t.re, 0.0) + c(0.0, 1.0) * alpha * t.im)
            })
            .collect()
    }

    #[test]
    fn conditional_expectation_closed_form_and_tower() {
        let mut rng = random::seeded(6);
        for _ in 0..50 {
            let d = rng.random_range(2..6);
            let (a, b) = (
                random::hermitian(&mut rng, d),
                random::hermitian(&mut rng, d),
            );
            let rho = random::density(&mut rng, d);
            let alpha = random::alpha(&mut rng);
            let q = alpha_qjsd(alpha, &a, &b);
            let f = |x: f64| x * x * x - x;
            let ce =
                conditional_expectation(&|x: &[f64]| c(f(x[0]), 0.0), &q, &rho, DEFAULT_THRESHOLD)
                    .unwrap();
            assert!(ce.excluded.is_empty());
            for ((b0, v), (b1, w)) in ce.atoms.iter().zip(closed_form(&a, &b, &rho, alpha, &f)) {
                assert!((b0 - b1).abs() < 1e-12);
                assert!((v - w).norm() < 1e-9);
            }
            // tower property, via weights and via the operator form
            let outer_mean: Complex64 = ce
                .atoms
                .iter()
                .zip(&ce.weights)
                .map(|((_, v), w)| v * *w)
                .sum();
            let direct = expectation(&|x: &[f64]| c(f(x[0]), 0.0), &q, 0, &rho).unwrap();
            assert!((outer_mean - direct).norm() < 1e-9);
            assert!((rho.expectation(&ce.operator_form) - direct).norm() < 1e-9);
            let g = |x: &[f64]| c(x[0].cos(), 0.5 * x[0]);
            let r = verify_correlation_preservation(
                &|x: &[f64]| c(f(x[0]), 0.0),
                &g,
                &q,
                &rho,
                DEFAULT_THRESHOLD,
            )
            .unwrap();
            assert!(r < 1e-9);
        }
    }

    #[test]
    fn conditioning_excludes_null_atoms() {
        let q = alpha_qjsd(c(1.0, 0.0), &sx(), &sz());
        let up = DensityOperator::basis(2, 0);
        let ce = conditional_expectation(&id, &q, &up, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(ce.atoms.len(), 1);
        assert_eq!(ce.excluded.len(), 1);
        assert_eq!(ce.excluded[0].0, -1.0);
        assert!(ce.excluded[0].1.abs() <= DEFAULT_THRESHOLD);
        assert!(matches!(
            conditional_expectation(&id, &q, &up, 2.0),
            Err(Error::DegenerateConditioning { .. })
        ));
    }

    #[test]
    fn commuting_conditioning_is_classical() {
        let a = HermitianOperator::diagonal(&[1.0, 2.0, 5.0]);
        let b = HermitianOperator::diagonal(&[0.0, 0.0, 1.0]);
        let rho = DensityOperator::new(crate::linalg::diag_real(&[0.2, 0.3, 0.5])).unwrap();
        let q = alpha_qjsd(c(0.2, 0.4), &a, &b);
        let ce = conditional_expectation(&id, &q, &rho, DEFAULT_THRESHOLD).unwrap();
        assert!((ce.value_at(0.0, 1e-12).unwrap() - c((0.2 + 0.6) / 0.5, 0.0)).norm() < 1e-12);
        assert!((ce.value_at(1.0, 1e-12).unwrap() - c(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn weak_value_examples() {
        let plus = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let rho = DensityOperator::from_ket(&plus, true).unwrap();
        let w = weak_value(&sx(), &sz(), 1.0, &rho, DEFAULT_THRESHOLD).unwrap();
        assert!((w - ONE).norm() < 1e-12);

        let eps = 0.1;
        let ket = CVector::from_vec(vec![c(1.0, 0.0), c(eps, 0.0)]);
        let rho = DensityOperator::from_ket(&ket, true).unwrap();
        let w = weak_value(&sx(), &sz(), -1.0, &rho, DEFAULT_THRESHOLD).unwrap();
        assert!((w - c(10.0, 0.0)).norm() < 1e-9);

        let mut rng = random::seeded(7);
        let a = random::hermitian(&mut rng, 3);
        let measure = eigendecompose(&a, None).unwrap();
        let rho = random::density(&mut rng, 3);
        for atom in measure.atoms() {
            let w = weak_value(&a, &a, atom.value, &rho, DEFAULT_THRESHOLD).unwrap();
            assert!((w - c(atom.value, 0.0)).norm() < 1e-10);
        }

        let up = DensityOperator::basis(2, 0);
        match weak_value(&sx(), &sz(), -1.0, &up, DEFAULT_THRESHOLD) {
            Err(Error::DegeneratePostSelection { probability, .. }) => {
                assert!(probability.abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            weak_value(&sx(), &sz(), 0.5, &up, DEFAULT_THRESHOLD),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn weak_value_is_kd_conditioning_and_pure_state_ratio() {
        let mut rng = random::seeded(8);
        for d in [2usize, 3] {
            let (a, b) = (
                random::hermitian(&mut rng, d),
                random::hermitian(&mut rng, d),
            );
            let ket = random::ket(&mut rng, d);
            let rho = DensityOperator::from_ket(&ket, true).unwrap();
            let psi = ket.normalize();
            let q = alpha_qjsd(ONE, &a, &b);
            let ce = conditional_expectation(&id, &q, &rho, DEFAULT_THRESHOLD).unwrap();
            let (_, vectors) = crate::linalg::hermitian_eigen(b.matrix());
            let (values, _) = crate::linalg::hermitian_eigen(b.matrix());
            for (k, bv) in values.iter().enumerate() {
                let w = weak_value(&a, &b, *bv, &rho, DEFAULT_THRESHOLD).unwrap();
                assert!((ce.value_at(*bv, 1e-9).unwrap() - w).norm() < 1e-12);
                let e = vectors.column(k);
                let ratio =
                    (e.adjoint() * a.matrix() * &psi)[(0, 0)] / (e.adjoint() * &psi)[(0, 0)];
                assert!((ratio - w).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn two_state_values() {
        let mut rng = random::seeded(9);
        let (a, b) = (
            random::hermitian(&mut rng, 2),
            random::hermitian(&mut rng, 2),
        );
        let rho = random::pure_state(&mut rng, 2);
        let bv = eigendecompose(&b, None).unwrap().values()[0];
        let w = weak_value(&a, &b, bv, &rho, DEFAULT_THRESHOLD).unwrap();
        assert!(w.im.abs() > 1e-3);
        let at = |alpha| two_state_value(&a, &b, bv, &rho, alpha, DEFAULT_THRESHOLD).unwrap();
        assert!((at(ONE) - w).norm() < 1e-14);
        assert!((at(c(0.0, 0.0)) - c(w.re, 0.0)).norm() < 1e-14);
        let rotated = at(c(0.0, 1.0));
        assert!((rotated - c(w.re - w.im, 0.0)).norm() < 1e-14);
        let ce = conditional_expectation(
            &id,
            &alpha_qjsd(c(0.0, 1.0), &a, &b),
            &rho,
            DEFAULT_THRESHOLD,
        )
        .unwrap();
        assert!((ce.value_at(bv, 1e-9).unwrap() - rotated).norm() < 1e-12);
        let alpha = c(0.4, -0.3);
        let mix = (ONE + alpha) / 2.0 * w + (ONE - alpha) / 2.0 * w.conj();
        assert!((at(alpha) - mix).norm() < 1e-14);
    }

    #[test]
    fn hermitian_symmetry_iff_real() {
        let mut rng = random::seeded(10);
        let (a, b) = (
            random::hermitian(&mut rng, 3),
            random::hermitian(&mut rng, 3),
        );
        let f = |x: &[f64]| c(x[0] * x[1], 0.3 * x[0] * x[0]);
        let g = |x: &[f64]| c(x[1].cos(), -x[0]);
        let mh = alpha_qjsd(c(0.0, 0.0), &a, &b);
        for _ in 0..20 {
            let rho = random::density(&mut rng, 3);
            let qjp = quasi_classicalise(&mh, &rho).unwrap();
            let fg = sesquilinear_form(&f, &g, &qjp).unwrap();
            let gf = sesquilinear_form(&g, &f, &qjp).unwrap();
            assert!((fg - gf.conj()).norm() < 1e-10);
        }
        let kd = alpha_qjsd(ONE, &sx(), &sz());
        let witness = (0..20).any(|_| {
            let rho = random::density(&mut rng, 2);
            let qjp = quasi_classicalise(&kd, &rho).unwrap();
            let fg = sesquilinear_form(&f, &g, &qjp).unwrap();
            let gf = sesquilinear_form(&g, &f, &qjp).unwrap();
            (fg - gf.conj()).norm() > 1e-3
        });
        assert!(witness);
    }

    #[test]
    fn mh_range_when_nonnegative() {
        let mut rng = random::seeded(11);
        let mut checked = 0;
        for _ in 0..200 {
            let (a, b) = (
                random::hermitian(&mut rng, 3),
                random::hermitian(&mut rng, 3),
            );
            let rho = random::density(&mut rng, 3);
            let q = alpha_qjsd(c(0.0, 0.0), &a, &b);
            let qjp = quasi_classicalise(&q, &rho).unwrap();
            if qjp.support.iter().any(|p| p.value.re < -1e-12) {
                continue;
            }
            checked += 1;
            let spec = eigendecompose(&a, None).unwrap().values();
            let (lo, hi) = (spec[0], spec[spec.len() - 1]);
            let ce = conditional_expectation(&id, &q, &rho, DEFAULT_THRESHOLD).unwrap();
            for (_, v) in &ce.atoms {
                assert!(v.re >= lo - 1e-9 && v.re <= hi + 1e-9);
                assert!(v.im.abs() < 1e-9);
            }
        }
        assert!(checked > 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn affine_in_alpha(seed in any::<u64>()) {
            let mut rng = random::seeded(seed);
            let (a, b) = (random::hermitian(&mut rng, 3), random::hermitian(&mut rng, 3));
            let rho = random::density(&mut rng, 3);
            let f = |x: &[f64]| c(x[0] * x[0], 0.0);
            let ce = |alpha: Complex64| conditional_expectation(&f, &alpha_qjsd(alpha, &a, &b), &rho, DEFAULT_THRESHOLD).unwrap();
            let cv = |alpha: Complex64| quantum_covariance(&id, &id, &alpha_qjsd(alpha, &a, &b), &rho).unwrap();
            let (p0, p1) = (c(0.0, 0.0), ONE);
            let alpha = random::alpha(&mut rng);
            let (e0, e1, ea) = (ce(p0), ce(p1), ce(alpha));
            for k in 0..e0.atoms.len() {
                let interp = e0.atoms[k].1 + alpha * (e1.atoms[k].1 - e0.atoms[k].1);
                prop_assert!((ea.atoms[k].1 - interp).norm() < 1e-9);
            }
            let interp = cv(p0) + alpha * (cv(p1) - cv(p0));
            prop_assert!((cv(alpha) - interp).norm() < 1e-9);
        }

        #[test]
        fn positive_distribution_gives_positive_form(seed in any::<u64>()) {
            let mut rng = random::seeded(seed);
            let (a, b) = random::commuting_pair(&mut rng, 4);
            let rho = random::density(&mut rng, 4);
            let q = alpha_qjsd(c(0.5, 0.5), &a, &b);
            let qjp = quasi_classicalise(&q, &rho).unwrap();
            let values: Vec<Complex64> = qjp.support.iter().map(|_| random::complex_normal(&mut rng)).collect();
            let table = crate::transform::TabulatedFunction::on_support(&q, &values).unwrap();
            let v = sesquilinear_form(&table, &table, &qjp).unwrap();
            prop_assert!(v.re >= -1e-12);
            prop_assert!(v.im.abs() < 1e-12);
        }
    }
}
