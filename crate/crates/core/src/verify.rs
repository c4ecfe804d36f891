//! Invariant battery behind `qjsd verify`. Every random draw comes from one
//! generator seeded by the caller, so a seed fixes the whole report.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_diff, pauli_x, pauli_z, trace_product, CVector, ONE, ZERO};
use crate::phase_space::{
    cohen_transform, fock, husimi, superposition, vacuum, wigner, CohenKernel, PhaseSpaceGrid,
};
use crate::qjsd::{
    build_qjsd, conjugate_qjsd, marginal_qjsd, BuildOptions, DiscreteQjsd, HashingSpec,
    OperatorMeasure,
};
use crate::random::{self, SeededRng};
use crate::spectral::{
    born_distribution, eigendecompose, joint_of, DensityOperator, HermitianOperator,
    SpectralMeasure,
};
use crate::stats::{
    antisymmetric_covariance, conditional_expectation, expectation, quantum_covariance,
    symmetric_covariance, verify_correlation_preservation, weak_value, DEFAULT_THRESHOLD,
};
use crate::transform::{
    faithfulness_rank, quasi_classicalise, verify_adjointness, QjpDistribution,
};

/// Hashing presets exercised by the battery.
pub const SHIPPED_PRESETS: [&str; 9] = [
    "alpha:-1",
    "alpha:0",
    "alpha:1",
    "alpha:i",
    "alpha:0.3+0.7i",
    "kappa:-1",
    "kappa:0",
    "kappa:0.5",
    "kappa:1",
];

pub fn shipped_hashings() -> Vec<HashingSpec> {
    SHIPPED_PRESETS
        .iter()
        .map(|p| HashingSpec::preset(p).expect("shipped presets are valid"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Spectral,
    Qjsd,
    Transform,
    Stats,
    PhaseSpace,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "spectral" => Suite::Spectral,
            "qjsd" => Suite::Qjsd,
            "transform" => Suite::Transform,
            "stats" => Suite::Stats,
            "phase-space" => Suite::PhaseSpace,
            _ => return Err(Error::InvalidArgument(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} cases={:<4} max_residual={:.3e} tol={:.0e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_residual,
            self.tolerance
        )
    }
}

/// Largest deviation of a one-axis QJSD from a spectral measure.
pub fn measure_distance(q: &DiscreteQjsd, m: &SpectralMeasure) -> f64 {
    let d = m.dim();
    let zero = crate::linalg::CMatrix::zeros(d, d);
    let tol = q.merge_tol();
    let mut worst = 0.0f64;
    for atom in m.atoms() {
        let w = q.weight_at(&[atom.value], tol).unwrap_or(&zero);
        worst = worst.max(max_abs_diff(w, &atom.projector));
    }
    for s in q.support() {
        if m.projector_at(s.point[0], tol).is_none() {
            worst = worst.max(max_abs(&s.weight));
        }
    }
    worst
}

/// Largest deviation of a QJP distribution from the Born distribution of
/// the same (commuting) observables.
pub fn born_distance(qjp: &QjpDistribution, born: &[(Vec<f64>, f64)], tol: f64) -> f64 {
    let mut worst = 0.0f64;
    for (point, p) in born {
        let v = qjp.value_at(point, tol).unwrap_or(ZERO);
        worst = worst.max((v - Complex64::new(*p, 0.0)).norm());
    }
    for p in &qjp.support {
        let known = born
            .iter()
            .any(|(x, _)| crate::qjsd::euclidean(x, &p.point) <= tol);
        if !known {
            worst = worst.max(p.value.norm());
        }
    }
    worst
}

struct Battery {
    rng: SeededRng,
    reports: Vec<PropertyReport>,
}

impl Battery {
    fn record(&mut self, name: &'static str, tolerance: f64, residuals: Vec<f64>) {
        let max_residual =
            residuals.iter().fold(
                0.0f64,
                |m, r| if r.is_nan() { f64::INFINITY } else { m.max(*r) },
            );
        self.reports.push(PropertyReport {
            name,
            cases: residuals.len(),
            max_residual,
            tolerance,
        });
    }

    fn dim(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    fn pair(&mut self, d: usize) -> (HermitianOperator, HermitianOperator) {
        (
            random::hermitian(&mut self.rng, d),
            random::hermitian(&mut self.rng, d),
        )
    }

    fn spectral(&mut self) -> Result<()> {
        let mut recon = Vec::new();
        let mut born = Vec::new();
        for _ in 0..30 {
            let d = self.dim(1, 8);
            let h = random::hermitian(&mut self.rng, d);
            let m = eigendecompose(&h, None)?;
            recon.push(max_abs_diff(&m.reconstruct(), h.matrix()).max(m.projector_residual()));
            let (a, b) = random::commuting_pair(&mut self.rng, d);
            let rho = random::density(&mut self.rng, d);
            born.push((born_distribution(&joint_of(&[&a, &b])?, &rho)?.total() - 1.0).abs());
        }
        self.record("spectral-resolution", 1e-10, recon);
        self.record("born-normalisation", 1e-12, born);
        Ok(())
    }

    fn qjsd(&mut self) -> Result<()> {
        let opts = BuildOptions::default();
        let specs = shipped_hashings();
        let (mut norm, mut collapse, mut marg, mut conj) = (vec![], vec![], vec![], vec![]);
        for _ in 0..10 {
            let d = self.dim(2, 5);
            let (a, b) = self.pair(d);
            let (ca, cb) = random::commuting_pair(&mut self.rng, d);
            let rho = random::density(&mut self.rng, d);
            let born = born_distribution(&joint_of(&[&ca, &cb])?, &rho)?.reported();
            let (ma, mb) = (eigendecompose(&a, None)?, eigendecompose(&b, None)?);
            for spec in &specs {
                let q = build_qjsd(spec, &[a.clone(), b.clone()], &opts)?;
                norm.push(q.normalisation_residual());
                marg.push(measure_distance(&marginal_qjsd(&q, 1)?, &ma));
                marg.push(measure_distance(&marginal_qjsd(&q, 0)?, &mb));
                let inv = build_qjsd(&spec.involution(), &[a.clone(), b.clone()], &opts)?;
                conj.push(conjugate_qjsd(&q).distance(&inv));
                let c = build_qjsd(spec, &[ca.clone(), cb.clone()], &opts)?;
                collapse.push(born_distance(
                    &quasi_classicalise(&c, &rho)?,
                    &born,
                    c.merge_tol(),
                ));
            }
        }
        self.record("qjsd-normalisation", 1e-10, norm);
        self.record("commuting-collapse", 1e-9, collapse);
        self.record("marginal-reclamation", 1e-9, marg);
        self.record("involution-is-adjoint", 1e-10, conj);
        Ok(())
    }

    fn transform(&mut self) -> Result<()> {
        let specs = shipped_hashings();
        let mut adj = Vec::new();
        for _ in 0..40 {
            let d = self.dim(2, 6);
            let (a, b) = self.pair(d);
            let rho = random::density(&mut self.rng, d);
            let spec = &specs[self.rng.random_range(0..specs.len())];
            let q = build_qjsd(spec, &[a, b], &BuildOptions::default())?;
            let (c0, c1, c2): (f64, f64, f64) =
                (self.rng.random(), self.rng.random(), self.rng.random());
            let f =
                move |x: &[f64]| Complex64::new(c0 * x[0] * x[1] + c1, (c2 * x[0]).sin() - x[1]);
            adj.push(verify_adjointness(&f, &q, &rho)?);
        }
        self.record("quantise-classicalise-adjointness", 1e-9, adj);

        let sx = HermitianOperator::new(pauli_x())?;
        let sz = HermitianOperator::new(pauli_z())?;
        let kd = build_qjsd(
            &HashingSpec::kirkwood_dirac(),
            &[sx.clone(), sz],
            &BuildOptions::default(),
        )?;
        let single = marginal_qjsd(&kd, 1)?;
        let ranks = vec![
            (faithfulness_rank(&kd) as f64 - 4.0).abs(),
            (faithfulness_rank(&single) as f64 - 2.0).abs(),
        ];
        self.record("faithfulness-rank", 0.0, ranks);
        Ok(())
    }

    fn stats(&mut self) -> Result<()> {
        let id = |x: &[f64]| Complex64::new(x[0], 0.0);
        let f = |x: &[f64]| Complex64::new(x[0] * x[0] * x[0] - x[0], 0.0);
        let g = |x: &[f64]| Complex64::new(x[0].cos(), 0.5 * x[0]);
        let (mut cov, mut cond, mut tower, mut pres) = (vec![], vec![], vec![], vec![]);
        for _ in 0..30 {
            let d = self.dim(2, 6);
            let (a, b) = self.pair(d);
            let rho = random::density(&mut self.rng, d);
            let alpha = random::alpha(&mut self.rng);
            let q = build_qjsd(
                &HashingSpec::alpha(alpha),
                &[a.clone(), b.clone()],
                &BuildOptions::default(),
            )?;
            let cv = quantum_covariance(&id, &id, &q, &rho)?;
            let cs = symmetric_covariance(&a, &b, &rho)?;
            let ca = antisymmetric_covariance(&a, &b, &rho)?;
            cov.push((cv - Complex64::new(cs, 0.0) - Complex64::i() * alpha * ca).norm());

            let ce = conditional_expectation(&f, &q, &rho, DEFAULT_THRESHOLD)?;
            let fa = crate::stats::apply(&f, &eigendecompose(&a, None)?)?;
            for ((bv, v), w) in ce.atoms.iter().zip(&ce.weights) {
                let proj = eigendecompose(&b, None)?
                    .projector_at(*bv, q.merge_tol())
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("{bv} is not an eigenvalue")))?;
                let t = trace_product(&(&proj * &fa), rho.matrix()) / *w;
                let closed = Complex64::new(t.re, 0.0) + Complex64::i() * alpha * t.im;
                cond.push((v - closed).norm());
            }
            let outer: Complex64 = ce
                .atoms
                .iter()
                .zip(&ce.weights)
                .map(|((_, v), w)| v * *w)
                .sum();
            tower.push((outer - expectation(&f, &q, 0, &rho)?).norm());
            pres.push(verify_correlation_preservation(
                &f,
                &g,
                &q,
                &rho,
                DEFAULT_THRESHOLD,
            )?);
        }
        self.record("covariance-decomposition", 1e-9, cov);
        self.record("conditional-expectation-closed-form", 1e-9, cond);
        self.record("tower-property", 1e-9, tower);
        self.record("correlation-preservation", 1e-9, pres);

        let ket = CVector::from_vec(vec![ONE, Complex64::new(0.1, 0.0)]);
        let rho = DensityOperator::from_ket(&ket, true)?;
        let sx = HermitianOperator::new(pauli_x())?;
        let sz = HermitianOperator::new(pauli_z())?;
        let w = weak_value(&sx, &sz, -1.0, &rho, DEFAULT_THRESHOLD)?;
        self.record(
            "anomalous-weak-value",
            1e-9,
            vec![(w - Complex64::new(10.0, 0.0)).norm()],
        );
        Ok(())
    }

    fn phase_space(&mut self) -> Result<()> {
        let (n, lo, hi) = (256, -10.0, 10.0);
        let w = wigner(&vacuum(n, lo, hi)?)?;
        let golden = PhaseSpaceGrid::from_fn(w.q, |q, p| {
            Complex64::new(2.0 * (-(q * q + p * p)).exp(), 0.0)
        })?;
        self.record("vacuum-wigner-golden", 1e-6, vec![w.max_abs_diff(&golden)]);

        let coefficients: Vec<Complex64> = (0..5)
            .map(|_| random::complex_normal(&mut self.rng))
            .collect();
        let states = [
            fock(1, 128, -8.0, 8.0)?,
            superposition(&coefficients, 128, -8.0, 8.0)?,
        ];
        let (mut mh, mut mass, mut pos) = (vec![], vec![], vec![]);
        for psi in &states {
            let w = wigner(psi)?;
            let kd = cohen_transform(&w, &CohenKernel::KirkwoodDirac)?;
            let akd = cohen_transform(&w, &CohenKernel::AntiKirkwoodDirac)?;
            let m = cohen_transform(&w, &CohenKernel::MargenauHill)?;
            let mean: Vec<Complex64> = kd
                .values
                .iter()
                .zip(&akd.values)
                .map(|(x, y)| (x + y) / 2.0)
                .collect();
            mh.push(
                m.values
                    .iter()
                    .zip(&mean)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max),
            );
            for kernel in [
                CohenKernel::KirkwoodDirac,
                CohenKernel::MargenauHill,
                CohenKernel::BornJordan,
                CohenKernel::Kappa(0.3),
            ] {
                let c = cohen_transform(&w, &kernel)?;
                mass.push((c.mass() - ONE).norm());
                mass.push(marginal_gap(&c, &w));
            }
            pos.push((-husimi(&w)?.min_real()).max(0.0));
        }
        self.record("mh-is-mean-of-kd-pair", 1e-9, mh);
        self.record("cohen-mass-and-marginals", 1e-6, mass);
        self.record("husimi-positivity", 1e-9, pos);
        Ok(())
    }
}

fn marginal_gap(a: &PhaseSpaceGrid, b: &PhaseSpaceGrid) -> f64 {
    let gap = |x: Vec<Complex64>, y: Vec<Complex64>| {
        x.iter()
            .zip(&y)
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max)
    };
    gap(a.q_marginal(), b.q_marginal()).max(gap(a.p_marginal(), b.p_marginal()))
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<PropertyReport>> {
    let mut battery = Battery {
        rng: random::seeded(seed),
        reports: Vec::new(),
    };
    let all = suite == Suite::All;
    if all || suite == Suite::Spectral {
        battery.spectral()?;
    }
    if all || suite == Suite::Qjsd {
        battery.qjsd()?;
    }
    if all || suite == Suite::Transform {
        battery.transform()?;
    }
    if all || suite == Suite::Stats {
        battery.stats()?;
    }
    if all || suite == Suite::PhaseSpace {
        battery.phase_space()?;
    }
    Ok(battery.reports)
}
