use super::*;
use crate::linalg::{hermiticity_residual, max_abs_diff, outer, ONE};

const N: usize = 256;

fn grid_vacuum() -> WavefunctionGrid {
    vacuum(N, -10.0, 10.0).unwrap()
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Laguerre polynomial by recurrence.
fn laguerre(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 1.0 - x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * b / (k + 1) as f64 - k as f64 * a / (k + 1) as f64;
        a = b;
        b = next;
    }
    b
}

fn max_dev_on<F: Fn(f64, f64) -> f64>(w: &PhaseSpaceGrid, f: F, box_half: f64) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..w.n() {
        let q = w.q.value(j);
        for l in 0..w.n() {
            let p = w.p.value(l);
            if q.abs() <= box_half && p.abs() <= box_half {
                worst = worst.max((w.at(j, l) - c(f(q, p))).norm());
            }
        }
    }
    worst
}

#[test]
fn vacuum_wigner_matches_closed_form() {
    let w = wigner(&grid_vacuum()).unwrap();
    assert_eq!(w.p.step * w.q.step * N as f64, 2.0 * PI);
    let dev = max_dev_on(&w, |q, p| 2.0 * (-(q * q + p * p)).exp(), 6.0);
    assert!(dev < 1e-6, "{dev}");
    let all = max_dev_on(&w, |q, p| 2.0 * (-(q * q + p * p)).exp(), f64::INFINITY);
    assert!(all < 1e-6, "{all}");
    assert!((w.mass() - ONE).norm() < 1e-6);
    assert_eq!(w.max_imag(), 0.0);
}

#[test]
fn fock_wigner_functions() {
    for k in 1..4 {
        let w = wigner(&fock(k, N, -10.0, 10.0).unwrap()).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let dev = max_dev_on(
            &w,
            |q, p| {
                let r2 = q * q + p * p;
                2.0 * sign * (-r2).exp() * laguerre(k, 2.0 * r2)
            },
            6.0,
        );
        assert!(dev < 1e-6, "fock {k}: {dev}");
    }
}

#[test]
fn first_excited_state_is_negative_at_origin() {
    let w = wigner(&fock(1, N, -10.0, 10.0).unwrap()).unwrap();
    let origin = w.at(N / 2, N / 2);
    assert_eq!(w.q.value(N / 2), 0.0);
    assert_eq!(w.p.value(N / 2), 0.0);
    // direct trapezoid integral of psi*(t/2) psi(-t/2)
    let psi = |x: f64| 2f64.sqrt() * PI.powf(-0.25) * x * (-x * x / 2.0).exp();
    let h = 1e-3;
    let direct: f64 = (-20000..=20000)
        .map(|k| {
            let t = k as f64 * h;
            psi(t / 2.0) * psi(-t / 2.0) * h
        })
        .sum();
    assert!(origin.re < 0.0);
    assert!(
        (origin.re - direct).abs() < 1e-6,
        "{} vs {direct}",
        origin.re
    );
}

#[test]
fn wigner_marginals() {
    let states = [
        grid_vacuum(),
        fock(2, N, -10.0, 10.0).unwrap(),
        superposition(&[c(1.0), Complex64::new(0.0, 0.7), c(-0.4)], N, -10.0, 10.0).unwrap(),
        squeezed_vacuum(0.4, N, -10.0, 10.0).unwrap(),
    ];
    for psi in &states {
        let w = wigner(psi).unwrap();
        for (a, b) in w.q_marginal().iter().zip(psi.position_density()) {
            assert!((a - c(b)).norm() < 1e-6);
        }
        for (a, b) in w.p_marginal().iter().zip(psi.momentum_density()) {
            assert!((a - c(b)).norm() < 1e-6);
        }
    }
}

#[test]
fn mixture_is_weighted_sum() {
    let a = grid_vacuum();
    let b = fock(1, N, -10.0, 10.0).unwrap();
    let mix = wigner_mixture(&[(0.25, a.clone()), (0.75, b.clone())]).unwrap();
    let (wa, wb) = (wigner(&a).unwrap(), wigner(&b).unwrap());
    for ((m, x), y) in mix.values.iter().zip(&wa.values).zip(&wb.values) {
        assert!((m - (x * 0.25 + y * 0.75)).norm() < 1e-12);
    }
    assert!(wigner_mixture(&[(0.5, a)]).is_err());
}

#[test]
fn rejects_bad_wavefunctions() {
    let axis = Axis::over(-10.0, 10.0, 64).unwrap();
    let half = vec![c(0.1); 64];
    assert!(matches!(
        WavefunctionGrid::new(axis.origin, axis.step, half),
        Err(Error::InvalidState { .. })
    ));
    assert!(matches!(
        WavefunctionGrid::normalised(0.0, 0.1, vec![c(1.0); 48]),
        Err(Error::InvalidGrid(_))
    ));
}

fn asymmetric_state() -> WavefunctionGrid {
    superposition(&[c(0.8), Complex64::new(0.3, 0.5), c(0.2)], N, -10.0, 10.0).unwrap()
}

#[test]
fn cohen_kernels() {
    let psi = asymmetric_state();
    let w = wigner(&psi).unwrap();
    let same = cohen_transform(&w, &CohenKernel::Wigner).unwrap();
    assert!(same.max_abs_diff(&w) < 1e-9);

    let kd = cohen_transform(&w, &CohenKernel::KirkwoodDirac).unwrap();
    let akd = cohen_transform(&w, &CohenKernel::AntiKirkwoodDirac).unwrap();
    let mh = cohen_transform(&w, &CohenKernel::MargenauHill).unwrap();
    for ((a, b), m) in kd.values.iter().zip(&akd.values).zip(&mh.values) {
        assert!((a - b.conj()).norm() < 1e-9);
        assert!(((a + b) * 0.5 - m).norm() < 1e-9);
        assert!(m.im.abs() < 1e-9);
    }
    assert!(kd.max_imag() > 1e-2);

    let k1 = cohen_transform(&w, &CohenKernel::Kappa(1.0)).unwrap();
    assert!(k1.max_abs_diff(&kd) < 1e-12);

    for kernel in [
        CohenKernel::KirkwoodDirac,
        CohenKernel::MargenauHill,
        CohenKernel::BornJordan,
        CohenKernel::Kappa(0.3),
        CohenKernel::Tabulated(vec![(-10.0, c(0.0)), (0.0, c(1.0)), (10.0, c(0.0))]),
    ] {
        let out = cohen_transform(&w, &kernel).unwrap();
        assert!((out.mass() - w.mass()).norm() < 1e-6);
        for (a, b) in out.q_marginal().iter().zip(w.q_marginal()) {
            assert!((a - b).norm() < 1e-6);
        }
        for (a, b) in out.p_marginal().iter().zip(w.p_marginal()) {
            assert!((a - b).norm() < 1e-6);
        }
    }
}

#[test]
fn kd_kernel_reproduces_kirkwood_dirac_distribution() {
    // Tr[E_P(dp) E_Q(dq) rho] = <p|q> psi(q) conj(psi_hat(p)) dq dp, which as a
    // dm_2 density is sqrt(2 pi) e^{-ipq} psi(q) conj(psi_hat(p))
    let psi = asymmetric_state();
    let w = wigner(&psi).unwrap();
    let kd = cohen_transform(&w, &CohenKernel::KirkwoodDirac).unwrap();
    let hat = psi.momentum_amplitudes();
    let mut worst = 0.0f64;
    for j in 0..N {
        let q = w.q.value(j);
        for (l, h) in hat.iter().enumerate() {
            let p = w.p.value(l);
            let expected =
                Complex64::from_polar((2.0 * PI).sqrt(), -p * q) * psi.samples()[j] * h.conj();
            worst = worst.max((kd.at(j, l) - expected).norm());
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn cohen_rejects_unnormalised_kernel() {
    let w = wigner(&grid_vacuum()).unwrap();
    let bad = CohenKernel::Tabulated(vec![(-1.0, c(2.0)), (1.0, c(2.0))]);
    assert!(matches!(
        cohen_transform(&w, &bad),
        Err(Error::KernelMass { .. })
    ));
    assert!(CohenKernel::parse("kappa:0.5").is_ok());
    assert!(CohenKernel::parse("nope").is_err());
}

#[test]
fn husimi_closed_forms_and_positivity() {
    let w = wigner(&grid_vacuum()).unwrap();
    let h = husimi(&w).unwrap();
    assert!(max_dev_on(&h, |q, p| (-(q * q + p * p) / 2.0).exp(), 6.0) < 1e-9);
    assert!((h.mass() - w.mass()).norm() < 1e-6);

    let w1 = wigner(&fock(1, N, -10.0, 10.0).unwrap()).unwrap();
    let h1 = husimi(&w1).unwrap();
    assert!(w1.min_real() < -1.0);
    assert!(h1.min_real() >= -1e-9);
    let dev = max_dev_on(
        &h1,
        |q, p| {
            let r2 = q * q + p * p;
            r2 / 2.0 * (-r2 / 2.0).exp()
        },
        6.0,
    );
    assert!(dev < 1e-9, "{dev}");
    assert!((h1.mass() - ONE).norm() < 1e-6);
}

#[test]
fn glauber_sudarshan_of_thermal_state() {
    // thermal state with nbar = 1/2: W variance 1, P variance 1/2
    let q = Axis::over(-10.0, 10.0, N).unwrap();
    let w = gaussian_grid(q, 1.0, 1.0).unwrap();
    let p = glauber_sudarshan(&w, 1e-12).unwrap();
    let dev = max_dev_on(&p, |x, y| 2.0 * (-(x * x + y * y)).exp(), f64::INFINITY);
    assert!(dev < 1e-4, "{dev}");
    assert!(p.min_real() > -1e-4);
    assert!(matches!(
        glauber_sudarshan(&w, 0.0),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        glauber_sudarshan(&w, -1.0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn glauber_sudarshan_of_vacuum_keeps_mass() {
    let w = wigner(&grid_vacuum()).unwrap();
    let p = glauber_sudarshan(&w, 1e-8).unwrap();
    assert!((p.mass() - ONE).norm() < 1e-4);
}

#[test]
fn regularised_round_trip_error_shrinks_as_eps_falls() {
    // the narrow quadrature has variance e^{-0.6}/2, so the bias decays like
    // eps^{0.27}: each factor of 100 in eps buys roughly a factor of 3.5
    let w = wigner(&squeezed_vacuum(0.3, N, -10.0, 10.0).unwrap()).unwrap();
    let errors: Vec<f64> = [1e-6, 1e-8, 1e-10, 1e-12]
        .iter()
        .map(|&eps| {
            let back = husimi(&glauber_sudarshan(&w, eps).unwrap()).unwrap();
            back.max_abs_diff(&w)
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(ratio > 3.0 && ratio < 5.0, "{errors:?}");
    }
}

#[test]
fn weyl_quantisation_of_coordinates() {
    let q = Axis::over(-8.0, 8.0, 64).unwrap();
    let fq = PhaseSpaceGrid::from_fn(q, |x, _| c(x)).unwrap();
    let m = weyl_quantise_grid(&fq, 64).unwrap();
    let diag = CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
        64,
        q.values().into_iter().map(c),
    ));
    assert!(max_abs_diff(&m, &diag) < 1e-12);

    let fp = PhaseSpaceGrid::from_fn(q, |_, p| c(p)).unwrap();
    let mp = weyl_quantise_grid(&fp, 64).unwrap();
    assert!(hermiticity_residual(&mp) < 1e-12);
    // momentum acting on a smooth state against central differences
    let mut errs = Vec::new();
    for n in [64usize, 128] {
        let q = Axis::over(-8.0, 8.0, n).unwrap();
        let fp = PhaseSpaceGrid::from_fn(q, |_, p| c(p)).unwrap();
        let mp = weyl_quantise_grid(&fp, n).unwrap();
        let psi: Vec<Complex64> = q.values().iter().map(|x| c((-x * x / 2.0).exp())).collect();
        let v = crate::linalg::CVector::from_vec(psi.clone());
        let spectral = &mp * &v;
        let mut worst = 0.0f64;
        for j in 1..n - 1 {
            let fd = (psi[j + 1] - psi[j - 1]) / (2.0 * q.step) * Complex64::new(0.0, -1.0);
            worst = worst.max((spectral[j] - fd).norm());
        }
        errs.push((q.step, worst));
    }
    // second-order agreement: halving dq quarters the gap
    let ratio = errs[0].1 / errs[1].1;
    assert!(ratio > 3.5 && ratio < 4.5, "{errs:?}");
}

#[test]
fn weyl_quantisation_pairs_with_wigner() {
    let psi = asymmetric_state();
    let w = wigner(&psi).unwrap();
    let rho = outer(&psi.to_ket());
    let symbols: Vec<Box<dyn Fn(f64, f64) -> f64 + Sync>> = vec![
        Box::new(|q, p| q * q + p * p),
        Box::new(|q, p| q * p + 0.3 * q),
        Box::new(|q, p| (-(q * q) / 4.0).exp() * (0.5 * p).cos()),
    ];
    for f in symbols {
        let grid = PhaseSpaceGrid::from_fn(w.q, |q, p| c(f(q, p))).unwrap();
        let op = weyl_quantise_grid(&grid, N).unwrap();
        assert!(hermiticity_residual(&op) < 1e-8);
        let quantum = crate::linalg::trace_product(&op, &rho);
        let classical = w.pair(&grid).unwrap();
        assert!(
            (quantum - classical).norm() < 2e-4,
            "{quantum} vs {classical}"
        );
    }
    assert!(weyl_quantise_grid(&w, 0).is_err());
    assert!(weyl_quantise_grid(&w, N + 1).is_err());
    let bad = PhaseSpaceGrid {
        p: Axis { step: 1.0, ..w.p },
        ..w.clone()
    };
    assert!(matches!(
        weyl_quantise_grid(&bad, 4),
        Err(Error::InvalidGrid(_))
    ));
}
