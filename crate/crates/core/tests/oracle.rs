use fano_core::general::models;
use fano_core::linalg::vec_index;
use fano_core::liouville::{steady_state, transport_rate};
use fano_core::oracle::{
    analytic_continuum_population, build_full_lindbladian, convergence_study, oracle_point,
    oracle_steady_state, oracle_steady_state_dense, transport_rate_of, DiscretizationSpec,
    OracleSolution,
};
use fano_core::{FanoError, FanoParams, GeneralModel, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn reference(eps: f64) -> FanoParams {
    FanoParams::new(eps, 1.0, 0.05)
        .with_gamma_e(0.1)
        .with_continuum_relaxation(1.0, 0.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check_physical(sol: &OracleSolution) {
    check_hermitian(sol);
    assert!(
        sol.psd_within_floor(),
        "min eigenvalue {}",
        sol.min_eigenvalue
    );
}

/// Without PSD: coherence-selective pure dephasing is not completely positive
/// on the discretized space, so the full state may carry small negative
/// eigenvalues (reported in `min_eigenvalue`).
fn check_hermitian(sol: &OracleSolution) {
    let rho = &sol.full;
    assert!(sol.residual < 1e-10, "residual {}", sol.residual);
    assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
    assert!((rho - rho.adjoint()).norm() < 1e-12);
    let discrete = SymmetricEigen::new(sol.reduced.rho.clone());
    assert!(discrete.eigenvalues.min() > -1e-12);
}

fn hermitian_random(n: usize, rng: &mut StdRng) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

fn small_models() -> Vec<GeneralModel> {
    let p = FanoParams::new(0.4, 1.5, 0.3)
        .with_gamma_e(0.2)
        .with_dephasing(0.5)
        .with_continuum_relaxation(0.7, 0.4)
        .with_continuum_dephasing(0.3, 0.1);
    vec![
        models::two_level(&p),
        models::three_level(1.0, 0.5, 0.2, 0.8, 1.5, 1.0),
        models::fig5(),
    ]
}

#[test]
fn generator_annihilates_the_trace() {
    let mut rng = StdRng::seed_from_u64(11);
    for m in small_models() {
        let gen = build_full_lindbladian(&m, &DiscretizationSpec::new(12.0, 13), 0.4).unwrap();
        let n = gen.dim();
        for _ in 0..100 {
            let rho = hermitian_random(n, &mut rng);
            assert!(
                gen.apply(&rho).trace().norm() < 1e-12 * rho.norm().max(1.0) * gen.norm_bound()
            );
        }
        // Left row-sum over all populations of the dense generator.
        let l = gen.to_dense(u128::MAX).unwrap();
        for col in 0..n * n {
            let s: C64 = (0..n).map(|i| l[(vec_index(i, i, n), col)]).sum();
            assert!(s.norm() < 1e-12, "column {col}: {s}");
        }
    }
}

#[test]
fn closed_system_generator_is_a_commutator() {
    let p = FanoParams::new(0.3, 1.0, 0.0).with_continuum_relaxation(1.0, 0.0);
    let mut gen = build_full_lindbladian(
        &models::two_level(&p),
        &DiscretizationSpec::new(6.0, 7),
        0.3,
    )
    .unwrap();
    gen.jumps.clear();
    gen.dephasings.clear();
    let l = gen.to_dense(u128::MAX).unwrap();
    let ev = l.schur().eigenvalues().unwrap();
    assert!(
        ev.iter().all(|z| z.re.abs() < 1e-10),
        "{}",
        ev.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    );
}

#[test]
fn steady_states_are_physical() {
    let hopping = FanoParams::new(-1.5, 2.0, 0.3)
        .with_gamma_e(0.2)
        .with_continuum_relaxation(1.0, 1.0);
    let mut pure = small_models();
    pure[0] = models::two_level(&hopping);
    for m in pure {
        let gen = build_full_lindbladian(&m, &DiscretizationSpec::new(20.0, 21), 0.4).unwrap();
        let sol = oracle_steady_state(&gen).unwrap();
        check_physical(&sol);
        let dense = oracle_steady_state_dense(&gen).unwrap();
        assert!((&sol.full - &dense.full).norm() < 1e-11);
        let eig = SymmetricEigen::new(sol.full.clone());
        assert!((eig.eigenvalues.min() - sol.min_eigenvalue).abs() < 1e-12);
    }
}

#[test]
fn zero_field_gives_the_ground_projector() {
    let p = FanoParams::new(0.0, 1.0, 0.0)
        .with_gamma_e(0.1)
        .with_continuum_relaxation(1.0, 0.0);
    let sol = oracle_point(
        &models::two_level(&p),
        &DiscretizationSpec::new(20.0, 21),
        0.0,
    )
    .unwrap();
    let mut ground = DMatrix::<C64>::zeros(sol.full.nrows(), sol.full.ncols());
    ground[(0, 0)] = C64::new(1.0, 0.0);
    assert!((&sol.full - ground).norm() < 1e-12);
}

#[test]
fn dimension_cap_reports_memory() {
    let err = build_full_lindbladian(
        &models::fig5(),
        &DiscretizationSpec::new(200.0, 201).with_cap(10_000),
        10.0,
    )
    .unwrap_err();
    let n = 3 + 2 * 201;
    assert_eq!(
        err,
        FanoError::DimensionCap {
            dimension: n * n,
            cap: 10_000,
            bytes: (n * n * n * n * 16) as u128
        }
    );
    assert!(err.to_string().contains(&(n * n * n * n * 16).to_string()));
}

#[test]
fn fine_grid_matches_two_level_steady_state() {
    let spec = DiscretizationSpec::new(200.0, 401);
    for eps in [-4.0, 0.0, 2.0] {
        let p = reference(eps);
        let sol = oracle_point(&models::two_level(&p), &spec, eps).unwrap();
        check_physical(&sol);
        let analytic = steady_state(&p).unwrap().continuum_population();
        assert!(
            rel(sol.reduced.continuum_total(), analytic) < 2e-3,
            "eps {eps}"
        );
        let r = transport_rate_of(&models::two_level(&p), &sol.reduced).unwrap();
        assert!(rel(r, transport_rate(&p).unwrap()) < 2e-3, "eps {eps}");
    }
}

#[test]
fn oracle_covers_dephasing_and_incoherent_hopping() {
    // Gamma_c = 2 keeps the aliasing error of the unit-spacing grid below 1%.
    let spec = DiscretizationSpec::new(200.0, 201);
    for p in [
        FanoParams::new(0.5, 1.0, 0.2)
            .with_gamma_e(0.1)
            .with_dephasing(2.0)
            .with_continuum_relaxation(2.0, 0.0),
        FanoParams::new(-1.5, 2.0, 0.3).with_continuum_relaxation(1.0, 1.0),
        FanoParams::new(1.0, 1.0, 0.2)
            .with_gamma_e(0.3)
            .with_continuum_relaxation(2.0, 0.0)
            .with_continuum_dephasing(0.5, 0.0),
    ] {
        let sol = oracle_point(&models::two_level(&p), &spec, p.epsilon).unwrap();
        check_hermitian(&sol);
        let analytic = steady_state(&p).unwrap().continuum_population();
        assert!(
            rel(sol.reduced.continuum_total(), analytic) < 1e-2,
            "{p:?}: {}",
            rel(sol.reduced.continuum_total(), analytic)
        );
    }
}

#[test]
fn half_cell_grid_shift_is_below_discretization_error() {
    // At spacing 0.25 the error is set by the finite band, which the shift
    // does not touch. At spacing >= 0.5 the grid aliasing term dominates and
    // changes sign under the shift.
    for (w, mk) in [(50.0, 201), (100.0, 401)] {
        let p = reference(0.0);
        let m = models::two_level(&p);
        let analytic = analytic_continuum_population(&m, 0.0).unwrap();
        let a = oracle_point(&m, &DiscretizationSpec::new(w, mk), 0.0)
            .unwrap()
            .reduced
            .continuum_total();
        let b = oracle_point(&m, &DiscretizationSpec::new(w, mk).with_offset(0.5), 0.0)
            .unwrap()
            .reduced
            .continuum_total();
        assert!(
            (a - b).abs() < (a - analytic).abs(),
            "{w}/{mk}: shift {} vs error {}",
            (a - b).abs(),
            (a - analytic).abs()
        );
    }
}

#[test]
fn transport_rate_is_independent_of_continuum_relaxation() {
    // Each Gamma_c needs a grid that resolves its Lorentzian (spacing << Gamma_c)
    // inside a band much wider than Gamma_c.
    let eps = 0.5;
    let analytic = transport_rate(&reference(eps)).unwrap();
    let mut rates = Vec::new();
    for (gc, w, mk) in [(0.1, 20.0, 401), (1.0, 50.0, 201), (10.0, 400.0, 201)] {
        let p = reference(eps).with_continuum_relaxation(gc, 0.0);
        assert!((transport_rate(&p).unwrap() - analytic).abs() <= 1e-12 * analytic);
        let m = models::two_level(&p);
        let sol = oracle_point(&m, &DiscretizationSpec::new(w, mk), eps).unwrap();
        let r = transport_rate_of(&m, &sol.reduced).unwrap();
        assert!(rel(r, analytic) < 1e-2, "Gamma_c {gc}: {r} vs {analytic}");
        rates.push(r);
    }
    let max = rates.iter().copied().fold(f64::MIN, f64::max);
    let min = rates.iter().copied().fold(f64::MAX, f64::min);
    assert!(max / min - 1.0 < 1e-2, "{rates:?}");
}

#[test]
fn fano_zero_stays_at_the_fourth_order_floor() {
    let p = FanoParams::new(-1.0, 1.0, 0.05).with_continuum_relaxation(1.0, 0.0);
    let m = models::two_level(&p);
    let analytic = analytic_continuum_population(&m, -1.0).unwrap();
    assert!(analytic > 0.0 && analytic < p.omega.powi(4));
    let oracle = oracle_point(&m, &DiscretizationSpec::new(200.0, 201), -1.0)
        .unwrap()
        .reduced
        .continuum_total();
    assert!(oracle < 10.0 * analytic, "{oracle} vs {analytic}");
}

#[test]
fn three_level_model_agrees() {
    for (gc, mk) in [(1.0, 401), (2.0, 201)] {
        let m = models::three_level(1.0, 0.5, 0.1, 0.8, 1.5, gc);
        for eps in [0.0, 1.0] {
            let analytic = analytic_continuum_population(&m, eps).unwrap();
            let sol = oracle_point(&m, &DiscretizationSpec::new(200.0, mk), eps).unwrap();
            check_physical(&sol);
            assert!(
                rel(sol.reduced.continuum_total(), analytic) < 5e-2,
                "Gamma_c {gc}, eps {eps}"
            );
        }
    }
}

#[test]
fn convergence_along_a_widening_band() {
    let m = models::two_level(&reference(0.0));
    let ladder =
        [(25.0, 101), (50.0, 201), (100.0, 401)].map(|(w, mk)| DiscretizationSpec::new(w, mk));
    let study = convergence_study(&m, 0.0, &ladder).unwrap();
    for r in &study.rows {
        assert!(r.residual < 1e-10 && r.min_eigenvalue > -1e-9);
    }
    assert!(
        study.converged,
        "{:?}",
        study.rows.iter().map(|r| r.abs_error).collect::<Vec<_>>()
    );
    let order = study.fitted_order.unwrap();
    assert!(order > 0.5, "order {order}");
    assert!(convergence_study(&m, 0.0, &ladder[..2]).is_err());
}
