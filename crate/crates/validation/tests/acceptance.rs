//! Acceptance criteria 1-11, one PASS/FAIL line each. Exits nonzero if any fails.

use std::io::Write;
use std::process::ExitCode;

use fano_core::general::{build_general, general_steady_state, models};
use fano_core::linalg::vec_index;
use fano_core::lineshape::{
    decompose, fano_profile, fit_rational_quadratic, max_rel_residual, RationalQuadratic,
};
use fano_core::liouville::{
    build_effective_liouvillian, lineshape_sweep, steady_state, steady_state_cramer,
    transport_rate, Observable, EE, EG, GE, GG,
};
use fano_core::oracle::{errors_decreasing, oracle_point, transport_rate_of, DiscretizationSpec};
use fano_core::scattering::{build_heff, ionization_probability, poles, weak_field_rate};
use fano_core::{FanoParams, C64};
use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut zero_exact = true;
    for q in [0.5, 1.0, 3.0] {
        zero_exact &= fano_profile(-q, q) == 0.0;
        worst = worst.max((fano_profile(1.0 / q, q) - (1.0 + q * q)).abs() / 1e-12);
        for e in [1e6, -1e6] {
            worst = worst.max((fano_profile(e, q) - 1.0).abs() / 1e-5);
        }
    }
    outcome(
        zero_exact && worst < 1.0,
        format!("zero exact: {zero_exact}, worst error / tolerance {worst:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = [
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(0.01..10.0),
        ];
        let b2: f64 = rng.random_range(0.1..5.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let b1: f64 = rng.random_range(-5.0..5.0);
        let margin: f64 = rng.random_range(0.05..5.0);
        let b0 = (b1 * b1 + 4.0 * margin * b2.abs()) / (4.0 * b2);
        let rq = RationalQuadratic::new(a, [b0, b1, b2]);
        let dec = match decompose(&rq) {
            Ok(d) => d,
            Err(e) => return outcome(false, format!("{rq:?}: {e}")),
        };
        for _ in 0..100 {
            let e: f64 = rng.random_range(-50.0..50.0);
            // Relative to the largest numerator term, which stays meaningful at numerator zeros.
            let scale =
                (a[0].abs() + (a[1] * e).abs() + (a[2] * e * e).abs()) / rq.denominator(e).abs();
            worst = worst.max((dec.eval(e) - rq.eval(e)).abs() / scale);
        }
    }
    // c0 carries the a2 * Delta^2 term of the shifted numerator.
    let shifted =
        decompose(&RationalQuadratic::new([1.0, 0.0, 1.0], [2.0, 2.0, 1.0])).map(|d| d.c0);
    let c0_ok = shifted == Ok(2.0);
    outcome(
        worst < 1e-10 && c0_ok,
        format!("max relative residual {worst:.2e} over 1000 x 100, c0 with a2*Delta^2: {c0_ok}"),
    )
}

fn criterion_3() -> Outcome {
    let (q, w) = (1.0, 0.01);
    let mut worst: f64 = 0.0;
    for e in grid(-5.0, 5.0, 201) {
        if (e + q).abs() <= 0.1 {
            continue;
        }
        let p = FanoParams::new(e, q, w);
        let slope = (ionization_probability(&p, 50.0) - ionization_probability(&p, 10.0)) / 40.0;
        let rate = weak_field_rate(e, q, w);
        worst = worst.max((slope - rate).abs() / rate);
    }
    outcome(worst < 0.02, format!("max relative deviation of (P(50)-P(10))/40 from 2 Omega^2 (eps+q)^2/(1+eps^2): {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let (mut vieta, mut residues, mut swap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10_000 {
        let p = FanoParams::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(0.0..3.0),
        );
        let pd = poles(&p);
        let scale = 1.0 + pd.omega0.norm_sqr();
        vieta = vieta.max((pd.z1 + pd.z2 + pd.omega0).norm() / scale.sqrt());
        vieta = vieta.max((pd.z1 * pd.z2 - build_heff(&p).determinant()).norm() / scale);
        residues = residues.max((pd.a1 + pd.a2 - 1.0).norm());
        let sw = pd.swapped();
        for t in [0.0, 0.7, 5.0, 40.0] {
            swap = swap.max((pd.amplitude(t).norm_sqr() - sw.amplitude(t).norm_sqr()).abs());
        }
    }
    let pass = vieta < 1e-12 && residues < 1e-12 && swap < 1e-12;
    outcome(
        pass,
        format!(
            "Vieta {vieta:.1e}, |a1+a2-1| {residues:.1e}, branch swap {swap:.1e} over 10^4 draws"
        ),
    )
}

fn criterion_5() -> Outcome {
    let pd = poles(&FanoParams::new(0.0, 1.0, 0.01));
    let ratio = pd.gamma0 / pd.gamma1;
    outcome(
        ratio < 1e-3,
        format!(
            "Gamma0/Gamma1 = {ratio:.2e} (Gamma0 {:.3e}, Gamma1 {:.4}, Gamma2 {:.4})",
            pd.gamma0, pd.gamma1, pd.gamma2
        ),
    )
}

/// `-i (1 (x) H - conj(H) (x) 1)` from `d rho / dt = -i (H rho - rho H^dagger)`.
fn commutator_superop(h: &Matrix2<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for col in 0..4 {
        let mut rho = Matrix2::<C64>::zeros();
        rho[(col % 2, col / 2)] = c(1.0);
        let image = (h * rho - rho * h.adjoint()) * (-I);
        for row in 0..4 {
            out[(row, col)] = image[(row % 2, row / 2)];
        }
    }
    out
}

fn jump_part(p: &FanoParams) -> Matrix4<C64> {
    let beta = p.gamma_cg / (p.gamma_cg + p.gamma_ce);
    let w = p.omega;
    let row = [2.0 * w * w, 2.0 * w, 2.0 * w, 2.0];
    let mut m = Matrix4::<C64>::zeros();
    for j in 0..4 {
        m[(GG, j)] = c(beta * row[j]);
        m[(EE, j)] = c((1.0 - beta) * row[j]);
    }
    m[(GG, EE)] += 2.0 * p.gamma_e;
    m[(EE, EE)] -= 2.0 * p.gamma_e;
    m[(EG, EG)] -= p.gamma_e + p.gamma_eg;
    m[(GE, GE)] -= p.gamma_e + p.gamma_eg;
    m
}

fn nullspace_state(p: &FanoParams) -> Vector4<C64> {
    let gel = build_effective_liouvillian(p).unwrap();
    let svd = gel.l_eff.svd(true, true);
    let k = svd.singular_values.imin();
    let v: Vector4<C64> = svd.v_t.unwrap().row(k).adjoint();
    v / (v[GG] + v[EE] + gel.c.map(c).dot(&v))
}

fn random_params(rng: &mut StdRng) -> FanoParams {
    FanoParams::new(
        rng.random_range(-10.0..10.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(0.0..3.0),
    )
    .with_gamma_e(rng.random_range(0.0..2.0))
    .with_continuum_relaxation(
        rng.random_range(0.01..5.0),
        if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.0..5.0)
        },
    )
    .with_dephasing(rng.random_range(0.0..5.0))
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let (mut identity, mut cramer): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let gel = build_effective_liouvillian(&p).unwrap();
        let expected = commutator_superop(&build_heff(&p).h) + jump_part(&p);
        identity = identity.max(
            (gel.l_eff - expected)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        );
        let ns = nullspace_state(&p);
        cramer = cramer.max((steady_state_cramer(&p).unwrap().vector - ns).norm());
        cramer = cramer.max((steady_state(&p).unwrap().vector - ns).norm());
    }
    outcome(identity <= 1e-14 && cramer <= 1e-10, format!("decomposition identity {identity:.1e}, Cramer vs nullspace {cramer:.1e} over 10^3 draws"))
}

fn criterion_7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let fit_eps = grid(-10.0, 10.0, 11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let template = FanoParams::new(
            0.0,
            rng.random_range(-3.0..3.0),
            rng.random_range(0.01..1.0),
        )
        .with_gamma_e(rng.random_range(0.0..1.0))
        .with_dephasing(rng.random_range(0.0..2.0))
        .with_continuum_relaxation(rng.random_range(0.1..5.0), 0.0);
        let sweep = lineshape_sweep(&template, &fit_eps, Observable::ContinuumPop).unwrap();
        let fit = match sweep.fit {
            Ok(f) => f,
            Err(e) => return outcome(false, format!("{template:?}: {e}")),
        };
        let held_out: Vec<(f64, f64)> = (0..50)
            .map(|_| rng.random_range(-10.0..10.0))
            .map(|e| {
                (
                    e,
                    steady_state(&template.with_epsilon(e))
                        .unwrap()
                        .continuum_population(),
                )
            })
            .collect();
        worst = worst.max(max_rel_residual(&fit.rq, &held_out));
    }
    let d = |geg: f64| {
        let t = FanoParams::new(0.0, 1.0, 0.05).with_dephasing(geg);
        let points = lineshape_sweep(&t, &fit_eps, Observable::ContinuumPop)
            .unwrap()
            .points;
        decompose(&fit_rational_quadratic(&points).unwrap().rq)
            .unwrap()
            .d
            .unwrap()
    };
    let (d0, d10) = (d(0.0), d(10.0));
    outcome(
        worst < 1e-8 && d10 > d0,
        format!("held-out residual {worst:.1e} over 20 draws; D(gamma_eg=0) {d0:.3e} < D(gamma_eg=10) {d10:.3e}"),
    )
}

fn criterion_8() -> Outcome {
    let mut invariance: f64 = 0.0;
    for e in grid(-5.0, 5.0, 21) {
        let base = FanoParams::new(e, 1.0, 0.2)
            .with_gamma_e(0.3)
            .with_dephasing(0.1);
        let r: Vec<f64> = [0.01, 1.0, 100.0]
            .iter()
            .map(|g| transport_rate(&base.with_continuum_relaxation(*g, 0.0)).unwrap())
            .collect();
        invariance = invariance.max(
            r.iter()
                .map(|x| (x - r[0]).abs() / r[0])
                .fold(0.0, f64::max),
        );
    }
    // Relative error is undefined at the Fano zero; there only the absolute
    // bound (1% of the peak rate) applies.
    let (q, w) = (1.0, 0.01);
    let peak = weak_field_rate(1.0 / q, q, w);
    let (mut rel, mut abs): (f64, f64) = (0.0, 0.0);
    for e in grid(-5.0, 5.0, 201) {
        let r = transport_rate(&FanoParams::new(e, q, w)).unwrap();
        let s = weak_field_rate(e, q, w);
        abs = abs.max((r - s).abs() / peak);
        if (e + q).abs() > 0.1 {
            rel = rel.max((r - s).abs() / s);
        }
    }
    let constants: Vec<f64> = [0.1, 0.03, 0.01]
        .iter()
        .map(|&w: &f64| {
            grid(-5.0, 5.0, 201)
                .into_iter()
                .map(|e| {
                    (transport_rate(&FanoParams::new(e, q, w)).unwrap() - weak_field_rate(e, q, w))
                        .abs()
                })
                .fold(0.0, f64::max)
                / w.powi(4)
        })
        .collect();
    let spread = constants.iter().copied().fold(0.0, f64::max)
        / constants.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        invariance <= 1e-10 && rel < 0.01 && abs < 0.01 && spread < 1.1,
        format!(
            "Gamma_c invariance {invariance:.1e}; weak field rel {rel:.1e} (|eps+q|>0.1), abs/peak {abs:.1e}; max|r-r_scatt|/Omega^4 {constants:.4?}"
        ),
    )
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;

    let (w, beta) = (0.45, 0.3);
    let p = FanoParams::new(0.7, 1.2, w).with_continuum_relaxation(beta, 1.0 - beta);
    let gel = build_general(&models::two_level(&p), p.epsilon).unwrap();
    let row = [2.0 * w * w, 2.0 * w, 2.0 * w, 2.0];
    let lqj = DMatrix::from_fn(4, 4, |i, j| match i {
        0 => c(beta * row[j]),
        3 => c((1.0 - beta) * row[j]),
        _ => c(0.0),
    });
    worst = worst.max(max_diff(&gel.ltilde, &lqj));

    let (q1, q2, w, beta, delta, gc, eps) = (1.3, -0.6, 0.2, 0.8, 2.5, 1.7, 0.9);
    let gel = build_general(&models::three_level(q1, q2, w, beta, delta, gc), eps).unwrap();
    let heff = DMatrix::from_row_slice(
        3,
        3,
        &[
            -I * w * w,
            (q1 - I) * w,
            (q2 - I) * w / beta,
            (q1 - I) * w,
            c(-eps) - I,
            -I / beta,
            (q2 - I) * w / beta,
            -I / beta,
            c(-eps + delta) - I / (beta * beta),
        ],
    );
    worst = worst.max(max_diff(&gel.heff, &heff));
    let row = [
        w * w,
        w,
        w / beta,
        w,
        1.0,
        1.0 / beta,
        w / beta,
        1.0 / beta,
        1.0 / (beta * beta),
    ];
    let ltilde = DMatrix::from_fn(9, 9, |r, col| {
        let (a, b) = (col % 3, col / 3);
        if r == 0 {
            c(2.0 * row[3 * a + b])
        } else {
            c(0.0)
        }
    });
    debug_assert_eq!(vec_index(1, 2, 3), 7);
    worst = worst.max(max_diff(&gel.ltilde, &ltilde));

    let (q, om, g2, gcs, eps) = (0.8, [0.3, 0.7], [0.35, 0.65], [1.5, 0.4], -0.4);
    let gel = build_general(&models::two_continua(q, om, g2, gcs), eps).unwrap();
    let decay: f64 = (0..2).map(|n| g2[n] * om[n] * om[n]).sum();
    let off: f64 = (0..2).map(|n| g2[n] * om[n]).sum();
    let heff = DMatrix::from_row_slice(2, 2, &[-I * decay, q - I * off, q - I * off, c(-eps) - I]);
    worst = worst.max(max_diff(&gel.heff, &heff));
    let mut ltilde = DMatrix::<C64>::zeros(4, 4);
    for n in 0..2 {
        let row = [2.0 * om[n] * om[n], 2.0 * om[n], 2.0 * om[n], 2.0];
        for j in 0..4 {
            ltilde[(0, j)] += g2[n] * row[j];
        }
        let weights = [om[n] * om[n], om[n], om[n], 1.0].map(|x| 2.0 * g2[n] / gcs[n] * x);
        for (k, e) in weights.iter().enumerate() {
            worst = worst.max((gel.c_coeffs[n][k] - e).abs());
        }
    }
    worst = worst.max(max_diff(&gel.ltilde, &ltilde));
    outcome(worst <= 1e-14, format!("max entrywise deviation {worst:.1e} (L_QJ, 3-level H_eff and 9x9 row, 2-continua H_eff/L~/C)"))
}

fn reference(eps: f64) -> FanoParams {
    FanoParams::new(eps, 1.0, 0.05)
        .with_gamma_e(0.1)
        .with_continuum_relaxation(1.0, 0.0)
}

/// Oracle vs analytic continuum population and transport rate, relative errors.
fn oracle_errors(eps: f64, spec: &DiscretizationSpec) -> (f64, f64) {
    let p = reference(eps);
    let m = models::two_level(&p);
    let sol = oracle_point(&m, spec, eps).unwrap();
    let analytic = steady_state(&p).unwrap().continuum_population();
    let pop = (sol.reduced.continuum_total() - analytic).abs() / analytic;
    let r = transport_rate_of(&m, &sol.reduced).unwrap();
    let ra = transport_rate(&p).unwrap();
    (pop, (r - ra).abs() / ra)
}

fn criterion_10(out: &mut impl Write) -> Outcome {
    let ladder =
        [(50.0, 51), (100.0, 101), (200.0, 201)].map(|(w, mk)| DiscretizationSpec::new(w, mk));
    let eps = grid(-4.0, 4.0, 9);
    let rows: Vec<(f64, Vec<(f64, f64)>)> = std::thread::scope(|s| {
        let handles: Vec<_> = eps
            .iter()
            .map(|&e| {
                s.spawn(move || {
                    (
                        e,
                        ladder
                            .iter()
                            .map(|spec| oracle_errors(e, spec))
                            .collect::<Vec<_>>(),
                    )
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let (mut worst, mut decreasing) = (0.0f64, true);
    for (e, errs) in &rows {
        let (pop, rate) = errs[2];
        worst = worst.max(pop).max(rate);
        let ok = errors_decreasing(&errs.iter().map(|x| x.0).collect::<Vec<_>>());
        decreasing &= ok;
        let ladder_str: Vec<String> = errs.iter().map(|x| format!("{:.2e}", x.0)).collect();
        let _ =
            writeln!(
            out,
            "    eps {e:+.1}: W=200,M_k=201 population {pop:.3e}, rate {rate:.3e}; ladder {} {}",
            ladder_str.join(" -> "),
            if ok { "(no increase beyond 10% noise)" } else { "(increasing beyond 10% noise)" }
        );
    }
    let (fine_pop, fine_rate) = oracle_errors(0.0, &DiscretizationSpec::new(200.0, 401));
    let _ = writeln!(out, "    eps +0.0: W=200,M_k=401 population {fine_pop:.3e}, rate {fine_rate:.3e} (spacing 0.5, for reference)");
    outcome(
        worst < 2e-2 && decreasing,
        format!("max relative error {worst:.3e} at W=200, M_k=201 (tolerance 2e-2); ladder error non-increasing within noise at all 9 eps: {decreasing}"),
    )
}

fn criterion_11() -> Outcome {
    let m = models::fig5();
    let omegas = grid(0.0, 30.0, 601);
    let mut norm: f64 = 0.0;
    let mut in_range = true;
    let mut total = Vec::with_capacity(omegas.len());
    for &w in &omegas {
        let rho = general_steady_state(&build_general(&m, w).unwrap()).unwrap();
        norm = norm.max((rho.total_population() - 1.0).abs());
        let pops: Vec<f64> = (0..3)
            .map(|i| rho.population(i))
            .chain(rho.continuum_pops.iter().copied())
            .collect();
        in_range &= pops.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p));
        total.push(rho.continuum_total());
    }
    let peaks: Vec<usize> = (1..total.len() - 1)
        .filter(|&k| total[k] > total[k - 1] && total[k] >= total[k + 1] && total[k] > 0.15)
        .collect();
    let mut asymmetric = peaks.len() == 2;
    let mut desc = Vec::new();
    for &k in &peaks {
        let lo = (k.saturating_sub(60)..k)
            .min_by(|a, b| total[*a].total_cmp(&total[*b]))
            .unwrap();
        let hi = (k + 1..(k + 60).min(total.len()))
            .min_by(|a, b| total[*a].total_cmp(&total[*b]))
            .unwrap();
        asymmetric &= total[lo] < 0.7 * total[hi];
        desc.push(format!(
            "peak {:.3} at {:.2} (red dip {:.4} at {:.2}, blue min {:.4})",
            total[k], omegas[k], total[lo], omegas[lo], total[hi]
        ));
    }
    outcome(
        asymmetric && in_range && norm < 1e-10,
        format!(
            "{} resonances: {}; populations in [0,1]: {in_range}; normalization {norm:.1e}",
            peaks.len(),
            desc.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (11, criterion_11),
    ];
    let mut failed = Vec::new();
    let mut report = |n: usize, o: Outcome, out: &mut std::io::StdoutLock| {
        let _ = writeln!(
            out,
            "criterion {n}: {} {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(n);
        }
    };
    for (n, f) in &criteria[..9] {
        report(*n, f(), &mut out);
    }
    let mut details = Vec::new();
    let c10 = criterion_10(&mut details);
    report(10, c10, &mut out);
    let _ = out.write_all(&details);
    report(11, criteria[9].1(), &mut out);
    if failed.is_empty() {
        let _ = writeln!(out, "acceptance: all 11 criteria pass");
        ExitCode::SUCCESS
    } else {
        let _ = writeln!(out, "acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
