//! Brute-force reference: every continuum is replaced by a finite uniform band
//! of discrete states and the full Lindblad steady state is solved without
//! projection or the wideband limit.
//!
//! The generator is never formed densely for production sizes. Writing
//! `L(X) = -i (H_nh X - X H_nh^dagger) + sum_s u_s phi_s(X)`, the first part is
//! a Sylvester operator (inverted through one complex Schur form) and the
//! remainder has low rank: one term per jump target and two per dephased
//! coherence. The steady state follows from the Woodbury identity.

use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{FanoError, Result};
use crate::general::{build_general, general_steady_state, rotating_frame_h0};
use crate::linalg::{hamiltonian_superop, lu_solve, vec_index, SylvesterSolver};
use crate::types::{validate_model, DensityMatrixP, GeneralModel};
use crate::C64;
#[cfg(not(feature = "std"))]
use nalgebra::ComplexField as _;

const I: C64 = C64::new(0.0, 1.0);

/// Largest Liouville dimension for which the dense fallback is attempted.
pub const DENSE_FALLBACK_DIM: usize = 1600;

/// Negative eigenvalues of the steady state down to this floor are tolerated.
pub const PSD_FLOOR: f64 = -1e-9;

/// Uniform discretization of every continuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationSpec {
    /// Band width `W`; the band spans `[center - W/2, center + W/2]`.
    pub bandwidth: f64,
    /// Number of states per continuum, `M_k >= 3`.
    pub levels_per_continuum: usize,
    /// Band center in the rotating frame.
    pub center: f64,
    /// Shift of the whole grid, as a fraction of the spacing.
    pub grid_offset: f64,
    /// Cap on the Liouville dimension `(N + sum M_k)^2`.
    pub max_liouville_dim: usize,
}

impl DiscretizationSpec {
    pub fn new(bandwidth: f64, levels_per_continuum: usize) -> Self {
        Self {
            bandwidth,
            levels_per_continuum,
            center: 0.0,
            grid_offset: 0.0,
            max_liouville_dim: 1_000_000,
        }
    }

    pub fn with_offset(mut self, grid_offset: f64) -> Self {
        self.grid_offset = grid_offset;
        self
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn with_cap(mut self, max_liouville_dim: usize) -> Self {
        self.max_liouville_dim = max_liouville_dim;
        self
    }

    /// `dE = W / (M_k - 1)`.
    pub fn spacing(&self) -> f64 {
        self.bandwidth / (self.levels_per_continuum as f64 - 1.0)
    }

    pub fn energy(&self, m: usize) -> f64 {
        let de = self.spacing();
        self.center - 0.5 * self.bandwidth + (m as f64 + self.grid_offset) * de
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels_per_continuum < 3 {
            return Err(FanoError::InvalidParameter {
                name: "levels_per_continuum",
                reason: alloc::format!("must be >= 3, got {}", self.levels_per_continuum),
            });
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(FanoError::InvalidParameter {
                name: "bandwidth",
                reason: alloc::format!("must be finite and > 0, got {}", self.bandwidth),
            });
        }
        if !(self.center.is_finite() && self.grid_offset.is_finite()) {
            return Err(FanoError::InvalidParameter {
                name: "center",
                reason: "center and grid_offset must be finite".into(),
            });
        }
        Ok(())
    }
}

/// A Lindblad jump `|to><from|` on the full discretized space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullJump {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

/// Lindblad generator of the discretized system, kept in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct FullLindbladian {
    /// Hermitian Hamiltonian in the rotating frame.
    pub h: DMatrix<C64>,
    pub jumps: Vec<FullJump>,
    /// Pure dephasing of `(i, j)` and `(j, i)` at the given rate.
    pub dephasings: Vec<(usize, usize, f64)>,
    pub n_discrete: usize,
    /// Index range of each discretized continuum.
    pub continua: Vec<Range<usize>>,
    /// Level whose population equation carries the trace constraint.
    pub reference: usize,
}

impl FullLindbladian {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn liouville_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    /// Bytes needed to store the dense complex generator.
    pub fn dense_bytes(&self) -> u128 {
        let d = self.liouville_dim() as u128;
        d * d * 16
    }

    /// `H - (i/2) sum_jumps rate |from><from|`.
    pub fn non_hermitian_hamiltonian(&self) -> DMatrix<C64> {
        let mut h = self.h.clone();
        for j in &self.jumps {
            h[(j.from, j.from)] -= I * (0.5 * j.rate);
        }
        h
    }

    /// `L(X)`.
    pub fn apply(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let hn = self.non_hermitian_hamiltonian();
        let mut out = (&hn * x - x * hn.adjoint()) * (-I);
        for j in &self.jumps {
            out[(j.to, j.to)] += x[(j.from, j.from)] * j.rate;
        }
        for &(a, b, g) in &self.dephasings {
            out[(a, b)] -= x[(a, b)] * g;
            out[(b, a)] -= x[(b, a)] * g;
        }
        out
    }

    /// Upper bound on the operator norm of `L` (Frobenius).
    pub fn norm_bound(&self) -> f64 {
        let hn = self.non_hermitian_hamiltonian();
        let rates: f64 = self.jumps.iter().map(|j| j.rate).sum();
        let deph = self.dephasings.iter().map(|d| d.2).fold(0.0, f64::max);
        2.0 * hn.norm() + rates + deph
    }

    /// Dense column-stacked generator; fails when it would exceed `cap_bytes`.
    pub fn to_dense(&self, cap_bytes: u128) -> Result<DMatrix<C64>> {
        let bytes = self.dense_bytes();
        if bytes > cap_bytes {
            return Err(FanoError::DimensionCap {
                dimension: self.liouville_dim(),
                cap: (cap_bytes / 16).isqrt() as usize,
                bytes,
            });
        }
        let n = self.dim();
        let mut l = hamiltonian_superop(&self.non_hermitian_hamiltonian());
        for j in &self.jumps {
            l[(vec_index(j.to, j.to, n), vec_index(j.from, j.from, n))] += C64::from(j.rate);
        }
        for &(a, b, g) in &self.dephasings {
            l[(vec_index(a, b, n), vec_index(a, b, n))] -= C64::from(g);
            l[(vec_index(b, a, n), vec_index(b, a, n))] -= C64::from(g);
        }
        Ok(l)
    }
}

/// Discretizes every continuum of `model` and assembles the full generator at
/// laser frequency `omega_l`.
pub fn build_full_lindbladian(
    model: &GeneralModel,
    spec: &DiscretizationSpec,
    omega_l: f64,
) -> Result<FullLindbladian> {
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(FanoError::InvalidModel(violations));
    }
    spec.validate()?;
    let n = model.n_levels();
    let mk = spec.levels_per_continuum;
    let dim = n + mk * model.n_continua();
    let ldim = dim.saturating_mul(dim);
    if ldim > spec.max_liouville_dim {
        let d = ldim as u128;
        return Err(FanoError::DimensionCap {
            dimension: ldim,
            cap: spec.max_liouville_dim,
            bytes: d * d * 16,
        });
    }
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    h.view_mut((0, 0), (n, n))
        .copy_from(&rotating_frame_h0(model, omega_l));
    let mut jumps: Vec<FullJump> = model
        .jumps
        .iter()
        .filter(|j| j.rate != 0.0)
        .map(|j| FullJump {
            from: j.from,
            to: j.to,
            rate: j.rate,
        })
        .collect();
    let mut dephasings: Vec<(usize, usize, f64)> = model
        .dephasings
        .iter()
        .filter(|d| d.rate != 0.0)
        .map(|d| (d.i, d.j, d.rate))
        .collect();
    let de = spec.spacing();
    let mut continua = Vec::with_capacity(model.n_continua());
    for (a, c) in model.continua.iter().enumerate() {
        let start = n + a * mk;
        let scale = (de * c.density).sqrt();
        for m in 0..mk {
            let k = start + m;
            h[(k, k)] = C64::from(spec.energy(m));
            for i in 0..n {
                let v = C64::from(c.couplings[i] * scale);
                h[(i, k)] = v;
                h[(k, i)] = v;
            }
            for (b, g) in c.relax_rates.iter().enumerate() {
                if *g != 0.0 {
                    jumps.push(FullJump {
                        from: k,
                        to: b,
                        rate: *g,
                    });
                }
            }
        }
        for cd in model
            .continuum_dephasings
            .iter()
            .filter(|cd| cd.continuum == a && cd.rate != 0.0)
        {
            for m in 0..mk {
                dephasings.push((start + m, cd.level, cd.rate));
            }
        }
        continua.push(start..start + mk);
    }
    Ok(FullLindbladian {
        h,
        jumps,
        dephasings,
        n_discrete: n,
        continua,
        reference: model.ground_level(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Structured,
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub full: DMatrix<C64>,
    pub reduced: DensityMatrixP,
    /// `||L(rho)||_F / (||L|| ||rho||_F)` with `||L||` from [`FullLindbladian::norm_bound`].
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub method: SolveMethod,
}

impl OracleSolution {
    pub fn psd_within_floor(&self) -> bool {
        self.min_eigenvalue >= PSD_FLOOR
    }
}

/// Steady state of the discretized generator with unit trace.
///
/// Uses the structured solver, falling back to a dense solve for small
/// systems whose coherent part has an undamped mode.
pub fn oracle_steady_state(gen: &FullLindbladian) -> Result<OracleSolution> {
    match structured_solve(gen) {
        Ok(x) => finish(gen, x, SolveMethod::Structured),
        Err(FanoError::SingularCoherentPart { detail }) => {
            if gen.liouville_dim() <= DENSE_FALLBACK_DIM {
                let x = dense_solve(gen)?;
                finish(gen, x, SolveMethod::Dense)
            } else {
                Err(FanoError::SingularCoherentPart { detail })
            }
        }
        Err(e) => Err(e),
    }
}

/// Steady state by a dense LU solve of the full generator, with the reference
/// population equation replaced by the trace.
pub fn oracle_steady_state_dense(gen: &FullLindbladian) -> Result<OracleSolution> {
    let x = dense_solve(gen)?;
    finish(gen, x, SolveMethod::Dense)
}

fn dense_solve(gen: &FullLindbladian) -> Result<DMatrix<C64>> {
    let n = gen.dim();
    let mut l = gen.to_dense((DENSE_FALLBACK_DIM as u128).pow(2) * 16 * 4)?;
    let row = vec_index(gen.reference, gen.reference, n);
    for j in 0..n * n {
        l[(row, j)] = C64::from(0.0);
    }
    for i in 0..n {
        l[(row, vec_index(i, i, n))] = C64::from(1.0);
    }
    let mut b = DVector::<C64>::zeros(n * n);
    b[row] = C64::from(1.0);
    let x = lu_solve(l, &b).map_err(|_| FanoError::DegenerateSteadyState { dimension: 2 })?;
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}

/// One rank-one correction `u phi(X)` of the generator.
enum Term {
    /// `u = |t><t|`, `phi(X) = sum rate X_ff (+ tr X for the reference)`.
    Refill {
        target: usize,
        sources: Vec<(usize, f64)>,
        with_trace: bool,
    },
    /// `u = |a><b|`, `phi(X) = -rate X_ab`.
    Dephase { a: usize, b: usize, rate: f64 },
}

impl Term {
    fn u(&self, n: usize) -> DMatrix<C64> {
        let mut u = DMatrix::<C64>::zeros(n, n);
        match self {
            Term::Refill { target, .. } => u[(*target, *target)] = C64::from(1.0),
            Term::Dephase { a, b, .. } => u[(*a, *b)] = C64::from(1.0),
        }
        u
    }

    fn phi(&self, x: &DMatrix<C64>) -> C64 {
        match self {
            Term::Refill {
                sources,
                with_trace,
                ..
            } => {
                let mut s: C64 = sources.iter().map(|(f, r)| x[(*f, *f)] * *r).sum();
                if *with_trace {
                    s += x.trace();
                }
                s
            }
            Term::Dephase { a, b, rate } => -x[(*a, *b)] * *rate,
        }
    }
}

fn structured_solve(gen: &FullLindbladian) -> Result<DMatrix<C64>> {
    let n = gen.dim();
    let sylvester = SylvesterSolver::new(gen.non_hermitian_hamiltonian())?;
    // A(X) = -i(Hn X - X Hn^dagger)  =>  A^{-1}(B) solves Hn X - X Hn^dagger = i B.
    let a_inv = |b: &DMatrix<C64>| sylvester.solve(&(b * I));

    let mut terms: Vec<Term> = Vec::new();
    let mut targets: Vec<usize> = gen.jumps.iter().map(|j| j.to).collect();
    targets.push(gen.reference);
    targets.sort_unstable();
    targets.dedup();
    for t in targets {
        let sources = gen
            .jumps
            .iter()
            .filter(|j| j.to == t)
            .map(|j| (j.from, j.rate))
            .collect();
        terms.push(Term::Refill {
            target: t,
            sources,
            with_trace: t == gen.reference,
        });
    }
    for &(a, b, rate) in &gen.dephasings {
        terms.push(Term::Dephase { a, b, rate });
        terms.push(Term::Dephase { a: b, b: a, rate });
    }

    let mut rhs = DMatrix::<C64>::zeros(n, n);
    rhs[(gen.reference, gen.reference)] = C64::from(1.0);
    let y0 = a_inv(&rhs);
    let ys: Vec<DMatrix<C64>> = terms.iter().map(|t| a_inv(&t.u(n))).collect();
    let k = terms.len();
    let mut s = DMatrix::<C64>::identity(k, k);
    let mut g = DVector::<C64>::zeros(k);
    for (r, term) in terms.iter().enumerate() {
        for (c, y) in ys.iter().enumerate() {
            s[(r, c)] += term.phi(y);
        }
        g[r] = term.phi(&y0);
    }
    let coeffs = lu_solve(s, &g).map_err(|_| FanoError::DegenerateSteadyState { dimension: 2 })?;
    let mut x = y0;
    for (c, y) in coeffs.iter().zip(&ys) {
        x -= y * *c;
    }
    Ok(x)
}

fn finish(gen: &FullLindbladian, x: DMatrix<C64>, method: SolveMethod) -> Result<OracleSolution> {
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(FanoError::LinearSolve("non-finite oracle steady state"));
    }
    let full = (&x + x.adjoint()) * C64::from(0.5);
    let residual = gen.apply(&full).norm() / (gen.norm_bound() * full.norm());
    let min_eigenvalue = SymmetricEigen::new(full.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let nd = gen.n_discrete;
    let rho = full.view((0, 0), (nd, nd)).into_owned();
    let continuum_pops = gen
        .continua
        .iter()
        .map(|r| r.clone().map(|k| full[(k, k)].re).sum())
        .collect();
    Ok(OracleSolution {
        full,
        reduced: DensityMatrixP {
            rho,
            continuum_pops,
        },
        residual,
        min_eigenvalue,
        method,
    })
}

/// Oracle steady state of `model` at `omega_l` on one discretization.
pub fn oracle_point(
    model: &GeneralModel,
    spec: &DiscretizationSpec,
    omega_l: f64,
) -> Result<OracleSolution> {
    oracle_steady_state(&build_full_lindbladian(model, spec, omega_l)?)
}

/// Transport rate `sum_a Gamma^a pop_a / rho_ref` of a reduced state.
pub fn transport_rate_of(model: &GeneralModel, reduced: &DensityMatrixP) -> Result<f64> {
    let g = model.ground_level();
    let gg = reduced.rho[(g, g)].re;
    if gg <= 0.0 {
        return Err(FanoError::SaturatedGround);
    }
    let flux: f64 = model
        .continua
        .iter()
        .zip(&reduced.continuum_pops)
        .map(|(c, p)| c.total_relaxation() * p)
        .sum();
    Ok(flux / gg)
}

/// One rung of a convergence ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub bandwidth: f64,
    pub levels_per_continuum: usize,
    pub spacing: f64,
    pub analytic: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub residual: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub omega_l: f64,
    pub rows: Vec<ConvergenceRow>,
    /// `p` in `error ~ M_k^-p`, least squares over the ladder.
    pub fitted_order: Option<f64>,
    /// Every rung improves on the previous one (10% noise allowance).
    pub converged: bool,
}

/// Relative noise allowed between consecutive rungs before a ladder counts as
/// non-convergent.
pub const LADDER_NOISE: f64 = 0.1;

/// Whether errors decrease along a ladder, allowing [`LADDER_NOISE`].
pub fn errors_decreasing(errors: &[f64]) -> bool {
    errors
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + LADDER_NOISE))
}

fn fitted_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_error > 0.0)
        .map(|r| ((r.levels_per_continuum as f64).ln(), r.abs_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

/// Assembles a study from precomputed rungs (used by parallel drivers).
pub fn convergence_from_rows(omega_l: f64, rows: Vec<ConvergenceRow>) -> ConvergenceStudy {
    let errors: Vec<f64> = rows.iter().map(|r| r.abs_error).collect();
    ConvergenceStudy {
        omega_l,
        fitted_order: fitted_order(&rows),
        converged: errors_decreasing(&errors),
        rows,
    }
}

/// Analytic total continuum population of `model` at `omega_l`.
pub fn analytic_continuum_population(model: &GeneralModel, omega_l: f64) -> Result<f64> {
    let gel = build_general(model, omega_l)?;
    Ok(general_steady_state(&gel)?.continuum_total())
}

/// One rung: oracle vs analytic total continuum population.
pub fn convergence_row(
    model: &GeneralModel,
    spec: &DiscretizationSpec,
    omega_l: f64,
    analytic: f64,
) -> Result<ConvergenceRow> {
    let sol = oracle_point(model, spec, omega_l)?;
    let oracle = sol.reduced.continuum_total();
    let abs_error = (oracle - analytic).abs();
    Ok(ConvergenceRow {
        bandwidth: spec.bandwidth,
        levels_per_continuum: spec.levels_per_continuum,
        spacing: spec.spacing(),
        analytic,
        oracle,
        abs_error,
        rel_error: if analytic != 0.0 {
            abs_error / analytic.abs()
        } else {
            abs_error
        },
        residual: sol.residual,
        min_eigenvalue: sol.min_eigenvalue,
    })
}

/// `|analytic - oracle|` for the total continuum population over a ladder of
/// discretizations. Non-convergence is reported, not raised.
pub fn convergence_study(
    model: &GeneralModel,
    omega_l: f64,
    ladder: &[DiscretizationSpec],
) -> Result<ConvergenceStudy> {
    if ladder.len() < 3 {
        return Err(FanoError::TooFewSamples {
            needed: 3,
            got: ladder.len(),
        });
    }
    let analytic = analytic_continuum_population(model, omega_l)?;
    let rows = ladder
        .iter()
        .map(|s| convergence_row(model, s, omega_l, analytic))
        .collect::<Result<Vec<_>>>()?;
    Ok(convergence_from_rows(omega_l, rows))
}
