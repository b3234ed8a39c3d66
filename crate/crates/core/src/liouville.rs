//! Single-resonance dissipative solution: the 4x4 effective Liouvillian on the
//! discrete subspace, its steady state, the continuum population, the
//! transport rate and the absorption rate.
//!
//! Liouville vectors are column-stacked over the basis `{gg, eg, ge, ee}`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{FanoError, Result};
use crate::lineshape::{
    decompose, fit_rational_quadratic, LineshapeDecomposition, RationalQuadratic,
};
use crate::scattering::{build_heff, EffectiveHamiltonian2};
use crate::types::{DensityMatrixP, FanoParams};
use crate::C64;

pub const GG: usize = 0;
pub const EG: usize = 1;
pub const GE: usize = 2;
pub const EE: usize = 3;

const I: C64 = C64::new(0.0, 1.0);

/// Threshold on a held-out fit residual above which a sweep is flagged as
/// not being a ratio of quadratics.
pub const FIT_FLAG_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveLiouvillian4 {
    pub l_eff: Matrix4<C64>,
    pub heff: EffectiveHamiltonian2,
    /// `1 + i q`.
    pub k: C64,
    /// `-Gamma_e - Omega^2 - i eps - gamma_eg - 1`.
    pub a: C64,
    /// Quantum-jump part returning the flux lost to the continuum.
    pub ltilde: Matrix4<f64>,
    /// Discrete-manifold dissipator (e->g decay and g-e dephasing).
    pub l_d: Matrix4<C64>,
    /// Continuum population `= c . rho`.
    pub c: Vector4<f64>,
    pub beta: f64,
    pub gamma_c: f64,
}

/// `-i (1 (x) H - conj(H) (x) 1)` for a 2x2 `H`, column stacked.
pub fn coherent_part(h: &EffectiveHamiltonian2) -> Matrix4<C64> {
    let hd = DMatrix::from_column_slice(2, 2, h.h.as_slice());
    let s = crate::linalg::hamiltonian_superop(&hd);
    Matrix4::from_fn(|i, j| s[(i, j)])
}

/// `[Omega^2, Omega, Omega, 1]`, the flux weights shared by the jump row and
/// the continuum-population vector.
fn flux_weights(omega: f64) -> Vector4<f64> {
    Vector4::new(omega * omega, omega, omega, 1.0)
}

pub fn build_effective_liouvillian(p: &FanoParams) -> Result<EffectiveLiouvillian4> {
    p.validate()?;
    let beta = p.beta().ok_or(FanoError::ContinuumRelaxationZero)?;
    if p.gamma_kg != 0.0 || p.gamma_ke != 0.0 {
        log::info!(
            "continuum-discrete pure dephasing (gamma_kg = {}, gamma_ke = {}) has no effect in the wideband limit; ignored",
            p.gamma_kg,
            p.gamma_ke
        );
    }
    let heff = build_heff(p);
    let w = flux_weights(p.omega) * 2.0;
    let mut ltilde = Matrix4::<f64>::zeros();
    for j in 0..4 {
        ltilde[(GG, j)] = beta * w[j];
        ltilde[(EE, j)] = (1.0 - beta) * w[j];
    }
    let mut l_d = Matrix4::<C64>::zeros();
    l_d[(GG, EE)] += 2.0 * p.gamma_e;
    l_d[(EE, EE)] -= 2.0 * p.gamma_e;
    let coh = C64::from(p.gamma_e + p.gamma_eg);
    l_d[(EG, EG)] -= coh;
    l_d[(GE, GE)] -= coh;
    let l_eff = coherent_part(&heff) + ltilde.map(C64::from) + l_d;
    let gamma_c = p.gamma_c();
    Ok(EffectiveLiouvillian4 {
        l_eff,
        heff,
        k: C64::new(1.0, p.q),
        a: C64::new(
            -p.gamma_e - p.omega * p.omega - p.gamma_eg - 1.0,
            -p.epsilon,
        ),
        ltilde,
        l_d,
        c: flux_weights(p.omega) * (2.0 / gamma_c),
        beta,
        gamma_c,
    })
}

/// Steady state of the single resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// `(rho_gg, rho_eg, rho_ge, rho_ee)`.
    pub vector: Vector4<C64>,
    pub density: DensityMatrixP,
}

impl SteadyState {
    pub fn rho_gg(&self) -> f64 {
        self.vector[GG].re
    }

    pub fn rho_ee(&self) -> f64 {
        self.vector[EE].re
    }

    pub fn rho_eg(&self) -> C64 {
        self.vector[EG]
    }

    pub fn continuum_population(&self) -> f64 {
        self.density.continuum_pops[0]
    }
}

fn assemble(vector: Vector4<C64>, c: &Vector4<f64>) -> SteadyState {
    let eg = (vector[EG] + vector[GE].conj()) * 0.5;
    let v = Vector4::new(
        C64::from(vector[GG].re),
        eg,
        eg.conj(),
        C64::from(vector[EE].re),
    );
    let pop = c.map(C64::from).dot(&v).re;
    let rho = DMatrix::from_column_slice(2, 2, v.as_slice());
    SteadyState {
        vector: v,
        density: DensityMatrixP {
            rho,
            continuum_pops: alloc::vec![pop],
        },
    }
}

/// Kernel of `L_eff` with the ee equation replaced by the normalization
/// `rho_gg + rho_ee + C . rho = 1`.
pub fn steady_state(p: &FanoParams) -> Result<SteadyState> {
    let gel = build_effective_liouvillian(p)?;
    steady_state_of(&gel)
}

pub fn steady_state_of(gel: &EffectiveLiouvillian4) -> Result<SteadyState> {
    let mut a = gel.l_eff;
    for j in 0..4 {
        let trace = if j == GG || j == EE { 1.0 } else { 0.0 };
        a[(EE, j)] = C64::from(trace + gel.c[j]);
    }
    let b = Vector4::new(
        C64::from(0.0),
        C64::from(0.0),
        C64::from(0.0),
        C64::from(1.0),
    );
    match a.lu().solve(&b) {
        Some(x) if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
            Ok(assemble(x, &gel.c))
        }
        _ => Err(classify_singular(gel)),
    }
}

fn classify_singular(gel: &EffectiveLiouvillian4) -> FanoError {
    let dets = CramerSystem::from_liouvillian(gel).determinants();
    if dets.iter().all(|d| d.norm() == 0.0) {
        FanoError::DegenerateSteadyState { dimension: 2 }
    } else {
        FanoError::NoSteadyState
    }
}

/// Reduced problem `M v = b` on `(rho_gg, rho_eg, rho_ge)` with `rho_ee = 1`.
///
/// `M` is the gg/eg/ge block of `L_eff` and `b` is minus its ee column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CramerSystem {
    pub m: Matrix3<C64>,
    pub b: Vector3<C64>,
}

impl CramerSystem {
    pub fn from_liouvillian(gel: &EffectiveLiouvillian4) -> Self {
        Self {
            m: gel.l_eff.fixed_view::<3, 3>(0, 0).into_owned(),
            b: -gel.l_eff.fixed_view::<3, 1>(0, EE).into_owned(),
        }
    }

    /// `(det M1, det M2, det M3, det M)`: the unnormalized steady state
    /// `(rho_gg, rho_eg, rho_ge, rho_ee)`.
    pub fn determinants(&self) -> [C64; 4] {
        let mut out = [C64::from(0.0); 4];
        for (i, slot) in out.iter_mut().take(3).enumerate() {
            let mut mi = self.m;
            mi.set_column(i, &self.b);
            *slot = mi.determinant();
        }
        out[3] = self.m.determinant();
        out
    }
}

/// Steady state by Cramer's rule; used to cross-check [`steady_state`].
pub fn steady_state_cramer(p: &FanoParams) -> Result<SteadyState> {
    let gel = build_effective_liouvillian(p)?;
    let d = CramerSystem::from_liouvillian(&gel).determinants();
    let v = Vector4::new(d[0], d[1], d[2], d[3]);
    if v.iter().all(|z| z.norm() == 0.0) {
        return Err(FanoError::DegenerateSteadyState { dimension: 2 });
    }
    let total = (v[GG] + v[EE] + gel.c.map(C64::from).dot(&v)).re;
    if total == 0.0 || !total.is_finite() {
        return Err(FanoError::NoSteadyState);
    }
    Ok(assemble(v / C64::from(total), &gel.c))
}

/// `r = Gamma_c * (continuum population) / rho_gg`, independent of `Gamma_c`.
pub fn transport_rate(p: &FanoParams) -> Result<f64> {
    let ss = steady_state(p)?;
    transport_rate_of(&ss, p.gamma_c())
}

pub fn transport_rate_of(ss: &SteadyState, gamma_c: f64) -> Result<f64> {
    let gg = ss.rho_gg();
    if gg <= 0.0 {
        return Err(FanoError::SaturatedGround);
    }
    Ok(gamma_c * ss.continuum_population() / gg)
}

/// Photon absorption rate `-2 Im(H_ge rho_eg + int dk H_gk rho_kg)`, which in
/// the wideband limit is `2 Omega^2 rho_gg + 2 Re(K Omega rho_eg)`.
pub fn absorption(p: &FanoParams) -> Result<f64> {
    let ss = steady_state(p)?;
    Ok(absorption_of(&ss, p))
}

pub fn absorption_of(ss: &SteadyState, p: &FanoParams) -> f64 {
    let k = C64::new(1.0, p.q);
    2.0 * p.omega * p.omega * ss.rho_gg() + 2.0 * (k * p.omega * ss.rho_eg()).re
}

/// `int dk rho_kg = -i (Omega rho_gg + rho_eg)` in units where `n pi V^2 = 1`
/// (`V` the e-continuum coupling).
pub fn continuum_ground_coherence(ss: &SteadyState, p: &FanoParams) -> C64 {
    -I * (p.omega * ss.rho_gg() + ss.rho_eg())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    ContinuumPop,
    TransportRate,
    Absorption,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::ContinuumPop => "continuum_pop",
            Observable::TransportRate => "transport_rate",
            Observable::Absorption => "absorption",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "continuum_pop" => Some(Observable::ContinuumPop),
            "transport_rate" => Some(Observable::TransportRate),
            "absorption" => Some(Observable::Absorption),
            _ => None,
        }
    }
}

pub fn observe(p: &FanoParams, observable: Observable) -> Result<f64> {
    let ss = steady_state(p)?;
    match observable {
        Observable::ContinuumPop => Ok(ss.continuum_population()),
        Observable::TransportRate => transport_rate_of(&ss, p.gamma_c()),
        Observable::Absorption => Ok(absorption_of(&ss, p)),
    }
}

/// Rational-quadratic fit of a sweep and its decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSummary {
    pub rq: RationalQuadratic,
    pub decomposition: Option<LineshapeDecomposition>,
    pub residual: f64,
    pub condition: f64,
    /// The residual exceeds [`FIT_FLAG_THRESHOLD`]: not a ratio of quadratics.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineshapeSweep {
    pub observable: Observable,
    pub points: Vec<(f64, f64)>,
    pub fit: core::result::Result<FitSummary, FanoError>,
}

pub fn fit_summary(points: &[(f64, f64)]) -> Result<FitSummary> {
    let fit = fit_rational_quadratic(points)?;
    Ok(FitSummary {
        rq: fit.rq,
        decomposition: decompose(&fit.rq).ok(),
        residual: fit.max_rel_residual,
        condition: fit.condition,
        flagged: fit.max_rel_residual > FIT_FLAG_THRESHOLD,
    })
}

pub fn lineshape_sweep(
    template: &FanoParams,
    epsilons: &[f64],
    observable: Observable,
) -> Result<LineshapeSweep> {
    let points = epsilons
        .iter()
        .map(|&e| observe(&template.with_epsilon(e), observable).map(|v| (e, v)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_summary(&points);
    Ok(LineshapeSweep {
        observable,
        points,
        fit,
    })
}
