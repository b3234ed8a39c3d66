//! Parameter sets, model descriptions and density-matrix containers shared by
//! every solver.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::error::{FanoError, Result};
use crate::C64;

/// Dimensionless single-resonance parameters, in units of `hbar*gamma = n*pi*V^2`.
///
/// `gamma_e` damps the g-e coherence; the e->g population rate is `2*gamma_e`.
/// `gamma_cg` and `gamma_ce` are population rates out of the continuum.
/// `gamma_kg` and `gamma_ke` (continuum-discrete pure dephasing) are accepted
/// but have no effect on any wideband result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoParams {
    pub epsilon: f64,
    pub q: f64,
    pub omega: f64,
    pub gamma_e: f64,
    pub gamma_cg: f64,
    pub gamma_ce: f64,
    pub gamma_eg: f64,
    pub gamma_kg: f64,
    pub gamma_ke: f64,
}

impl FanoParams {
    /// Detuning, asymmetry and reduced Rabi coupling; continuum relaxes to `g`
    /// at unit rate, every other rate zero.
    pub fn new(epsilon: f64, q: f64, omega: f64) -> Self {
        Self {
            epsilon,
            q,
            omega,
            gamma_e: 0.0,
            gamma_cg: 1.0,
            gamma_ce: 0.0,
            gamma_eg: 0.0,
            gamma_kg: 0.0,
            gamma_ke: 0.0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_gamma_e(mut self, gamma_e: f64) -> Self {
        self.gamma_e = gamma_e;
        self
    }

    pub fn with_continuum_relaxation(mut self, gamma_cg: f64, gamma_ce: f64) -> Self {
        self.gamma_cg = gamma_cg;
        self.gamma_ce = gamma_ce;
        self
    }

    pub fn with_dephasing(mut self, gamma_eg: f64) -> Self {
        self.gamma_eg = gamma_eg;
        self
    }

    pub fn with_continuum_dephasing(mut self, gamma_kg: f64, gamma_ke: f64) -> Self {
        self.gamma_kg = gamma_kg;
        self.gamma_ke = gamma_ke;
        self
    }

    /// Total continuum relaxation rate `Gamma_c = Gamma_cg + Gamma_ce`.
    pub fn gamma_c(&self) -> f64 {
        self.gamma_cg + self.gamma_ce
    }

    /// Branching ratio of continuum relaxation into `g`; `None` when the
    /// continuum does not relax at all.
    pub fn beta(&self) -> Option<f64> {
        let total = self.gamma_c();
        (total > 0.0).then(|| self.gamma_cg / total)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("epsilon", self.epsilon),
            ("q", self.q),
            ("omega", self.omega),
            ("gamma_e", self.gamma_e),
            ("gamma_cg", self.gamma_cg),
            ("gamma_ce", self.gamma_ce),
            ("gamma_eg", self.gamma_eg),
            ("gamma_kg", self.gamma_kg),
            ("gamma_ke", self.gamma_ke),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(FanoError::InvalidParameter {
                    name,
                    reason: "must be finite".to_string(),
                });
            }
        }
        for (name, v) in &finite[2..] {
            if *v < 0.0 {
                return Err(FanoError::InvalidParameter {
                    name,
                    reason: format!("must be >= 0, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Complex asymmetry parameter `q + i q_i`; the imaginary part carries the
/// Lorentzian admixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexQ {
    pub q: f64,
    pub q_i: f64,
}

impl ComplexQ {
    pub fn new(q: f64, q_i: f64) -> Self {
        Self { q, q_i }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.q * self.q + self.q_i * self.q_i
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    /// Photons absorbed to reach this level in the rotating frame: 0 for the
    /// ground manifold, 1 for the excited manifold.
    pub photon_index: u32,
}

/// One structureless (wideband) continuum.
#[derive(Debug, Clone, PartialEq)]
pub struct Continuum {
    /// Density of states `n = dk/dE`.
    pub density: f64,
    /// Coupling `V_i` of each discrete level to this continuum, radiative ones
    /// included.
    pub couplings: Vec<f64>,
    /// Population relaxation rate from the continuum to each discrete level.
    pub relax_rates: Vec<f64>,
    /// Incoherent pumping from each discrete level into the continuum. Only
    /// present so that validation can reject it; must be all zero.
    pub pump_rates: Vec<f64>,
}

impl Continuum {
    pub fn new(density: f64, couplings: Vec<f64>, relax_rates: Vec<f64>) -> Self {
        let n = couplings.len();
        Self {
            density,
            couplings,
            relax_rates,
            pump_rates: alloc::vec![0.0; n],
        }
    }

    pub fn total_relaxation(&self) -> f64 {
        self.relax_rates.iter().sum()
    }
}

/// Lindblad jump `|to><from|` with population rate `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

/// Pure dephasing: the coherence `rho_ij` (and `rho_ji`) decays at `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dephasing {
    pub i: usize,
    pub j: usize,
    pub rate: f64,
}

/// Pure dephasing between every state of a continuum and one discrete level.
/// Wideband solvers ignore it; the discretized oracle applies it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumDephasing {
    pub continuum: usize,
    pub level: usize,
    pub rate: f64,
}

/// N discrete levels coupled to M continua with Markovian channels.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralModel {
    pub levels: Vec<Level>,
    /// Hermitian couplings among discrete levels (zero diagonal).
    pub dipoles: DMatrix<C64>,
    pub continua: Vec<Continuum>,
    pub jumps: Vec<Jump>,
    pub dephasings: Vec<Dephasing>,
    pub continuum_dephasings: Vec<ContinuumDephasing>,
}

impl GeneralModel {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_continua(&self) -> usize {
        self.continua.len()
    }

    /// Index of the reference ground level: the lowest-energy level of the
    /// ground manifold (photon index 0), or level 0 if none is marked.
    pub fn ground_level(&self) -> usize {
        let mut best: Option<usize> = None;
        for (i, l) in self.levels.iter().enumerate() {
            if l.photon_index == 0 && best.is_none_or(|b| l.energy < self.levels[b].energy) {
                best = Some(i);
            }
        }
        best.unwrap_or(0)
    }

    pub fn validated(self) -> Result<Self> {
        let v = validate_model(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(FanoError::InvalidModel(v))
        }
    }
}

/// A single broken model rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.message, self.field)
    }
}

const HERMITIAN_TOL: f64 = 1e-12;

/// Collects every violated model rule; empty means the model is usable.
pub fn validate_model(model: &GeneralModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = model.levels.len();
    if n == 0 {
        out.push(Violation::new(
            "levels",
            "at least one discrete level is required",
        ));
    }
    if model.continua.is_empty() {
        out.push(Violation::new(
            "continua",
            "at least one continuum is required",
        ));
    }
    for (i, l) in model.levels.iter().enumerate() {
        if !l.energy.is_finite() {
            out.push(Violation::new(
                format!("levels[{i}].energy"),
                format!("level {i}: energy is not finite"),
            ));
        }
    }

    let d = &model.dipoles;
    if d.nrows() != n || d.ncols() != n {
        out.push(Violation::new(
            "dipoles",
            format!(
                "dipole matrix is {}x{}, expected {n}x{n}",
                d.nrows(),
                d.ncols()
            ),
        ));
    } else {
        let mut hermitian = true;
        let mut diagonal = true;
        let mut finite = true;
        for i in 0..n {
            if d[(i, i)].norm() != 0.0 {
                diagonal = false;
            }
            for j in 0..n {
                let x = d[(i, j)];
                if !(x.re.is_finite() && x.im.is_finite()) {
                    finite = false;
                }
                if (x - d[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    hermitian = false;
                }
            }
        }
        if !finite {
            out.push(Violation::new(
                "dipoles",
                "dipole matrix has non-finite entries",
            ));
        }
        if !hermitian {
            out.push(Violation::new("dipoles", "dipole matrix not Hermitian"));
        }
        if !diagonal {
            out.push(Violation::new(
                "dipoles",
                "dipole matrix diagonal must be zero (level energies belong in `levels`)",
            ));
        }
    }

    for (a, c) in model.continua.iter().enumerate() {
        let field = |s: &str| format!("continua[{a}].{s}");
        if !(c.density.is_finite() && c.density > 0.0) {
            out.push(Violation::new(
                field("density"),
                format!("continuum {a}: density must be > 0"),
            ));
        }
        if c.couplings.len() != n {
            out.push(Violation::new(
                field("couplings"),
                format!(
                    "continuum {a}: {} couplings for {n} levels",
                    c.couplings.len()
                ),
            ));
        }
        if c.couplings.iter().any(|v| !v.is_finite()) {
            out.push(Violation::new(
                field("couplings"),
                format!("continuum {a}: coupling is not finite"),
            ));
        }
        if c.relax_rates.len() != n {
            out.push(Violation::new(
                field("relax_rates"),
                format!(
                    "continuum {a}: {} relaxation rates for {n} levels",
                    c.relax_rates.len()
                ),
            ));
        }
        if c.relax_rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            out.push(Violation::new(
                field("relax_rates"),
                format!("continuum {a}: relaxation rates must be finite and >= 0"),
            ));
        } else if c.total_relaxation() <= 0.0 {
            out.push(Violation::new(
                field("relax_rates"),
                format!("continuum {a}: total relaxation rate is zero"),
            ));
        }
        if c.pump_rates.iter().any(|r| *r != 0.0) {
            out.push(Violation::new(
                field("pump_rates"),
                format!(
                    "continuum {a}: incoherent pumping into a continuum diverges in the wideband approximation"
                ),
            ));
        }
    }

    for (k, j) in model.jumps.iter().enumerate() {
        if j.from >= n || j.to >= n {
            out.push(Violation::new(
                format!("jumps[{k}]"),
                format!("jump {k}: level index out of range"),
            ));
        }
        if !(j.rate.is_finite() && j.rate >= 0.0) {
            out.push(Violation::new(
                format!("jumps[{k}].rate"),
                format!("jump {k}: rate must be >= 0"),
            ));
        }
    }
    for (k, p) in model.dephasings.iter().enumerate() {
        if p.i >= n || p.j >= n {
            out.push(Violation::new(
                format!("dephasings[{k}]"),
                format!("dephasing {k}: level index out of range"),
            ));
        } else if p.i == p.j {
            out.push(Violation::new(
                format!("dephasings[{k}]"),
                format!("dephasing {k}: needs two distinct levels"),
            ));
        }
        if !(p.rate.is_finite() && p.rate >= 0.0) {
            out.push(Violation::new(
                format!("dephasings[{k}].rate"),
                format!("dephasing {k}: rate must be >= 0"),
            ));
        }
    }
    for (k, p) in model.continuum_dephasings.iter().enumerate() {
        if p.continuum >= model.continua.len() || p.level >= n {
            out.push(Violation::new(
                format!("continuum_dephasings[{k}]"),
                format!("continuum dephasing {k}: index out of range"),
            ));
        }
        if !(p.rate.is_finite() && p.rate >= 0.0) {
            out.push(Violation::new(
                format!("continuum_dephasings[{k}].rate"),
                format!("continuum dephasing {k}: rate must be >= 0"),
            ));
        }
    }
    out
}

/// Density matrix over the discrete levels plus the integrated population of
/// each continuum.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixP {
    pub rho: DMatrix<C64>,
    pub continuum_pops: Vec<f64>,
}

impl DensityMatrixP {
    pub fn discrete_trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn continuum_total(&self) -> f64 {
        self.continuum_pops.iter().sum()
    }

    /// Discrete trace plus all continuum populations; 1 for a normalized state.
    pub fn total_population(&self) -> f64 {
        self.discrete_trace() + self.continuum_total()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.rho[(i, i)].re
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.rho.nrows();
        let mut e = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                e = e.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        e
    }

    /// Checks Hermiticity, non-negative populations and normalization.
    pub fn check(&self, tol: f64) -> core::result::Result<(), String> {
        let h = self.hermiticity_error();
        if h > tol {
            return Err(format!("not Hermitian (error {h:e})"));
        }
        for i in 0..self.rho.nrows() {
            let p = self.population(i);
            if p < -1e-10 {
                return Err(format!("negative population {p:e} on level {i}"));
            }
        }
        if let Some(p) = self.continuum_pops.iter().find(|p| **p < -1e-10) {
            return Err(format!("negative continuum population {p:e}"));
        }
        let t = self.total_population();
        if (t - 1.0).abs() > tol {
            return Err(format!("total population {t} != 1"));
        }
        Ok(())
    }
}
