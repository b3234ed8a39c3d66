//! Hilbert-space solution: the 2x2 effective Hamiltonian on `{g, e}`, the
//! poles of `G_gg(z)`, the ground-state survival amplitude and the ionization
//! probability `P(T) = 1 - |U_gg(T)|^2`.

use alloc::vec::Vec;

use nalgebra::Matrix2;

use crate::types::FanoParams;
use crate::C64;
#[cfg(not(feature = "std"))]
use nalgebra::ComplexField as _;

const I: C64 = C64::new(0.0, 1.0);

/// Relative size of `omega` below which the two poles are treated as one.
pub const CONFLUENT_TOL: f64 = 1e-9;

/// `H_eff = [[-i W^2, W(q - i)], [W(q - i), -eps - i]]` with `W = Omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHamiltonian2 {
    pub h: Matrix2<C64>,
}

impl EffectiveHamiltonian2 {
    pub fn trace(&self) -> C64 {
        self.h.trace()
    }

    pub fn determinant(&self) -> C64 {
        self.h[(0, 0)] * self.h[(1, 1)] - self.h[(0, 1)] * self.h[(1, 0)]
    }

    /// `det(z - H_eff)`.
    pub fn characteristic(&self, z: C64) -> C64 {
        z * z - z * self.trace() + self.determinant()
    }
}

pub fn build_heff(p: &FanoParams) -> EffectiveHamiltonian2 {
    let w = p.omega;
    let off = C64::new(w * p.q, -w);
    EffectiveHamiltonian2 {
        h: Matrix2::new(C64::new(0.0, -w * w), off, off, C64::new(-p.epsilon, -1.0)),
    }
}

/// Poles of `G_gg(z) = (z + eps + i) / ((z - z1)(z - z2))` and the derived
/// amplitudes and rates.
///
/// `z1 = -(omega0 - omega)/2` is the slow pole (decay rate `gamma0`), with the
/// branch of `omega` chosen so that `Im omega >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleData {
    pub z1: C64,
    pub z2: C64,
    pub omega0: C64,
    pub omega: C64,
    pub a1: C64,
    pub a2: C64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Set at a double pole: `U_gg(t) = (1 + c t) exp(-i z1 t)`; then
    /// `a1 = 1`, `a2 = 0`.
    pub confluent_slope: Option<C64>,
}

impl PoleData {
    /// Same poles with the other determination of the square root, i.e. the
    /// labels 1 and 2 exchanged.
    pub fn swapped(&self) -> Self {
        if self.confluent_slope.is_some() {
            return *self;
        }
        Self {
            z1: self.z2,
            z2: self.z1,
            omega: -self.omega,
            a1: self.a2,
            a2: self.a1,
            gamma0: self.gamma2,
            gamma2: self.gamma0,
            ..*self
        }
    }

    /// `U_gg(t)`.
    pub fn amplitude(&self, t: f64) -> C64 {
        let e1 = (-I * self.z1 * t).exp();
        match self.confluent_slope {
            Some(c) => e1 * (1.0 + c * t),
            None => self.a1 * e1 + self.a2 * (-I * self.z2 * t).exp(),
        }
    }

    /// `dU_gg/dt`.
    pub fn amplitude_derivative(&self, t: f64) -> C64 {
        let e1 = (-I * self.z1 * t).exp();
        match self.confluent_slope {
            Some(c) => e1 * (c - I * self.z1 * (1.0 + c * t)),
            None => -I * (self.a1 * self.z1 * e1 + self.a2 * self.z2 * (-I * self.z2 * t).exp()),
        }
    }

    /// `|a1|^2 e^{-G0 t} + |a2|^2 e^{-G2 t} + 2 Re[a1 a2* e^{-i Re(omega) t}] e^{-G1 t}`.
    pub fn survival_three_exponential(&self, t: f64) -> f64 {
        let cross = self.a1 * self.a2.conj() * (-I * self.omega.re * t).exp();
        self.a1.norm_sqr() * (-self.gamma0 * t).exp()
            + self.a2.norm_sqr() * (-self.gamma2 * t).exp()
            + 2.0 * cross.re * (-self.gamma1 * t).exp()
    }
}

/// `omega = sqrt((eps + i)^2 - 2 W^2 [1 - 2 q^2 + i (4 q + eps)] - W^4)`, `Im omega >= 0`.
fn omega(p: &FanoParams) -> C64 {
    let (e, q, w) = (p.epsilon, p.q, p.omega);
    let w2 = w * w;
    let ei = C64::new(e, 1.0);
    let radicand = ei * ei - 2.0 * w2 * C64::new(1.0 - 2.0 * q * q, 4.0 * q + e) - w2 * w2;
    let s = radicand.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

pub fn poles(p: &FanoParams) -> PoleData {
    let w2 = p.omega * p.omega;
    let gamma1 = 1.0 + w2;
    let omega0 = C64::new(p.epsilon, gamma1);
    let omega = omega(p);
    // The root of smaller modulus suffers cancellation; take it from the product.
    let det = build_heff(p).determinant();
    let (z1, z2) = if (omega0 - omega).norm() <= (omega0 + omega).norm() {
        let z2 = -(omega0 + omega) * 0.5;
        (det / z2, z2)
    } else {
        let z1 = -(omega0 - omega) * 0.5;
        (z1, det / z1)
    };
    let shift = C64::new(p.epsilon, 1.0);
    let (a1, a2, confluent_slope) = if omega.norm() < CONFLUENT_TOL * omega0.norm() {
        (
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            Some(-I * (z1 + shift)),
        )
    } else {
        ((z1 + shift) / (z1 - z2), (z2 + shift) / (z2 - z1), None)
    };
    PoleData {
        z1,
        z2,
        omega0,
        omega,
        a1,
        a2,
        // Equal to gamma1 -/+ Im(omega), without the cancellation.
        gamma0: -2.0 * z1.im,
        gamma1,
        gamma2: -2.0 * z2.im,
        confluent_slope,
    }
}

pub fn survival_amplitude(p: &FanoParams, t: f64) -> C64 {
    poles(p).amplitude(t)
}

/// `|U_gg(t)|^2`, clamped to `[0, 1]` against round-off.
pub fn survival_probability(p: &FanoParams, t: f64) -> f64 {
    poles(p).amplitude(t).norm_sqr().clamp(0.0, 1.0)
}

/// `P(T) = 1 - |U_gg(T)|^2`.
pub fn ionization_probability(p: &FanoParams, t: f64) -> f64 {
    1.0 - survival_probability(p, t)
}

/// Exact `dP/dt = -2 Re(conj(U) dU/dt)`.
pub fn ionization_rate(p: &FanoParams, t: f64) -> f64 {
    let pd = poles(p);
    -2.0 * (pd.amplitude(t).conj() * pd.amplitude_derivative(t)).re
}

/// Weak-field Fano rate `2 W^2 (eps + q)^2 / (1 + eps^2)`.
pub fn weak_field_rate(epsilon: f64, q: f64, omega: f64) -> f64 {
    let n = epsilon + q;
    2.0 * omega * omega * n * n / (1.0 + epsilon * epsilon)
}

/// Number of ionized particles for an incident flux after time `t`: `flux * P(t)`.
pub fn ionized_count(flux: f64, p: &FanoParams, t: f64) -> f64 {
    flux * ionization_probability(p, t)
}

/// Fano-exact approximation of the ionized count, linear in time:
/// `flux * t * 2 W^2 (eps + q)^2 / (1 + eps^2)`.
pub fn ionized_count_fano_exact_approximation(flux: f64, p: &FanoParams, t: f64) -> f64 {
    flux * t * weak_field_rate(p.epsilon, p.q, p.omega)
}

/// One row of an ionization sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonizationPoint {
    pub epsilon: f64,
    pub t: f64,
    pub p: f64,
    pub dp_dt: f64,
}

pub fn ionization_point(template: &FanoParams, epsilon: f64, t: f64) -> IonizationPoint {
    let p = template.with_epsilon(epsilon);
    let pd = poles(&p);
    let u = pd.amplitude(t);
    IonizationPoint {
        epsilon,
        t,
        p: 1.0 - u.norm_sqr().clamp(0.0, 1.0),
        dp_dt: -2.0 * (u.conj() * pd.amplitude_derivative(t)).re,
    }
}

/// `P(T)` over the grid, time-major: all epsilons for `times[0]`, then `times[1]`, ...
pub fn ionization_sweep(
    template: &FanoParams,
    epsilons: &[f64],
    times: &[f64],
) -> Vec<IonizationPoint> {
    times
        .iter()
        .flat_map(|&t| {
            epsilons
                .iter()
                .map(move |&e| ionization_point(template, e, t))
        })
        .collect()
}

/// `max / min` of a profile; infinite when the minimum is zero.
pub fn flatness(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}
