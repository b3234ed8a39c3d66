//! Fano profiles and the equivalence between a ratio of quadratics in the
//! detuning and a Fano-plus-Lorentzian lineshape.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{FanoError, Result};
use crate::linalg::least_squares;
use crate::types::ComplexQ;
#[cfg(not(feature = "std"))]
use nalgebra::ComplexField as _;

/// `(eps + q)^2 / (eps^2 + 1)`.
pub fn fano_profile(epsilon: f64, q: f64) -> f64 {
    let n = epsilon + q;
    n * n / (epsilon * epsilon + 1.0)
}

/// `|eps + qbar|^2 / (eps^2 + 1)` for a complex asymmetry parameter.
pub fn fano_complex_q(eps_eff: f64, qbar: ComplexQ) -> f64 {
    let re = eps_eff + qbar.q;
    (re * re + qbar.q_i * qbar.q_i) / (eps_eff * eps_eff + 1.0)
}

/// `(a0 + a1 eps + a2 eps^2) / (b0 + b1 eps + b2 eps^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalQuadratic {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl RationalQuadratic {
    pub fn new(a: [f64; 3], b: [f64; 3]) -> Self {
        Self {
            a0: a[0],
            a1: a[1],
            a2: a[2],
            b0: b[0],
            b1: b[1],
            b2: b[2],
        }
    }

    pub fn numerator(&self, eps: f64) -> f64 {
        self.a0 + eps * (self.a1 + eps * self.a2)
    }

    pub fn denominator(&self, eps: f64) -> f64 {
        self.b0 + eps * (self.b1 + eps * self.b2)
    }

    pub fn eval(&self, eps: f64) -> f64 {
        self.numerator(eps) / self.denominator(eps)
    }

    /// `b1^2 - 4 b0 b2`; negative when the denominator has no real roots.
    pub fn discriminant(&self) -> f64 {
        self.b1 * self.b1 - 4.0 * self.b0 * self.b2
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.discriminant();
        if self.b2 == 0.0 || !(d < 0.0) {
            return Err(FanoError::RealDenominatorRoots { discriminant: d });
        }
        Ok(())
    }
}

/// Shifted, rescaled form `c2 ((e' + q)^2 + D) / (K (e'^2 + 1))` with
/// `e' = (eps + delta) / sigma`.
///
/// `c1` and `c0` are kept so that the form can be evaluated even when the
/// quadratic numerator coefficient vanishes and `q`, `D` are undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineshapeDecomposition {
    pub delta: f64,
    pub sigma: f64,
    pub k_den: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    /// `None` when `a2 = 0` (no Fano part).
    pub q: Option<f64>,
    pub d: Option<f64>,
}

impl LineshapeDecomposition {
    pub fn is_pure_lorentzian(&self) -> bool {
        self.q.is_none()
    }

    pub fn eps_eff(&self, eps: f64) -> f64 {
        (eps + self.delta) / self.sigma
    }

    pub fn eval(&self, eps: f64) -> f64 {
        let e = self.eps_eff(eps);
        (self.c2 * e * e + self.c1 * e + self.c0) / (self.k_den * (e * e + 1.0))
    }

    /// `q + i sqrt(D)`, defined when `D >= 0`.
    pub fn complex_q(&self) -> Option<ComplexQ> {
        match (self.q, self.d) {
            (Some(q), Some(d)) if d >= 0.0 => Some(ComplexQ::new(q, d.sqrt())),
            _ => None,
        }
    }

    /// Weight of the Lorentzian part, `D / (q^2 + D)`.
    pub fn lorentzian_fraction(&self) -> Option<f64> {
        match (self.q, self.d) {
            (Some(q), Some(d)) => Some(d / (q * q + d)),
            _ => None,
        }
    }
}

pub fn decompose(rq: &RationalQuadratic) -> Result<LineshapeDecomposition> {
    rq.validate()?;
    let RationalQuadratic {
        a0,
        a1,
        a2,
        b0,
        b1,
        b2,
    } = *rq;
    let delta = b1 / (2.0 * b2);
    let sigma = (b0 / b2 - b1 * b1 / (4.0 * b2 * b2)).sqrt();
    let k_den = b0 - b1 * b1 / (4.0 * b2);
    let c2 = a2 * sigma * sigma;
    let c1 = a1 * sigma - 2.0 * a2 * sigma * delta;
    let c0 = a0 - a1 * delta + a2 * delta * delta;
    let (q, d) = if a2 == 0.0 {
        (None, None)
    } else {
        let q = c1 / (2.0 * c2);
        (Some(q), Some(c0 / c2 - q * q))
    };
    Ok(LineshapeDecomposition {
        delta,
        sigma,
        k_den,
        c2,
        c1,
        c0,
        q,
        d,
    })
}

/// Result of [`fit_rational_quadratic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalFit {
    pub rq: RationalQuadratic,
    /// `max |fit - y| / max |y|` over the fitted samples.
    pub max_rel_residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
}

impl RationalFit {
    /// Same residual measure as the fit, over arbitrary samples.
    pub fn residual_on(&self, samples: &[(f64, f64)]) -> f64 {
        max_rel_residual(&self.rq, samples)
    }
}

pub fn max_rel_residual(rq: &RationalQuadratic, samples: &[(f64, f64)]) -> f64 {
    let scale = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    let worst = samples
        .iter()
        .map(|(e, y)| (rq.eval(*e) - y).abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

const MAX_CONDITION: f64 = 1e13;

/// Linear least-squares fit of a ratio of quadratics with `b2 = 1`.
///
/// Solves `a0 + a1 e + a2 e^2 - y b0 - y b1 e = y e^2`. A poor fit is not an
/// error: inspect `max_rel_residual`.
pub fn fit_rational_quadratic(samples: &[(f64, f64)]) -> Result<RationalFit> {
    let mut eps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 6 {
        return Err(FanoError::TooFewSamples {
            needed: 6,
            got: eps.len(),
        });
    }
    if samples
        .iter()
        .any(|(e, y)| !(e.is_finite() && y.is_finite()))
    {
        return Err(FanoError::InvalidParameter {
            name: "samples",
            reason: "non-finite sample".into(),
        });
    }
    let n = samples.len();
    let mut a = DMatrix::<f64>::zeros(n, 5);
    let mut rhs = DVector::<f64>::zeros(n);
    for (r, (e, y)) in samples.iter().enumerate() {
        a[(r, 0)] = 1.0;
        a[(r, 1)] = *e;
        a[(r, 2)] = e * e;
        a[(r, 3)] = -y;
        a[(r, 4)] = -y * e;
        rhs[r] = y * e * e;
    }
    let mut scales = [0.0; 5];
    for (c, s) in scales.iter_mut().enumerate() {
        let norm = a.column(c).norm();
        *s = if norm > 0.0 { norm } else { 1.0 };
        a.column_mut(c).scale_mut(1.0 / *s);
    }
    let sv = a.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition < MAX_CONDITION) {
        return Err(FanoError::SingularFit { condition });
    }
    let x = least_squares(a, &rhs)?;
    let rq = RationalQuadratic {
        a0: x[0] / scales[0],
        a1: x[1] / scales[1],
        a2: x[2] / scales[2],
        b0: x[3] / scales[3],
        b1: x[4] / scales[4],
        b2: 1.0,
    };
    Ok(RationalFit {
        rq,
        max_rel_residual: max_rel_residual(&rq, samples),
        condition,
    })
}
