//! Effective Liouvillian for N discrete levels coupled to M structureless
//! continua, with Markovian channels inside the discrete manifold.
//!
//! Liouville vectors are column stacked: `rho_ij` sits at `i + N j`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{FanoError, Result};
use crate::linalg::{
    add_dephasing, add_jump, check_unique_kernel, hamiltonian_superop, least_squares,
    real_representation, real_to_hermitian, singular_values, vec_index,
};
use crate::types::{validate_model, DensityMatrixP, GeneralModel};
use crate::C64;
#[cfg(not(feature = "std"))]
use nalgebra::ComplexField as _;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralEffectiveLiouvillian {
    pub model: GeneralModel,
    pub omega_l: f64,
    /// Rotating-frame discrete Hamiltonian (`E_i - photon_index * omega_L` on
    /// the diagonal, dipole couplings off it).
    pub h0: DMatrix<C64>,
    /// `H0 - i sum_a n_a pi V^a V^a^T`.
    pub heff: DMatrix<C64>,
    pub l_d: DMatrix<C64>,
    pub ltilde: DMatrix<C64>,
    /// Per continuum: `C^a[i + N j] = 2 pi n_a V_i V_j / sum_l Gamma_l^a`.
    pub c_coeffs: Vec<DVector<f64>>,
    pub l_eff: DMatrix<C64>,
}

impl GeneralEffectiveLiouvillian {
    pub fn n_levels(&self) -> usize {
        self.h0.nrows()
    }

    /// `L_eff` applied to a density matrix.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.n_levels();
        let v = DVector::from_column_slice(rho.as_slice());
        DMatrix::from_column_slice(n, n, (&self.l_eff * v).as_slice())
    }

    pub fn continuum_populations(&self, rho: &DMatrix<C64>) -> Vec<f64> {
        self.c_coeffs
            .iter()
            .map(|c| c.iter().zip(rho.iter()).map(|(w, z)| w * z.re).sum())
            .collect()
    }
}

/// Rotating-frame Hamiltonian of the discrete levels.
pub fn rotating_frame_h0(model: &GeneralModel, omega_l: f64) -> DMatrix<C64> {
    let mut h0 = model.dipoles.clone();
    for (i, l) in model.levels.iter().enumerate() {
        h0[(i, i)] = C64::from(l.energy - l.photon_index as f64 * omega_l);
    }
    h0
}

pub fn build_general(model: &GeneralModel, omega_l: f64) -> Result<GeneralEffectiveLiouvillian> {
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(FanoError::InvalidModel(violations));
    }
    if !model.continuum_dephasings.is_empty() {
        log::info!(
            "continuum-discrete pure dephasing has no effect in the wideband limit; ignored"
        );
    }
    let n = model.n_levels();
    let d = n * n;
    let h0 = rotating_frame_h0(model, omega_l);
    let mut heff = h0.clone();
    let mut ltilde = DMatrix::<C64>::zeros(d, d);
    let mut c_coeffs = Vec::with_capacity(model.n_continua());
    for c in &model.continua {
        let total = c.total_relaxation();
        let npi = c.density * core::f64::consts::PI;
        let mut coeff = DVector::<f64>::zeros(d);
        for i in 0..n {
            for j in 0..n {
                let flux = npi * c.couplings[i] * c.couplings[j];
                heff[(i, j)] -= I * flux;
                coeff[vec_index(i, j, n)] = 2.0 * flux / total;
                for (b, g) in c.relax_rates.iter().enumerate() {
                    if *g != 0.0 {
                        ltilde[(vec_index(b, b, n), vec_index(i, j, n))] +=
                            C64::from(2.0 * g / total * flux);
                    }
                }
            }
        }
        c_coeffs.push(coeff);
    }
    let mut l_d = DMatrix::<C64>::zeros(d, d);
    for j in &model.jumps {
        add_jump(&mut l_d, n, j.from, j.to, j.rate);
    }
    for p in &model.dephasings {
        add_dephasing(&mut l_d, n, p.i, p.j, p.rate);
    }
    let l_eff = hamiltonian_superop(&heff) + &ltilde + &l_d;
    Ok(GeneralEffectiveLiouvillian {
        model: model.clone(),
        omega_l,
        h0,
        heff,
        l_d,
        ltilde,
        c_coeffs,
        l_eff,
    })
}

/// Unique normalized kernel of `L_eff`, solved in the real parameterization
/// of Hermitian matrices with the normalization row appended.
pub fn general_steady_state(gel: &GeneralEffectiveLiouvillian) -> Result<DensityMatrixP> {
    let n = gel.n_levels();
    let d = n * n;
    let r = real_representation(&gel.l_eff, n);
    check_unique_kernel(&singular_values(&r))?;

    // Normalization functional in real coordinates: trace + sum_a C^a . rho.
    let mut norm_row = alloc::vec![0.0; d];
    let mut e = alloc::vec![0.0; d];
    for (k, slot) in norm_row.iter_mut().enumerate() {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[k] = 1.0;
        let b = real_to_hermitian(&e, n);
        let trace: f64 = (0..n).map(|i| b[(i, i)].re).sum();
        let cont: f64 = gel.continuum_populations(&b).iter().sum();
        *slot = trace + cont;
    }

    // Scale the constraint row to the generator's magnitude.
    let scale = r.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let mut a = DMatrix::<f64>::zeros(d + 1, d);
    a.view_mut((0, 0), (d, d)).copy_from(&r);
    for (k, x) in norm_row.iter().enumerate() {
        a[(d, k)] = x * scale;
    }
    let mut rhs = DVector::<f64>::zeros(d + 1);
    rhs[d] = scale;
    let x = least_squares(a, &rhs)?;
    let rho = real_to_hermitian(x.as_slice(), n);
    let continuum_pops = gel.continuum_populations(&rho);
    Ok(DensityMatrixP {
        rho,
        continuum_pops,
    })
}

/// `int dk_a rho_{k_a l} = -i pi n_a sum_j V_j^a rho_jl`, one vector over `l`
/// per continuum.
pub fn continuum_coherences(
    gel: &GeneralEffectiveLiouvillian,
    rho: &DensityMatrixP,
) -> Vec<DVector<C64>> {
    let n = gel.n_levels();
    gel.model
        .continua
        .iter()
        .map(|c| {
            let npi = c.density * core::f64::consts::PI;
            DVector::from_fn(n, |l, _| {
                let s: C64 = (0..n).map(|j| rho.rho[(j, l)] * c.couplings[j]).sum();
                -I * npi * s
            })
        })
        .collect()
}

/// Photon absorption rate out of the ground manifold (photon index 0):
/// `-2 Im sum_g [sum_j H0_gj rho_jg + sum_a V_g^a int dk_a rho_{k_a g}]`.
pub fn absorption(gel: &GeneralEffectiveLiouvillian, rho: &DensityMatrixP) -> f64 {
    let n = gel.n_levels();
    let coh = continuum_coherences(gel, rho);
    let mut total = C64::from(0.0);
    for (g, level) in gel.model.levels.iter().enumerate() {
        if level.photon_index != 0 {
            continue;
        }
        for j in 0..n {
            total += gel.h0[(g, j)] * rho.rho[(j, g)];
        }
        for (c, k) in gel.model.continua.iter().zip(&coh) {
            total += c.couplings[g] * k[g];
        }
    }
    -2.0 * total.im
}

/// Ready-made models, in units of the e-continuum width.
pub mod models {
    use super::*;
    use crate::types::{Continuum, ContinuumDephasing, Dephasing, FanoParams, Jump, Level};
    use alloc::vec;

    const INV_PI: f64 = core::f64::consts::FRAC_1_PI;

    fn symmetric_dipoles(n: usize, entries: &[(usize, usize, f64)]) -> DMatrix<C64> {
        let mut m = DMatrix::<C64>::zeros(n, n);
        for &(i, j, v) in entries {
            m[(i, j)] = C64::from(v);
            m[(j, i)] = C64::from(v);
        }
        m
    }

    /// Single resonance: levels `{g, e}`, one continuum with `V = (Omega, 1)`
    /// and `n = 1/pi`. Use with `omega_L = eps`.
    pub fn two_level(p: &FanoParams) -> GeneralModel {
        let mut jumps = Vec::new();
        if p.gamma_e != 0.0 {
            jumps.push(Jump {
                from: 1,
                to: 0,
                rate: 2.0 * p.gamma_e,
            });
        }
        let mut dephasings = Vec::new();
        if p.gamma_eg != 0.0 {
            dephasings.push(Dephasing {
                i: 0,
                j: 1,
                rate: p.gamma_eg,
            });
        }
        let mut continuum_dephasings = Vec::new();
        for (level, rate) in [(0, p.gamma_kg), (1, p.gamma_ke)] {
            if rate != 0.0 {
                continuum_dephasings.push(ContinuumDephasing {
                    continuum: 0,
                    level,
                    rate,
                });
            }
        }
        GeneralModel {
            levels: vec![
                Level {
                    energy: 0.0,
                    photon_index: 0,
                },
                Level {
                    energy: 0.0,
                    photon_index: 1,
                },
            ],
            dipoles: symmetric_dipoles(2, &[(0, 1, p.omega * p.q)]),
            continua: vec![Continuum::new(
                INV_PI,
                vec![p.omega, 1.0],
                vec![p.gamma_cg, p.gamma_ce],
            )],
            jumps,
            dephasings,
            continuum_dephasings,
        }
    }

    /// Ground state and two excited levels sharing one continuum with
    /// `V = (Omega, 1, 1/beta)`; `delta` is the splitting of the excited
    /// levels. Use with `omega_L = eps`.
    pub fn three_level(
        q1: f64,
        q2: f64,
        omega: f64,
        beta: f64,
        delta: f64,
        gamma_c: f64,
    ) -> GeneralModel {
        GeneralModel {
            levels: vec![
                Level {
                    energy: 0.0,
                    photon_index: 0,
                },
                Level {
                    energy: 0.0,
                    photon_index: 1,
                },
                Level {
                    energy: delta,
                    photon_index: 1,
                },
            ],
            dipoles: symmetric_dipoles(3, &[(0, 1, q1 * omega), (0, 2, q2 * omega / beta)]),
            continua: vec![Continuum::new(
                INV_PI,
                vec![omega, 1.0, 1.0 / beta],
                vec![gamma_c, 0.0, 0.0],
            )],
            jumps: vec![],
            dephasings: vec![],
            continuum_dephasings: vec![],
        }
    }

    /// One excited level coupled to two continua with weights `gamma_sq`
    /// (summing to 1), reduced couplings `omegas` and relaxation rates
    /// `gamma_c` back to the ground state. Use with `omega_L = eps`.
    pub fn two_continua(
        q: f64,
        omegas: [f64; 2],
        gamma_sq: [f64; 2],
        gamma_c: [f64; 2],
    ) -> GeneralModel {
        let continua = (0..2)
            .map(|a| {
                let g = gamma_sq[a].sqrt();
                Continuum::new(INV_PI, vec![g * omegas[a], g], vec![gamma_c[a], 0.0])
            })
            .collect();
        GeneralModel {
            levels: vec![
                Level {
                    energy: 0.0,
                    photon_index: 0,
                },
                Level {
                    energy: 0.0,
                    photon_index: 1,
                },
            ],
            dipoles: symmetric_dipoles(2, &[(0, 1, q)]),
            continua,
            jumps: vec![],
            dephasings: vec![],
            continuum_dephasings: vec![],
        }
    }

    /// Three levels at `0, 10, 20` and two continua A, B; sweep `omega_L`
    /// over roughly `[0, 30]`.
    pub fn fig5() -> GeneralModel {
        GeneralModel {
            levels: vec![
                Level {
                    energy: 0.0,
                    photon_index: 0,
                },
                Level {
                    energy: 10.0,
                    photon_index: 1,
                },
                Level {
                    energy: 20.0,
                    photon_index: 1,
                },
            ],
            dipoles: symmetric_dipoles(3, &[(0, 1, 0.3), (0, 2, 0.4)]),
            continua: vec![
                Continuum::new(1.0, vec![0.05, 0.1, 0.2], vec![0.5, 0.0, 0.0]),
                Continuum::new(1.0, vec![0.1, 0.3, 0.02], vec![0.7, 0.0, 0.0]),
            ],
            jumps: vec![
                Jump {
                    from: 2,
                    to: 0,
                    rate: 0.05,
                },
                Jump {
                    from: 1,
                    to: 0,
                    rate: 0.04,
                },
            ],
            dephasings: vec![],
            continuum_dephasings: vec![],
        }
    }
}
