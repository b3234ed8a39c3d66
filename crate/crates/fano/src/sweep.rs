//! Parallel sweeps. Every function returns rows in grid order.

use fano_core::general::{absorption, build_general, general_steady_state};
use fano_core::liouville::{fit_summary, observe, FitSummary, Observable};
use fano_core::oracle::{
    analytic_continuum_population, convergence_from_rows, convergence_row, ConvergenceStudy,
    DiscretizationSpec,
};
use fano_core::scattering::{flatness, ionization_point, IonizationPoint};
use fano_core::{FanoError, FanoParams, GeneralModel};
use rayon::prelude::*;

use crate::error::Result;

/// Time-major: every epsilon for `times[0]`, then `times[1]`, ...
pub fn scatter(template: &FanoParams, epsilons: &[f64], times: &[f64]) -> Vec<IonizationPoint> {
    let grid: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|&t| epsilons.iter().map(move |&e| (t, e)))
        .collect();
    grid.par_iter()
        .map(|&(t, e)| ionization_point(template, e, t))
        .collect()
}

/// `max/min` of `P` at each time.
pub fn flatness_by_time(rows: &[IonizationPoint], times: &[f64]) -> Vec<(f64, f64)> {
    times
        .iter()
        .map(|&t| {
            let p: Vec<f64> = rows.iter().filter(|r| r.t == t).map(|r| r.p).collect();
            (t, flatness(&p))
        })
        .collect()
}

pub struct SteadySweep {
    pub points: Vec<(f64, f64)>,
    pub fit: std::result::Result<FitSummary, FanoError>,
}

pub fn steady(
    template: &FanoParams,
    epsilons: &[f64],
    observable: Observable,
) -> Result<SteadySweep> {
    let points = epsilons
        .par_iter()
        .map(|&e| observe(&template.with_epsilon(e), observable).map(|v| (e, v)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let fit = fit_summary(&points);
    Ok(SteadySweep { points, fit })
}

/// One laser frequency of a general-model sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralRow {
    pub omega_l: f64,
    pub populations: Vec<f64>,
    pub continuum_pops: Vec<f64>,
    pub continuum_total: f64,
    pub transport_rate: f64,
    pub absorption: f64,
}

pub fn general(model: &GeneralModel, omegas: &[f64]) -> Result<Vec<GeneralRow>> {
    let rows = omegas
        .par_iter()
        .map(|&w| {
            let gel = build_general(model, w)?;
            let rho = general_steady_state(&gel)?;
            let transport_rate =
                fano_core::oracle::transport_rate_of(model, &rho).unwrap_or(f64::NAN);
            Ok(GeneralRow {
                omega_l: w,
                populations: (0..model.n_levels()).map(|i| rho.population(i)).collect(),
                continuum_total: rho.continuum_total(),
                absorption: absorption(&gel, &rho),
                transport_rate,
                continuum_pops: rho.continuum_pops,
            })
        })
        .collect::<std::result::Result<Vec<_>, FanoError>>()?;
    Ok(rows)
}

/// Convergence study at each laser frequency; rungs run in parallel.
pub fn oracle(
    model: &GeneralModel,
    omegas: &[f64],
    ladder: &[DiscretizationSpec],
) -> Result<Vec<ConvergenceStudy>> {
    if ladder.len() < 3 {
        return Err(FanoError::TooFewSamples {
            needed: 3,
            got: ladder.len(),
        }
        .into());
    }
    let analytic = omegas
        .iter()
        .map(|&w| analytic_continuum_population(model, w))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..omegas.len())
        .flat_map(|i| (0..ladder.len()).map(move |k| (i, k)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, k)| convergence_row(model, &ladder[k], omegas[i], analytic[i]))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(rows
        .chunks(ladder.len())
        .zip(omegas)
        .map(|(chunk, &w)| convergence_from_rows(w, chunk.to_vec()))
        .collect())
}
