//! CSV tables and JSON summaries.

use std::io::Write;

use fano_core::liouville::{FitSummary, Observable};
use fano_core::oracle::ConvergenceStudy;
use fano_core::scattering::IonizationPoint;
use fano_core::FanoError;
use serde::Serialize;

use crate::error::Result;
use crate::sweep::GeneralRow;

pub const UNITS_HEADER: &str = "# energies in nπV² units";

/// Seventeen significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn table<W: Write>(
    out: W,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = out;
    writeln!(out, "{UNITS_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn write_scatter<W: Write>(out: W, rows: &[IonizationPoint]) -> Result<()> {
    table(
        out,
        &strings(&["epsilon", "T", "P", "dP_dt"]),
        rows.iter()
            .map(|r| vec![num(r.epsilon), num(r.t), num(r.p), num(r.dp_dt)]),
    )
}

pub fn write_steady<W: Write>(out: W, observable: Observable, points: &[(f64, f64)]) -> Result<()> {
    table(
        out,
        &strings(&["epsilon", observable.name()]),
        points.iter().map(|(e, v)| vec![num(*e), num(*v)]),
    )
}

pub fn write_general<W: Write>(out: W, rows: &[GeneralRow]) -> Result<()> {
    let (n, m) = rows
        .first()
        .map_or((0, 0), |r| (r.populations.len(), r.continuum_pops.len()));
    let mut header = vec!["omega_L".to_string()];
    header.extend((0..n).map(|i| format!("rho_{i}{i}")));
    header.extend((0..m).map(|a| format!("continuum_{a}")));
    header.extend(strings(&[
        "continuum_total",
        "transport_rate",
        "absorption",
    ]));
    table(
        out,
        &header,
        rows.iter().map(|r| {
            let mut row = vec![num(r.omega_l)];
            row.extend(r.populations.iter().map(|x| num(*x)));
            row.extend(r.continuum_pops.iter().map(|x| num(*x)));
            row.extend([
                num(r.continuum_total),
                num(r.transport_rate),
                num(r.absorption),
            ]);
            row
        }),
    )
}

pub fn write_convergence<W: Write>(out: W, studies: &[ConvergenceStudy]) -> Result<()> {
    let header = strings(&[
        "omega_L",
        "W",
        "M_k",
        "dE",
        "analytic",
        "oracle",
        "abs_error",
        "rel_error",
        "residual",
        "min_eigenvalue",
    ]);
    table(
        out,
        &header,
        studies.iter().flat_map(|s| {
            s.rows.iter().map(move |r| {
                vec![
                    num(s.omega_l),
                    num(r.bandwidth),
                    r.levels_per_continuum.to_string(),
                    num(r.spacing),
                    num(r.analytic),
                    num(r.oracle),
                    num(r.abs_error),
                    num(r.rel_error),
                    num(r.residual),
                    num(r.min_eigenvalue),
                ]
            })
        }),
    )
}

/// JSON form of a lineshape fit: `F(eps) = (c2 e^2 + c1 e + c0) / (K (e^2 + 1))`,
/// `e = (eps + Delta) / sigma`, and `c2 ((e + q)^2 + D) / (K (e^2 + 1))` when `c2 != 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionSummary {
    pub observable: Option<String>,
    pub points: usize,
    #[serde(rename = "Delta")]
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub c2: Option<f64>,
    pub c1: Option<f64>,
    pub c0: Option<f64>,
    pub q: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub lorentzian_fraction: Option<f64>,
    pub numerator: Option<[f64; 3]>,
    pub denominator: Option<[f64; 3]>,
    /// `max |fit - y| / max |y|` over the sweep.
    pub residual: Option<f64>,
    pub condition: Option<f64>,
    pub flagged: bool,
    pub error: Option<String>,
}

impl DecompositionSummary {
    pub fn from_fit(
        observable: Option<Observable>,
        points: usize,
        fit: &std::result::Result<FitSummary, FanoError>,
    ) -> Self {
        let mut s = DecompositionSummary {
            observable: observable.map(|o| o.name().to_string()),
            points,
            delta: None,
            sigma: None,
            k: None,
            c2: None,
            c1: None,
            c0: None,
            q: None,
            d: None,
            lorentzian_fraction: None,
            numerator: None,
            denominator: None,
            residual: None,
            condition: None,
            flagged: false,
            error: None,
        };
        match fit {
            Ok(f) => {
                s.numerator = Some([f.rq.a0, f.rq.a1, f.rq.a2]);
                s.denominator = Some([f.rq.b0, f.rq.b1, f.rq.b2]);
                s.residual = Some(f.residual);
                s.condition = Some(f.condition);
                s.flagged = f.flagged;
                match f.decomposition {
                    Some(d) => {
                        s.delta = Some(d.delta);
                        s.sigma = Some(d.sigma);
                        s.k = Some(d.k_den);
                        s.c2 = Some(d.c2);
                        s.c1 = Some(d.c1);
                        s.c0 = Some(d.c0);
                        s.q = d.q;
                        s.d = d.d;
                        s.lorentzian_fraction = d.lorentzian_fraction();
                    }
                    None => s.error = Some("fitted denominator has real roots".into()),
                }
            }
            Err(e) => s.error = Some(e.to_string()),
        }
        s
    }
}
