//! Command-line interface. Every energy and rate is in units of the
//! continuum-induced width `n pi V^2`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fano_core::lineshape::{decompose, RationalQuadratic};
use fano_core::oracle::DiscretizationSpec;
use fano_core::FanoParams;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::config::{linspace, parse_observable, ModelConfig};
use crate::error::{Error, Result};
use crate::output::{self, DecompositionSummary};
use crate::sweep;

#[derive(Debug, Parser)]
#[command(
    name = "fano",
    version,
    about = "Fano lineshapes of discrete states coupled to continua, with and without dissipation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ionization probability P(T) = 1 - |U_gg(T)|^2 of the unitary scattering problem.
    Scatter(ScatterArgs),
    /// Steady state of the dissipative single resonance, with a lineshape fit.
    Steady(SteadyArgs),
    /// Steady-state populations of a general model from a config file.
    General(GeneralArgs),
    /// Split a ratio of quadratics into Fano and Lorentzian parts.
    Decompose(DecomposeArgs),
    /// Compare the wideband solution with a discretized-continuum Lindblad solve.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Fano asymmetry parameter q = mu_e / (n pi mu_c V).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub q: f64,
    /// Reduced field coupling Omega = F mu_c / 2V.
    #[arg(long, default_value_t = 0.01)]
    pub omega: f64,
    /// Interaction times T, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,100,300")]
    pub t: Vec<f64>,
    /// Reduced detuning epsilon: `start:stop:points` or a comma list.
    #[arg(long, allow_hyphen_values = true, default_value = "-10:10:401")]
    pub eps: String,
    /// CSV destination (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Single-resonance parameters (epsilon is swept separately).
#[derive(Debug, Args)]
pub struct ResonanceArgs {
    /// Fano asymmetry parameter q = mu_e / (n pi mu_c V).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub q: f64,
    /// Reduced field coupling Omega = F mu_c / 2V.
    #[arg(long, default_value_t = 0.05)]
    pub omega: f64,
    /// Gamma_e: damping of the e-g coherence by e -> g decay (population rate 2 Gamma_e).
    #[arg(long, default_value_t = 0.1)]
    pub gamma_e: f64,
    /// Gamma_cg: population relaxation rate from the continuum to g.
    #[arg(long, alias = "gamma-c", default_value_t = 1.0)]
    pub gamma_cg: f64,
    /// Gamma_ce: population relaxation rate from the continuum to e (incoherent hopping; beta = Gamma_cg / (Gamma_cg + Gamma_ce)).
    #[arg(long, default_value_t = 0.0)]
    pub gamma_ce: f64,
    /// gamma_eg: pure dephasing rate of the e-g coherence.
    #[arg(long, default_value_t = 0.0)]
    pub gamma_eg: f64,
    /// gamma_kg: pure dephasing between continuum and g (no effect in the wideband limit).
    #[arg(long, default_value_t = 0.0)]
    pub gamma_kg: f64,
    /// gamma_ke: pure dephasing between continuum and e (no effect in the wideband limit).
    #[arg(long, default_value_t = 0.0)]
    pub gamma_ke: f64,
}

impl ResonanceArgs {
    pub fn params(&self, epsilon: f64) -> FanoParams {
        FanoParams::new(epsilon, self.q, self.omega)
            .with_gamma_e(self.gamma_e)
            .with_continuum_relaxation(self.gamma_cg, self.gamma_ce)
            .with_dephasing(self.gamma_eg)
            .with_continuum_dephasing(self.gamma_kg, self.gamma_ke)
    }
}

#[derive(Debug, Args)]
pub struct SteadyArgs {
    #[command(flatten)]
    pub resonance: ResonanceArgs,
    /// Reduced detuning epsilon: `start:stop:points` or a comma list.
    #[arg(long, allow_hyphen_values = true, default_value = "-10:10:201")]
    pub eps: String,
    /// continuum_pop (total continuum population), transport_rate (r = Gamma_c pop / rho_gg) or absorption.
    #[arg(long, default_value = "continuum_pop")]
    pub observable: String,
    /// CSV destination (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// JSON destination for the lineshape decomposition (default: stderr).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeneralArgs {
    /// Model file (TOML).
    pub config: PathBuf,
    /// CSV destination; overrides `run.output` (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Numerator a0,a1,a2 of (a0 + a1 eps + a2 eps^2) / (b0 + b1 eps + b2 eps^2).
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1,
        required_unless_present = "random"
    )]
    pub numerator: Option<Vec<f64>>,
    /// Denominator b0,b1,b2; must have no real roots.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1,
        required_unless_present = "random"
    )]
    pub denominator: Option<Vec<f64>>,
    /// Instead of decomposing one ratio, round-trip this many random valid ratios and report the worst residual.
    #[arg(long, conflicts_with_all = ["numerator", "denominator"])]
    pub random: Option<usize>,
    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Model file with a `run.oracle` section; without it the single resonance below is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub resonance: ResonanceArgs,
    /// Detunings epsilon (= omega_L) for the single resonance: `start:stop:points` or a comma list.
    #[arg(long, allow_hyphen_values = true, default_value = "-4:4:9")]
    pub eps: String,
    /// Ladder of `W:M_k` rungs (band width W, M_k states per continuum), comma separated.
    #[arg(long, default_value = "50:51,100:101,200:201")]
    pub ladder: String,
    /// Shift of the continuum grid as a fraction of its spacing W/(M_k - 1).
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    /// CSV destination; overrides `run.output` (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// `start:stop:points` or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Usage(format!("`{s}`: expected start:stop:points or a comma list"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            Ok(linspace(a, b, n))
        }
        [list] => list
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

pub fn parse_ladder(s: &str, offset: f64) -> Result<Vec<DiscretizationSpec>> {
    s.split(',')
        .map(|rung| {
            let (w, m) = rung
                .split_once(':')
                .ok_or_else(|| Error::Usage(format!("ladder rung `{rung}`: expected W:M_k")))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("ladder rung `{rung}`: bad W")))?;
            let m: usize = m
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("ladder rung `{rung}`: bad M_k")))?;
            Ok(DiscretizationSpec::new(w, m).with_offset(offset))
        })
        .collect()
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            Error::Io {
                path: p.to_owned(),
                source,
            }
        })?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = open_output(Some(p))?;
            serde_json::to_writer_pretty(&mut f, value)?;
            writeln!(f)?;
        }
        None => {
            let mut e = std::io::stderr().lock();
            serde_json::to_writer(&mut e, value)?;
            writeln!(e)?;
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scatter(a) => scatter(a),
        Command::Steady(a) => steady(a),
        Command::General(a) => general(a),
        Command::Decompose(a) => decompose_cmd(a),
        Command::Oracle(a) => oracle(a),
    }
}

fn scatter(a: ScatterArgs) -> Result<()> {
    let eps = parse_grid(&a.eps)?;
    let template = FanoParams::new(0.0, a.q, a.omega);
    template.validate()?;
    let rows = sweep::scatter(&template, &eps, &a.t);
    output::write_scatter(open_output(a.output.as_deref())?, &rows)?;
    for (t, f) in sweep::flatness_by_time(&rows, &a.t) {
        eprintln!("flatness max(P)/min(P) at T={t}: {f:.6e}");
    }
    Ok(())
}

fn steady(a: SteadyArgs) -> Result<()> {
    let eps = parse_grid(&a.eps)?;
    let observable = parse_observable(&a.observable)?;
    let template = a.resonance.params(0.0);
    template.validate()?;
    let s = sweep::steady(&template, &eps, observable)?;
    output::write_steady(open_output(a.output.as_deref())?, observable, &s.points)?;
    let summary = DecompositionSummary::from_fit(Some(observable), s.points.len(), &s.fit);
    if summary.flagged {
        log::warn!(
            "sweep is not a ratio of quadratics (residual {:?})",
            summary.residual
        );
    }
    write_json(a.summary.as_deref(), &summary)
}

fn general(a: GeneralArgs) -> Result<()> {
    let cfg = ModelConfig::load(&a.config)?;
    let model = cfg.to_model()?;
    let rows = sweep::general(&model, &cfg.field.omega_l.grid())?;
    let out = a.output.or_else(|| {
        cfg.run
            .as_ref()
            .and_then(|r| r.output.as_ref())
            .map(PathBuf::from)
    });
    output::write_general(open_output(out.as_deref())?, &rows)
}

#[derive(Serialize)]
struct RoundTrip {
    draws: usize,
    seed: u64,
    points_per_draw: usize,
    max_relative_residual: f64,
}

fn decompose_cmd(a: DecomposeArgs) -> Result<()> {
    if let Some(n) = a.random {
        let mut rng = StdRng::seed_from_u64(a.seed);
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            let num = [
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(0.01..10.0),
            ];
            let b2: f64 =
                rng.random_range(0.1..5.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let b1: f64 = rng.random_range(-5.0..5.0);
            let margin: f64 = rng.random_range(0.05..5.0);
            let rq = RationalQuadratic::new(
                num,
                [(b1 * b1 + 4.0 * margin * b2.abs()) / (4.0 * b2), b1, b2],
            );
            let dec = decompose(&rq)?;
            for _ in 0..100 {
                let e: f64 = rng.random_range(-50.0..50.0);
                let scale = (num[0].abs() + (num[1] * e).abs() + (num[2] * e * e).abs())
                    / rq.denominator(e).abs();
                worst = worst.max((dec.eval(e) - rq.eval(e)).abs() / scale);
            }
        }
        return write_json_stdout(&RoundTrip {
            draws: n,
            seed: a.seed,
            points_per_draw: 100,
            max_relative_residual: worst,
        });
    }
    let coeffs = |v: Option<Vec<f64>>, name: &str| -> Result<[f64; 3]> {
        let v = v.unwrap_or_default();
        <[f64; 3]>::try_from(v.as_slice())
            .map_err(|_| Error::Usage(format!("--{name} needs exactly 3 values")))
    };
    let rq = RationalQuadratic::new(
        coeffs(a.numerator, "numerator")?,
        coeffs(a.denominator, "denominator")?,
    );
    let dec = decompose(&rq)?;
    let fit = Ok(fano_core::liouville::FitSummary {
        rq,
        decomposition: Some(dec),
        residual: 0.0,
        condition: 1.0,
        flagged: false,
    });
    let mut summary = DecompositionSummary::from_fit(None, 0, &fit);
    summary.residual = None;
    summary.condition = None;
    write_json_stdout(&summary)
}

fn write_json_stdout<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct StudySummary {
    #[serde(rename = "omega_L")]
    omega_l: f64,
    fitted_order: Option<f64>,
    converged: bool,
}

fn oracle(a: OracleArgs) -> Result<()> {
    let (model, omegas, ladder, out) = match &a.config {
        Some(path) => {
            let cfg = ModelConfig::load(path)?;
            let o = cfg
                .run
                .as_ref()
                .and_then(|r| r.oracle.clone())
                .ok_or_else(|| {
                    Error::Config(format!("{}: missing [run.oracle]", path.display()))
                })?;
            let offset = o.grid_offset.unwrap_or(0.0);
            let ladder = o
                .ladder
                .iter()
                .map(|&(w, m)| DiscretizationSpec::new(w, m).with_offset(offset))
                .collect();
            let omegas = o
                .omega_l
                .clone()
                .unwrap_or_else(|| cfg.field.omega_l.grid());
            let out = a.output.clone().or_else(|| {
                cfg.run
                    .as_ref()
                    .and_then(|r| r.output.as_ref())
                    .map(PathBuf::from)
            });
            (cfg.to_model()?, omegas, ladder, out)
        }
        None => {
            let p = a.resonance.params(0.0);
            p.validate()?;
            let model = fano_core::general::models::two_level(&p);
            (
                model,
                parse_grid(&a.eps)?,
                parse_ladder(&a.ladder, a.offset)?,
                a.output.clone(),
            )
        }
    };
    let studies = sweep::oracle(&model, &omegas, &ladder)?;
    output::write_convergence(open_output(out.as_deref())?, &studies)?;
    let mut e = std::io::stderr().lock();
    for s in &studies {
        if !s.converged {
            log::warn!(
                "omega_L = {}: error does not decrease along the ladder",
                s.omega_l
            );
        }
        serde_json::to_writer(
            &mut e,
            &StudySummary {
                omega_l: s.omega_l,
                fitted_order: s.fitted_order,
                converged: s.converged,
            },
        )?;
        writeln!(e)?;
    }
    Ok(())
}
