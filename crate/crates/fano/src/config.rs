//! Strict TOML model files.
//!
//! ```toml
//! [units]
//! energy = "n pi V^2"
//!
//! [[levels]]
//! energy = 0.0
//! photon_index = 0
//!
//! [[dipoles]]
//! i = 0
//! j = 1
//! value = 0.3          # or [re, im]
//!
//! [[continua]]
//! density = 1.0
//! couplings = [0.05, 0.1, 0.2]
//! relax_rates = [0.5, 0.0, 0.0]
//!
//! [dissipators]
//! jumps = [{ from = 1, to = 0, rate = 0.04 }]
//!
//! [field]
//! omega = 1.0
//! omega_l = { start = 0.0, stop = 30.0, points = 601 }
//!
//! [run]
//! observable = "continuum_pop"
//! output = "fig5.csv"
//! ```
//!
//! The field strength (`omega`, or `f`, `mu_c`, `v` with `omega = f mu_c / 2v`)
//! multiplies every dipole and the continuum couplings of ground-manifold
//! levels (`photon_index = 0`).

use std::path::Path;

use fano_core::liouville::Observable;
use fano_core::{Continuum, ContinuumDephasing, Dephasing, GeneralModel, Jump, Level, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<UnitsConfig>,
    pub levels: Vec<LevelConfig>,
    #[serde(default)]
    pub dipoles: Vec<DipoleConfig>,
    pub continua: Vec<ContinuumConfig>,
    #[serde(default)]
    pub dissipators: DissipatorConfig,
    pub field: FieldConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    /// Name of the reference width every energy and rate is measured in.
    pub energy: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelConfig {
    pub energy: f64,
    pub photon_index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex([f64; 2]),
}

impl Value {
    fn to_c64(self) -> C64 {
        match self {
            Value::Real(x) => C64::new(x, 0.0),
            Value::Complex([re, im]) => C64::new(re, im),
        }
    }

    fn from_c64(z: C64) -> Self {
        if z.im == 0.0 {
            Value::Real(z.re)
        } else {
            Value::Complex([z.re, z.im])
        }
    }
}

/// `value` is `<i|mu|j>`; the `(j, i)` entry is its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleConfig {
    pub i: usize,
    pub j: usize,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumConfig {
    pub density: f64,
    pub couplings: Vec<f64>,
    pub relax_rates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_rates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipatorConfig {
    #[serde(default)]
    pub jumps: Vec<JumpConfig>,
    #[serde(default)]
    pub dephasings: Vec<DephasingConfig>,
    #[serde(default)]
    pub continuum_dephasings: Vec<ContinuumDephasingConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingConfig {
    pub i: usize,
    pub j: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumDephasingConfig {
    pub continuum: usize,
    pub level: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    pub omega_l: SweepConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.points)
    }
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// `[bandwidth, levels_per_continuum]` rungs, at least three.
    pub ladder: Vec<(f64, usize)>,
    /// Laser frequencies to study; defaults to the field sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_l: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_offset: Option<f64>,
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let cfg = Self::from_toml(&text).map_err(|e| Error::Parse {
            path: path.to_owned(),
            source: Box::new(e),
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model configs always serialize")
    }

    /// Checks that cannot be expressed in the schema.
    pub fn check(&self) -> Result<()> {
        self.field_strength()?;
        if self.field.omega_l.points == 0 {
            return Err(Error::Config("field.omega_l.points must be >= 1".into()));
        }
        if let Some(obs) = self.run.as_ref().and_then(|r| r.observable.as_deref()) {
            parse_observable(obs).map_err(|e| Error::Config(format!("run.observable: {e}")))?;
        }
        if let Some(o) = self.run.as_ref().and_then(|r| r.oracle.as_ref()) {
            if o.ladder.len() < 3 {
                return Err(Error::Config(format!(
                    "run.oracle.ladder needs at least 3 rungs, got {}",
                    o.ladder.len()
                )));
            }
        }
        Ok(())
    }

    /// Reduced field coupling `Omega`.
    pub fn field_strength(&self) -> Result<f64> {
        let f = &self.field;
        match (f.omega, f.f, f.mu_c, f.v) {
            (Some(w), None, None, None) => Ok(w),
            (None, None, None, None) => Ok(1.0),
            (None, Some(amp), Some(mu), Some(v)) if v != 0.0 => Ok(amp * mu / (2.0 * v)),
            (None, Some(_), Some(_), Some(_)) => {
                Err(Error::Config("field.v must be nonzero".into()))
            }
            _ => Err(Error::Config(
                "field: give either `omega` or all of `f`, `mu_c`, `v`".into(),
            )),
        }
    }

    pub fn observable(&self) -> Result<Observable> {
        match self.run.as_ref().and_then(|r| r.observable.as_deref()) {
            Some(s) => parse_observable(s),
            None => Ok(Observable::ContinuumPop),
        }
    }

    pub fn to_model(&self) -> Result<GeneralModel> {
        let w = self.field_strength()?;
        let n = self.levels.len();
        let levels: Vec<Level> = self
            .levels
            .iter()
            .map(|l| Level {
                energy: l.energy,
                photon_index: l.photon_index,
            })
            .collect();
        let mut dipoles = DMatrix::<C64>::zeros(n, n);
        let mut seen = DMatrix::<bool>::from_element(n, n, false);
        for d in &self.dipoles {
            if d.i >= n || d.j >= n {
                return Err(Error::Config(format!(
                    "dipole ({}, {}): level index out of range",
                    d.i, d.j
                )));
            }
            if seen[(d.i, d.j)] {
                return Err(Error::Config(format!(
                    "dipole ({}, {}) given twice",
                    d.i, d.j
                )));
            }
            seen[(d.i, d.j)] = true;
            seen[(d.j, d.i)] = true;
            let z = d.value.to_c64() * w;
            dipoles[(d.i, d.j)] = z;
            dipoles[(d.j, d.i)] = z.conj();
        }
        let continua = self
            .continua
            .iter()
            .map(|c| {
                let couplings = c
                    .couplings
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        if levels.get(i).is_some_and(|l| l.photon_index == 0) {
                            v * w
                        } else {
                            *v
                        }
                    })
                    .collect();
                let mut out = Continuum::new(c.density, couplings, c.relax_rates.clone());
                if let Some(p) = &c.pump_rates {
                    out.pump_rates = p.clone();
                }
                out
            })
            .collect();
        let d = &self.dissipators;
        let model = GeneralModel {
            levels,
            dipoles,
            continua,
            jumps: d
                .jumps
                .iter()
                .map(|j| Jump {
                    from: j.from,
                    to: j.to,
                    rate: j.rate,
                })
                .collect(),
            dephasings: d
                .dephasings
                .iter()
                .map(|x| Dephasing {
                    i: x.i,
                    j: x.j,
                    rate: x.rate,
                })
                .collect(),
            continuum_dephasings: d
                .continuum_dephasings
                .iter()
                .map(|x| ContinuumDephasing {
                    continuum: x.continuum,
                    level: x.level,
                    rate: x.rate,
                })
                .collect(),
        };
        Ok(model.validated()?)
    }

    /// Config describing `model` exactly (unit field strength), with the given sweep.
    pub fn from_model(model: &GeneralModel, omega_l: SweepConfig) -> Self {
        let n = model.n_levels();
        let mut dipoles = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let z = model.dipoles[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    dipoles.push(DipoleConfig {
                        i,
                        j,
                        value: Value::from_c64(z),
                    });
                }
            }
        }
        ModelConfig {
            units: Some(UnitsConfig {
                energy: "n pi V^2".into(),
            }),
            levels: model
                .levels
                .iter()
                .map(|l| LevelConfig {
                    energy: l.energy,
                    photon_index: l.photon_index,
                })
                .collect(),
            dipoles,
            continua: model
                .continua
                .iter()
                .map(|c| ContinuumConfig {
                    density: c.density,
                    couplings: c.couplings.clone(),
                    relax_rates: c.relax_rates.clone(),
                    pump_rates: c
                        .pump_rates
                        .iter()
                        .any(|p| *p != 0.0)
                        .then(|| c.pump_rates.clone()),
                })
                .collect(),
            dissipators: DissipatorConfig {
                jumps: model
                    .jumps
                    .iter()
                    .map(|j| JumpConfig {
                        from: j.from,
                        to: j.to,
                        rate: j.rate,
                    })
                    .collect(),
                dephasings: model
                    .dephasings
                    .iter()
                    .map(|d| DephasingConfig {
                        i: d.i,
                        j: d.j,
                        rate: d.rate,
                    })
                    .collect(),
                continuum_dephasings: model
                    .continuum_dephasings
                    .iter()
                    .map(|d| ContinuumDephasingConfig {
                        continuum: d.continuum,
                        level: d.level,
                        rate: d.rate,
                    })
                    .collect(),
            },
            field: FieldConfig {
                omega: None,
                f: None,
                mu_c: None,
                v: None,
                omega_l,
            },
            run: None,
        }
    }
}

pub fn parse_observable(s: &str) -> Result<Observable> {
    Observable::parse(s).ok_or_else(|| {
        Error::Usage(format!(
            "unknown observable `{s}` (expected continuum_pop, transport_rate or absorption)"
        ))
    })
}
