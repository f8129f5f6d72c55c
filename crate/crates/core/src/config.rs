//! Run configuration: strict TOML/JSON parsing with unit-aware quantities.
//!
//! Bare numbers take each key's default unit: GHz (ordinary frequency,
//! converted to rad/s), ns, μm, cm⁻³ and K unless documented otherwise
//! below. Unknown keys are rejected and every error names the offending
//! key path, e.g. `pulse.tau`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::atomdata::SpeciesConstants;
use crate::constants::{ATOMIC_MASS_UNIT, EA0};
use crate::propagation::{
    GasConfig, InteractionForm, Level, NumericsConfig, PhysicsOptions, PulseShape, PulseSpec, Scenario,
};
use crate::units::{Dimension, Quantity};
use crate::{Error, Result};

const GHZ: f64 = 2.0 * PI * 1e9;
const PER_NS: f64 = 1e9;
const NS: f64 = 1e-9;
const US: f64 = 1e-6;
const UM: f64 = 1e-6;
const NM: f64 = 1e-9;
const PER_CM3: f64 = 1e6;
const GHZ_UM6: f64 = GHZ * 1e-36;

/// Default gate–source separation of the steady-state probe, m.
pub const DEFAULT_GATE_SEPARATION: f64 = 3e-6;
/// Default steady-state probe Rabi frequency, rad/s (2π·10 kHz).
pub const DEFAULT_PROBE_RABI: f64 = 2.0 * PI * 1e4;

// ---------------------------------------------------------------- raw form

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub species: Option<SpeciesSpec>,
    pub gas: Option<RawGas>,
    pub pulse: Option<RawPulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<RawNumerics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physics: Option<RawPhysics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RawRun>,
}

/// `species = "Cs"` or a table with an optional `preset` and overrides.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum SpeciesSpec {
    Preset(String),
    Table(RawSpecies),
}

impl<'de> Deserialize<'de> for SpeciesSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = SpeciesSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a species preset name or a species table")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<SpeciesSpec, E> {
                Ok(SpeciesSpec::Preset(v.to_string()))
            }
            fn visit_map<A: MapAccess<'de>>(self, map: A) -> std::result::Result<SpeciesSpec, A::Error> {
                RawSpecies::deserialize(de::value::MapAccessDeserializer::new(map)).map(SpeciesSpec::Table)
            }
        }
        d.deserialize_any(V)
    }
}

macro_rules! opt_fields {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $f:ident : $t:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $($(#[$fm])* #[serde(default, skip_serializing_if = "Option::is_none")] pub $f: Option<$t>,)*
        }
    };
}

opt_fields!(
    /// Species overrides. Defaults: mass in u, wavelength in nm, C₆ in
    /// GHz·μm⁶, dipole in e·a₀, lifetime in μs, table keys are n.
    RawSpecies {
        preset: String,
        name: String,
        mass: Quantity,
        scattering_length: f64,
        quantum_defect_p: f64,
        wavelength: Quantity,
        n_ref: u32,
        c6_ref: Quantity,
        dipole_ref: Quantity,
        lifetime_ref: Quantity,
        lifetime_table: BTreeMap<String, Quantity>,
        dipole_table: BTreeMap<String, Quantity>,
    }
);

opt_fields!(RawGas {
    n: u32,
    temperature: Quantity,
    density: Quantity,
    length: Quantity,
});

opt_fields!(
    /// Give either `omega_s` (GHz) or `area` (rad); the default area is 2π.
    RawPulse {
        shape: PulseShape,
        tau: Quantity,
        t0: Quantity,
        omega_s: Quantity,
        area: Quantity,
    }
);

opt_fields!(RawNumerics {
    n_z: usize,
    n_v: usize,
    dt: Quantity,
    dt_out: Quantity,
    window: Quantity,
    march_steps: usize,
    max_stored: usize,
});

opt_fields!(
    /// `u_override` in GHz (angular conversion), `gamma_override` in 1/ns.
    RawPhysics {
        doppler: bool,
        collisions: bool,
        interaction: bool,
        spontaneous_decay: bool,
        interaction_form: InteractionForm,
        u_override: Quantity,
        gamma_override: Quantity,
    }
);

opt_fields!(RawRange {
    min: Quantity,
    max: Quantity,
    points: usize,
});

opt_fields!(RawRegime {
    density: RawRange,
    temperature: RawRange,
    omega_s: Quantity,
});

opt_fields!(
    /// `omega` in GHz; `gate_separation` in μm; `c6_gate` in GHz·μm⁶;
    /// `v_d` (GHz) overrides the gate geometry.
    RawSteady {
        temperature: RawRange,
        omega: Quantity,
        gate_separation: Quantity,
        c6_gate: Quantity,
        v_d: Quantity,
    }
);

opt_fields!(RawCrossSection {
    n_min: u32,
    n_max: u32,
    temperatures: Vec<Quantity>,
});

opt_fields!(RawTransient {
    t_end: Quantity,
    sample_every: usize,
    temperatures: Vec<Quantity>,
});

opt_fields!(
    /// `theta_grid` in rad (`"0.35 pi"` also accepted).
    RawRun {
        out_dir: String,
        workers: usize,
        level: Level,
        solver: Solver,
        dump_field: bool,
        theta_grid: Vec<Quantity>,
        regime: RawRegime,
        steady: RawSteady,
        cross_section: RawCrossSection,
        transient: RawTransient,
    }
);

// ----------------------------------------------------------- resolved form

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Chebyshev collocation in z, RK4 in retarded time.
    #[default]
    Spectral,
    /// RK4 marching in z over the retarded-time series.
    Marching,
}

/// Inclusive range of `points` values, linear or logarithmic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Range {
    pub fn linear(&self) -> Vec<f64> {
        spaced(self, |x| x, |x| x)
    }

    pub fn logarithmic(&self) -> Vec<f64> {
        spaced(self, f64::ln, f64::exp)
    }
}

fn spaced(r: &Range, to: fn(f64) -> f64, from: fn(f64) -> f64) -> Vec<f64> {
    if r.points == 1 {
        return vec![r.min];
    }
    let (a, b) = (to(r.min), to(r.max));
    (0..r.points)
        .map(|i| match i {
            0 => r.min,
            _ if i + 1 == r.points => r.max,
            _ => from(a + (b - a) * i as f64 / (r.points - 1) as f64),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeSettings {
    /// m⁻³, log-spaced.
    pub density: Range,
    /// K, log-spaced.
    pub temperature: Range,
    /// Rabi frequency entering u, rad/s.
    pub omega_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadySettings {
    /// K, log-spaced.
    pub temperature: Range,
    /// rad/s
    pub omega: f64,
    /// m
    pub gate_separation: f64,
    /// rad/s · m⁶
    pub c6_gate: f64,
    /// Explicit V_d, rad/s.
    pub v_d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSectionSettings {
    pub n_min: u32,
    pub n_max: u32,
    /// K
    pub temperatures: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransientSettings {
    /// s
    pub t_end: f64,
    pub sample_every: usize,
    /// K; defaults to the gas temperature.
    pub temperatures: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub out_dir: Option<PathBuf>,
    /// 0 selects the available parallelism.
    pub workers: usize,
    pub level: Level,
    pub solver: Solver,
    pub dump_field: bool,
    /// rad
    pub theta_grid: Vec<f64>,
    pub regime: RegimeSettings,
    pub steady: SteadySettings,
    pub cross_section: CrossSectionSettings,
    pub transient: TransientSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub run: RunSettings,
}

// ---------------------------------------------------------------- parsing

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

/// Parse a `.toml` or `.json` file (by extension; TOML otherwise).
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Toml,
    };
    parse_config_str(&text, format)
}

pub fn parse_config_str(text: &str, format: Format) -> Result<RunConfig> {
    resolve(&parse_raw(text, format)?)
}

pub fn parse_raw(text: &str, format: Format) -> Result<RawConfig> {
    match format {
        Format::Toml => {
            let de = toml::Deserializer::new(text);
            serde_path_to_error::deserialize(de).map_err(|e| {
                let path = e.path().to_string();
                let inner = e.into_inner();
                Error::config(path, inner.message().to_string())
            })
        }
        Format::Json => {
            let mut de = serde_json::Deserializer::from_str(text);
            serde_path_to_error::deserialize(&mut de).map_err(|e| {
                let path = e.path().to_string();
                Error::config(path, e.into_inner().to_string())
            })
        }
    }
}

fn quantity(path: &str, q: &Option<Quantity>, dim: Dimension, default_factor: f64) -> Result<Option<f64>> {
    match q {
        None => Ok(None),
        Some(q) => {
            let v = q.resolve(dim, default_factor).map_err(|r| Error::config(path, r))?;
            if !v.is_finite() {
                return Err(Error::config(path, "must be finite"));
            }
            Ok(Some(v))
        }
    }
}

fn required<T>(path: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| Error::config(path, "missing required key"))
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be positive, got {v:e}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be ≥ 0, got {v:e}")))
    }
}

fn range(
    path: &str,
    raw: Option<&RawRange>,
    dim: Dimension,
    factor: f64,
    default: (f64, f64, usize),
) -> Result<Range> {
    let empty = RawRange::default();
    let raw = raw.unwrap_or(&empty);
    let min = quantity(&format!("{path}.min"), &raw.min, dim, factor)?.unwrap_or(default.0);
    let max = quantity(&format!("{path}.max"), &raw.max, dim, factor)?.unwrap_or(default.1);
    let points = raw.points.unwrap_or(default.2);
    positive(&format!("{path}.min"), min)?;
    if max < min {
        return Err(Error::config(format!("{path}.max"), "must be ≥ min"));
    }
    if points == 0 {
        return Err(Error::config(format!("{path}.points"), "must be ≥ 1"));
    }
    Ok(Range { min, max, points })
}

fn table(path: &str, t: &Option<BTreeMap<String, Quantity>>, dim: Dimension, factor: f64) -> Result<BTreeMap<u32, f64>> {
    let mut out = BTreeMap::new();
    for (k, q) in t.iter().flatten() {
        let p = format!("{path}.{k}");
        let n: u32 = k.parse().map_err(|_| Error::config(&p, "key must be a principal quantum number"))?;
        out.insert(n, positive(&p, quantity(&p, &Some(q.clone()), dim, factor)?.expect("some"))?);
    }
    Ok(out)
}

fn resolve_species(spec: &SpeciesSpec) -> Result<SpeciesConstants> {
    let raw = match spec {
        SpeciesSpec::Preset(name) => RawSpecies {
            preset: Some(name.clone()),
            ..Default::default()
        },
        SpeciesSpec::Table(t) => t.clone(),
    };
    let base = match &raw.preset {
        Some(name) => Some(
            SpeciesConstants::preset(name)
                .ok_or_else(|| Error::config("species.preset", format!("unknown species `{name}`")))?,
        ),
        None => None,
    };
    let pick = |path: &str, v: Option<f64>, fallback: Option<f64>| required(path, v.or(fallback));
    let b = base.as_ref();
    let s = SpeciesConstants {
        name: raw
            .name
            .clone()
            .or_else(|| b.map(|b| b.name.clone()))
            .unwrap_or_else(|| "custom".into()),
        mass: pick("species.mass", quantity("species.mass", &raw.mass, Dimension::Mass, ATOMIC_MASS_UNIT)?, b.map(|b| b.mass))?,
        scattering_length: pick("species.scattering_length", raw.scattering_length, b.map(|b| b.scattering_length))?,
        quantum_defect_p: pick("species.quantum_defect_p", raw.quantum_defect_p, b.map(|b| b.quantum_defect_p))?,
        wavelength: pick(
            "species.wavelength",
            quantity("species.wavelength", &raw.wavelength, Dimension::Length, NM)?,
            b.map(|b| b.wavelength),
        )?,
        n_ref: required("species.n_ref", raw.n_ref.or(b.map(|b| b.n_ref)))?,
        c6_ref: pick("species.c6_ref", quantity("species.c6_ref", &raw.c6_ref, Dimension::C6, GHZ_UM6)?, b.map(|b| b.c6_ref))?,
        dipole_ref: pick(
            "species.dipole_ref",
            quantity("species.dipole_ref", &raw.dipole_ref, Dimension::Dipole, EA0)?,
            b.map(|b| b.dipole_ref),
        )?,
        lifetime_ref: pick(
            "species.lifetime_ref",
            quantity("species.lifetime_ref", &raw.lifetime_ref, Dimension::Time, US)?,
            b.map(|b| b.lifetime_ref),
        )?,
        lifetime_table: match &raw.lifetime_table {
            Some(_) => table("species.lifetime_table", &raw.lifetime_table, Dimension::Time, US)?,
            None => b.map(|b| b.lifetime_table.clone()).unwrap_or_default(),
        },
        dipole_table: match &raw.dipole_table {
            Some(_) => table("species.dipole_table", &raw.dipole_table, Dimension::Dipole, EA0)?,
            None => b.map(|b| b.dipole_table.clone()).unwrap_or_default(),
        },
    };
    positive("species.mass", s.mass)?;
    positive("species.wavelength", s.wavelength)?;
    positive("species.lifetime_ref", s.lifetime_ref)?;
    s.validate().map_err(|e| Error::config("species", e.to_string()))?;
    Ok(s)
}

/// Apply defaults and convert units.
pub fn resolve(raw: &RawConfig) -> Result<RunConfig> {
    let species = resolve_species(required("species", raw.species.as_ref())?)?;

    let g = required("gas", raw.gas.as_ref())?;
    let gas = GasConfig {
        n: required("gas.n", g.n)?,
        temperature: non_negative(
            "gas.temperature",
            required("gas.temperature", quantity("gas.temperature", &g.temperature, Dimension::Temperature, 1.0)?)?,
        )?,
        density: non_negative(
            "gas.density",
            required("gas.density", quantity("gas.density", &g.density, Dimension::Density, PER_CM3)?)?,
        )?,
        length: positive(
            "gas.length",
            quantity("gas.length", &g.length, Dimension::Length, UM)?.unwrap_or(400e-6),
        )?,
    };
    crate::atomdata::rydberg_state(gas.n, &species).map_err(|e| Error::config("gas.n", e.to_string()))?;

    let p = required("pulse", raw.pulse.as_ref())?;
    let shape = p.shape.unwrap_or(PulseShape::Sech);
    let tau = positive("pulse.tau", required("pulse.tau", quantity("pulse.tau", &p.tau, Dimension::Time, NS)?)?)?;
    let t0 = non_negative("pulse.t0", quantity("pulse.t0", &p.t0, Dimension::Time, NS)?.unwrap_or(5.0 * tau))?;
    let omega_s = match (
        quantity("pulse.omega_s", &p.omega_s, Dimension::Frequency, GHZ)?,
        quantity("pulse.area", &p.area, Dimension::Angle, 1.0)?,
    ) {
        (Some(_), Some(_)) => return Err(Error::config("pulse.area", "give either omega_s or area, not both")),
        (Some(o), None) => non_negative("pulse.omega_s", o)?,
        (None, Some(a)) => non_negative("pulse.area", a)? / (shape.area_factor() * tau),
        (None, None) => 2.0 * PI / (shape.area_factor() * tau),
    };
    let pulse = PulseSpec {
        shape,
        omega_s,
        tau,
        t0,
    };

    let empty_n = RawNumerics::default();
    let n = raw.numerics.as_ref().unwrap_or(&empty_n);
    let d = NumericsConfig::default();
    let opt_pos = |path: &str, q: &Option<Quantity>| -> Result<Option<f64>> {
        quantity(path, q, Dimension::Time, NS)?.map(|v| positive(path, v)).transpose()
    };
    let numerics = NumericsConfig {
        n_z: n.n_z.unwrap_or(d.n_z),
        n_v: n.n_v.unwrap_or(d.n_v),
        dt: opt_pos("numerics.dt", &n.dt)?,
        dt_out: opt_pos("numerics.dt_out", &n.dt_out)?,
        window: opt_pos("numerics.window", &n.window)?,
        march_steps: n.march_steps.unwrap_or(d.march_steps),
        max_stored: n.max_stored.unwrap_or(d.max_stored),
    };
    if numerics.n_z < 4 {
        return Err(Error::config("numerics.n_z", "must be ≥ 4"));
    }
    if numerics.n_v == 0 {
        return Err(Error::config("numerics.n_v", "must be ≥ 1"));
    }
    if numerics.march_steps == 0 {
        return Err(Error::config("numerics.march_steps", "must be ≥ 1"));
    }

    let empty_ph = RawPhysics::default();
    let ph = raw.physics.as_ref().unwrap_or(&empty_ph);
    let dp = PhysicsOptions::default();
    let physics = PhysicsOptions {
        doppler: ph.doppler.unwrap_or(dp.doppler),
        collisions: ph.collisions.unwrap_or(dp.collisions),
        interaction: ph.interaction.unwrap_or(dp.interaction),
        spontaneous_decay: ph.spontaneous_decay.unwrap_or(dp.spontaneous_decay),
        interaction_form: ph.interaction_form.unwrap_or(dp.interaction_form),
        u_override: quantity("physics.u_override", &ph.u_override, Dimension::Frequency, GHZ)?,
        gamma_override: quantity("physics.gamma_override", &ph.gamma_override, Dimension::Frequency, PER_NS)?
            .map(|g| non_negative("physics.gamma_override", g))
            .transpose()?,
    };

    let scenario = Scenario {
        species,
        gas,
        pulse,
        numerics,
        physics,
    };
    scenario.validate().map_err(|e| Error::config("", e.to_string()))?;

    let empty_run = RawRun::default();
    let r = raw.run.as_ref().unwrap_or(&empty_run);
    let theta_grid = match &r.theta_grid {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let path = format!("run.theta_grid[{i}]");
                let v = quantity(&path, &Some(q.clone()), Dimension::Angle, 1.0)?.expect("some");
                if !(v > 0.0 && v <= 2.0 * PI * (1.0 + 1e-12)) {
                    return Err(Error::config(path, "areas must lie in (0, 2π]"));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?,
        None => crate::analysis::default_theta_grid(),
    };
    if theta_grid.is_empty() {
        return Err(Error::config("run.theta_grid", "must not be empty"));
    }

    let empty_reg = RawRegime::default();
    let reg = r.regime.as_ref().unwrap_or(&empty_reg);
    let regime = RegimeSettings {
        density: range("run.regime.density", reg.density.as_ref(), Dimension::Density, PER_CM3, (1e19, 1e23, 10))?,
        temperature: range("run.regime.temperature", reg.temperature.as_ref(), Dimension::Temperature, 1.0, (1.0, 400.0, 10))?,
        omega_s: non_negative(
            "run.regime.omega_s",
            quantity("run.regime.omega_s", &reg.omega_s, Dimension::Frequency, GHZ)?.unwrap_or(scenario.pulse.omega_s),
        )?,
    };

    let empty_st = RawSteady::default();
    let st = r.steady.as_ref().unwrap_or(&empty_st);
    let c6_state = crate::atomdata::rydberg_state(scenario.gas.n, &scenario.species)?.c6;
    let steady = SteadySettings {
        temperature: range("run.steady.temperature", st.temperature.as_ref(), Dimension::Temperature, 1.0, (1.0, 400.0, 61))?,
        omega: non_negative(
            "run.steady.omega",
            quantity("run.steady.omega", &st.omega, Dimension::Frequency, GHZ)?.unwrap_or(DEFAULT_PROBE_RABI),
        )?,
        gate_separation: positive(
            "run.steady.gate_separation",
            quantity("run.steady.gate_separation", &st.gate_separation, Dimension::Length, UM)?
                .unwrap_or(DEFAULT_GATE_SEPARATION),
        )?,
        c6_gate: quantity("run.steady.c6_gate", &st.c6_gate, Dimension::C6, GHZ_UM6)?.unwrap_or(c6_state),
        v_d: quantity("run.steady.v_d", &st.v_d, Dimension::Frequency, GHZ)?,
    };

    let empty_cs = RawCrossSection::default();
    let cs = r.cross_section.as_ref().unwrap_or(&empty_cs);
    let cross_section = CrossSectionSettings {
        n_min: cs.n_min.unwrap_or(20),
        n_max: cs.n_max.unwrap_or(60),
        temperatures: match &cs.temperatures {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, q)| {
                    let path = format!("run.cross_section.temperatures[{i}]");
                    positive(&path, quantity(&path, &Some(q.clone()), Dimension::Temperature, 1.0)?.expect("some"))
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![scenario.gas.temperature.max(f64::MIN_POSITIVE)],
        },
    };
    if cross_section.n_max < cross_section.n_min {
        return Err(Error::config("run.cross_section.n_max", "must be ≥ n_min"));
    }
    if cross_section.n_min < crate::atomdata::MIN_PRINCIPAL {
        return Err(Error::config("run.cross_section.n_min", format!("must be ≥ {}", crate::atomdata::MIN_PRINCIPAL)));
    }

    let empty_tr = RawTransient::default();
    let tr = r.transient.as_ref().unwrap_or(&empty_tr);
    let min_end = scenario.pulse.t0 + 10.0 * scenario.pulse.tau;
    let transient = TransientSettings {
        t_end: quantity("run.transient.t_end", &tr.t_end, Dimension::Time, NS)?.unwrap_or(min_end),
        sample_every: tr.sample_every.unwrap_or(0),
        temperatures: match &tr.temperatures {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, q)| {
                    let path = format!("run.transient.temperatures[{i}]");
                    non_negative(&path, quantity(&path, &Some(q.clone()), Dimension::Temperature, 1.0)?.expect("some"))
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![scenario.gas.temperature],
        },
    };
    if transient.t_end < min_end * (1.0 - 1e-12) {
        return Err(Error::config("run.transient.t_end", format!("must cover t₀ + 10τ = {min_end:e} s")));
    }

    Ok(RunConfig {
        scenario,
        run: RunSettings {
            out_dir: r.out_dir.as_ref().map(PathBuf::from),
            workers: r.workers.unwrap_or(0),
            level: r.level.unwrap_or(Level::MeanField),
            solver: r.solver.unwrap_or_default(),
            dump_field: r.dump_field.unwrap_or(false),
            theta_grid,
            regime,
            steady,
            cross_section,
            transient,
        },
    })
}

// -------------------------------------------------------------- emission

fn si(v: f64, dim: Dimension) -> Option<Quantity> {
    Some(Quantity::si(v, dim))
}

fn si_range(r: &Range, dim: Dimension) -> Option<RawRange> {
    Some(RawRange {
        min: si(r.min, dim),
        max: si(r.max, dim),
        points: Some(r.points),
    })
}

fn si_table(t: &BTreeMap<u32, f64>, dim: Dimension) -> Option<BTreeMap<String, Quantity>> {
    Some(t.iter().map(|(k, v)| (k.to_string(), Quantity::si(*v, dim))).collect())
}

impl RunConfig {
    /// Every setting spelled out in SI units; re-parses to an identical
    /// configuration.
    pub fn to_raw(&self) -> RawConfig {
        use Dimension::*;
        let s = &self.scenario;
        let sp = &s.species;
        let r = &self.run;
        RawConfig {
            species: Some(SpeciesSpec::Table(RawSpecies {
                preset: None,
                name: Some(sp.name.clone()),
                mass: si(sp.mass, Mass),
                scattering_length: Some(sp.scattering_length),
                quantum_defect_p: Some(sp.quantum_defect_p),
                wavelength: si(sp.wavelength, Length),
                n_ref: Some(sp.n_ref),
                c6_ref: si(sp.c6_ref, C6),
                dipole_ref: si(sp.dipole_ref, Dipole),
                lifetime_ref: si(sp.lifetime_ref, Time),
                lifetime_table: si_table(&sp.lifetime_table, Time),
                dipole_table: si_table(&sp.dipole_table, Dipole),
            })),
            gas: Some(RawGas {
                n: Some(s.gas.n),
                temperature: si(s.gas.temperature, Temperature),
                density: si(s.gas.density, Density),
                length: si(s.gas.length, Length),
            }),
            pulse: Some(RawPulse {
                shape: Some(s.pulse.shape),
                tau: si(s.pulse.tau, Time),
                t0: si(s.pulse.t0, Time),
                omega_s: si(s.pulse.omega_s, Frequency),
                area: None,
            }),
            numerics: Some(RawNumerics {
                n_z: Some(s.numerics.n_z),
                n_v: Some(s.numerics.n_v),
                dt: s.numerics.dt.and_then(|v| si(v, Time)),
                dt_out: s.numerics.dt_out.and_then(|v| si(v, Time)),
                window: s.numerics.window.and_then(|v| si(v, Time)),
                march_steps: Some(s.numerics.march_steps),
                max_stored: Some(s.numerics.max_stored),
            }),
            physics: Some(RawPhysics {
                doppler: Some(s.physics.doppler),
                collisions: Some(s.physics.collisions),
                interaction: Some(s.physics.interaction),
                spontaneous_decay: Some(s.physics.spontaneous_decay),
                interaction_form: Some(s.physics.interaction_form),
                u_override: s.physics.u_override.and_then(|v| si(v, Frequency)),
                gamma_override: s.physics.gamma_override.and_then(|v| si(v, Frequency)),
            }),
            run: Some(RawRun {
                out_dir: r.out_dir.as_ref().map(|p| p.to_string_lossy().into_owned()),
                workers: Some(r.workers),
                level: Some(r.level),
                solver: Some(r.solver),
                dump_field: Some(r.dump_field),
                theta_grid: Some(r.theta_grid.iter().map(|&t| Quantity::si(t, Angle)).collect()),
                regime: Some(RawRegime {
                    density: si_range(&r.regime.density, Density),
                    temperature: si_range(&r.regime.temperature, Temperature),
                    omega_s: si(r.regime.omega_s, Frequency),
                }),
                steady: Some(RawSteady {
                    temperature: si_range(&r.steady.temperature, Temperature),
                    omega: si(r.steady.omega, Frequency),
                    gate_separation: si(r.steady.gate_separation, Length),
                    c6_gate: si(r.steady.c6_gate, C6),
                    v_d: r.steady.v_d.and_then(|v| si(v, Frequency)),
                }),
                cross_section: Some(RawCrossSection {
                    n_min: Some(r.cross_section.n_min),
                    n_max: Some(r.cross_section.n_max),
                    temperatures: Some(r.cross_section.temperatures.iter().map(|&t| Quantity::si(t, Temperature)).collect()),
                }),
                transient: Some(RawTransient {
                    t_end: si(r.transient.t_end, Time),
                    sample_every: Some(r.transient.sample_every),
                    temperatures: Some(r.transient.temperatures.iter().map(|&t| Quantity::si(t, Temperature)).collect()),
                }),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
species = "Cs"
[gas]
n = 30
temperature = 300
density = "5e15 cm^-3"
[pulse]
tau = "1 ns"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(MINIMAL, Format::Toml).unwrap();
        assert_eq!(c.scenario.gas.length, 400e-6);
        assert_eq!((c.scenario.numerics.n_z, c.scenario.numerics.n_v), (64, 16));
        assert!((c.scenario.gas.density - 5e21).abs() < 1e7);
        assert!((c.scenario.pulse.area() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(c.scenario.pulse.t0, 5e-9);
        assert_eq!(c.run.theta_grid.len(), 25);
    }

    #[test]
    fn negative_tau_names_its_path() {
        let text = MINIMAL.replace("\"1 ns\"", "-1");
        let err = parse_config_str(&text, Format::Toml).unwrap_err().to_string();
        assert!(err.contains("pulse.tau"), "{err}");
    }

    #[test]
    fn unknown_keys_and_bad_units_are_path_qualified() {
        let err = parse_config_str(&format!("{MINIMAL}\n[numerics]\nnz = 3\n"), Format::Toml)
            .unwrap_err()
            .to_string();
        assert!(err.contains("numerics") && err.contains("nz"), "{err}");
        let err = parse_config_str(&MINIMAL.replace("\"1 ns\"", "\"1 K\""), Format::Toml)
            .unwrap_err()
            .to_string();
        assert!(err.contains("pulse.tau") && err.contains("temperature"), "{err}");
        let err = parse_config_str(&MINIMAL.replace("n = 30\n", ""), Format::Toml).unwrap_err().to_string();
        assert!(err.contains("gas.n"), "{err}");
        let err = parse_config_str(&MINIMAL.replace("[pulse]", "[pulse]\nwidth = 2"), Format::Toml)
            .unwrap_err()
            .to_string();
        assert!(err.contains("pulse") && err.contains("width"), "{err}");
    }

    #[test]
    fn resolved_json_round_trips_exactly() {
        let text = format!(
            "{MINIMAL}\n[physics]\nu_override = 3.3\n[run]\ntheta_grid = [\"0.35 pi\", 1.1]\n[run.steady]\nv_d = 0.1\n"
        );
        let c = parse_config_str(&text, Format::Toml).unwrap();
        let again = parse_config_str(&c.to_json(), Format::Json).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.to_json(), c.to_json());
    }

    #[test]
    fn area_or_amplitude() {
        let c = parse_config_str(&MINIMAL.replace("[pulse]", "[pulse]\narea = \"0.35 pi\""), Format::Toml).unwrap();
        assert!((c.scenario.pulse.area() - 0.35 * PI).abs() < 1e-12);
        let both = MINIMAL.replace("[pulse]", "[pulse]\narea = 1\nomega_s = 1");
        assert!(parse_config_str(&both, Format::Toml).unwrap_err().to_string().contains("pulse.area"));
    }

    #[test]
    fn ranges() {
        let r = Range { min: 1.0, max: 100.0, points: 3 };
        assert_eq!(r.logarithmic(), vec![1.0, 10.000000000000002, 100.0]);
        assert_eq!(r.linear(), vec![1.0, 50.5, 100.0]);
    }
}
