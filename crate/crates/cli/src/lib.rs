//! Command-line driver: configuration, dispatch, parallel sweeps and
//! result files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use rydsit::analysis::{
    antisymmetry_residual, gate_shift, optimal_area_mf, optimal_area_scan, optimal_area_self_consistent,
    regime_classify, scenario_transient, steady_state_susceptibility, RegimeLabel,
};
use rydsit::atomdata::{collisional_decay_rate, inelastic_cross_section, rydberg_state};
use rydsit::config::{parse_raw, resolve, Format, RawRange, RunConfig, Solver};
use rydsit::dynamics::effective_interaction;
use rydsit::propagation::{cross_check_marching, run_propagation, Level};
use rydsit::units::Quantity;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "RYDSIT_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "rydsit", version, about = "Nanosecond pulses in warm Rydberg gases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $RYDSIT_OUTPUT_ROOT/<subcommand> or ./rydsit-out/<subcommand>).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub level: Option<Level>,
    /// Input pulse area, e.g. `3.14` (rad) or `"0.35 pi"`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Principal quantum number.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Gas temperature, K.
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    /// Regime-map densities `min,max,points` in cm⁻³ (log-spaced).
    #[arg(long, global = true)]
    pub density_range: Option<String>,
    /// Temperatures `min,max,points` in K (log-spaced) for regime-map and steady-chi.
    #[arg(long, global = true)]
    pub temperature_range: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Inelastic cross-sections and collisional rates versus n and T.
    CrossSection,
    /// Single-site mean-field dynamics under the boundary pulse.
    Transient,
    /// Propagate the pulse through the medium.
    Propagate,
    /// Fidelity and transmission versus input area.
    SweepArea,
    /// Interaction-regime labels on a density × temperature grid.
    RegimeMap,
    /// Steady-state susceptibility versus temperature.
    SteadyChi,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CrossSection => "cross-section",
            Command::Transient => "transient",
            Command::Propagate => "propagate",
            Command::SweepArea => "sweep-area",
            Command::RegimeMap => "regime-map",
            Command::SteadyChi => "steady-chi",
        }
    }
}

fn parse_range(text: &str, unit: &str) -> anyhow::Result<RawRange> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        bail!("range `{text}` must be `min,max,points`");
    }
    Ok(RawRange {
        min: Some(Quantity::Text(format!("{} {unit}", parts[0]))),
        max: Some(Quantity::Text(format!("{} {unit}", parts[1]))),
        points: Some(parts[2].parse().with_context(|| format!("points in `{text}`"))?),
    })
}

/// Read the configuration and apply command-line overrides.
pub fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let path = cli.config.as_ref().context("--config is required")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Toml,
    };
    let mut raw = parse_raw(&text, format)?;
    if let Some(theta) = &cli.theta {
        let p = raw.pulse.get_or_insert_with(Default::default);
        let q = match theta.trim().parse::<f64>() {
            Ok(v) => Quantity::Number(v),
            Err(_) => Quantity::Text(theta.clone()),
        };
        p.area = Some(q);
        p.omega_s = None;
    }
    if let Some(n) = cli.n {
        raw.gas.get_or_insert_with(Default::default).n = Some(n);
    }
    if let Some(t) = cli.temperature {
        raw.gas.get_or_insert_with(Default::default).temperature = Some(Quantity::Number(t));
    }
    let run = raw.run.get_or_insert_with(Default::default);
    if let Some(w) = cli.workers {
        run.workers = Some(w);
    }
    if let Some(l) = cli.level {
        run.level = Some(l);
    }
    if let Some(r) = &cli.density_range {
        run.regime.get_or_insert_with(Default::default).density = Some(parse_range(r, "cm^-3")?);
    }
    if let Some(r) = &cli.temperature_range {
        let range = parse_range(r, "K")?;
        run.regime.get_or_insert_with(Default::default).temperature = Some(range.clone());
        run.steady.get_or_insert_with(Default::default).temperature = Some(range);
    }
    Ok(resolve(&raw)?)
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    if let Some(o) = &cli.out {
        return o.clone();
    }
    if let Some(o) = &cfg.run.out_dir {
        return o.clone();
    }
    let root = std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("rydsit-out"));
    root.join(cli.command.name())
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// Shortest round-trip representation, so CSVs are byte-stable.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Run a subcommand; returns the directory holding its artifacts.
pub fn run(cli: &Cli) -> anyhow::Result<PathBuf> {
    let cfg = load_config(cli)?;
    let out = output_dir(cli, &cfg);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.json"), cfg.to_json() + "\n")?;
    write_json(
        &out.join("manifest.json"),
        &json!({
            "subcommand": cli.command.name(),
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": cfg.scenario.config_hash(cfg.run.level),
            "level": cfg.run.level,
            "solver": cfg.run.solver,
            "n_z": cfg.scenario.numerics.n_z,
            "n_v": cfg.scenario.numerics.n_v,
        }),
    )?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.run.workers).build()?;
    pool.install(|| match cli.command {
        Command::CrossSection => cross_section(&cfg, &out),
        Command::Transient => transient(&cfg, &out),
        Command::Propagate => propagate(&cfg, &out),
        Command::SweepArea => sweep_area(&cfg, &out),
        Command::RegimeMap => regime_map(&cfg, &out),
        Command::SteadyChi => steady_chi(&cfg, &out),
    })?;
    Ok(out)
}

fn cross_section(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let s = &cfg.scenario;
    let cs = &cfg.run.cross_section;
    let jobs: Vec<(u32, f64)> = cs
        .temperatures
        .iter()
        .flat_map(|&t| (cs.n_min..=cs.n_max).map(move |n| (n, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, t)| -> anyhow::Result<[String; 6]> {
            let sigma = inelastic_cross_section(n, t, &s.species)?;
            let gamma = collisional_decay_rate(s.gas.density, t, sigma, &s.species)?;
            let ryd = rydberg_state(n, &s.species)?;
            Ok([n.to_string(), num(t), num(sigma), num(gamma), num(ryd.lifetime), num(ryd.c6)])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut w = csv_writer(&out.join("cross_section.csv"))?;
    w.write_record(["n", "temperature_K", "sigma_m2", "gamma_per_s", "lifetime_s", "c6_rad_s_m6"])?;
    for r in &rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn transient(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let tr_cfg = &cfg.run.transient;
    let runs = tr_cfg
        .temperatures
        .par_iter()
        .map(|&t| {
            let mut s = cfg.scenario.clone();
            s.gas.temperature = t;
            scenario_transient(&s, tr_cfg.t_end, tr_cfg.sample_every).map(|r| (t, r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_writer(&out.join("transient.csv"))?;
    w.write_record(["temperature_K", "t_s", "rho22", "re_rho21", "im_rho21"])?;
    let mut summary = Vec::new();
    for (temp, r) in &runs {
        for i in 0..r.t.len() {
            w.write_record([num(*temp), num(r.t[i]), num(r.rho22[i]), num(r.rho21[i].re), num(r.rho21[i].im)])?;
        }
        let im: Vec<f64> = r.rho21.iter().map(|c| c.im).collect();
        summary.push(json!({
            "temperature_K": temp,
            "final_rho22": r.rho22.last(),
            "max_rho22": r.rho22.iter().cloned().fold(0.0, f64::max),
            "im_rho21_antisymmetry": antisymmetry_residual(&r.t, &im, cfg.scenario.pulse.t0).ok(),
        }));
    }
    w.flush()?;
    write_json(&out.join("summary.json"), &json!({ "runs": summary }))
}

fn propagate(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let r = match cfg.run.solver {
        Solver::Spectral => run_propagation(&cfg.scenario, cfg.run.level)?,
        Solver::Marching => cross_check_marching(&cfg.scenario, cfg.run.level)?,
    };
    let (input, output) = (r.input(), r.output());
    let mut w = csv_writer(&out.join("field.csv"))?;
    w.write_record(["t_s", "re_omega_in", "im_omega_in", "re_omega_out", "im_omega_out"])?;
    for i in 0..r.t.len() {
        w.write_record([num(r.t[i]), num(input[i].re), num(input[i].im), num(output[i].re), num(output[i].im)])?;
    }
    w.flush()?;
    if cfg.run.dump_field {
        r.write_field_binary(BufWriter::new(File::create(out.join("field.bin"))?))?;
    }
    write_json(
        &out.join("summary.json"),
        &json!({
            "transmission": r.transmission()?,
            "fidelity": r.fidelity()?,
            "input_area_rad": cfg.scenario.pulse.area(),
            "peak_delay_s": r.peak_delay(),
            "metadata": r.metadata,
        }),
    )
}

fn sweep_area(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let s = &cfg.scenario;
    let scan = optimal_area_scan(s, cfg.run.level, &cfg.run.theta_grid)?;
    let mut w = csv_writer(&out.join("sweep.csv"))?;
    w.write_record(["theta_rad", "theta_over_pi", "fidelity", "transmission", "refined", "error"])?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for p in &scan.points {
        w.write_record([
            num(p.theta),
            num(p.theta / std::f64::consts::PI),
            opt(p.fidelity),
            opt(p.transmission),
            p.refined.to_string(),
            p.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let c6 = rydberg_state(s.gas.n, &s.species)?.c6;
    let u_at_star = effective_interaction(s.gas.density, c6, scan.theta_star / (s.pulse.shape.area_factor() * s.pulse.tau))?.u;
    write_json(
        &out.join("summary.json"),
        &json!({
            "theta_star_rad": scan.theta_star,
            "fidelity_star": scan.fidelity_star,
            "transmission_star": scan.transmission_star,
            "unimodal": scan.unimodal,
            "theta_closed_form_at_star_rad": optimal_area_mf(u_at_star.abs(), s.pulse.tau)?,
            "theta_closed_form_self_consistent_rad":
                optimal_area_self_consistent(s.gas.density, c6, s.pulse.tau, s.pulse.shape)?,
            "failed_points": scan.points.iter().filter(|p| p.error.is_some()).count(),
        }),
    )
}

fn regime_map(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let s = &cfg.scenario;
    let reg = &cfg.run.regime;
    let densities = reg.density.logarithmic();
    let temps = reg.temperature.logarithmic();
    let jobs: Vec<(f64, f64)> = temps.iter().flat_map(|&t| densities.iter().map(move |&n| (n, t))).collect();
    let points = jobs
        .par_iter()
        .map(|&(n, t)| regime_classify(n, t, s.gas.n, reg.omega_s, &s.species))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_writer(&out.join("regime_map.csv"))?;
    w.write_record(["density_m3", "temperature_K", "kv_t_rad_s", "u_rad_s", "gamma_per_s", "ratio", "label"])?;
    for p in &points {
        w.write_record([
            num(p.density),
            num(p.temperature),
            num(p.kv_t),
            num(p.u),
            num(p.gamma),
            num(p.ratio),
            p.label.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    // first density at which each label appears, per temperature
    let boundaries: Vec<_> = temps
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let row = &points[i * densities.len()..(i + 1) * densities.len()];
            let first = |l: RegimeLabel| row.iter().find(|p| p.label == l).map(|p| p.density);
            json!({
                "temperature_K": t,
                "rydberg_from_density_m3": first(RegimeLabel::RydbergDominant),
                "absorption_from_density_m3": first(RegimeLabel::AbsorptionDominant),
            })
        })
        .collect();
    let count = |l: RegimeLabel| points.iter().filter(|p| p.label == l).count();
    write_json(
        &out.join("summary.json"),
        &json!({
            "counts": {
                "doppler_dominant": count(RegimeLabel::DopplerDominant),
                "rydberg_dominant": count(RegimeLabel::RydbergDominant),
                "absorption_dominant": count(RegimeLabel::AbsorptionDominant),
            },
            "boundaries": boundaries,
        }),
    )
}

fn steady_chi(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let s = &cfg.scenario;
    let st = &cfg.run.steady;
    let v_d = match st.v_d {
        Some(v) => v,
        None => gate_shift(st.c6_gate, st.gate_separation)?,
    };
    let eval = |t: f64| steady_state_susceptibility(t, st.omega, v_d, &s.gas, &s.species);
    let reference = eval(1.0)?;
    let temps = st.temperature.logarithmic();
    let rows = temps.par_iter().map(|&t| eval(t)).collect::<Result<Vec<_>, _>>()?;
    let mut w = csv_writer(&out.join("steady_chi.csv"))?;
    w.write_record([
        "temperature_K",
        "re_chi",
        "im_chi",
        "re_chi_norm",
        "im_chi_norm",
        "phase_rad",
        "absorption",
        "gamma_per_s",
        "kv_t_rad_s",
    ])?;
    for r in &rows {
        w.write_record([
            num(r.temperature),
            num(r.chi.re),
            num(r.chi.im),
            num(r.chi.re / reference.chi.re),
            num(r.chi.im / reference.chi.im),
            num(r.phase),
            num(r.absorption),
            num(r.gamma),
            num(r.kv_t),
        ])?;
    }
    w.flush()?;
    let peak = rows
        .iter()
        .max_by(|a, b| a.chi.im.total_cmp(&b.chi.im))
        .map(|r| r.temperature);
    write_json(
        &out.join("summary.json"),
        &json!({ "v_d_rad_s": v_d, "reference_temperature_K": 1.0, "im_chi_peak_temperature_K": peak }),
    )
}

/// Machine-readable failure report.
pub fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let kind = match err.downcast_ref::<rydsit::Error>() {
        Some(rydsit::Error::Config { .. }) => "config",
        Some(rydsit::Error::InvalidInput { .. }) => "invalid_input",
        Some(rydsit::Error::Unstable { .. }) | Some(rydsit::Error::NonFinite { .. }) => "numerical",
        Some(rydsit::Error::NotConverged(_)) => "not_converged",
        Some(rydsit::Error::Io(_)) => "io",
        None => "other",
    };
    json!({
        "error": kind,
        "message": format!("{err:#}"),
    })
}
