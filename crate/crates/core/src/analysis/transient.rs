use crate::dynamics::{transient_dynamics, MeanFieldParams, Transient};
use crate::numerics::velocity_grid;
use crate::propagation::{resolve_physics, Scenario, ACCURACY_LIMIT, SAMPLES_PER_TAU, STEPS_PER_TAU};
use crate::{Error, Result};

/// Single-site mean-field response to the scenario's boundary pulse, with
/// every rate resolved from the scenario. `sample_every = 0` selects about
/// 50 samples per τ.
pub fn scenario_transient(scenario: &Scenario, t_end: f64, sample_every: usize) -> Result<Transient> {
    let ph = resolve_physics(scenario)?;
    let vg = velocity_grid(ph.v_thermal, scenario.numerics.n_v)?;
    let params = MeanFieldParams::new(ph.u, ph.gamma, Some(ph.decay), &vg, ph.k)?;
    let tau = scenario.pulse.tau;
    let rate = params.max_rate() + scenario.pulse.omega_s;
    let dt = scenario
        .numerics
        .dt
        .unwrap_or_else(|| (tau / STEPS_PER_TAU).min(ACCURACY_LIMIT / rate.max(1e-300)));
    let every = match sample_every {
        0 => ((tau / SAMPLES_PER_TAU / dt).floor() as usize).max(1),
        k => k,
    };
    transient_dynamics(&scenario.pulse, &params, dt, t_end, every)
}

/// max_s |f(t₀ + s) + f(t₀ − s)| / max|f| over the largest window symmetric
/// about `t0` inside the samples; mirrored points are linearly interpolated.
pub fn antisymmetry_residual(t: &[f64], f: &[f64], t0: f64) -> Result<f64> {
    if t.len() != f.len() || t.len() < 2 {
        return Err(Error::invalid("f", "need matching samples"));
    }
    if !(t0 > t[0] && t0 < t[t.len() - 1]) {
        return Err(Error::invalid("t0", "must lie inside the sampled window"));
    }
    let peak = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let interp = |x: f64| {
        let i = t.partition_point(|&s| s <= x).clamp(1, t.len() - 1);
        let (a, b) = (t[i - 1], t[i]);
        let w = ((x - a) / (b - a)).clamp(0.0, 1.0);
        f[i - 1] * (1.0 - w) + f[i] * w
    };
    let half = (t0 - t[0]).min(t[t.len() - 1] - t0);
    let worst = t
        .iter()
        .filter(|&&s| (s - t0).abs() <= half)
        .map(|&s| (interp(s) + interp(2.0 * t0 - s)).abs())
        .fold(0.0, f64::max);
    Ok(worst / peak)
}
