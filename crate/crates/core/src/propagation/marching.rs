use std::time::Instant;

use num_complex::Complex64;

use super::result::interp_cubic;
use super::spectral::{build_medium, FIELD_GROWTH_LIMIT};
use super::{resolve_physics, Level, PropagationResult, RunMetadata, Scenario, TimePlan};
use crate::constants::SPEED_OF_LIGHT;
use crate::dynamics::AtomicMedium;
use crate::numerics::{velocity_grid, Rk4};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Field at the midpoint between samples `k` and `k + 1` (cubic, one-sided
/// at the ends).
fn midpoint(series: &[Complex64], k: usize) -> Complex64 {
    let n = series.len();
    if n < 4 {
        return 0.5 * (series[k] + series[k + 1]);
    }
    if k == 0 {
        (5.0 * series[0] + 15.0 * series[1] - 5.0 * series[2] + series[3]) / 16.0
    } else if k + 2 >= n {
        (series[n - 4] - 5.0 * series[n - 3] + 15.0 * series[n - 2] + 5.0 * series[n - 1]) / 16.0
    } else {
        (-series[k - 1] + 9.0 * series[k] + 9.0 * series[k + 1] - series[k + 2]) / 16.0
    }
}

/// Local atomic response R₂₁(s) and ρ₂₂(s) to a retarded-time field series.
fn respond(
    medium: &dyn AtomicMedium,
    field: &[Complex64],
    dt: f64,
    r21: &mut [Complex64],
    exc: &mut [f64],
    min_population: &mut f64,
) -> Result<()> {
    let mut y = medium.ground_state();
    let mut rk = Rk4::new(y.len());
    let mut r = [ZERO];
    let mut e = [0.0];
    medium.coherence(&y, &mut r);
    medium.excitation(&y, &mut e);
    r21[0] = r[0];
    exc[0] = e[0];
    for k in 0..field.len() - 1 {
        let t = k as f64 * dt;
        let (a, m, b) = (field[k], midpoint(field, k), field[k + 1]);
        rk.step(
            |s, st, d| {
                let frac = (s - t) / dt;
                let om = if frac < 0.25 {
                    a
                } else if frac < 0.75 {
                    m
                } else {
                    b
                };
                medium.derivative(st, &[om], d);
                Ok(())
            },
            &mut y,
            t,
            dt,
        )?;
        medium.check_bounds(&y, t + dt)?;
        *min_population = min_population.min(medium.min_population(&y));
        medium.coherence(&y, &mut r);
        medium.excitation(&y, &mut e);
        r21[k + 1] = r[0];
        exc[k + 1] = e[0];
    }
    Ok(())
}

/// Independent solver: marches the whole retarded-time field series in
/// ξ = z with RK4. Each stage integrates the local atoms through the full
/// pulse, so the result shares no discretisation with the collocation
/// solver beyond the time step.
///
/// Only the mean-field level is local in z; the two-body level couples all
/// positions at equal time and is rejected.
pub fn cross_check_marching(scenario: &Scenario, level: Level) -> Result<PropagationResult> {
    if level != Level::MeanField {
        return Err(Error::invalid("level", "marching supports the mean-field level only"));
    }
    let start = Instant::now();
    let phys = resolve_physics(scenario)?;
    let num = &scenario.numerics;
    if num.march_steps == 0 {
        return Err(Error::invalid("march_steps", "must be positive"));
    }
    let vgrid = velocity_grid(phys.v_thermal, num.n_v)?;
    let (medium, rate) = build_medium(scenario, &phys, level, 1, None, &vgrid)?;
    let plan = TimePlan::new(scenario, rate)?;
    let pulse = scenario.pulse;
    let len = plan.steps + 1;
    let dt = plan.dt;
    let length = scenario.gas.length;
    let nxi = num.march_steps;
    let h = length / nxi as f64;
    let limit = FIELD_GROWTH_LIMIT * pulse.omega_s.max(f64::MIN_POSITIVE);

    let mut omega: Vec<Complex64> = (0..len).map(|k| Complex64::new(pulse.envelope(k as f64 * dt), 0.0)).collect();
    let mut r21 = vec![ZERO; len];
    let mut exc = vec![0.0; len];
    let mut ks: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![ZERO; len]);
    let mut trial = vec![ZERO; len];

    let n_t = plan.samples();
    let t: Vec<f64> = (0..n_t).map(|m| plan.sample_time(m)).collect();
    let z: Vec<f64> = (0..=nxi).map(|i| i as f64 * h).collect();
    let mut field = Vec::with_capacity((nxi + 1) * n_t);
    let mut coherence = Vec::with_capacity((nxi + 1) * n_t);
    let mut excitation = Vec::with_capacity((nxi + 1) * n_t);

    let kappa = phys.kappa;
    let mut min_population = 0.0f64;
    let mut source = |om: &[Complex64], out: &mut [Complex64], r: &mut [Complex64], e: &mut [f64]| -> Result<()> {
        respond(medium.as_ref(), om, dt, r, e, &mut min_population)?;
        for (o, ri) in out.iter_mut().zip(r.iter()) {
            *o = MINUS_I * kappa * ri;
        }
        Ok(())
    };

    for (i, &zi) in z.iter().enumerate() {
        if let Some(k) = omega.iter().position(|o| o.norm() > limit) {
            return Err(Error::Unstable {
                t: k as f64 * dt,
                reason: format!("|Ω| exceeds {FIELD_GROWTH_LIMIT}·Ω_s at z = {zi:.3e} m"),
            });
        }
        // k1 doubles as the atomic response at this position
        source(&omega, &mut ks[0], &mut r21, &mut exc)?;
        for &tm in &t {
            let s = tm - zi / SPEED_OF_LIGHT;
            if s < 0.0 {
                field.push(ZERO);
                coherence.push(ZERO);
                excitation.push(0.0);
            } else {
                let x = s / dt;
                field.push(interp_cubic(len, x, |k| omega[k]));
                coherence.push(interp_cubic(len, x, |k| r21[k]));
                excitation.push(interp_cubic(len, x, |k| exc[k]));
            }
        }
        if i == nxi {
            break;
        }
        let mut r_scratch = vec![ZERO; len];
        let mut e_scratch = vec![0.0; len];
        for stage in 1..4 {
            let c = if stage == 3 { h } else { 0.5 * h };
            for k in 0..len {
                trial[k] = omega[k] + ks[stage - 1][k] * c;
            }
            let (_, rest) = ks.split_at_mut(stage);
            source(&trial, &mut rest[0], &mut r_scratch, &mut e_scratch)?;
        }
        for k in 0..len {
            omega[k] += (ks[0][k] + 2.0 * ks[1][k] + 2.0 * ks[2][k] + ks[3][k]) * (h / 6.0);
        }
    }

    let result = PropagationResult {
        z,
        t,
        field,
        coherence,
        excitation,
        metadata: RunMetadata {
            solver: "marching".into(),
            level,
            n_z: nxi + 1,
            n_v: vgrid.len(),
            plan,
            velocity_nodes: vgrid.nodes.clone(),
            velocity_weights: vgrid.weights.clone(),
            physics: phys,
            config_hash: scenario.config_hash(level),
            min_population,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    };
    result.check_finite()?;
    Ok(result)
}
