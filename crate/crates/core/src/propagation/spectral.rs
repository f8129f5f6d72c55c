use std::time::Instant;

use num_complex::Complex64;

use super::result::interp_cubic;
use super::{resolve_physics, Level, PropagationResult, ResolvedPhysics, RunMetadata, Scenario, TimePlan};
use crate::constants::SPEED_OF_LIGHT;
use crate::dynamics::{AtomicMedium, MeanFieldMedium, MeanFieldParams, TwoBodyMedium, TwoBodyParams};
use crate::numerics::{chebyshev_grid, velocity_grid, Rk4, SpatialGrid, VelocityGrid};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Largest |Ω| relative to the boundary peak before a run is aborted.
pub const FIELD_GROWTH_LIMIT: f64 = 10.0;

/// Maxwell source −iκR₂₁ per node (∂_zΩ in the retarded frame).
///
/// Absorptive: a weakly driven resonant medium has R₂₁ ≈ −i|r| and the
/// source is then −κ|r|.
pub fn polarization_source(r21: &[Complex64], kappa: f64) -> Vec<Complex64> {
    r21.iter().map(|r| MINUS_I * kappa * r).collect()
}

pub(crate) fn build_medium(
    scenario: &Scenario,
    phys: &ResolvedPhysics,
    level: Level,
    n_sites: usize,
    grid: Option<&SpatialGrid>,
    vgrid: &VelocityGrid,
) -> Result<(Box<dyn AtomicMedium>, f64)> {
    let decay = Some(phys.decay);
    match level {
        Level::MeanField => {
            let params = MeanFieldParams::new(phys.u, phys.gamma, decay, vgrid, phys.k)?;
            let rate = params.max_rate();
            Ok((Box::new(MeanFieldMedium::new(n_sites, params)?), rate))
        }
        Level::TwoBody => {
            let grid = grid.ok_or_else(|| Error::invalid("level", "the two-body level needs the collocation grid"))?;
            let c6 = if scenario.physics.interaction { phys.rydberg.c6 } else { 0.0 };
            let params = TwoBodyParams::new(
                grid,
                vgrid,
                phys.k,
                scenario.gas.density,
                c6,
                phys.interaction.z_m,
                phys.gamma,
                decay,
            )?;
            let rate = params.max_rate();
            Ok((Box::new(TwoBodyMedium::new(params)?), rate))
        }
    }
}

/// Ω(z_j, s) = Ω(0, s) − iκ∫₀^{z_j} R₂₁ dz at retarded time s.
struct FieldSolver<'a> {
    grid: &'a SpatialGrid,
    medium: &'a dyn AtomicMedium,
    kappa: f64,
    r21: Vec<Complex64>,
    source: Vec<Complex64>,
}

impl FieldSolver<'_> {
    fn field(&mut self, boundary: f64, state: &[Complex64], out: &mut [Complex64]) {
        self.medium.coherence(state, &mut self.r21);
        for (s, r) in self.source.iter_mut().zip(&self.r21) {
            *s = MINUS_I * self.kappa * r;
        }
        self.grid.integrate_from_origin(&self.source, out);
        for o in out.iter_mut() {
            *o += boundary;
        }
    }
}

/// Couples the Maxwell equation to the atoms on Chebyshev collocation nodes.
///
/// The equations are integrated in retarded time s = t − z/c, where the
/// field equation has no time derivative: at every RK4 stage the field on
/// all nodes follows from the boundary value and a spectral antiderivative
/// of the polarisation. Lab-frame samples Ω(z, t) = Ω_ret(z, t − z/c) are
/// obtained by cubic interpolation of the full-resolution record.
pub fn run_propagation(scenario: &Scenario, level: Level) -> Result<PropagationResult> {
    let start = Instant::now();
    let phys = resolve_physics(scenario)?;
    let num = &scenario.numerics;
    let grid = chebyshev_grid(scenario.gas.length, num.n_z)?;
    let vgrid = velocity_grid(phys.v_thermal, num.n_v)?;
    let nz = grid.len();
    let (medium, rate) = build_medium(scenario, &phys, level, nz, Some(&grid), &vgrid)?;
    let plan = TimePlan::new(scenario, rate)?;
    let stored = (plan.steps + 1) * nz * 3;
    if stored > num.max_stored {
        return Err(Error::invalid(
            "max_stored",
            format!("run would store {stored} samples; raise the cap or coarsen dt"),
        ));
    }

    let pulse = scenario.pulse;
    let limit = FIELD_GROWTH_LIMIT * pulse.omega_s.max(f64::MIN_POSITIVE);
    let mut solver = FieldSolver {
        grid: &grid,
        medium: medium.as_ref(),
        kappa: phys.kappa,
        r21: vec![ZERO; nz],
        source: vec![ZERO; nz],
    };
    let mut y = medium.ground_state();
    let mut rk = Rk4::new(y.len());
    let mut omega = vec![ZERO; nz];
    let mut rec_field = Vec::with_capacity((plan.steps + 1) * nz);
    let mut rec_r21 = Vec::with_capacity((plan.steps + 1) * nz);
    let mut rec_exc = Vec::with_capacity((plan.steps + 1) * nz);
    let mut exc = vec![0.0; nz];
    let mut stage = vec![ZERO; nz];
    let mut min_population = 0.0f64;

    for k in 0..=plan.steps {
        let t = k as f64 * plan.dt;
        solver.field(pulse.envelope(t), &y, &mut omega);
        if let Some(j) = omega.iter().position(|o| o.norm() > limit) {
            return Err(Error::Unstable {
                t,
                reason: format!("|Ω| = {:.3e} at z = {:.3e} m exceeds {FIELD_GROWTH_LIMIT}·Ω_s", omega[j].norm(), grid.points[j]),
            });
        }
        rec_field.extend_from_slice(&omega);
        rec_r21.extend_from_slice(&solver.r21);
        medium.excitation(&y, &mut exc);
        rec_exc.extend_from_slice(&exc);
        if k == plan.steps {
            break;
        }
        rk.step(
            |s, st, d| {
                solver.field(pulse.envelope(s), st, &mut stage);
                medium.derivative(st, &stage, d);
                Ok(())
            },
            &mut y,
            t,
            plan.dt,
        )?;
        medium.check_bounds(&y, t + plan.dt)?;
        min_population = min_population.min(medium.min_population(&y));
    }

    let n_t = plan.samples();
    let t: Vec<f64> = (0..n_t).map(|m| plan.sample_time(m)).collect();
    let mut field = Vec::with_capacity(nz * n_t);
    let mut coherence = Vec::with_capacity(nz * n_t);
    let mut excitation = Vec::with_capacity(nz * n_t);
    let len = plan.steps + 1;
    for (j, &z) in grid.points.iter().enumerate() {
        for &tm in &t {
            let s = tm - z / SPEED_OF_LIGHT;
            if s < 0.0 {
                field.push(ZERO);
                coherence.push(ZERO);
                excitation.push(0.0);
                continue;
            }
            let x = s / plan.dt;
            field.push(interp_cubic(len, x, |k| rec_field[k * nz + j]));
            coherence.push(interp_cubic(len, x, |k| rec_r21[k * nz + j]));
            excitation.push(interp_cubic(len, x, |k| rec_exc[k * nz + j]));
        }
    }

    let result = PropagationResult {
        z: grid.points.clone(),
        t,
        field,
        coherence,
        excitation,
        metadata: RunMetadata {
            solver: "chebyshev".into(),
            level,
            n_z: nz,
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
