use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::propagation::{run_propagation, Level, Scenario};
use crate::{Error, Result};

/// Secondary maxima whose prominence is below this fraction of the global
/// maximum are treated as plateau noise.
pub const PLATEAU_TOLERANCE: f64 = 0.01;
const GOLDEN_ITERATIONS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    /// Input area θ(0), rad.
    pub theta: f64,
    pub fidelity: Option<f64>,
    pub transmission: Option<f64>,
    /// Failure of this point, if any; a failed point does not abort the scan.
    pub error: Option<String>,
    /// Added by the refinement stage.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaScan {
    /// All evaluated points, sorted by θ.
    pub points: Vec<ScanPoint>,
    pub theta_star: f64,
    pub fidelity_star: f64,
    pub transmission_star: f64,
    pub unimodal: bool,
}

/// 25 points evenly spaced on (0.05π, 2π].
pub fn default_theta_grid() -> Vec<f64> {
    let (lo, hi, n) = (0.05 * PI, 2.0 * PI, 25);
    (1..=n).map(|k| lo + k as f64 * (hi - lo) / n as f64).collect()
}

/// Whether the curve has a single maximum up to [`PLATEAU_TOLERANCE`].
///
/// Every local maximum other than the global one must rise less than the
/// tolerance above the deepest point separating it from the global peak.
pub fn unimodal(values: &[f64]) -> bool {
    let Some((g, &fmax)) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return true;
    };
    let tol = PLATEAU_TOLERANCE * fmax.abs();
    (0..values.len()).filter(|&i| i != g).all(|i| {
        let left = i == 0 || values[i - 1] <= values[i];
        let right = i + 1 == values.len() || values[i + 1] <= values[i];
        if !(left && right) {
            return true;
        }
        let (a, b) = if i < g { (i, g) } else { (g, i) };
        let valley = values[a..=b].iter().cloned().fold(f64::INFINITY, f64::min);
        values[i] - valley < tol
    })
}

fn evaluate(eval: &(impl Fn(f64) -> Result<(f64, f64)> + Sync), theta: f64, refined: bool) -> ScanPoint {
    match eval(theta) {
        Ok((f, eta)) => ScanPoint {
            theta,
            fidelity: Some(f),
            transmission: Some(eta),
            error: None,
            refined,
        },
        Err(e) => ScanPoint {
            theta,
            fidelity: None,
            transmission: None,
            error: Some(e.to_string()),
            refined,
        },
    }
}

/// Scan `eval(θ) = (F, η)` over `grid`, then golden-section refine the
/// bracket around the coarse maximum. Grid points run in parallel; the
/// result is independent of the thread count.
pub fn scan_with(grid: &[f64], eval: impl Fn(f64) -> Result<(f64, f64)> + Sync) -> Result<AreaScan> {
    if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0 && t <= 2.0 * PI * (1.0 + 1e-12))) {
        return Err(Error::invalid("theta_grid", "areas must lie in (0, 2π]"));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut points: Vec<ScanPoint> = grid.par_iter().map(|&t| evaluate(&eval, t, false)).collect();
    let ok: Vec<usize> = (0..points.len()).filter(|&i| points[i].fidelity.is_some()).collect();
    if ok.is_empty() {
        return Err(Error::NotConverged("every scan point failed".into()));
    }
    let best = *ok
        .iter()
        .max_by(|&&a, &&b| points[a].fidelity.unwrap().total_cmp(&points[b].fidelity.unwrap()))
        .unwrap();
    let pos = ok.iter().position(|&i| i == best).unwrap();
    let lo = if pos > 0 { points[ok[pos - 1]].theta } else { points[best].theta };
    let hi = if pos + 1 < ok.len() { points[ok[pos + 1]].theta } else { points[best].theta };

    if hi > lo {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let f_of = |p: &ScanPoint| p.fidelity.unwrap_or(f64::NEG_INFINITY);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let mut pc = evaluate(&eval, c, true);
        let mut pd = evaluate(&eval, d, true);
        for _ in 0..GOLDEN_ITERATIONS {
            if f_of(&pc) >= f_of(&pd) {
                b = d;
                d = c;
                points.push(std::mem::replace(&mut pd, pc.clone()));
                c = b - r * (b - a);
                pc = evaluate(&eval, c, true);
            } else {
                a = c;
                c = d;
                points.push(std::mem::replace(&mut pc, pd.clone()));
                d = a + r * (b - a);
                pd = evaluate(&eval, d, true);
            }
        }
        points.push(pc);
        points.push(pd);
    }
    points.sort_by(|a, b| a.theta.total_cmp(&b.theta));

    let star = points
        .iter()
        .filter(|p| p.fidelity.is_some())
        .max_by(|a, b| a.fidelity.unwrap().total_cmp(&b.fidelity.unwrap()))
        .unwrap();
    let coarse: Vec<f64> = points
        .iter()
        .filter(|p| !p.refined)
        .filter_map(|p| p.fidelity)
        .collect();
    Ok(AreaScan {
        theta_star: star.theta,
        fidelity_star: star.fidelity.unwrap(),
        transmission_star: star.transmission.unwrap(),
        unimodal: unimodal(&coarse),
        points,
    })
}

/// Area scan by full propagation: θ is varied through Ω_s at fixed τ.
pub fn optimal_area_scan(base: &Scenario, level: Level, grid: &[f64]) -> Result<AreaScan> {
    base.validate()?;
    scan_with(grid, |theta| {
        let mut s = base.clone();
        s.pulse.omega_s = theta / (s.pulse.shape.area_factor() * s.pulse.tau);
        let r = run_propagation(&s, level)?;
        Ok((r.fidelity()?, r.transmission()?))
    })
}
