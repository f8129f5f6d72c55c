//! Derived quantities and parameter studies.

mod metrics;
mod optimal;
mod regime;
mod scan;
mod steady;
mod transient;

pub use metrics::{fidelity, pulse_area, transmission, AreaEstimate, SUPPORT_THRESHOLD};
pub use optimal::{
    ansatz_diagnostic, ansatz_params, ansatz_trajectory, optimal_area_closed_form, optimal_area_mf,
    optimal_area_residual, optimal_area_self_consistent, single_atom_return_area, AnsatzDiagnostic, AnsatzParams, ReturnArea,
    THETA_0,
};
pub use regime::{classify, regime_classify, RegimeLabel, RegimePoint};
pub use scan::{default_theta_grid, optimal_area_scan, scan_with, unimodal, AreaScan, ScanPoint, PLATEAU_TOLERANCE};
pub use steady::{gate_shift, steady_state_susceptibility, susceptibility_integrand, SteadyState};
pub use transient::{antisymmetry_residual, scenario_transient};
