//! Transition-amplitude diagnostic for quasi-adiabatic loops.

use crate::dynamics::LoopSchedule;
use crate::error::Result;
use crate::model::DriveParams;

/// `a±(t) = J |phi'(t)| / |delta|^2 * exp(±delta_i t)` with
/// `delta = delta_r - i delta_i`: `a+` grows, `a-` decays.
pub fn adiabaticity_amplitudes(
    params: &DriveParams,
    schedule: &LoopSchedule,
    t_grid: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let delta = params.delta_split();
    let delta_i = -delta.im;
    let scale = params.j / delta.norm_sqr();
    let mut plus = Vec::with_capacity(t_grid.len());
    let mut minus = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (_, phi_dot) = schedule.phi_of_t(t)?;
        let base = scale * phi_dot.abs();
        plus.push(base * (delta_i * t).exp());
        minus.push(base * (-delta_i * t).exp());
    }
    Ok((plus, minus))
}
