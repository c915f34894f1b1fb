//! Non-unitary geometric gate: loop -> swap -> loop -> swap.

use crate::error::{Error, Result};
use crate::model::{berry_phase, frame, BiorthogonalFrame, Branch, DriveParams};
use crate::numerics::CMat2;

use super::sequence::{eigen_populations, left_sandwich};
use super::{
    estimate_theta_im_gate, gate_sequence, run_sequence, Engine, LoopOrder, ProtocolSettings,
    SequenceState,
};

/// Linear response of the gate sequence, stored as final `{e, f}` blocks of
/// the propagated `|R+><R+|`, `|R-><R-|` and `|R+><R-|`.
#[derive(Debug, Clone)]
pub struct GateTransfer {
    pub plus: CMat2,
    pub minus: CMat2,
    pub cross: CMat2,
    pub frame: BiorthogonalFrame,
}

impl GateTransfer {
    pub fn new(
        params: &DriveParams,
        duration: f64,
        order: LoopOrder,
        engine: Engine,
        settings: &ProtocolSettings,
    ) -> Result<Self> {
        let fr = frame(params, 0.0)?;
        let steps = gate_sequence(order);
        let run = |s: SequenceState| run_sequence(engine, params, &steps, duration, settings, s);
        let (plus, minus, cross) = match engine {
            Engine::Lindblad => {
                let go =
                    |x| -> Result<CMat2> { Ok(run(SequenceState::Mixed(x))?.manifold_block()) };
                (
                    go(SequenceState::lift(&fr.r_plus))?,
                    go(SequenceState::lift(&fr.r_minus))?,
                    go(SequenceState::lift_coherence(&fr.r_plus, &fr.r_minus))?,
                )
            }
            _ => {
                let go = |v| match run(SequenceState::Pure(v))? {
                    SequenceState::Pure(u) => Ok(u),
                    SequenceState::Mixed(_) => Err(Error::InvalidArgument(
                        "pure engine returned a density".into(),
                    )),
                };
                let (up, um) = (go(fr.r_plus)?, go(fr.r_minus)?);
                (up.outer(&up), um.outer(&um), up.outer(&um))
            }
        };
        Ok(GateTransfer {
            plus,
            minus,
            cross,
            frame: fr,
        })
    }

    /// Final `{e, f}` block for the input `sqrt(1-p)|R+> + sqrt(p)|R->`.
    pub fn output_block(&self, p_minus_in: f64) -> CMat2 {
        let a = (1.0 - p_minus_in).max(0.0).sqrt();
        let b = p_minus_in.max(0.0).sqrt();
        self.plus.scale_real(a * a)
            + self.minus.scale_real(b * b)
            + (self.cross + self.cross.dagger()).scale_real(a * b)
    }

    /// Normalized output population of `|R->` and the total eigen-weight.
    pub fn p_minus_out(&self, p_minus_in: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&p_minus_in) {
            return Err(Error::InvalidArgument(format!(
                "input population {p_minus_in} outside [0, 1]"
            )));
        }
        let block = self.output_block(p_minus_in);
        let (wp, wm) = eigen_populations(&block, &self.frame);
        let total = wp + wm;
        if !(total > 1e-12) {
            return Err(Error::VanishingSurvival(total));
        }
        Ok((wm / total, total))
    }

    /// Unnormalized cross weight `<L+| rho |L->`, for diagnostics.
    pub fn coherence(&self, p_minus_in: f64) -> num_complex::Complex64 {
        left_sandwich(
            &self.output_block(p_minus_in),
            &self.frame.l_plus,
            &self.frame.l_minus,
        )
    }
}

/// Result of a single gate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOutput {
    pub p_minus_in: f64,
    pub p_minus_out: f64,
    /// Effective phase inverted from the output at `P_in = 1/2`.
    pub theta_im_eff: f64,
    /// Closed-form imaginary phase of each branch for the first loop.
    pub theta_im_branch_plus: f64,
    pub theta_im_branch_minus: f64,
    /// Total eigen-weight `|a+|^2 + |a-|^2` of the output.
    pub output_weight: f64,
}

/// Prepares `alpha|R+> + beta|R->` with `beta^2 = P_in` and runs the gate.
pub fn nonunitary_gate(
    params: &DriveParams,
    duration: f64,
    order: LoopOrder,
    p_minus_in: f64,
    engine: Engine,
    settings: &ProtocolSettings,
) -> Result<GateOutput> {
    let transfer = GateTransfer::new(params, duration, order, engine, settings)?;
    gate_output(params, &transfer, order, p_minus_in)
}

/// Evaluates a precomputed transfer at one input population.
pub fn gate_output(
    params: &DriveParams,
    transfer: &GateTransfer,
    order: LoopOrder,
    p_minus_in: f64,
) -> Result<GateOutput> {
    let (p_out, weight) = transfer.p_minus_out(p_minus_in)?;
    let (half, _) = transfer.p_minus_out(0.5)?;
    let th = berry_phase(params, Branch::Plus, order.first, 1.0)?.imag_part;
    Ok(GateOutput {
        p_minus_in,
        p_minus_out: p_out,
        theta_im_eff: estimate_theta_im_gate(half)?,
        theta_im_branch_plus: th,
        theta_im_branch_minus: -th,
        output_weight: weight,
    })
}

/// Effective gate phase at one `(J, Delta)` cell.
pub fn theta_im_cell(
    j: f64,
    delta: f64,
    gamma: f64,
    duration: f64,
    order: LoopOrder,
    engine: Engine,
    settings: &ProtocolSettings,
) -> Result<f64> {
    let p = DriveParams::new(j, delta, gamma)?;
    let transfer = GateTransfer::new(&p, duration, order, engine, settings)?;
    let (half, _) = transfer.p_minus_out(0.5)?;
    estimate_theta_im_gate(half)
}

/// Effective phase over a `(J, Delta)` grid, indexed `[delta][j]`. Cells that
/// fail (EP proximity, vanishing weight) are `None`.
pub fn theta_im_map(
    j_grid: &[f64],
    delta_grid: &[f64],
    gamma: f64,
    duration: f64,
    order: LoopOrder,
    engine: Engine,
    settings: &ProtocolSettings,
) -> Result<Vec<Vec<Option<f64>>>> {
    if j_grid.is_empty() || delta_grid.is_empty() {
        return Err(Error::InvalidArgument(
            "theta_im map needs non-empty grids".into(),
        ));
    }
    Ok(delta_grid
        .iter()
        .map(|&d| {
            j_grid
                .iter()
                .map(|&j| theta_im_cell(j, d, gamma, duration, order, engine, settings).ok())
                .collect()
        })
        .collect())
}
