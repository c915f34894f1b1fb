//! Execution of loop/swap sequences on pure or mixed states.

use crate::dynamics::{propagate_nh, propagate_operator, ThreeLevelParams};
use crate::error::{Error, Result};
use crate::model::{
    berry_phase, dynamical_phase, frame, swap_operator, BiorthogonalFrame, Branch, DriveParams,
};
use crate::numerics::{CMat2, CMat3, CVec, CVec2, Complex};

use super::{Engine, ProtocolSettings, Step};

/// State carried through a sequence: a two-level ket, or a `{g, e, f}`
/// operator for the master-equation engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SequenceState {
    Pure(CVec2),
    Mixed(CMat3),
}

impl SequenceState {
    /// Embeds a ket into `{g, e, f}` as `|psi><psi|`.
    pub fn lift(psi: &CVec2) -> CMat3 {
        let v = CVec::<3>::new([Complex::new(0.0, 0.0), psi[0], psi[1]]);
        v.outer(&v)
    }

    /// Lifts the coherence `|a><b|` into `{g, e, f}`.
    pub fn lift_coherence(a: &CVec2, b: &CVec2) -> CMat3 {
        let va = CVec::<3>::new([Complex::new(0.0, 0.0), a[0], a[1]]);
        let vb = CVec::<3>::new([Complex::new(0.0, 0.0), b[0], b[1]]);
        va.outer(&vb)
    }

    /// `{e, f}` block `rho_ef`; `|psi><psi|` for a ket.
    pub fn manifold_block(&self) -> CMat2 {
        match self {
            SequenceState::Pure(psi) => psi.outer(psi),
            SequenceState::Mixed(rho) => crate::dynamics::manifold_block(rho),
        }
    }
}

/// `<L_a| rho |L_b>` with bra components `l_a`, `l_b`; for `rho = |psi><psi|`
/// this is `<L_a|psi> conj(<L_b|psi>)`.
pub(crate) fn left_sandwich(block: &CMat2, l_a: &CVec2, l_b: &CVec2) -> Complex {
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += l_a[i] * block[(i, j)] * l_b[j].conj();
        }
    }
    acc
}

/// Eigenbasis populations `(|a+|^2, |a-|^2)` of a (possibly mixed) block.
pub(crate) fn eigen_populations(block: &CMat2, fr: &BiorthogonalFrame) -> (f64, f64) {
    let w =
        |b: Branch| left_sandwich(block, &fr.left(b), &fr.left(b)).re / fr.overlap(b).norm_sqr();
    (w(Branch::Plus), w(Branch::Minus))
}

fn analytic_loop(
    params: &DriveParams,
    psi: &CVec2,
    schedule_dir: crate::model::Direction,
    duration: f64,
    fraction: f64,
    end_phi: f64,
) -> Result<CVec2> {
    let fr0 = frame(params, 0.0)?;
    let (a_plus, a_minus) = fr0.amplitudes(psi);
    let factor = |b: Branch| -> Result<Complex> {
        let lam = dynamical_phase(params, b, duration)?.to_complex();
        let th = berry_phase(params, b, schedule_dir, fraction)?.to_complex();
        Ok((Complex::new(0.0, 1.0) * (lam + th)).exp())
    };
    let fr1 = frame(params, end_phi)?;
    Ok(fr1.compose(
        a_plus * factor(Branch::Plus)?,
        a_minus * factor(Branch::Minus)?,
    ))
}

fn lift_swap(m: &CMat2) -> CMat3 {
    let mut out = CMat3::zeros();
    out[(0, 0)] = Complex::new(1.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            out[(i + 1, j + 1)] = m[(i, j)];
        }
    }
    out
}

/// Applies closed loops of duration `duration` and exact swaps at `phi = 0`.
pub fn run_sequence(
    engine: Engine,
    params: &DriveParams,
    steps: &[Step],
    duration: f64,
    settings: &ProtocolSettings,
    initial: SequenceState,
) -> Result<SequenceState> {
    let swap = swap_operator(params, 0.0)?;
    let three = match engine {
        Engine::Lindblad => Some(ThreeLevelParams::from_drive(*params, settings.gamma_f)?),
        _ => None,
    };
    let mut state = initial;
    for step in steps {
        state = match (step, state) {
            (Step::Swap, SequenceState::Pure(psi)) => SequenceState::Pure(swap.mul_vec(&psi)),
            (Step::Swap, SequenceState::Mixed(rho)) => {
                let m = lift_swap(&swap);
                SequenceState::Mixed(m.mul_mat(&rho).mul_mat(&m.dagger()))
            }
            (Step::Loop(dir), s) => {
                let schedule = settings.schedule(*dir, duration, 1.0)?;
                match (engine, s) {
                    (Engine::Analytic, SequenceState::Pure(psi)) => SequenceState::Pure(
                        analytic_loop(params, &psi, *dir, duration, 1.0, schedule.total_angle())?,
                    ),
                    (Engine::Simulated, SequenceState::Pure(psi)) => {
                        let rec = propagate_nh(params, &schedule, &psi, settings.tol, 2)?;
                        SequenceState::Pure(rec.final_pure().ok_or(Error::EmptyRecord)?)
                    }
                    (Engine::Lindblad, SequenceState::Mixed(rho)) => {
                        let p3 = three.as_ref().expect("set for the Lindblad engine");
                        SequenceState::Mixed(propagate_operator(p3, &schedule, &rho, settings.tol)?)
                    }
                    (e, _) => {
                        return Err(Error::InvalidArgument(format!(
                            "state representation does not match the {e} engine"
                        )))
                    }
                }
            }
        };
    }
    Ok(state)
}
