//! Composite measurement sequences and their estimators.
//!
//! Every protocol runs on one of three engines: closed-form phase factors
//! ([`Engine::Analytic`]), non-Hermitian propagation ([`Engine::Simulated`]) or
//! the three-level master equation ([`Engine::Lindblad`]). Loops are always
//! named by execution order (`first`, `second`); the paper-style label
//! `η'η` lists them right to left and is only produced by [`LoopOrder::label`].

mod adiabatic;
mod gate;
mod interferometry;
mod norm;
mod sequence;

pub use adiabatic::adiabaticity_amplitudes;
pub use gate::{
    gate_output, nonunitary_gate, theta_im_cell, theta_im_map, GateOutput, GateTransfer,
};
pub use interferometry::{interferometer_input, real_phase_interferometry, real_phase_sweep};
pub use norm::{
    imag_phase_ratio, open_loop_scan, time_resolved_survival, LinearFit, OpenLoopScan,
    SurvivalCurve, SurvivalKind,
};
pub use sequence::{run_sequence, SequenceState};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use crate::dynamics::{LoopSchedule, RampShape, GAMMA_F_DEFAULT};
use crate::error::{Error, Result};
use crate::model::{Branch, Direction, DriveParams};

/// Propagation engine behind a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Analytic,
    Simulated,
    Lindblad,
}

impl Engine {
    pub fn tag(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Simulated => "simulated",
            Engine::Lindblad => "lindblad",
        }
    }

    pub fn parse(s: &str) -> Option<Engine> {
        match s {
            "analytic" => Some(Engine::Analytic),
            "simulated" | "nh" => Some(Engine::Simulated),
            "lindblad" => Some(Engine::Lindblad),
            _ => None,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Knobs shared by all protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSettings {
    pub shape: RampShape,
    pub tol: f64,
    /// `f -> e` rate for the Lindblad engine; `gamma_e` follows from Gamma.
    pub gamma_f: f64,
}

impl Default for ProtocolSettings {
    fn default() -> Self {
        ProtocolSettings {
            shape: RampShape::default(),
            tol: 1e-10,
            gamma_f: GAMMA_F_DEFAULT,
        }
    }
}

impl ProtocolSettings {
    pub fn with_shape(self, shape: RampShape) -> Self {
        ProtocolSettings { shape, ..self }
    }

    pub fn schedule(
        &self,
        direction: Direction,
        duration: f64,
        winding_fraction: f64,
    ) -> Result<LoopSchedule> {
        LoopSchedule::with_shape(direction, duration, winding_fraction, self.shape)
    }
}

/// Two loops in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LoopOrder {
    pub first: Direction,
    pub second: Direction,
}

impl LoopOrder {
    pub fn new(first: Direction, second: Direction) -> Self {
        LoopOrder { first, second }
    }

    /// Paper label `η'η`: the second loop written first.
    pub fn label(self) -> String {
        format!("{}{}", self.second.label(), self.first.label())
    }

    /// Inverse of [`LoopOrder::label`], accepting `+`/`-` (or `p`/`m`).
    pub fn from_label(label: &str) -> Option<LoopOrder> {
        let dir = |c: char| match c {
            '+' | 'p' => Some(Direction::Plus),
            '-' | 'm' | '\u{2212}' => Some(Direction::Minus),
            _ => None,
        };
        let mut chars = label.chars();
        let second = dir(chars.next()?)?;
        let first = dir(chars.next()?)?;
        if chars.next().is_some() {
            return None;
        }
        Some(LoopOrder { first, second })
    }

    pub fn reversed(self) -> Self {
        LoopOrder {
            first: self.second,
            second: self.first,
        }
    }

    pub fn is_same_direction(self) -> bool {
        self.first == self.second
    }

    pub fn all() -> [LoopOrder; 4] {
        use Direction::{Minus, Plus};
        [
            LoopOrder::new(Minus, Plus),
            LoopOrder::new(Plus, Minus),
            LoopOrder::new(Plus, Plus),
            LoopOrder::new(Minus, Minus),
        ]
    }
}

/// One operation of a composite sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Loop(Direction),
    Swap,
}

/// Loop -> swap -> loop.
pub fn interferometer_sequence(order: LoopOrder) -> [Step; 3] {
    [
        Step::Loop(order.first),
        Step::Swap,
        Step::Loop(order.second),
    ]
}

/// Loop -> swap -> loop -> swap.
pub fn gate_sequence(order: LoopOrder) -> [Step; 4] {
    [
        Step::Loop(order.first),
        Step::Swap,
        Step::Loop(order.second),
        Step::Swap,
    ]
}

/// Branch continuation for estimators known only modulo `modulus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTracker {
    pub previous_angle: f64,
    pub modulus: f64,
}

impl BranchTracker {
    pub fn new(seed: f64, modulus: f64) -> Self {
        BranchTracker {
            previous_angle: seed,
            modulus,
        }
    }

    /// Tracker for the quarter-angle interferometric estimator.
    pub fn quarter(seed: f64) -> Self {
        Self::new(seed, PI / 2.0)
    }

    /// Branch shift `k` putting `principal + k * modulus` nearest to `reference`.
    pub fn branch_index(principal: f64, reference: f64, modulus: f64) -> i64 {
        ((reference - principal) / modulus).round() as i64
    }

    /// Continues the sequence and returns `(value, k)`.
    pub fn update(&mut self, principal: f64) -> (f64, i64) {
        let k = Self::branch_index(principal, self.previous_angle, self.modulus);
        let v = principal + k as f64 * self.modulus;
        self.previous_angle = v;
        (v, k)
    }
}

/// Outcome of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub theta_r: Option<f64>,
    pub theta_im: Option<f64>,
    /// Named raw observables the estimates are computed from.
    pub raw: BTreeMap<String, f64>,
    pub params: DriveParams,
    pub duration: f64,
    pub order: Option<LoopOrder>,
    pub branch: Option<Branch>,
    pub engine: Engine,
    pub method: &'static str,
    /// Branch index of the reported angle relative to the principal window.
    pub branch_shift: Option<i64>,
}

impl ProtocolResult {
    pub(crate) fn new(
        params: DriveParams,
        duration: f64,
        engine: Engine,
        method: &'static str,
    ) -> Self {
        ProtocolResult {
            theta_r: None,
            theta_im: None,
            raw: BTreeMap::new(),
            params,
            duration,
            order: None,
            branch: None,
            engine,
            method,
            branch_shift: None,
        }
    }

    pub fn raw(&self, key: &str) -> Option<f64> {
        self.raw.get(key).copied()
    }
}

fn wrap_pi(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Quarter-angle estimator in the principal window `(-pi/4, pi/4]`.
///
/// `x`, `y` are the tomography expectations and `frame_phase` is
/// `arg(conj(<L-|R->) <L+|R+>)`, the phase the bi-orthogonal products add to
/// the cross term. The sign flip of the swap is removed so that equal loops
/// give zero.
pub fn estimate_theta_r(x: f64, y: f64, frame_phase: f64) -> f64 {
    0.25 * wrap_pi((-y).atan2(-x) + frame_phase)
}

/// Direction-ratio estimator `-(1/4) ln(P(C+)/P(C-))`.
pub fn estimate_theta_im_ratio(p_plus: f64, p_minus: f64) -> Result<f64> {
    for p in [p_plus, p_minus] {
        if !(p >= 1e-12) || !p.is_finite() {
            return Err(Error::VanishingSurvival(p));
        }
    }
    Ok(-0.25 * (p_plus / p_minus).ln())
}

/// Effective gate phase from the output population at `P_in = 1/2`.
pub fn estimate_theta_im_gate(p_minus_out: f64) -> Result<f64> {
    if !(p_minus_out > 0.0 && p_minus_out < 1.0) {
        return Err(Error::VanishingSurvival(p_minus_out.min(1.0 - p_minus_out)));
    }
    Ok(0.125 * (p_minus_out / (1.0 - p_minus_out)).ln())
}

/// Forward gate model `P_out(P_in)` for an effective phase.
pub fn gate_transfer_closed_form(p_in: f64, theta_eff: f64) -> f64 {
    let up = p_in * (4.0 * theta_eff).exp();
    let down = (1.0 - p_in) * (-4.0 * theta_eff).exp();
    if up + down == 0.0 {
        return 0.0;
    }
    up / (up + down)
}
