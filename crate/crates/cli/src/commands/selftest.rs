//! Fast consistency checks on the configured drive and the gate presets.

use std::f64::consts::PI;

use nhberry_core::dynamics::sample_grid;
use nhberry_core::geometry::{alpha_from_params, params_from_alpha};
use nhberry_core::model::{berry_connection, berry_phase, frame, hamiltonian};
use nhberry_core::numerics::{central_diff, CVec2, Complex, FD_STEP};
use nhberry_core::protocols::{
    adiabaticity_amplitudes, imag_phase_ratio, Engine, GateTransfer, LoopOrder,
};
use nhberry_core::{Branch, Direction, DriveParams};

use super::table;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::Artifact;

/// One check: passes when `value < bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            pass: value < bound,
        }
    }
}

fn eigen_checks(p: &DriveParams) -> nhberry_core::Result<Vec<Check>> {
    let (mut residual, mut biorth, mut fd) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..8 {
        let phi = k as f64 * PI / 4.0;
        let fr = frame(p, phi)?;
        let h = hamiltonian(p, phi);
        for b in [Branch::Plus, Branch::Minus] {
            let (r, l, e) = (fr.right(b), fr.left(b), fr.energy(b));
            residual = residual
                .max((h.mul_vec(&r) - r.scale(e)).norm())
                .max((l.row_mul(&h) - l.scale(e)).norm());
            biorth = biorth.max(l.contract(&fr.right(b.other())).norm());
            let comp = |i: usize| {
                central_diff(
                    |x| frame(p, x).map(|f| f.right(b)[i]).unwrap_or_default(),
                    phi,
                    FD_STEP,
                )
            };
            let dr = CVec2::new([comp(0), comp(1)]);
            let a = Complex::new(0.0, 1.0) * l.contract(&dr) / fr.overlap(b);
            fd = fd.max((a - berry_connection(p, b)?).norm());
        }
    }
    Ok(vec![
        Check::new("eigen_residual", residual, 1e-10),
        Check::new("biorthogonality", biorth, 1e-10),
        Check::new("connection_finite_difference", fd, 1e-6),
    ])
}

fn hermitian_baseline() -> nhberry_core::Result<Check> {
    let p = DriveParams::new(1.0, 0.0, 0.0)?;
    let th = berry_phase(&p, Branch::Plus, Direction::Plus, 1.0)?;
    Ok(Check::new(
        "hermitian_baseline",
        (th.real_part - PI).abs() + th.imag_part.abs(),
        1e-12,
    ))
}

fn gate_checks(config: &RunConfig) -> nhberry_core::Result<Vec<Check>> {
    let settings = config.settings();
    let mut out = Vec::new();
    for set in &config.fig5_sets {
        let ratio = berry_phase(&set.params, Branch::Plus, Direction::Plus, 1.0)?
            .imag_part
            .abs();
        out.push(Check::new(
            format!("theta_im_{}", set.name),
            ratio,
            f64::INFINITY,
        ));
        let preset = config.preset(&set.preset);
        let s = preset.settings(&settings);
        let order = LoopOrder::new(Direction::Minus, Direction::Plus);
        let tr = GateTransfer::new(&set.params, preset.duration, order, Engine::Analytic, &s)?;
        let ends = tr.p_minus_out(0.0)?.0.abs() + (tr.p_minus_out(1.0)?.0 - 1.0).abs();
        out.push(Check::new(
            format!("gate_endpoints_{}", set.name),
            ends,
            1e-12,
        ));
        let same = LoopOrder::new(Direction::Plus, Direction::Plus);
        let id = GateTransfer::new(&set.params, preset.duration, same, Engine::Analytic, &s)?;
        let dev = (0..=10)
            .map(|k| {
                let q = k as f64 / 10.0;
                id.p_minus_out(q).map(|(o, _)| (o - q).abs())
            })
            .collect::<nhberry_core::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.push(Check::new(
            format!("gate_identity_{}", set.name),
            dev,
            1e-12,
        ));
    }
    Ok(out)
}

fn ratio_identity(config: &RunConfig) -> nhberry_core::Result<Check> {
    let p = &config.drive;
    let mut err = 0.0f64;
    for b in [Branch::Plus, Branch::Minus] {
        let r = imag_phase_ratio(p, 3.0, b, Engine::Analytic, &config.settings())?;
        let (pp, pm) = (
            r.raw("p_plus").unwrap_or(f64::NAN),
            r.raw("p_minus").unwrap_or(f64::NAN),
        );
        let th = berry_phase(p, b, Direction::Plus, 1.0)?.imag_part;
        err = err.max((pp / pm / (-4.0 * th).exp() - 1.0).abs());
    }
    Ok(Check::new("ratio_identity", err, 1e-12))
}

fn adiabaticity(config: &RunConfig) -> nhberry_core::Result<Check> {
    let preset = config.preset(&config.appendix_schedule);
    let schedule = preset.schedule(Direction::Plus)?;
    let ts = sample_grid(preset.duration, 201);
    let mut m = 0.0f64;
    for &d in &config.fig3_detunings {
        for &j in &config.fig3_j {
            let p = DriveParams::new(j, d, config.drive.gamma)?;
            let (a, b) = adiabaticity_amplitudes(&p, &schedule, &ts)?;
            m = a.iter().chain(&b).copied().fold(m, f64::max);
        }
    }
    Ok(Check::new("max_adiabaticity_amplitude", m, 0.3))
}

fn alpha_round_trip(p: &DriveParams) -> nhberry_core::Result<Check> {
    let q = params_from_alpha(alpha_from_params(p)?, p.gamma)?;
    Ok(Check::new(
        "alpha_round_trip",
        (q.j - p.j).abs().max((q.delta - p.delta).abs()),
        1e-10,
    ))
}

/// Runs all checks. A check whose computation fails is reported as failing.
pub fn selftest_checks(config: &RunConfig) -> Vec<Check> {
    let failed = |name: &str| vec![Check::new(name, f64::NAN, 0.0)];
    let mut out = Vec::new();
    out.extend(eigen_checks(&config.drive).unwrap_or_else(|_| failed("eigensystem")));
    out.extend(
        hermitian_baseline()
            .map(|c| vec![c])
            .unwrap_or_else(|_| failed("hermitian_baseline")),
    );
    out.extend(gate_checks(config).unwrap_or_else(|_| failed("gate")));
    out.extend(
        ratio_identity(config)
            .map(|c| vec![c])
            .unwrap_or_else(|_| failed("ratio_identity")),
    );
    out.extend(
        adiabaticity(config)
            .map(|c| vec![c])
            .unwrap_or_else(|_| failed("adiabaticity")),
    );
    out.extend(
        alpha_round_trip(&config.drive)
            .map(|c| vec![c])
            .unwrap_or_else(|_| failed("alpha_round_trip")),
    );
    out
}

pub(super) fn run(config: &RunConfig) -> Result<Vec<Artifact>> {
    let checks = selftest_checks(config);
    let mut t = table(
        "selftest",
        config,
        &[("check", ""), ("value", ""), ("bound", ""), ("pass", "")],
    );
    for c in &checks {
        let bound = if c.bound.is_finite() {
            c.bound.into()
        } else {
            crate::Cell::Missing
        };
        t.push(vec![
            c.name.as_str().into(),
            c.value.into(),
            bound,
            if c.pass { "pass" } else { "fail" }.into(),
        ]);
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::SelfTest(format!(
            "failed checks: {}",
            failed.join(", ")
        )));
    }
    Ok(vec![Artifact::new("selftest", t)])
}
