//! Norm-based measurements of the imaginary phase.

use crate::dynamics::{
    bloch_trajectory, propagate_lindblad, propagate_nh, propagate_operator, survival_probability,
    ThreeLevelParams, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::model::{
    berry_connection, berry_phase, dynamical_phase, frame, Branch, Direction, DriveParams,
};

use super::{estimate_theta_im_ratio, Engine, ProtocolResult, ProtocolSettings, SequenceState};

/// Survival after one loop from `|R_branch>` (winding fraction `f`).
fn loop_survival(
    params: &DriveParams,
    duration: f64,
    branch: Branch,
    direction: Direction,
    fraction: f64,
    engine: Engine,
    settings: &ProtocolSettings,
) -> Result<f64> {
    match engine {
        Engine::Analytic => {
            let lam = dynamical_phase(params, branch, duration)?.imag_part;
            let th = berry_phase(params, branch, direction, fraction)?.imag_part;
            Ok((-2.0 * (lam + th)).exp())
        }
        Engine::Simulated => {
            let schedule = settings.schedule(direction, duration, fraction)?;
            let psi0 = frame(params, 0.0)?.right(branch);
            let rec = propagate_nh(params, &schedule, &psi0, settings.tol, 2)?;
            Ok(*survival_probability(&rec)?
                .last()
                .ok_or(Error::EmptyRecord)?)
        }
        Engine::Lindblad => {
            let schedule = settings.schedule(direction, duration, fraction)?;
            let p3 = ThreeLevelParams::from_drive(*params, settings.gamma_f)?;
            let rho0 = SequenceState::lift(&frame(params, 0.0)?.right(branch));
            let rho = propagate_operator(&p3, &schedule, &rho0, settings.tol)?;
            Ok(SequenceState::Mixed(rho).manifold_block().trace().re)
        }
    }
}

fn ratio_measurement(
    params: &DriveParams,
    duration: f64,
    branch: Branch,
    fraction: f64,
    engine: Engine,
    settings: &ProtocolSettings,
) -> Result<ProtocolResult> {
    let p_plus = loop_survival(
        params,
        duration,
        branch,
        Direction::Plus,
        fraction,
        engine,
        settings,
    )?;
    let p_minus = loop_survival(
        params,
        duration,
        branch,
        Direction::Minus,
        fraction,
        engine,
        settings,
    )?;
    let theta = estimate_theta_im_ratio(p_plus, p_minus)?;
    let mut res = ProtocolResult::new(*params, duration, engine, "direction_ratio");
    res.theta_im = Some(theta);
    res.branch = Some(branch);
    res.raw.insert("p_plus".into(), p_plus);
    res.raw.insert("p_minus".into(), p_minus);
    res.raw.insert("ratio".into(), p_plus / p_minus);
    res.raw.insert("winding_fraction".into(), fraction);
    Ok(res)
}

/// Runs `C+` and `C-` from `|R_branch>` and returns
/// `theta_im = -(1/4) ln(P(C+)/P(C-))`, the imaginary phase of the `C+` loop.
pub fn imag_phase_ratio(
    params: &DriveParams,
    duration: f64,
    branch: Branch,
    engine: Engine,
    settings: &ProtocolSettings,
) -> Result<ProtocolResult> {
    ratio_measurement(params, duration, branch, 1.0, engine, settings)
}

/// Least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearFit {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidArgument(
                "a linear fit needs at least two (x, y) pairs".into(),
            ));
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        if sxx == 0.0 {
            return Err(Error::InvalidArgument(
                "a linear fit needs distinct abscissae".into(),
            ));
        }
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        Ok(LinearFit {
            slope,
            intercept: my - slope * mx,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenLoopScan {
    pub results: Vec<ProtocolResult>,
    pub fit: LinearFit,
}

/// Direction-ratio estimate for open paths `phi: 0 -> 2 pi f eta` at fixed
/// duration, with a linear fit of `theta_im` against `f`.
pub fn open_loop_scan(
    params: &DriveParams,
    duration: f64,
    branch: Branch,
    fractions: &[f64],
    engine: Engine,
    settings: &ProtocolSettings,
) -> Result<OpenLoopScan> {
    if let Some(bad) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "winding fraction {bad} outside (0, 1]"
        )));
    }
    let results = fractions
        .iter()
        .map(|&f| ratio_measurement(params, duration, branch, f, engine, settings))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<f64> = results
        .iter()
        .map(|r| r.theta_im.unwrap_or(f64::NAN))
        .collect();
    let fit = LinearFit::fit(fractions, &ys)?;
    Ok(OpenLoopScan { results, fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurvivalKind {
    CPlus,
    CMinus,
    Idle,
}

impl SurvivalKind {
    pub fn label(self) -> &'static str {
        match self {
            SurvivalKind::CPlus => "C+",
            SurvivalKind::CMinus => "C-",
            SurvivalKind::Idle => "idle",
        }
    }
}

/// Survival and Bloch data of one time-resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub kind: SurvivalKind,
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    /// Lab-frame Bloch vectors; empty for the analytic engine.
    pub bloch: Vec<[f64; 3]>,
    /// Bloch vectors in the instantaneous eigenframe; empty for the analytic engine.
    pub bloch_eigenframe: Vec<[f64; 3]>,
}

fn curve_from_record(kind: SurvivalKind, rec: &TrajectoryRecord) -> Result<SurvivalCurve> {
    let rotated = if kind == SurvivalKind::Idle {
        rec.bloch.clone()
    } else {
        bloch_trajectory(rec, true)?
    };
    Ok(SurvivalCurve {
        kind,
        times: rec.times.clone(),
        survival: survival_probability(rec)?,
        bloch: rec.bloch.clone(),
        bloch_eigenframe: rotated,
    })
}

/// Survival versus time for `C+`, `C-` and an idle reference.
///
/// Loops start in `|R_branch>`. The idle run has the drive off (`J = 0`) and
/// starts in the undriven eigenstate of the same branch.
pub fn time_resolved_survival(
    params: &DriveParams,
    duration: f64,
    branch: Branch,
    engine: Engine,
    settings: &ProtocolSettings,
    n_samples: usize,
) -> Result<Vec<SurvivalCurve>> {
    let idle_params = DriveParams::unchecked(0.0, params.delta, params.gamma)?;
    let mut out = Vec::with_capacity(3);
    for kind in [
        SurvivalKind::CPlus,
        SurvivalKind::CMinus,
        SurvivalKind::Idle,
    ] {
        let (p, dir) = match kind {
            SurvivalKind::CPlus => (*params, Direction::Plus),
            SurvivalKind::CMinus => (*params, Direction::Minus),
            SurvivalKind::Idle => (idle_params, Direction::Plus),
        };
        let schedule = settings.schedule(dir, duration, 1.0)?;
        let psi0 = frame(&p, 0.0)?.right(branch);
        let curve = match engine {
            Engine::Analytic => {
                let times = crate::dynamics::sample_grid(duration, n_samples);
                let e = frame(&p, 0.0)?.energy(branch);
                let a_im = if kind == SurvivalKind::Idle {
                    0.0
                } else {
                    berry_connection(&p, branch)?.im
                };
                let survival = times
                    .iter()
                    .map(|&t| {
                        let (phi, _) = schedule.phi_of_t(t)?;
                        Ok((2.0 * (e.im * t - a_im * phi)).exp())
                    })
                    .collect::<Result<Vec<_>>>()?;
                SurvivalCurve {
                    kind,
                    times,
                    survival,
                    bloch: Vec::new(),
                    bloch_eigenframe: Vec::new(),
                }
            }
            Engine::Simulated => curve_from_record(
                kind,
                &propagate_nh(&p, &schedule, &psi0, settings.tol, n_samples)?,
            )?,
            Engine::Lindblad => {
                let p3 = ThreeLevelParams::from_drive(p, settings.gamma_f)?;
                let rho0 = SequenceState::lift(&psi0);
                curve_from_record(
                    kind,
                    &propagate_lindblad(&p3, &schedule, &rho0, settings.tol, n_samples)?,
                )?
            }
        };
        out.push(curve);
    }
    Ok(out)
}
