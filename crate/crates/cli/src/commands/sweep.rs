//! Generic grid sweeps: `<protocol> <axis>=lo:hi:n ...`.

use std::f64::consts::PI;

use nhberry_core::model::{berry_phase, frame};
use nhberry_core::protocols::{imag_phase_ratio, real_phase_interferometry, theta_im_cell};
use nhberry_core::{Direction, DriveParams};

use super::table_owned;
use crate::config::{parse_grid, RunConfig};
use crate::error::{CliError, Result};
use crate::runner::par_map;
use crate::table::Cell;
use crate::Artifact;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Eigen,
    Berry,
    Ratio,
    Interferometer,
    Gate,
}

impl Protocol {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "eigen" => Protocol::Eigen,
            "berry" => Protocol::Berry,
            "ratio" => Protocol::Ratio,
            "interferometer" => Protocol::Interferometer,
            "gate" => Protocol::Gate,
            _ => return None,
        })
    }

    fn outputs(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Protocol::Eigen => &[
                ("e_plus_re", "rad/us"),
                ("e_plus_im", "1/us"),
                ("e_minus_re", "rad/us"),
                ("e_minus_im", "1/us"),
            ],
            Protocol::Berry => &[("theta_r", "rad"), ("theta_im", "rad")],
            Protocol::Ratio => &[("theta_im", "rad"), ("p_plus", ""), ("p_minus", "")],
            Protocol::Interferometer => &[("theta_r", "rad")],
            Protocol::Gate => &[("theta_im_eff", "rad")],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    J,
    DeltaMhz,
    Gamma,
    Duration,
}

impl Axis {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "j" => Axis::J,
            "delta_mhz" => Axis::DeltaMhz,
            "gamma" => Axis::Gamma,
            "duration" => Axis::Duration,
            _ => return None,
        })
    }

    fn column(self) -> (&'static str, &'static str) {
        match self {
            Axis::J => ("j", "rad/us"),
            Axis::DeltaMhz => ("delta_mhz", "MHz"),
            Axis::Gamma => ("gamma", "1/us"),
            Axis::Duration => ("duration", "us"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepExpr {
    pub protocol: Protocol,
    pub axes: Vec<(Axis, Vec<f64>)>,
}

impl SweepExpr {
    /// Grid points in row-major order, first axis outermost.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.axes.iter().fold(vec![Vec::new()], |acc, (_, values)| {
            acc.into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect()
        })
    }
}

pub fn parse_expr(expr: &str) -> Result<SweepExpr> {
    let mut words = expr.split_whitespace();
    let name = words
        .next()
        .ok_or_else(|| CliError::config("empty sweep expression"))?;
    let protocol = Protocol::parse(name).ok_or_else(|| {
        CliError::config(format!(
            "unknown protocol '{name}' (eigen, berry, ratio, interferometer, gate)"
        ))
    })?;
    let mut axes: Vec<(Axis, Vec<f64>)> = Vec::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| {
            CliError::config(format!("malformed axis '{w}', expected name=lo:hi:n"))
        })?;
        let axis = Axis::parse(k).ok_or_else(|| {
            CliError::config(format!(
                "unknown axis '{k}' (j, delta_mhz, gamma, duration)"
            ))
        })?;
        if axes.iter().any(|(a, _)| *a == axis) {
            return Err(CliError::config(format!("axis '{k}' given twice")));
        }
        let values = parse_grid(v).map_err(|e| CliError::config(format!("axis '{k}': {e}")))?;
        axes.push((axis, values));
    }
    Ok(SweepExpr { protocol, axes })
}

fn evaluate(
    config: &RunConfig,
    protocol: Protocol,
    axes: &[Axis],
    point: &[f64],
) -> Vec<Option<f64>> {
    let preset = config.preset(&config.sweep_schedule);
    let settings = preset.settings(&config.settings());
    let (mut j, mut delta, mut gamma, mut duration) = (
        config.drive.j,
        config.drive.delta,
        config.drive.gamma,
        preset.duration,
    );
    for (a, &v) in axes.iter().zip(point) {
        match a {
            Axis::J => j = v,
            Axis::DeltaMhz => delta = 2.0 * PI * v,
            Axis::Gamma => gamma = v,
            Axis::Duration => duration = v,
        }
    }
    let n = protocol.outputs().len();
    let compute = || -> nhberry_core::Result<Vec<Option<f64>>> {
        let p = DriveParams::new(j, delta, gamma)?;
        Ok(match protocol {
            Protocol::Eigen => {
                let fr = frame(&p, 0.0)?;
                vec![
                    Some(fr.e_plus.re),
                    Some(fr.e_plus.im),
                    Some(fr.e_minus.re),
                    Some(fr.e_minus.im),
                ]
            }
            Protocol::Berry => {
                let th = berry_phase(&p, config.sweep_branch, Direction::Plus, 1.0)?;
                vec![Some(th.real_part), Some(th.imag_part)]
            }
            Protocol::Ratio => {
                let r = imag_phase_ratio(
                    &p,
                    duration,
                    config.sweep_branch,
                    config.sweep_engine,
                    &settings,
                )?;
                vec![
                    r.theta_im,
                    r.raw.get("p_plus").copied(),
                    r.raw.get("p_minus").copied(),
                ]
            }
            Protocol::Interferometer => {
                let r = real_phase_interferometry(
                    &p,
                    duration,
                    config.sweep_order,
                    config.sweep_engine,
                    &settings,
                )?;
                vec![r.theta_r]
            }
            Protocol::Gate => vec![Some(theta_im_cell(
                j,
                delta,
                gamma,
                duration,
                config.sweep_order,
                config.sweep_engine,
                &settings,
            )?)],
        })
    };
    compute().unwrap_or_else(|_| vec![None; n])
}

pub(super) fn run(config: &RunConfig, expr: &str) -> Result<Vec<Artifact>> {
    let sweep = parse_expr(expr)?;
    let axes: Vec<Axis> = sweep.axes.iter().map(|(a, _)| *a).collect();
    let points = sweep.points();
    let values = par_map(config.workers, &points, |pt| {
        evaluate(config, sweep.protocol, &axes, pt)
    });
    let mut columns: Vec<(String, String)> = axes
        .iter()
        .map(|a| {
            let (c, u) = a.column();
            (c.to_string(), u.to_string())
        })
        .collect();
    columns.extend(
        sweep
            .protocol
            .outputs()
            .iter()
            .map(|(c, u)| (c.to_string(), u.to_string())),
    );
    let mut t = table_owned("sweep", config, columns);
    for (pt, vals) in points.iter().zip(values) {
        let mut row: Vec<Cell> = pt.iter().map(|&x| Cell::Num(x)).collect();
        row.extend(vals.into_iter().map(Cell::from));
        t.push(row);
    }
    Ok(vec![Artifact::new("sweep", t)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        let e = parse_expr("gate j=1:2:2 delta_mhz=0:1:3").unwrap();
        assert_eq!(e.protocol, Protocol::Gate);
        let pts = e.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![1.0, 0.0]);
        assert_eq!(pts[1], vec![1.0, 0.5]);
        assert_eq!(pts[5], vec![2.0, 1.0]);
        assert_eq!(
            parse_expr("eigen").unwrap().points(),
            vec![Vec::<f64>::new()]
        );
        for bad in [
            "",
            "fly j=1:2:2",
            "ratio j=1:2",
            "ratio k=1:2:2",
            "ratio j=1:2:2 j=1:2:2",
            "ratio j",
        ] {
            assert!(parse_expr(bad).is_err(), "{bad}");
        }
    }
}
