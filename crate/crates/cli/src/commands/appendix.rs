use std::f64::consts::PI;

use nhberry_core::dynamics::{propagate_nh, sample_grid};
use nhberry_core::geometry::{
    alpha_from_params, delta_z_prediction, eigenstate_z, imag_connection_rate, line_integral_phase,
    params_from_alpha, surface_integral_phase, Patch, PatchAxis,
};
use nhberry_core::model::frame;
use nhberry_core::protocols::adiabaticity_amplitudes;
use nhberry_core::{Branch, Direction, DriveParams};

use super::{branch_tag, table, to_mhz};
use crate::config::RunConfig;
use crate::error::Result;
use crate::plot::PlotSpec;
use crate::runner::par_map;
use crate::table::Cell;
use crate::Artifact;

pub(super) fn run(config: &RunConfig) -> Result<Vec<Artifact>> {
    let mut out = adiabaticity(config)?;
    out.extend(z_traces(config)?);
    out.push(alpha_round_trips(config));
    out.push(stokes_residuals(config)?);
    Ok(out)
}

fn adiabaticity(config: &RunConfig) -> Result<Vec<Artifact>> {
    let preset = config.preset(&config.appendix_schedule);
    let schedule = preset.schedule(Direction::Plus)?;
    let ts = sample_grid(preset.duration, config.appendix_samples);
    let gamma = config.drive.gamma;
    let grid: Vec<(f64, f64)> = config
        .fig3_detunings
        .iter()
        .flat_map(|&d| config.fig3_j.iter().map(move |&j| (d, j)))
        .collect();
    let maxima = par_map(config.workers, &grid, |&(d, j)| {
        let p = DriveParams::new(j, d, gamma).ok()?;
        let (a, b) = adiabaticity_amplitudes(&p, &schedule, &ts).ok()?;
        Some((
            a.iter().copied().fold(0.0, f64::max),
            b.iter().copied().fold(0.0, f64::max),
        ))
    });
    let mut max_t = table(
        "appendix",
        config,
        &[
            ("delta_mhz", "MHz"),
            ("j", "rad/us"),
            ("max_a_plus", ""),
            ("max_a_minus", ""),
        ],
    );
    for (&(d, j), m) in grid.iter().zip(maxima) {
        max_t.push(vec![
            to_mhz(d).into(),
            j.into(),
            m.map(|m| m.0).into(),
            m.map(|m| m.1).into(),
        ]);
    }
    let mut curves = table(
        "appendix",
        config,
        &[
            ("delta_mhz", "MHz"),
            ("j", "rad/us"),
            ("t", "us"),
            ("a_plus", ""),
            ("a_minus", ""),
        ],
    );
    for &d in &config.fig3_detunings {
        for &j in &config.appendix_curve_j {
            let Ok(p) = DriveParams::new(j, d, gamma) else {
                continue;
            };
            let (a, b) = adiabaticity_amplitudes(&p, &schedule, &ts)?;
            for (k, &t) in ts.iter().enumerate() {
                curves.push(vec![
                    to_mhz(d).into(),
                    j.into(),
                    t.into(),
                    a[k].into(),
                    b[k].into(),
                ]);
            }
        }
    }
    Ok(vec![
        Artifact::new("appendix_adiabaticity", curves),
        Artifact::new("appendix_adiabaticity_max", max_t),
    ])
}

fn z_traces(config: &RunConfig) -> Result<Vec<Artifact>> {
    let p = config.drive;
    let preset = config.preset(&config.appendix_z_schedule);
    let n = config.samples.max(2) * (preset.duration / 3.0).ceil().max(1.0) as usize;
    let branches = [Branch::Plus, Branch::Minus];
    let runs = par_map(config.workers, &branches, |&b| -> Result<Vec<Vec<Cell>>> {
        let psi0 = frame(&p, 0.0)?.right(b);
        let z0 = eigenstate_z(&p, b)?;
        let mut cols: Vec<Vec<Cell>> = Vec::new();
        for dir in [Direction::Plus, Direction::Minus] {
            let schedule = preset.schedule(dir)?;
            let rec = propagate_nh(&p, &schedule, &psi0, config.tol, n)?;
            let mut z = Vec::new();
            let mut pred = Vec::new();
            let mut rate = Vec::new();
            let mut half = Vec::new();
            for (k, &t) in rec.times.iter().enumerate() {
                let zk = rec.bloch[k][2];
                z.push(zk.into());
                pred.push(delta_z_prediction(&p, &schedule, b, t).ok().into());
                rate.push(imag_connection_rate(&p, &schedule, b, t).ok().into());
                half.push((0.5 * p.gamma * (zk - z0)).into());
            }
            if cols.is_empty() {
                cols.push(rec.times.iter().map(|&t| Cell::Num(t)).collect());
            }
            cols.extend([z, pred, rate, half]);
        }
        Ok(cols)
    });
    let mut out = Vec::new();
    for (b, cols) in branches.into_iter().zip(runs) {
        let cols = cols?;
        let mut t = table(
            "appendix",
            config,
            &[
                ("t", "us"),
                ("z_sim_cplus", ""),
                ("z_pred_cplus", ""),
                ("imag_connection_rate_cplus", "1/us"),
                ("half_gamma_delta_z_cplus", "1/us"),
                ("z_sim_cminus", ""),
                ("z_pred_cminus", ""),
                ("imag_connection_rate_cminus", "1/us"),
                ("half_gamma_delta_z_cminus", "1/us"),
            ],
        );
        for k in 0..cols[0].len() {
            t.push(cols.iter().map(|c| c[k].clone()).collect());
        }
        let title = format!("z(t) from R{}, {} us loops", b.label(), preset.duration);
        let plot = PlotSpec::new(
            title,
            "t",
            &[
                "z_sim_cplus",
                "z_pred_cplus",
                "z_sim_cminus",
                "z_pred_cminus",
            ],
        );
        out.push(Artifact::new(format!("appendix_z_{}", branch_tag(b)), t).with_plot(plot));
    }
    Ok(out)
}

fn alpha_round_trips(config: &RunConfig) -> Artifact {
    let mut t = table(
        "appendix",
        config,
        &[
            ("j", "rad/us"),
            ("delta_mhz", "MHz"),
            ("alpha_r", "rad"),
            ("alpha_i", ""),
            ("j_back", "rad/us"),
            ("delta_back_mhz", "MHz"),
            ("error", "rad/us"),
        ],
    );
    let gamma = config.drive.gamma;
    for &d in &config.fig3_detunings {
        for &j in &config.fig3_j {
            let fwd = DriveParams::new(j, d, gamma).and_then(|p| Ok((p, alpha_from_params(&p)?)));
            let row = match fwd {
                Ok((p, a)) => {
                    let back = params_from_alpha(a, gamma).ok();
                    let err = back.map(|q| (q.j - p.j).abs().max((q.delta - p.delta).abs()));
                    vec![
                        j.into(),
                        to_mhz(d).into(),
                        a.alpha_r.into(),
                        a.alpha_i.into(),
                        back.map(|q| q.j).into(),
                        back.map(|q| to_mhz(q.delta)).into(),
                        err.into(),
                    ]
                }
                Err(_) => {
                    let mut r = vec![Cell::Num(j), Cell::Num(to_mhz(d))];
                    r.resize(7, Cell::Missing);
                    r
                }
            };
            t.push(row);
        }
    }
    Artifact::new("appendix_alpha", t)
}

/// Fixed rectangles in the `(alpha, phi)` plane.
fn stokes_patches() -> Vec<Patch> {
    let mk = |axis, fixed, a0, a1, phi0, phi1| Patch {
        axis,
        fixed,
        a0,
        a1,
        phi0,
        phi1,
        resolution: 32,
    };
    vec![
        mk(PatchAxis::AlphaR, 0.3, 0.2, 1.4, 0.0, 2.0 * PI),
        mk(PatchAxis::AlphaR, 0.8, 0.5, 2.5, 0.3, 2.1),
        mk(PatchAxis::AlphaR, 0.05, 1.0, 1.2, 0.0, PI),
        mk(PatchAxis::AlphaI, 0.7, 0.1, 0.9, 0.0, 2.0 * PI),
        mk(PatchAxis::AlphaI, 2.0, 0.3, 1.5, 1.0, 4.0),
        mk(PatchAxis::AlphaI, 1.2, 0.05, 0.6, 0.0, PI / 2.0),
    ]
}

fn stokes_residuals(config: &RunConfig) -> Result<Artifact> {
    let mut t = table(
        "appendix",
        config,
        &[
            ("axis", ""),
            ("fixed", ""),
            ("a0", ""),
            ("a1", ""),
            ("phi0", "rad"),
            ("phi1", "rad"),
            ("branch", ""),
            ("surface_re", "rad"),
            ("surface_im", ""),
            ("line_re", "rad"),
            ("line_im", ""),
            ("residual", "rad"),
        ],
    );
    for patch in stokes_patches() {
        let path = patch.boundary(4000)?;
        for b in [Branch::Plus, Branch::Minus] {
            let s = surface_integral_phase(&patch, b)?.to_complex();
            let l = line_integral_phase(&path, b).phase.to_complex();
            let axis = match patch.axis {
                PatchAxis::AlphaR => "alpha_r",
                PatchAxis::AlphaI => "alpha_i",
            };
            t.push(vec![
                axis.into(),
                patch.fixed.into(),
                patch.a0.into(),
                patch.a1.into(),
                patch.phi0.into(),
                patch.phi1.into(),
                b.label().into(),
                s.re.into(),
                s.im.into(),
                l.re.into(),
                l.im.into(),
                (s - l).norm().into(),
            ]);
        }
    }
    Ok(Artifact::new("appendix_stokes", t))
}
