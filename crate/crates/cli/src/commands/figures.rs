use nhberry_core::geometry::delta_z_prediction;
use nhberry_core::protocols::{
    gate_output, imag_phase_ratio, open_loop_scan, real_phase_sweep, theta_im_cell,
    time_resolved_survival, Engine, GateTransfer, LinearFit, LoopOrder, SurvivalKind,
};
use nhberry_core::{Branch, Direction, DriveParams};

use super::{branch_tag, detuning_name, order, order_tag, table, table_owned, to_mhz};
use crate::config::RunConfig;
use crate::error::Result;
use crate::plot::PlotSpec;
use crate::runner::par_map;
use crate::table::Cell;
use crate::Artifact;

const BRANCHES: [Branch; 2] = [Branch::Plus, Branch::Minus];

fn col(name: impl Into<String>, unit: &str) -> (String, String) {
    (name.into(), unit.to_string())
}

/// One `theta_r(J)` line: an order and engine along the J grid at fixed detuning.
fn fig2_line(config: &RunConfig, delta: f64, ord: LoopOrder, engine: Engine) -> Vec<Option<f64>> {
    let preset = config.preset(&config.fig2_schedule);
    let settings = preset.settings(&config.settings());
    let points: Vec<(usize, DriveParams)> = config
        .fig2_j
        .iter()
        .enumerate()
        .filter_map(|(k, &j)| {
            DriveParams::new(j, delta, config.drive.gamma)
                .ok()
                .map(|p| (k, p))
        })
        .collect();
    let params: Vec<DriveParams> = points.iter().map(|(_, p)| *p).collect();
    let mut out = vec![None; config.fig2_j.len()];
    for ((k, _), r) in points.iter().zip(real_phase_sweep(
        &params,
        preset.duration,
        ord,
        engine,
        &settings,
    )) {
        out[*k] = r.ok().and_then(|r| r.theta_r);
    }
    out
}

pub(super) fn fig2(config: &RunConfig) -> Result<Vec<Artifact>> {
    let lines: Vec<(Engine, LoopOrder)> = [
        (Engine::Analytic, "+-"),
        (Engine::Analytic, "-+"),
        (Engine::Simulated, "+-"),
        (Engine::Simulated, "-+"),
        (Engine::Simulated, "++"),
        (Engine::Simulated, "--"),
    ]
    .into_iter()
    .map(|(e, l)| (e, order(l)))
    .collect();
    let jobs: Vec<(f64, Engine, LoopOrder)> = config
        .fig2_detunings
        .iter()
        .flat_map(|&d| lines.iter().map(move |&(e, o)| (d, e, o)))
        .collect();
    let results = par_map(config.workers, &jobs, |&(d, e, o)| {
        fig2_line(config, d, o, e)
    });
    let names: Vec<String> = lines
        .iter()
        .map(|(e, o)| {
            let short = if *e == Engine::Analytic {
                "analytic"
            } else {
                "sim"
            };
            format!("theta_r_{short}_{}", order_tag(*o))
        })
        .collect();
    let mut out = Vec::new();
    for (i, &d) in config.fig2_detunings.iter().enumerate() {
        let mut columns = vec![col("j", "rad/us")];
        columns.extend(names.iter().map(|n| col(n.clone(), "rad")));
        let mut t = table_owned("fig2", config, columns);
        let block = &results[i * lines.len()..(i + 1) * lines.len()];
        for (k, &j) in config.fig2_j.iter().enumerate() {
            let mut row = vec![Cell::Num(j)];
            row.extend(block.iter().map(|line| Cell::from(line[k])));
            t.push(row);
        }
        let ys: Vec<&str> = names.iter().map(String::as_str).collect();
        let title = format!("real geometric phase, Delta/2pi = {:.2} MHz", to_mhz(d));
        out.push(
            Artifact::new(format!("fig2_{}", detuning_name(d)), t)
                .with_plot(PlotSpec::new(title, "j", &ys)),
        );
    }
    Ok(out)
}

struct Fig3Cell {
    p_plus: Option<f64>,
    p_minus: Option<f64>,
    ratio_sim: Option<f64>,
    theta_sim: Option<f64>,
    ratio_analytic: Option<f64>,
    theta_analytic: Option<f64>,
}

fn fig3_cell(config: &RunConfig, j: f64, delta: f64, branch: Branch) -> Fig3Cell {
    let preset = config.preset(&config.fig3_schedule);
    let settings = preset.settings(&config.settings());
    let run = |engine| {
        DriveParams::new(j, delta, config.drive.gamma)
            .and_then(|p| imag_phase_ratio(&p, preset.duration, branch, engine, &settings))
            .ok()
    };
    let sim = run(Engine::Simulated);
    let an = run(Engine::Analytic);
    Fig3Cell {
        p_plus: sim.as_ref().and_then(|r| r.raw("p_plus")),
        p_minus: sim.as_ref().and_then(|r| r.raw("p_minus")),
        ratio_sim: sim.as_ref().and_then(|r| r.raw("ratio")),
        theta_sim: sim.as_ref().and_then(|r| r.theta_im),
        ratio_analytic: an.as_ref().and_then(|r| r.raw("ratio")),
        theta_analytic: an.as_ref().and_then(|r| r.theta_im),
    }
}

pub(super) fn fig3(config: &RunConfig) -> Result<Vec<Artifact>> {
    let jobs: Vec<(f64, f64, Branch)> = config
        .fig3_detunings
        .iter()
        .flat_map(|&d| {
            config
                .fig3_j
                .iter()
                .flat_map(move |&j| BRANCHES.map(|b| (j, d, b)))
        })
        .collect();
    let cells = par_map(config.workers, &jobs, |&(j, d, b)| {
        fig3_cell(config, j, d, b)
    });
    let mut out = Vec::new();
    let per_detuning = config.fig3_j.len() * BRANCHES.len();
    for (i, &d) in config.fig3_detunings.iter().enumerate() {
        let mut columns = vec![col("j", "rad/us")];
        for b in BRANCHES {
            let t = branch_tag(b);
            columns.extend([
                col(format!("p_cplus_sim_{t}"), ""),
                col(format!("p_cminus_sim_{t}"), ""),
                col(format!("ratio_sim_{t}"), ""),
                col(format!("theta_im_sim_{t}"), "rad"),
                col(format!("ratio_analytic_{t}"), ""),
                col(format!("ratio_reconstructed_{t}"), ""),
                col(format!("theta_im_analytic_{t}"), "rad"),
            ]);
        }
        let mut t = table_owned("fig3", config, columns);
        let block = &cells[i * per_detuning..(i + 1) * per_detuning];
        for (k, &j) in config.fig3_j.iter().enumerate() {
            let mut row = vec![Cell::Num(j)];
            for c in &block[k * 2..k * 2 + 2] {
                row.extend([
                    c.p_plus.into(),
                    c.p_minus.into(),
                    c.ratio_sim.into(),
                    c.theta_sim.into(),
                    c.ratio_analytic.into(),
                    c.theta_analytic.map(|th| (-4.0 * th).exp()).into(),
                    c.theta_analytic.into(),
                ]);
            }
            t.push(row);
        }
        let title = format!(
            "imaginary geometric phase, Delta/2pi = {:.2} MHz",
            to_mhz(d)
        );
        let plot = PlotSpec::new(
            title,
            "j",
            &[
                "theta_im_sim_rp",
                "theta_im_analytic_rp",
                "theta_im_sim_rm",
                "theta_im_analytic_rm",
            ],
        );
        out.push(Artifact::new(format!("fig3_{}", detuning_name(d)), t).with_plot(plot));
    }
    out.extend(fig3_open_loop(config)?);
    Ok(out)
}

fn fig3_open_loop(config: &RunConfig) -> Result<Vec<Artifact>> {
    let preset = config.preset(&config.fig3_schedule);
    let settings = preset.settings(&config.settings());
    let fs = &config.fig3_fractions;
    let jobs: Vec<(f64, Branch, Engine)> = config
        .fig3_detunings
        .iter()
        .flat_map(|&d| {
            BRANCHES
                .into_iter()
                .flat_map(move |b| [Engine::Analytic, Engine::Simulated].map(|e| (d, b, e)))
        })
        .collect();
    let scans = par_map(config.workers, &jobs, |&(d, b, e)| {
        DriveParams::new(config.fig3_open_loop_j, d, config.drive.gamma)
            .and_then(|p| open_loop_scan(&p, preset.duration, b, fs, e, &settings))
            .ok()
    });
    let mut points = table(
        "fig3",
        config,
        &[
            ("delta_mhz", "MHz"),
            ("branch", ""),
            ("fraction", ""),
            ("theta_im_analytic", "rad"),
            ("theta_im_sim", "rad"),
        ],
    );
    let mut fits = table(
        "fig3",
        config,
        &[
            ("delta_mhz", "MHz"),
            ("branch", ""),
            ("slope_analytic", "rad"),
            ("intercept_analytic", "rad"),
            ("slope_sim", "rad"),
            ("intercept_sim", "rad"),
        ],
    );
    for (chunk, &(d, b, _)) in scans.chunks(2).zip(jobs.iter().step_by(2)) {
        let (an, sim) = (&chunk[0], &chunk[1]);
        let theta = |s: &Option<nhberry_core::protocols::OpenLoopScan>, k: usize| -> Cell {
            s.as_ref().and_then(|s| s.results[k].theta_im).into()
        };
        for (k, &f) in fs.iter().enumerate() {
            points.push(vec![
                to_mhz(d).into(),
                b.label().into(),
                f.into(),
                theta(an, k),
                theta(sim, k),
            ]);
        }
        let fit = |s: &Option<nhberry_core::protocols::OpenLoopScan>| s.as_ref().map(|s| s.fit);
        let part = |f: Option<LinearFit>, g: fn(LinearFit) -> f64| -> Cell { f.map(g).into() };
        fits.push(vec![
            to_mhz(d).into(),
            b.label().into(),
            part(fit(an), |f| f.slope),
            part(fit(an), |f| f.intercept),
            part(fit(sim), |f| f.slope),
            part(fit(sim), |f| f.intercept),
        ]);
    }
    Ok(vec![
        Artifact::new("fig3_open_loop", points),
        Artifact::new("fig3_open_loop_fit", fits),
    ])
}

pub(super) fn fig4(config: &RunConfig) -> Result<Vec<Artifact>> {
    let p = config.fig4_params;
    let preset = *config.preset(&config.fig4_schedule);
    let settings = preset.settings(&config.settings());
    let runs = par_map(config.workers, &BRANCHES, |&b| {
        time_resolved_survival(
            &p,
            preset.duration,
            b,
            config.fig4_engine,
            &settings,
            config.samples,
        )
    });
    let mut out = Vec::new();
    for (b, curves) in BRANCHES.into_iter().zip(runs) {
        let curves = curves?;
        let get = |k: SurvivalKind| {
            curves
                .iter()
                .find(|c| c.kind == k)
                .expect("all three curves")
        };
        let (cp, cm, idle) = (
            get(SurvivalKind::CPlus),
            get(SurvivalKind::CMinus),
            get(SurvivalKind::Idle),
        );
        let mut t = table(
            "fig4",
            config,
            &[
                ("t", "us"),
                ("survival_cplus", ""),
                ("survival_cminus", ""),
                ("survival_idle", ""),
                ("x_cplus", ""),
                ("y_cplus", ""),
                ("z_cplus", ""),
                ("x_cminus", ""),
                ("y_cminus", ""),
                ("z_cminus", ""),
                ("z_pred_cplus", ""),
                ("z_pred_cminus", ""),
            ],
        );
        let sched_p = preset.schedule(Direction::Plus)?;
        let sched_m = preset.schedule(Direction::Minus)?;
        let bloch = |c: &nhberry_core::protocols::SurvivalCurve, k: usize, axis: usize| -> Cell {
            c.bloch.get(k).map(|v| v[axis]).into()
        };
        for (k, &time) in cp.times.iter().enumerate() {
            t.push(vec![
                time.into(),
                cp.survival[k].into(),
                cm.survival[k].into(),
                idle.survival[k].into(),
                bloch(cp, k, 0),
                bloch(cp, k, 1),
                bloch(cp, k, 2),
                bloch(cm, k, 0),
                bloch(cm, k, 1),
                bloch(cm, k, 2),
                delta_z_prediction(&p, &sched_p, b, time).ok().into(),
                delta_z_prediction(&p, &sched_m, b, time).ok().into(),
            ]);
        }
        let title = format!("survival from R{} ({})", b.label(), config.fig4_engine);
        let plot = PlotSpec::new(
            title,
            "t",
            &["survival_cplus", "survival_cminus", "survival_idle"],
        );
        out.push(Artifact::new(format!("fig4_{}", branch_tag(b)), t).with_plot(plot));
    }
    Ok(out)
}

const GATE_ENGINES: [Engine; 3] = [Engine::Analytic, Engine::Simulated, Engine::Lindblad];

pub(super) fn fig5(config: &RunConfig) -> Result<Vec<Artifact>> {
    let orders = ["+-", "-+", "++"].map(order);
    let jobs: Vec<(usize, Engine, LoopOrder)> = (0..config.fig5_sets.len())
        .flat_map(|s| {
            GATE_ENGINES
                .into_iter()
                .flat_map(move |e| orders.map(|o| (s, e, o)))
        })
        .collect();
    let transfers = par_map(config.workers, &jobs, |&(s, e, o)| {
        let set = &config.fig5_sets[s];
        let preset = config.preset(&set.preset);
        GateTransfer::new(
            &set.params,
            preset.duration,
            o,
            e,
            &preset.settings(&config.settings()),
        )
    });
    let inputs: Vec<f64> = (0..config.fig5_inputs)
        .map(|k| k as f64 / (config.fig5_inputs - 1) as f64)
        .collect();
    let mut summary = table(
        "fig5",
        config,
        &[
            ("set", ""),
            ("j", "rad/us"),
            ("delta_mhz", "MHz"),
            ("duration", "us"),
            ("order", ""),
            ("engine", ""),
            ("theta_im_eff", "rad"),
            ("theta_im_branch_plus", "rad"),
            ("theta_im_branch_minus", "rad"),
        ],
    );
    let mut out = Vec::new();
    let per_set = GATE_ENGINES.len() * orders.len();
    for (s, set) in config.fig5_sets.iter().enumerate() {
        let block = &jobs[s * per_set..(s + 1) * per_set];
        let tr = &transfers[s * per_set..(s + 1) * per_set];
        let mut columns = vec![col("p_minus_in", "")];
        columns.extend(
            block
                .iter()
                .map(|(_, e, o)| col(format!("p_minus_out_{}_{}", e.tag(), order_tag(*o)), "")),
        );
        let mut t = table_owned("fig5", config, columns);
        for &pin in &inputs {
            let mut row = vec![Cell::Num(pin)];
            for x in tr {
                row.push(
                    x.as_ref()
                        .ok()
                        .and_then(|x| x.p_minus_out(pin).ok())
                        .map(|(p, _)| p)
                        .into(),
                );
            }
            t.push(row);
        }
        let duration = config.preset(&set.preset).duration;
        for ((_, e, o), x) in block.iter().zip(tr) {
            let g = x
                .as_ref()
                .ok()
                .and_then(|x| gate_output(&set.params, x, *o, 0.5).ok());
            summary.push(vec![
                set.name.as_str().into(),
                set.params.j.into(),
                to_mhz(set.params.delta).into(),
                duration.into(),
                o.label().into(),
                e.tag().into(),
                g.map(|g| g.theta_im_eff).into(),
                g.map(|g| g.theta_im_branch_plus).into(),
                g.map(|g| g.theta_im_branch_minus).into(),
            ]);
        }
        let ys: Vec<String> = ["analytic", "lindblad"]
            .iter()
            .flat_map(|e| {
                orders
                    .iter()
                    .map(move |o| format!("p_minus_out_{e}_{}", order_tag(*o)))
            })
            .collect();
        let ys: Vec<&str> = ys.iter().map(String::as_str).collect();
        let title = format!(
            "gate transfer, J = {} rad/us, {} us loops",
            set.params.j, duration
        );
        out.push(
            Artifact::new(format!("fig5_{}", set.name), t).with_plot(PlotSpec::new(
                title,
                "p_minus_in",
                &ys,
            )),
        );
    }
    out.push(Artifact::new("fig5_summary", summary));
    Ok(out)
}

pub(super) fn fig6(config: &RunConfig) -> Result<Vec<Artifact>> {
    let preset = config.preset(&config.fig6_schedule);
    let settings = preset.settings(&config.settings());
    let cells: Vec<(f64, f64)> = config
        .fig6_detunings
        .iter()
        .flat_map(|&d| config.fig6_j.iter().map(move |&j| (d, j)))
        .collect();
    let mut out = Vec::new();
    for &engine in &config.fig6_engines {
        for o in ["+-", "-+"].map(order) {
            let values = par_map(config.workers, &cells, |&(d, j)| {
                theta_im_cell(
                    j,
                    d,
                    config.drive.gamma,
                    preset.duration,
                    o,
                    engine,
                    &settings,
                )
                .ok()
            });
            let mut t = table(
                "fig6",
                config,
                &[("delta_mhz", "MHz"), ("j", "rad/us"), ("theta_im", "rad")],
            );
            for (&(d, j), v) in cells.iter().zip(values) {
                t.push(vec![to_mhz(d).into(), j.into(), v.into()]);
            }
            out.push(Artifact::new(
                format!("fig6_{}_{}", engine.tag(), order_tag(o)),
                t,
            ));
        }
    }
    Ok(out)
}
