//! Command implementations.

mod appendix;
mod eigensystem;
mod figures;
mod selftest;
mod sweep;

use std::f64::consts::PI;

use clap::ValueEnum;
use nhberry_core::protocols::LoopOrder;
use nhberry_core::Branch;

use crate::config::RunConfig;
use crate::error::Result;
use crate::table::{Provenance, ResultTable};
use crate::Artifact;

pub use selftest::{selftest_checks, Check};
pub use sweep::{parse_expr, SweepExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Command {
    Eigensystem,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Appendix,
    Sweep,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigensystem => "eigensystem",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Fig5 => "fig5",
            Command::Fig6 => "fig6",
            Command::Appendix => "appendix",
            Command::Sweep => "sweep",
            Command::Selftest => "selftest",
        }
    }

    /// Commands that write figure data.
    pub fn figures() -> [Command; 6] {
        [
            Command::Fig2,
            Command::Fig3,
            Command::Fig4,
            Command::Fig5,
            Command::Fig6,
            Command::Appendix,
        ]
    }
}

/// Runs one command. `expr` replaces `sweep.expr` for the sweep command.
pub fn run(command: Command, config: &RunConfig, expr: Option<&str>) -> Result<Vec<Artifact>> {
    match command {
        Command::Eigensystem => eigensystem::run(config),
        Command::Fig2 => figures::fig2(config),
        Command::Fig3 => figures::fig3(config),
        Command::Fig4 => figures::fig4(config),
        Command::Fig5 => figures::fig5(config),
        Command::Fig6 => figures::fig6(config),
        Command::Appendix => appendix::run(config),
        Command::Sweep => sweep::run(config, expr.unwrap_or(&config.sweep_expr)),
        Command::Selftest => selftest::run(config),
    }
}

pub(crate) fn table(command: &str, config: &RunConfig, columns: &[(&str, &str)]) -> ResultTable {
    ResultTable::new(Provenance::new(command, config), columns)
}

pub(crate) fn table_owned(
    command: &str,
    config: &RunConfig,
    columns: Vec<(String, String)>,
) -> ResultTable {
    ResultTable::with_columns(Provenance::new(command, config), columns)
}

/// `+-` -> `pm`, for file and column names.
pub(crate) fn order_tag(order: LoopOrder) -> String {
    order.label().replace('+', "p").replace('-', "m")
}

pub(crate) fn branch_tag(branch: Branch) -> &'static str {
    match branch {
        Branch::Plus => "rp",
        Branch::Minus => "rm",
    }
}

pub(crate) fn to_mhz(delta: f64) -> f64 {
    delta / (2.0 * PI)
}

pub(crate) fn detuning_name(delta: f64) -> String {
    format!("delta{:.2}MHz", to_mhz(delta))
}

pub(crate) fn order(label: &str) -> LoopOrder {
    LoopOrder::from_label(label).expect("static loop-order label")
}
