//! Line-oriented `key = value` run configuration.
//!
//! Keys are dotted (`drive.gamma = 0.426`). Frequencies given in MHz
//! (`*_mhz` keys) are converted to rad/us once, here.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nhberry_core::dynamics::{LoopSchedule, RampShape};
use nhberry_core::protocols::{Engine, LoopOrder, ProtocolSettings};
use nhberry_core::{Branch, Direction, DriveParams, ErrorKind};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

const DEFAULTS: &[(&str, &str)] = &[
    ("drive.j", "2.17"),
    ("drive.delta_mhz", "0.51"),
    ("drive.gamma", "0.426"),
    ("drive.phi", "0"),
    ("three_level.gamma_f", "0.1"),
    ("numerics.tol", "1e-10"),
    ("numerics.samples", "600"),
    ("schedule.t3.duration", "3"),
    ("schedule.t3.ramp", "cosine_flat 0.25"),
    ("schedule.slow.duration", "30"),
    ("schedule.slow.ramp", "cosine_flat 0.25"),
    ("schedule.gate18.duration", "1.8"),
    ("schedule.gate18.ramp", "full_cosine"),
    ("schedule.gate27.duration", "2.7"),
    ("schedule.gate27.ramp", "full_cosine"),
    ("fig2.detunings_mhz", "3, 1.34, 0.81"),
    ("fig2.j", "0.25:12:48"),
    ("fig2.schedule", "t3"),
    ("fig3.detunings_mhz", "3, 1.34, 0.81"),
    ("fig3.j", "0.25:12:48"),
    ("fig3.schedule", "t3"),
    ("fig3.fractions", "1, 1/2, 1/3, 1/4"),
    ("fig3.open_loop_j", "2.17"),
    ("fig4.j", "2.17"),
    ("fig4.delta_mhz", "0.51"),
    ("fig4.schedule", "t3"),
    ("fig4.engine", "simulated"),
    ("fig5.large.j", "4.78"),
    ("fig5.large.delta_mhz", "1.05"),
    ("fig5.large.schedule", "gate18"),
    ("fig5.small.j", "2.17"),
    ("fig5.small.delta_mhz", "0.51"),
    ("fig5.small.schedule", "gate27"),
    ("fig5.inputs", "21"),
    ("fig6.j", "0.5:12:60"),
    ("fig6.delta_mhz", "-2:2:60"),
    ("fig6.schedule", "gate18"),
    ("fig6.engines", "analytic, lindblad"),
    ("appendix.schedule", "t3"),
    ("appendix.z_schedule", "slow"),
    ("appendix.curve_j", "1, 2.17, 4.78"),
    ("appendix.samples", "301"),
    ("sweep.expr", "ratio j=0.5:12:50 delta_mhz=-2:2:50"),
    ("sweep.engine", "analytic"),
    ("sweep.order", "-+"),
    ("sweep.branch", "-"),
    ("sweep.schedule", "t3"),
    ("output.dir", "out"),
    ("output.svg", "true"),
    ("run.workers", "0"),
    ("run.id", ""),
];

/// A named loop preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulePreset {
    pub duration: f64,
    pub shape: RampShape,
}

impl SchedulePreset {
    pub fn settings(&self, base: &ProtocolSettings) -> ProtocolSettings {
        base.with_shape(self.shape)
    }

    pub fn schedule(&self, direction: Direction) -> nhberry_core::Result<LoopSchedule> {
        LoopSchedule::with_shape(direction, self.duration, 1.0, self.shape)
    }
}

/// One gate parameter set of the input-output figure.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSet {
    pub name: String,
    pub params: DriveParams,
    pub preset: String,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    raw: BTreeMap<String, String>,
    pub drive: DriveParams,
    pub phi: f64,
    pub gamma_f: f64,
    pub tol: f64,
    pub samples: usize,
    pub schedules: BTreeMap<String, SchedulePreset>,
    pub fig2_detunings: Vec<f64>,
    pub fig2_j: Vec<f64>,
    pub fig2_schedule: String,
    pub fig3_detunings: Vec<f64>,
    pub fig3_j: Vec<f64>,
    pub fig3_schedule: String,
    pub fig3_fractions: Vec<f64>,
    pub fig3_open_loop_j: f64,
    pub fig4_params: DriveParams,
    pub fig4_schedule: String,
    pub fig4_engine: Engine,
    pub fig5_sets: Vec<GateSet>,
    pub fig5_inputs: usize,
    pub fig6_j: Vec<f64>,
    pub fig6_detunings: Vec<f64>,
    pub fig6_schedule: String,
    pub fig6_engines: Vec<Engine>,
    pub appendix_schedule: String,
    pub appendix_z_schedule: String,
    pub appendix_curve_j: Vec<f64>,
    pub appendix_samples: usize,
    pub sweep_expr: String,
    pub sweep_engine: Engine,
    pub sweep_order: LoopOrder,
    pub sweep_branch: Branch,
    pub sweep_schedule: String,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub workers: usize,
    pub run_id: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_entries(std::iter::empty()).expect("built-in defaults are valid")
    }
}

impl RunConfig {
    /// Reads a config file (if any) and applies `key=value` overrides on top.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut entries = Vec::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            entries.extend(parse_lines(&text)?);
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("override '{o}' is not key=value")))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_entries(entries.into_iter())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_entries(parse_lines(text)?.into_iter())
    }

    fn from_entries(entries: impl Iterator<Item = (String, String)>) -> Result<Self> {
        let mut raw: BTreeMap<String, String> = DEFAULTS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in entries {
            match raw.get_mut(&k) {
                Some(slot) => *slot = v,
                None => return Err(CliError::config(format!("unknown key '{k}'"))),
            }
        }
        Self::from_raw(raw)
    }

    fn from_raw(raw: BTreeMap<String, String>) -> Result<Self> {
        let r = Reader(&raw);
        let gamma = r.f64("drive.gamma")?;
        let drive = r.params("drive.j", "drive.delta_mhz", gamma)?;
        let mut schedules = BTreeMap::new();
        for name in ["t3", "slow", "gate18", "gate27"] {
            let duration = r.f64(&format!("schedule.{name}.duration"))?;
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(CliError::config(format!(
                    "schedule.{name}.duration must be > 0"
                )));
            }
            let key = format!("schedule.{name}.ramp");
            let shape =
                parse_ramp(r.str(&key)).map_err(|e| CliError::config(format!("{key}: {e}")))?;
            let preset = SchedulePreset { duration, shape };
            preset
                .schedule(Direction::Plus)
                .map_err(|e| CliError::config(format!("schedule.{name}: {e}")))?;
            schedules.insert(name.to_string(), preset);
        }
        let preset_name = |key: &str| -> Result<String> {
            let v = r.str(key).to_string();
            if schedules.contains_key(&v) {
                Ok(v)
            } else {
                Err(CliError::config(format!(
                    "{key}: unknown schedule preset '{v}'"
                )))
            }
        };
        let fig5_sets = ["large", "small"]
            .iter()
            .map(|name| {
                Ok(GateSet {
                    name: name.to_string(),
                    params: r.params(
                        &format!("fig5.{name}.j"),
                        &format!("fig5.{name}.delta_mhz"),
                        gamma,
                    )?,
                    preset: preset_name(&format!("fig5.{name}.schedule"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let gamma_f = r.f64("three_level.gamma_f")?;
        nhberry_core::dynamics::ThreeLevelParams::from_drive(drive, gamma_f)
            .map_err(|e| CliError::config(format!("three_level.gamma_f: {e}")))?;
        let tol = r.f64("numerics.tol")?;
        if !(tol > 0.0 && tol < 1e-2) {
            return Err(CliError::config("numerics.tol must lie in (0, 1e-2)"));
        }
        let run_id = r.str("run.id").to_string();
        let cfg = RunConfig {
            drive,
            phi: r.f64("drive.phi")?,
            gamma_f,
            tol,
            samples: r.count("numerics.samples", 2)?,
            fig2_detunings: r
                .list("fig2.detunings_mhz")?
                .iter()
                .map(|d| 2.0 * PI * d)
                .collect(),
            fig2_j: r.grid("fig2.j")?,
            fig2_schedule: preset_name("fig2.schedule")?,
            fig3_detunings: r
                .list("fig3.detunings_mhz")?
                .iter()
                .map(|d| 2.0 * PI * d)
                .collect(),
            fig3_j: r.grid("fig3.j")?,
            fig3_schedule: preset_name("fig3.schedule")?,
            fig3_fractions: r.fractions("fig3.fractions")?,
            fig3_open_loop_j: r.f64("fig3.open_loop_j")?,
            fig4_params: r.params("fig4.j", "fig4.delta_mhz", gamma)?,
            fig4_schedule: preset_name("fig4.schedule")?,
            fig4_engine: r.engine("fig4.engine")?,
            fig5_sets,
            fig5_inputs: r.count("fig5.inputs", 2)?,
            fig6_j: r.grid("fig6.j")?,
            fig6_detunings: r
                .grid("fig6.delta_mhz")?
                .iter()
                .map(|d| 2.0 * PI * d)
                .collect(),
            fig6_schedule: preset_name("fig6.schedule")?,
            fig6_engines: r
                .str("fig6.engines")
                .split(',')
                .map(|s| parse_engine("fig6.engines", s.trim()))
                .collect::<Result<_>>()?,
            appendix_schedule: preset_name("appendix.schedule")?,
            appendix_z_schedule: preset_name("appendix.z_schedule")?,
            appendix_curve_j: r.list("appendix.curve_j")?,
            appendix_samples: r.count("appendix.samples", 2)?,
            sweep_expr: r.str("sweep.expr").to_string(),
            sweep_engine: r.engine("sweep.engine")?,
            sweep_order: LoopOrder::from_label(r.str("sweep.order"))
                .ok_or_else(|| CliError::config("sweep.order must be one of +-, -+, ++, --"))?,
            sweep_branch: match r.str("sweep.branch") {
                "+" => Branch::Plus,
                "-" => Branch::Minus,
                v => {
                    return Err(CliError::config(format!(
                        "sweep.branch: expected + or -, got '{v}'"
                    )))
                }
            },
            sweep_schedule: preset_name("sweep.schedule")?,
            out_dir: PathBuf::from(r.str("output.dir")),
            svg: r.bool("output.svg")?,
            workers: r.count("run.workers", 0)?,
            run_id: (!run_id.is_empty()).then_some(run_id),
            schedules,
            raw,
        };
        Ok(cfg)
    }

    pub fn settings(&self) -> ProtocolSettings {
        ProtocolSettings {
            tol: self.tol,
            gamma_f: self.gamma_f,
            ..ProtocolSettings::default()
        }
    }

    pub fn preset(&self, name: &str) -> &SchedulePreset {
        &self.schedules[name]
    }

    /// Raw value of a key after defaults and overrides.
    pub fn value(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    /// Canonical text of every result-affecting key, sorted.
    pub fn canonical(&self) -> String {
        self.raw
            .iter()
            .filter(|(k, _)| !k.starts_with("output.") && !k.starts_with("run."))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of [`RunConfig::canonical`] as lowercase hex.
    pub fn digest(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn parse_lines(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected 'key = value'", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_engine(key: &str, s: &str) -> Result<Engine> {
    Engine::parse(s).ok_or_else(|| {
        CliError::config(format!(
            "{key}: unknown engine '{s}' (analytic, simulated, lindblad)"
        ))
    })
}

/// `cosine_flat <ramp_fraction>`, `full_cosine` or `constant_rate`.
pub fn parse_ramp(s: &str) -> std::result::Result<RampShape, String> {
    let mut parts = s.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some("cosine_flat"), Some(f), None) => {
            let ramp_fraction: f64 = f.parse().map_err(|_| format!("bad ramp fraction '{f}'"))?;
            if !(ramp_fraction > 0.0 && ramp_fraction <= 0.5) {
                return Err(format!("ramp fraction {ramp_fraction} outside (0, 0.5]"));
            }
            Ok(RampShape::CosineFlat { ramp_fraction })
        }
        (Some("full_cosine"), None, None) => Ok(RampShape::FullCosine),
        (Some("constant_rate"), None, None) => Ok(RampShape::ConstantRate),
        _ => Err(format!("unknown ramp '{s}'")),
    }
}

/// `lo:hi:n` with `n` evenly spaced points including both ends.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("grid '{s}' is not lo:hi:n"));
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad grid start '{lo}'"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad grid end '{hi}'"))?;
    let n: usize = n.parse().map_err(|_| format!("bad point count '{n}'"))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("grid '{s}' is empty or not finite"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect())
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn str(&self, key: &str) -> &str {
        &self.0[key]
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let v = self.str(key);
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::config(format!("{key}: expected a number, got '{v}'")))
    }

    fn count(&self, key: &str, min: usize) -> Result<usize> {
        let v = self.str(key);
        v.parse::<usize>()
            .ok()
            .filter(|n| *n >= min)
            .ok_or_else(|| {
                CliError::config(format!("{key}: expected an integer >= {min}, got '{v}'"))
            })
    }

    fn bool(&self, key: &str) -> Result<bool> {
        match self.str(key) {
            "true" => Ok(true),
            "false" => Ok(false),
            v => Err(CliError::config(format!(
                "{key}: expected true or false, got '{v}'"
            ))),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let out = self
            .str(key)
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::config(format!("{key}: bad number '{}'", s.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(out)
    }

    fn fractions(&self, key: &str) -> Result<Vec<f64>> {
        self.str(key)
            .split(',')
            .map(|s| {
                let s = s.trim();
                let v = match s.split_once('/') {
                    Some((a, b)) => a
                        .trim()
                        .parse::<f64>()
                        .ok()
                        .zip(b.trim().parse::<f64>().ok())
                        .map(|(a, b)| a / b),
                    None => s.parse::<f64>().ok(),
                };
                v.filter(|f| *f > 0.0 && *f <= 1.0).ok_or_else(|| {
                    CliError::config(format!("{key}: '{s}' is not a fraction in (0, 1]"))
                })
            })
            .collect()
    }

    fn grid(&self, key: &str) -> Result<Vec<f64>> {
        parse_grid(self.str(key)).map_err(|e| CliError::config(format!("{key}: {e}")))
    }

    fn engine(&self, key: &str) -> Result<Engine> {
        parse_engine(key, self.str(key))
    }

    fn params(&self, j_key: &str, d_key: &str, gamma: f64) -> Result<DriveParams> {
        let j = self.f64(j_key)?;
        let d = self.f64(d_key)?;
        DriveParams::from_mhz(j, d, gamma).map_err(|e| match e.kind() {
            ErrorKind::Domain => CliError::Core(e),
            _ => CliError::config(format!("{j_key}/{d_key}: {e}")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_load_and_convert_mhz() {
        let c = RunConfig::default();
        assert!((c.drive.delta - 2.0 * PI * 0.51).abs() < 1e-15);
        assert_eq!(c.fig2_j.len(), 48);
        assert_eq!(c.fig6_j.len(), 60);
        assert!((c.fig6_detunings[0] + 4.0 * PI).abs() < 1e-12);
        assert_eq!(c.fig3_fractions.len(), 4);
        assert!((c.fig3_fractions[2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.preset("t3").shape, RampShape::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::from_text("drive.gama = 0.4").unwrap_err();
        assert!(e.to_string().contains("drive.gama"));
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn file_syntax_and_overrides() {
        let c = RunConfig::from_text("# comment\n\ndrive.j = 4.78\n  drive.delta_mhz=1.05  \n")
            .unwrap();
        assert_eq!(c.drive.j, 4.78);
        assert!(RunConfig::from_text("drive.j 4.78").is_err());
        let o = RunConfig::load(None, &["fig6.j=1:2:3".into()]).unwrap();
        assert_eq!(o.fig6_j, vec![1.0, 1.5, 2.0]);
        assert!(RunConfig::load(None, &["fig6.j".into()]).is_err());
    }

    #[test]
    fn invalid_physics_is_rejected_at_load() {
        assert!(RunConfig::load(None, &["drive.gamma=-1".into()]).is_err());
        assert!(RunConfig::load(None, &["drive.j=-2".into()]).is_err());
        assert!(RunConfig::load(None, &["three_level.gamma_f=-0.1".into()]).is_err());
        assert!(RunConfig::load(None, &["fig2.schedule=fast".into()]).is_err());
        assert!(RunConfig::load(None, &["schedule.t3.ramp=cosine_flat 0.7".into()]).is_err());
        assert!(RunConfig::load(None, &["fig3.fractions=1, 0".into()]).is_err());
        let ep = RunConfig::load(
            None,
            &[
                "drive.j=0.213".into(),
                "drive.gamma=0.426".into(),
                "drive.delta_mhz=0".into(),
            ],
        )
        .unwrap_err();
        assert_eq!(ep.exit_code(), 2);
        assert!(ep.to_string().contains("exceptional point"));
    }

    #[test]
    fn digest_ignores_output_and_worker_keys() {
        let a = RunConfig::default();
        let b =
            RunConfig::load(None, &["run.workers=8".into(), "output.dir=/tmp/x".into()]).unwrap();
        let c = RunConfig::load(None, &["drive.j=2.2".into()]).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
