//! Run configuration: a `key = value` file layered under command-line flags,
//! validated before any computation starts.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bihermitian_core::families::{cp2_family, eta, genus_family, FamilySpec};
use bihermitian_core::ode::{DEFAULT_SAMPLES, MIN_SAMPLES};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Family,
    Scan,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl FromStr for Formats {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Formats::default();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            match item.to_ascii_lowercase().as_str() {
                "csv" => out.csv = true,
                "json" => out.json = true,
                "svg" => out.svg = true,
                other => return Err(CliError::Input(format!("unknown format '{other}' (expected csv, json, svg)"))),
            }
        }
        Ok(out)
    }
}

/// One source of settings; later layers override earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigLayer {
    pub genus: Option<u32>,
    pub k: Option<i64>,
    pub x: Option<f64>,
    pub eps: Option<i8>,
    pub cp2: Option<bool>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub formats: Option<Formats>,
    pub seed: Option<u64>,
    pub perturb: Option<f64>,
    pub sweep: Option<usize>,
    pub samples: Option<usize>,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Input(format!("config line {line}: cannot parse '{value}' for key '{key}'")))
}

impl ConfigLayer {
    /// Parses `key = value` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut layer = ConfigLayer::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("config line {line_no}: expected 'key = value'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "genus" => layer.genus = Some(parse_value(key, value, line_no)?),
                "k" => layer.k = Some(parse_value(key, value, line_no)?),
                "x" => layer.x = Some(parse_value(key, value, line_no)?),
                "eps" => layer.eps = Some(parse_value(key, value, line_no)?),
                "cp2" => layer.cp2 = Some(parse_value(key, value, line_no)?),
                "n" => layer.n = Some(parse_value(key, value, line_no)?),
                "tol" => layer.tol = Some(parse_value(key, value, line_no)?),
                "out" => layer.out = Some(PathBuf::from(value)),
                "formats" => layer.formats = Some(value.parse()?),
                "seed" => layer.seed = Some(parse_value(key, value, line_no)?),
                "perturb" => layer.perturb = Some(parse_value(key, value, line_no)?),
                "sweep" => layer.sweep = Some(parse_value(key, value, line_no)?),
                "samples" => layer.samples = Some(parse_value(key, value, line_no)?),
                other => return Err(CliError::Input(format!("config line {line_no}: unknown key '{other}'"))),
            }
        }
        Ok(layer)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `self` with every field set in `top` replaced.
    pub fn overlay(self, top: ConfigLayer) -> Self {
        ConfigLayer {
            genus: top.genus.or(self.genus),
            k: top.k.or(self.k),
            x: top.x.or(self.x),
            eps: top.eps.or(self.eps),
            cp2: top.cp2.or(self.cp2),
            n: top.n.or(self.n),
            tol: top.tol.or(self.tol),
            out: top.out.or(self.out),
            formats: top.formats.or(self.formats),
            seed: top.seed.or(self.seed),
            perturb: top.perturb.or(self.perturb),
            sweep: top.sweep.or(self.sweep),
            samples: top.samples.or(self.samples),
        }
    }
}

/// Which family a run builds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyChoice {
    Genus { genus: u32, k: i64, x: f64 },
    Cp2 { x: f64, eps: i8 },
}

impl FamilyChoice {
    pub fn build(&self) -> Result<FamilySpec, CliError> {
        match *self {
            FamilyChoice::Genus { genus, k, x } => genus_family(genus, k, x),
            FamilyChoice::Cp2 { x, eps } => cp2_family(x, eps),
        }
        .map_err(|e| CliError::Input(e.to_string()))
    }
}

/// Fully resolved settings. The output directory is not echoed into reports,
/// so that runs differing only in destination produce identical files.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub family: FamilyChoice,
    pub n_samples: usize,
    pub tolerance: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub formats: Formats,
    pub seed: u64,
    pub perturbation: f64,
    pub sweep: usize,
    pub killing_samples: usize,
}

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_KILLING_SAMPLES: usize = 20;
const VERIFY_DEFAULT_X: f64 = 0.5;

fn check_family(layer: &ConfigLayer, command: Command) -> Result<FamilyChoice, CliError> {
    let x = match (layer.x, command) {
        (Some(x), _) => x,
        (None, Command::Family) => return Err(CliError::Input("family requires --x".into())),
        (None, _) => VERIFY_DEFAULT_X,
    };
    if !x.is_finite() {
        return Err(CliError::Input(format!("x must be finite, got {x}")));
    }
    if layer.cp2.unwrap_or(false) {
        let eps = layer.eps.unwrap_or(if x < 1.0 { 1 } else { -1 });
        let eta = eta();
        match eps {
            1 if x > eta && x < 1.0 => {}
            1 => {
                return Err(CliError::Input(format!(
                    "x = {x} is outside the admissible range (eta, 1) = ({eta:.10}, 1) for eps = 1; \
                     eta is the real root of x^3 + 5x^2 + 75x + 59"
                )))
            }
            -1 if x > 1.0 => {}
            -1 => return Err(CliError::Input(format!("x = {x} is outside the admissible range (1, inf) for eps = -1"))),
            other => return Err(CliError::Input(format!("eps must be 1 or -1 for cp2, got {other}"))),
        }
        Ok(FamilyChoice::Cp2 { x, eps })
    } else {
        let genus = layer.genus.unwrap_or(2);
        let k = layer.k.unwrap_or(1);
        if genus == 0 {
            return Err(CliError::Input("genus must be >= 1; use --cp2 for the genus-0 families".into()));
        }
        if k < 1 {
            return Err(CliError::Input(format!("k must be >= 1, got {k}")));
        }
        if !(x > 0.0 && x < 1.0) {
            return Err(CliError::Input(format!("x = {x} is outside the admissible range (0, 1)")));
        }
        if layer.eps.is_some() {
            return Err(CliError::Input("eps is determined by the genus; pass it only with --cp2".into()));
        }
        Ok(FamilyChoice::Genus { genus, k, x })
    }
}

impl RunConfig {
    pub fn resolve(command: Command, layer: ConfigLayer) -> Result<Self, CliError> {
        let family = check_family(&layer, command)?;
        let n_samples = layer.n.unwrap_or(DEFAULT_SAMPLES);
        if n_samples < MIN_SAMPLES {
            return Err(CliError::Input(format!("n must be >= {MIN_SAMPLES}, got {n_samples}")));
        }
        let tolerance = layer.tol.unwrap_or(DEFAULT_TOL);
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(CliError::Input(format!("tol must be positive, got {tolerance}")));
        }
        let perturbation = layer.perturb.unwrap_or(0.0);
        if !(perturbation.is_finite() && perturbation >= 0.0) {
            return Err(CliError::Input(format!("perturb must be >= 0, got {perturbation}")));
        }
        let sweep = layer.sweep.unwrap_or(0);
        if sweep == 1 {
            return Err(CliError::Input("sweep needs at least 2 points per axis".into()));
        }
        let killing_samples = layer.samples.unwrap_or(DEFAULT_KILLING_SAMPLES);
        if killing_samples == 0 {
            return Err(CliError::Input("samples must be >= 1".into()));
        }
        let formats = layer.formats.unwrap_or(match command {
            Command::Family => Formats { csv: true, json: true, svg: false },
            _ => Formats { csv: false, json: true, svg: false },
        });
        Ok(RunConfig {
            command,
            family,
            n_samples,
            tolerance,
            output_dir: layer.out.unwrap_or_else(|| PathBuf::from("out")),
            formats,
            seed: layer.seed.unwrap_or(0),
            perturbation,
            sweep,
            killing_samples,
        })
    }
}
