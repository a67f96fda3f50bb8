//! The three subcommands. Each returns its report; the caller maps the
//! outcome to an exit code.

use std::fs;

use bihermitian_core::families::{compatibility_residual, trivial_ruled_nonexistence, NonexistenceReport, ProductCase};
use bihermitian_core::oracle::{agreement_suite, calibrate, killing_suite, AgreementReport, CalibrationReport, KillingReport, DEFAULT_STEP, KILLING_STEP};
use bihermitian_core::verify::{verify_family, FamilyVerification};
use bihermitian_core::VERSION;
use serde::Serialize;

use crate::config::{FamilyChoice, RunConfig};
use crate::output::{fmt17, grid_spectra, write_json, write_profile_csv, write_svgs};
use crate::CliError;

/// Number of random profiles in the oracle agreement suite.
pub const AGREEMENT_CASES: usize = 100;

#[derive(Serialize)]
pub struct FamilyReport<'a> {
    pub library_version: &'static str,
    pub config: &'a RunConfig,
    pub verification: FamilyVerification,
    /// Scaled spread of `(λ − μ)/G²` over the grid.
    pub eigen_difference_law: f64,
    pub artifacts: Vec<String>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct SweepPoint {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

#[derive(Serialize)]
pub struct Sweep {
    pub s: f64,
    pub eps: i8,
    pub points_per_axis: usize,
    pub points: Vec<SweepPoint>,
    /// Largest `|residual|` on the line `y = −x`.
    pub anti_diagonal_max: f64,
}

#[derive(Serialize)]
pub struct ScanReport<'a> {
    pub library_version: &'static str,
    pub config: &'a RunConfig,
    pub genus_gt1: NonexistenceReport,
    pub torus: NonexistenceReport,
    pub sweep: Option<Sweep>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct VerifyReport<'a> {
    pub library_version: &'static str,
    pub config: &'a RunConfig,
    pub calibration: CalibrationReport,
    pub agreement: Option<AgreementReport>,
    pub killing: Option<KillingReport>,
    pub passed: bool,
}

fn prepare_dir(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))
}

/// Builds, synthesizes and verifies one family member, then writes the
/// requested artifacts. Artifacts are written even when verification fails.
pub fn cmd_family(cfg: &RunConfig) -> Result<bool, CliError> {
    let spec = cfg.family.build()?;
    let (verification, grid) =
        verify_family(&spec, cfg.n_samples, cfg.tolerance).map_err(|e| CliError::Verification(e.to_string()))?;
    prepare_dir(cfg)?;
    let spectra = grid_spectra(&grid);
    let mut artifacts = Vec::new();
    if cfg.formats.csv {
        write_profile_csv(&cfg.output_dir.join("profile.csv"), &grid, &spectra)?;
        artifacts.push("profile.csv".to_string());
    }
    if cfg.formats.svg {
        artifacts.extend(write_svgs(&cfg.output_dir, &grid, &spectra)?);
    }
    let passed = verification.passed;
    let report = FamilyReport {
        library_version: VERSION,
        config: cfg,
        eigen_difference_law: verification.ac.eigen_difference_spread,
        verification,
        artifacts,
        passed,
    };
    if cfg.formats.json {
        write_json(&cfg.output_dir.join("family.json"), &report)?;
    }
    Ok(passed)
}

/// Symmetric grid `0.9·(2i/(n−1) − 1)` with exact mirror pairs.
pub fn sweep_axis(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| 0.9 * (2.0 * i as f64 / (n - 1) as f64 - 1.0)).collect();
    for i in 0..n / 2 {
        v[n - 1 - i] = -v[i];
    }
    if n % 2 == 1 {
        v[n / 2] = 0.0;
    }
    v
}

pub fn compatibility_sweep(n: usize, s: f64, eps: i8) -> Sweep {
    let axis = sweep_axis(n);
    let mut points = Vec::with_capacity(n * n);
    let mut anti = 0.0f64;
    for &x in &axis {
        for &y in &axis {
            let residual = compatibility_residual(x, y, s, eps);
            if y == -x {
                anti = anti.max(residual.abs());
            }
            points.push(SweepPoint { x, y, residual });
        }
    }
    Sweep { s, eps, points_per_axis: n, points, anti_diagonal_max: anti }
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<bool, CliError> {
    let genus_gt1 = trivial_ruled_nonexistence(ProductCase::GenusGt1);
    let torus = trivial_ruled_nonexistence(ProductCase::Torus);
    let sweep = (cfg.sweep >= 2).then(|| {
        let eps = match cfg.family {
            FamilyChoice::Cp2 { eps, .. } => eps,
            FamilyChoice::Genus { .. } => 1,
        };
        compatibility_sweep(cfg.sweep, 1.0, eps)
    });
    prepare_dir(cfg)?;
    if let (Some(sw), true) = (&sweep, cfg.formats.csv) {
        let path = cfg.output_dir.join("sweep.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
        w.write_record(["x", "y", "residual"]).map_err(|e| CliError::io(&path, e))?;
        for p in &sw.points {
            w.write_record([p.x, p.y, p.residual].map(fmt17)).map_err(|e| CliError::io(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    let passed = !genus_gt1.found_solution && !torus.found_solution;
    let report = ScanReport { library_version: VERSION, config: cfg, genus_gt1, torus, sweep, passed };
    if cfg.formats.json {
        write_json(&cfg.output_dir.join("scan.json"), &report)?;
    }
    Ok(passed)
}

/// Calibration first: if the normalization is off, the later suites are
/// meaningless and are skipped.
pub fn cmd_verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let calibration = calibrate();
    prepare_dir(cfg)?;
    let mut report = VerifyReport {
        library_version: VERSION,
        config: cfg,
        calibration,
        agreement: None,
        killing: None,
        passed: false,
    };
    if !report.calibration.passed {
        if cfg.formats.json {
            write_json(&cfg.output_dir.join("verify.json"), &report)?;
        }
        let worst = report.calibration.cases.iter().map(|c| c.error).fold(0.0, f64::max);
        return Err(CliError::Calibration(format!("calibration error {worst:e} exceeds tolerance")));
    }
    let spec = cfg.family.build()?;
    let agreement = agreement_suite(cfg.seed, AGREEMENT_CASES, DEFAULT_STEP, cfg.perturbation);
    let killing = killing_suite(&spec, cfg.killing_samples, cfg.seed, KILLING_STEP, cfg.perturbation)
        .map_err(|e| CliError::Verification(e.to_string()))?;
    report.passed = agreement.passed && killing.passed;
    report.agreement = Some(agreement);
    report.killing = Some(killing);
    if cfg.formats.json {
        write_json(&cfg.output_dir.join("verify.json"), &report)?;
    }
    Ok(report.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_axis_is_symmetric() {
        for n in [2, 5, 8, 21] {
            let v = sweep_axis(n);
            assert_eq!(v.len(), n);
            assert!((v[0] + 0.9).abs() < 1e-15 && (v[n - 1] - 0.9).abs() < 1e-15);
            for i in 0..n {
                assert_eq!(v[i], -v[n - 1 - i]);
            }
        }
    }

    #[test]
    fn anti_diagonal_vanishes() {
        let sw = compatibility_sweep(9, 1.0, 1);
        assert_eq!(sw.points.len(), 81);
        assert_eq!(sw.anti_diagonal_max, 0.0);
        assert!(sw.points.iter().any(|p| p.residual != 0.0));
    }
}
