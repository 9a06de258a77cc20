//! Benchmark drivers: problem setups, refinement sweeps and convergence tables.

mod bar;
mod eigenstrain;
mod thermoelastic;

pub use bar::{bar_coords, bar_geometry, bar_row, run_bar2d, BarSetup, KAPPA};
pub use eigenstrain::{eigenstrain_exact, eigenstrain_geometry, eigenstrain_row, run_eigenstrain, EigenSetup, EIGEN};
pub use thermoelastic::{
    composite_materials, run_thermoelastic, solve_thermoelastic, thermo_problems, DofRow, ThermoSetup, ThermoSolution,
    ThermoelasticReport, DEFAULT_BASE,
};

use crate::enrichment::{build_enriched_space, EnrichedSpace};
use crate::error::{Error, Result};
use crate::extraction::{build_extraction, ExtractionOperator};
use crate::foreground::{ForegroundBasis, ForegroundMesh};
use crate::hierarchy::{build_thb, HierMesh, LevelSequence, ThbSpace};
use crate::spline::TensorBSplineSpace;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Bar2d,
    Eigenstrain,
    Thermoelastic,
}

impl std::str::FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bar2d" => Ok(Case::Bar2d),
            "eigenstrain" => Ok(Case::Eigenstrain),
            "thermoelastic" => Ok(Case::Thermoelastic),
            _ => Err(Error::Config(format!("unknown case '{s}'"))),
        }
    }
}

/// Run parameters, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub case: Case,
    /// temperature background degree
    #[serde(default = "one")]
    pub degree_t: usize,
    /// displacement background degree
    #[serde(default = "one")]
    pub degree_u: usize,
    /// foreground Lagrange degree
    #[serde(default = "one")]
    pub q: usize,
    /// background cell sizes of the sweep
    #[serde(default)]
    pub sizes: Vec<f64>,
    /// background local refinement depth per field
    #[serde(default)]
    pub refine_t: usize,
    #[serde(default)]
    pub refine_u: usize,
    /// foreground-only refinement levels
    #[serde(default)]
    pub fg_depth: usize,
    /// Nitsche penalty; 20 q² when absent
    pub beta: Option<f64>,
    /// level-set grid file (thermoelastic)
    pub lsf_file: Option<PathBuf>,
    /// base grid cells per direction (thermoelastic)
    pub base_cells: Option<usize>,
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl CaseConfig {
    pub fn new(case: Case) -> Self {
        CaseConfig {
            case,
            degree_t: 1,
            degree_u: 1,
            q: 1,
            sizes: vec![],
            refine_t: 0,
            refine_u: 0,
            fg_depth: 0,
            beta: None,
            lsf_file: None,
            base_cells: None,
            output: None,
        }
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let c: CaseConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| crate::physics::default_penalty(self.q))
    }

    pub fn validate(&self) -> Result<()> {
        let used = match self.case {
            Case::Bar2d => self.degree_t,
            Case::Eigenstrain => self.degree_u,
            Case::Thermoelastic => self.degree_t.max(self.degree_u),
        };
        for p in [self.degree_t, self.degree_u, self.q] {
            if !(1..=2).contains(&p) {
                return Err(Error::Config(format!("degree {p} unsupported, expected 1 or 2")));
            }
        }
        if self.q < used {
            return Err(Error::Config(format!("foreground degree {} below background degree {used}", self.q)));
        }
        if self.sizes.iter().any(|&h| !(h > 0.0)) || self.sizes.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("sizes must be positive and decreasing".into()));
        }
        if let Some(b) = self.beta {
            if !(b >= 0.0) {
                return Err(Error::Config(format!("negative penalty {b}")));
            }
        }
        if self.refine_t > 4 || self.refine_u > 4 || self.fg_depth > 4 {
            return Err(Error::Config("at most 5 levels are supported".into()));
        }
        Ok(())
    }
}

/// THB space of degree p on a hierarchical mesh.
pub fn thb_space(mesh: HierMesh, p: usize) -> Result<ThbSpace> {
    let base = TensorBSplineSpace::uniform(mesh.base(), [p, p], mesh.origin(), mesh.base_size())?;
    Ok(build_thb(LevelSequence::new(base, mesh)?))
}

/// A background field interpolated onto the foreground.
#[derive(Debug, Clone)]
pub struct Field {
    pub space: ThbSpace,
    pub enriched: EnrichedSpace,
    pub extraction: ExtractionOperator,
}

impl Field {
    pub fn build(space: ThbSpace, mesh: &ForegroundMesh, basis: &ForegroundBasis) -> Result<Self> {
        let enriched = build_enriched_space(&space, mesh)?;
        let extraction = build_extraction(&space, &enriched, basis)?;
        Ok(Field { space, enriched, extraction })
    }

    /// Unknowns per component after pruning.
    pub fn dofs(&self) -> usize {
        self.extraction.n_rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub dofs: usize,
    pub l2: f64,
    pub h1: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Rates fitted over the finest three rows.
    pub fn rates(&self) -> Result<(f64, f64)> {
        let h: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        let l2: Vec<f64> = self.rows.iter().map(|r| r.l2).collect();
        let h1: Vec<f64> = self.rows.iter().map(|r| r.h1).collect();
        Ok((fit_rate(&h, &l2)?, fit_rate(&h, &h1)?))
    }

    /// CSV with columns h, dofs, L2, H1, rate_L2, rate_H1 (pairwise rates).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["h", "dofs", "L2", "H1", "rate_L2", "rate_H1"]).map_err(csv_err)?;
        for (i, r) in self.rows.iter().enumerate() {
            let rate = |e: fn(&ConvergenceRow) -> f64| -> String {
                if i == 0 {
                    String::new()
                } else {
                    let p = &self.rows[i - 1];
                    format!("{:.4}", (e(p) / e(r)).ln() / (p.h / r.h).ln())
                }
            };
            w.write_record([
                format!("{}", r.h),
                r.dofs.to_string(),
                format!("{:e}", r.l2),
                format!("{:e}", r.h1),
                rate(|r| r.l2),
                rate(|r| r.h1),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Least-squares slope of log(error) against log(h) over the finest three rows
/// (rows ordered coarse to fine).
pub fn fit_rate(h: &[f64], err: &[f64]) -> Result<f64> {
    if h.len() != err.len() || h.len() < 3 {
        return Err(Error::Input("rate fit needs at least three (h, error) pairs".into()));
    }
    if err.windows(2).any(|w| w[1] > w[0]) {
        log::warn!("errors are not monotone under refinement");
    }
    let n = h.len();
    let x: Vec<f64> = h[n - 3..].iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err[n - 3..].iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / 3.0;
    let my = y.iter().sum::<f64>() / 3.0;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Cells per direction for a box extent and nominal size h.
pub(crate) fn cells_for(extent: [f64; 2], h: f64) -> [usize; 2] {
    [((extent[0] / h).round() as usize).max(1), ((extent[1] / h).round() as usize).max(1)]
}
