use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use imig_core::bench::{
    bar_geometry, eigenstrain_geometry, run_bar2d, run_eigenstrain, run_thermoelastic, Case, CaseConfig,
    composite_materials, ConvergenceTable, ThermoSetup, DEFAULT_BASE, KAPPA,
};
use imig_core::foreground::{write_vtk, ForegroundMesh};
use imig_core::geometry::LevelSetField;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "imig", version, about = "Immersed benchmark runs on level-set geometries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case as configured and write its tables and fields.
    Run {
        case: Case,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a case over several foreground refinement depths.
    Sweep {
        case: Case,
        #[arg(long)]
        config: Option<PathBuf>,
        /// comma-separated foreground depths
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        depths: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the foreground mesh of a case as legacy VTK.
    ExportMesh {
        case: Case,
        #[arg(long)]
        config: Option<PathBuf>,
        /// background cell size (bar2d, eigenstrain)
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Loads the config for `case`; relative paths inside it are taken from the
/// config file's directory.
fn load(case: Case, path: Option<&Path>) -> Result<CaseConfig> {
    let Some(path) = path else {
        return Ok(CaseConfig::new(case));
    };
    let mut cfg = CaseConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    if cfg.case != case {
        bail!("{} describes case {:?}, not {case:?}", path.display(), cfg.case);
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    for p in [&mut cfg.lsf_file, &mut cfg.output].into_iter().flatten() {
        if p.is_relative() {
            *p = dir.join(&*p);
        }
    }
    Ok(cfg)
}

fn lsf_file(cfg: &CaseConfig) -> Result<PathBuf> {
    cfg.lsf_file.clone().context("thermoelastic runs need lsf_file in the config")
}

fn print_table(label: &str, t: &ConvergenceTable) -> Result<()> {
    println!("{label}");
    println!("{:>10} {:>8} {:>12} {:>12}", "h", "dofs", "L2", "H1");
    for r in &t.rows {
        println!("{:>10.6} {:>8} {:>12.4e} {:>12.4e}", r.h, r.dofs, r.l2, r.h1);
    }
    if t.rows.len() >= 3 {
        let (l2, h1) = t.rates()?;
        println!("rates over the finest three: L2 {l2:.3}, H1 {h1:.3}");
    }
    Ok(())
}

fn run(cfg: &CaseConfig) -> Result<()> {
    match cfg.case {
        Case::Bar2d => print_table(&format!("bar2d p={} q={}", cfg.degree_t, cfg.q), &run_bar2d(cfg)?),
        Case::Eigenstrain => print_table(
            &format!("eigenstrain p={} q={} depth {}", cfg.degree_u, cfg.q, cfg.fg_depth),
            &run_eigenstrain(cfg)?,
        ),
        Case::Thermoelastic => {
            let rep = run_thermoelastic(cfg, &lsf_file(cfg)?)?;
            println!("{:>6} {:>8} {:>8} {:>8} {:>10} {:>12}", "depth", "T", "u", "total", "fg cells", "conforming");
            for r in &rep.rows {
                println!(
                    "{:>6} {:>8} {:>8} {:>8} {:>10} {:>12}",
                    r.depth,
                    r.dofs_t,
                    r.dofs_u,
                    r.total(),
                    r.fg_cells,
                    r.conforming
                );
            }
            Ok(())
        }
    }
}

fn export(cfg: &CaseConfig, h: Option<f64>, out: &Path) -> Result<()> {
    let mesh: ForegroundMesh = match cfg.case {
        Case::Bar2d => bar_geometry(h.unwrap_or(0.25), cfg.fg_depth, KAPPA)?.mesh,
        Case::Eigenstrain => eigenstrain_geometry(h.unwrap_or(0.3125), cfg.fg_depth)?.mesh,
        Case::Thermoelastic => {
            let field = LevelSetField::read(&lsf_file(cfg)?)?;
            let base = cfg.base_cells.unwrap_or(DEFAULT_BASE);
            let d = [cfg.refine_t, cfg.refine_u];
            ThermoSetup::new(field, composite_materials(), base, d, [cfg.degree_t, cfg.degree_u], cfg.fg_depth)?.mesh
        }
    };
    write_vtk(&mesh, out, &[])?;
    println!(
        "{}: {} cells ({} cut), {} interface and {} boundary facets",
        out.display(),
        mesh.n_cells(),
        mesh.n_cut,
        mesh.interfaces.len(),
        mesh.boundaries.len()
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run { case, config, out } => {
            let mut cfg = load(case, Some(&config))?;
            if out.is_some() {
                cfg.output = out;
            }
            run(&cfg)
        }
        Command::Sweep { case, config, depths, out } => {
            let base = load(case, config.as_deref())?;
            let mut failed = vec![];
            for d in depths {
                let mut cfg = base.clone();
                cfg.fg_depth = d;
                if let Some(o) = &out {
                    cfg.output = Some(o.clone());
                }
                if let Err(e) = cfg.validate().map_err(anyhow::Error::from).and_then(|_| run(&cfg)) {
                    log::error!("depth {d}: {e:#}");
                    failed.push(d);
                }
            }
            if !failed.is_empty() {
                bail!("failed at depths {failed:?}");
            }
            Ok(())
        }
        Command::ExportMesh { case, config, h, out } => export(&load(case, config.as_deref())?, h, &out),
    }
}
