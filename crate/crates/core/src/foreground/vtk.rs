//! Legacy ASCII VTK export of the foreground mesh with discontinuous point data.

use super::ForegroundMesh;
use crate::error::Result;
use std::io::Write;
use std::path::Path;

/// Point data given per cell vertex, in cell order (cell 0 vertices, cell 1 vertices, ...).
pub enum VtkArray<'a> {
    Scalar(&'a str, Vec<f64>),
    Vector(&'a str, Vec<[f64; 2]>),
}

pub fn write_vtk(mesh: &ForegroundMesh, path: &Path, point_data: &[VtkArray]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let n_pts: usize = mesh.cells.iter().map(|c| c.vertices.len()).sum();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "foreground mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n_pts} double")?;
    for c in &mesh.cells {
        for &v in &c.vertices {
            let x = mesh.vertices[v];
            writeln!(w, "{} {} 0", x[0], x[1])?;
        }
    }
    let size: usize = mesh.cells.iter().map(|c| c.vertices.len() + 1).sum();
    writeln!(w, "CELLS {} {}", mesh.n_cells(), size)?;
    let mut k = 0;
    for c in &mesh.cells {
        let n = c.vertices.len();
        let ids: Vec<String> = (k..k + n).map(|i| i.to_string()).collect();
        writeln!(w, "{} {}", n, ids.join(" "))?;
        k += n;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_cells())?;
    for c in &mesh.cells {
        writeln!(w, "{}", if c.vertices.len() == 3 { 5 } else { 9 })?;
    }
    writeln!(w, "CELL_DATA {}", mesh.n_cells())?;
    for (name, get) in [
        ("material", (|c: &super::FgCell| c.material) as fn(&super::FgCell) -> usize),
        ("phase", |c| c.phase),
        ("level", |c| c.level),
    ] {
        writeln!(w, "SCALARS {name} int 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for c in &mesh.cells {
            writeln!(w, "{}", get(c))?;
        }
    }
    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {n_pts}")?;
        for a in point_data {
            match a {
                VtkArray::Scalar(name, v) => {
                    writeln!(w, "SCALARS {name} double 1")?;
                    writeln!(w, "LOOKUP_TABLE default")?;
                    for x in v {
                        writeln!(w, "{x}")?;
                    }
                }
                VtkArray::Vector(name, v) => {
                    writeln!(w, "VECTORS {name} double")?;
                    for x in v {
                        writeln!(w, "{} {} 0", x[0], x[1])?;
                    }
                }
            }
        }
    }
    Ok(())
}
