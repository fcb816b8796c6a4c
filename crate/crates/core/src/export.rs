//! CSV, VTK and JSON writers for meshes, fields and reports.
//!
//! Floating-point values in CSV and VTK files are written with 17
//! significant digits so that they read back to the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::coherent::{LevelSetCurve, LevelVelocityField};
use crate::mesh::TriMesh;
use crate::spectral::EigenPair;
use crate::{Error, Result, Vec2};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_len(name: &str, len: usize, want: usize) -> Result<()> {
    if len != want {
        return Err(Error::InvalidArgument(format!(
            "field `{name}` has {len} values, expected {want}"
        )));
    }
    Ok(())
}

/// Legacy ASCII VTK unstructured grid with triangle cells.
///
/// Scalar and vector fields are given per degree of freedom and expanded to
/// ghost nodes on periodic meshes.
pub fn write_vtk<W: Write>(
    mut w: W,
    mesh: &TriMesh,
    scalars: &[(&str, &[f64])],
    vectors: &[(&str, &[Vec2])],
) -> Result<()> {
    let nodes = mesh.nodes();
    let tris = mesh.triangles();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "dynlap mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", nodes.len())?;
    for p in nodes {
        writeln!(w, "{} {} 0", fmt_f64(p.x), fmt_f64(p.y))?;
    }
    writeln!(w, "CELLS {} {}", tris.len(), 4 * tris.len())?;
    for t in tris {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {}", tris.len())?;
    for _ in tris {
        writeln!(w, "5")?;
    }
    if scalars.is_empty() && vectors.is_empty() {
        return Ok(());
    }
    writeln!(w, "POINT_DATA {}", nodes.len())?;
    let map = mesh.periodic_map();
    for (name, values) in scalars {
        check_len(name, values.len(), mesh.n_dofs())?;
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for &c in map {
            writeln!(w, "{}", fmt_f64(values[c]))?;
        }
    }
    for (name, values) in vectors {
        check_len(name, values.len(), mesh.n_dofs())?;
        writeln!(w, "VECTORS {name} double")?;
        for &c in map {
            let v = values[c];
            writeln!(w, "{} {} 0", fmt_f64(v.x), fmt_f64(v.y))?;
        }
    }
    Ok(())
}

/// `id,x,y,dof` for every node (ghost nodes carry the DOF they fold to).
pub fn write_nodes_csv<W: Write>(mut w: W, mesh: &TriMesh) -> Result<()> {
    writeln!(w, "id,x,y,dof")?;
    for (i, p) in mesh.nodes().iter().enumerate() {
        writeln!(w, "{i},{},{},{}", fmt_f64(p.x), fmt_f64(p.y), mesh.canonical(i))?;
    }
    Ok(())
}

/// `id,n0,n1,n2` in node indices.
pub fn write_tris_csv<W: Write>(mut w: W, mesh: &TriMesh) -> Result<()> {
    writeln!(w, "id,n0,n1,n2")?;
    for (i, t) in mesh.triangles().iter().enumerate() {
        writeln!(w, "{i},{},{},{}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// `id,x,y,<columns...>`, one row per degree of freedom.
pub fn write_field_csv<W: Write>(mut w: W, mesh: &TriMesh, columns: &[(&str, &[f64])]) -> Result<()> {
    let n = mesh.n_dofs();
    for (name, v) in columns {
        check_len(name, v.len(), n)?;
    }
    write!(w, "id,x,y")?;
    for (name, _) in columns {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for (i, p) in mesh.dof_coords().iter().enumerate() {
        write!(w, "{i},{},{}", fmt_f64(p.x), fmt_f64(p.y))?;
        for (_, v) in columns {
            write!(w, ",{}", fmt_f64(v[i]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// `index,lambda`.
pub fn write_spectrum_csv<W: Write>(mut w: W, pairs: &[EigenPair]) -> Result<()> {
    writeln!(w, "index,lambda")?;
    for (i, p) in pairs.iter().enumerate() {
        writeln!(w, "{i},{}", fmt_f64(p.lambda))?;
    }
    Ok(())
}

/// `x0,y0,x1,y1,c`, one row per segment.
pub fn write_levelset_csv<W: Write>(mut w: W, curve: &LevelSetCurve) -> Result<()> {
    writeln!(w, "x0,y0,x1,y1,c")?;
    let c = fmt_f64(curve.c);
    for [p, q] in &curve.segments {
        writeln!(w, "{},{},{},{},{c}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(q.x), fmt_f64(q.y))?;
    }
    Ok(())
}

/// `id,x,y,vx,vy,masked`.
pub fn write_vlevel_csv<W: Write>(mut w: W, mesh: &TriMesh, field: &LevelVelocityField) -> Result<()> {
    check_len("v_level", field.v.len(), mesh.n_dofs())?;
    writeln!(w, "id,x,y,vx,vy,masked")?;
    for (i, p) in mesh.dof_coords().iter().enumerate() {
        let v = field.v[i];
        writeln!(
            w,
            "{i},{},{},{},{},{}",
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(v.x),
            fmt_f64(v.y),
            u8::from(field.masked[i])
        )?;
    }
    Ok(())
}

/// Writes `value` as pretty-printed JSON. Numbers use the shortest
/// representation that reads back to the same `f64`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Opens `dir/name` for writing, creating `dir` if needed, runs `f` on it and flushes.
pub fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(&dir.join(name))?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by this module into its header and numeric rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::InvalidArgument(format!("bad number `{s}`: {e}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{grid_mesh, Domain};

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn vtk_layout() {
        let mesh = grid_mesh(3, 3, Domain::torus(1.0, 1.0), true).unwrap();
        let u: Vec<f64> = (0..mesh.n_dofs()).map(|i| i as f64).collect();
        let mut buf = Vec::new();
        write_vtk(&mut buf, &mesh, &[("u", &u)], &[]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("# vtk DataFile Version 3.0"));
        assert!(s.contains(&format!("POINTS {} double", mesh.nodes().len())));
        assert!(s.contains("CELLS 18 72"));
        assert!(s.contains(&format!("POINT_DATA {}", mesh.nodes().len())));
        let mut bad = Vec::new();
        assert!(write_vtk(&mut bad, &mesh, &[("u", &u[..3])], &[]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = grid_mesh(4, 4, Domain::rectangle([0.0, 0.0], [1.0, 1.0]), false).unwrap();
        let u: Vec<f64> = mesh.dof_coords().iter().map(|p| (p.x * 7.3).sin() / 3.0).collect();
        write_file(dir.path(), "u.csv", |w| write_field_csv(w, &mesh, &[("u", &u)])).unwrap();
        let (header, rows) = read_csv(&dir.path().join("u.csv")).unwrap();
        assert_eq!(header, vec!["id", "x", "y", "u"]);
        for (row, want) in rows.iter().zip(&u) {
            assert_eq!(row[3], *want);
        }
    }
}
