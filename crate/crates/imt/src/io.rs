//! Deterministic output artifacts: schema-tagged CSV tables and a simple
//! binary snapshot layout for full complex fields (see FORMATS.md).

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::grid::{ComplexField2D, Grid};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"IMTSNAP1";

/// Write a CSV table with a schema-id header comment. Values are printed
/// with a fixed format so identical inputs give byte-identical files.
pub fn write_csv(
    path: &Path,
    schema_id: &str,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<(), IoError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# schema: {schema_id}")?;
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Read back a CSV written by `write_csv`, checking the schema id.
pub fn read_csv(path: &Path, expected_schema: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut lines = BufReader::new(std::fs::File::open(path)?).lines();
    let header = lines.next().ok_or(IoError::Malformed { what: "csv", detail: "empty file".into() })??;
    let found = header
        .strip_prefix("# schema: ")
        .ok_or(IoError::Malformed { what: "csv", detail: "missing schema header".into() })?;
    if found != expected_schema {
        return Err(IoError::SchemaMismatch { expected: expected_schema.into(), found: found.into() });
    }
    let cols = lines
        .next()
        .ok_or(IoError::Malformed { what: "csv", detail: "missing column row".into() })??
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse).collect();
        rows.push(row.map_err(|e| IoError::Malformed { what: "csv", detail: e.to_string() })?);
    }
    Ok((cols, rows))
}

/// Write the named-scalar run summary (schema `imt/summary/v1`).
pub fn write_summary(path: &Path, entries: &[(String, f64)]) -> Result<(), IoError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# schema: imt/summary/v1")?;
    writeln!(w, "name,value")?;
    for (name, value) in entries {
        writeln!(w, "{name},{value:.12e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read back a summary written by `write_summary`.
pub fn read_summary(path: &Path) -> Result<Vec<(String, f64)>, IoError> {
    let mut lines = BufReader::new(std::fs::File::open(path)?).lines();
    let header = lines.next().ok_or(IoError::Malformed { what: "summary", detail: "empty".into() })??;
    if header != "# schema: imt/summary/v1" {
        return Err(IoError::SchemaMismatch { expected: "imt/summary/v1".into(), found: header });
    }
    lines.next(); // column row
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (name, value) = line
            .split_once(',')
            .ok_or(IoError::Malformed { what: "summary", detail: line.clone() })?;
        out.push((
            name.to_string(),
            value.parse().map_err(|_| IoError::Malformed { what: "summary", detail: line.clone() })?,
        ));
    }
    Ok(out)
}

/// Binary snapshot: magic, nz/ny (u64 LE), dz/dy/z0/y0/t (f64 LE), then
/// interleaved Re/Im doubles in z-major order.
pub fn write_snapshot(path: &Path, field: &ComplexField2D, t: f64) -> Result<(), IoError> {
    let g = field.grid;
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(g.nz as u64).to_le_bytes())?;
    w.write_all(&(g.ny as u64).to_le_bytes())?;
    for v in [g.dz, g.dy, g.z(0), g.y(0), t] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in field.data.iter() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(ComplexField2D, f64), IoError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(IoError::Malformed { what: "snapshot", detail: "bad magic".into() });
    }
    let mut u = [0u8; 8];
    let mut read_u64 = |r: &mut BufReader<std::fs::File>| -> Result<u64, IoError> {
        r.read_exact(&mut u)?;
        Ok(u64::from_le_bytes(u))
    };
    let nz = read_u64(&mut r)? as usize;
    let ny = read_u64(&mut r)? as usize;
    let mut f = [0u8; 8];
    let mut read_f64 = |r: &mut BufReader<std::fs::File>| -> Result<f64, IoError> {
        r.read_exact(&mut f)?;
        Ok(f64::from_le_bytes(f))
    };
    let dz = read_f64(&mut r)?;
    let _dy = read_f64(&mut r)?;
    let z0 = read_f64(&mut r)?;
    let y0 = read_f64(&mut r)?;
    let t = read_f64(&mut r)?;
    let z_half = -z0;
    let y_half = -y0;
    if nz < 2 || ny < 2 || (dz - 2.0 * z_half / (nz as f64 - 1.0)).abs() > 1e-9 * dz.abs() {
        return Err(IoError::Malformed { what: "snapshot", detail: "inconsistent grid header".into() });
    }
    let grid = Grid::new(nz, ny, z_half, 2.0 * y_half);
    let mut field = ComplexField2D::zeros(grid);
    let mut buf = [0u8; 16];
    for v in field.data.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = C64::new(
            f64::from_le_bytes(buf[0..8].try_into().unwrap()),
            f64::from_le_bytes(buf[8..16].try_into().unwrap()),
        );
    }
    Ok((field, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_schema_check() {
        let dir = std::env::temp_dir().join("imt-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("table.csv");
        let rows = vec![vec![0.0, 1.5], vec![0.5, -2.25e-7]];
        write_csv(&path, "test/v1", &["t", "value"], rows.clone()).unwrap();
        let (cols, back) = read_csv(&path, "test/v1").unwrap();
        assert_eq!(cols, vec!["t", "value"]);
        assert_eq!(back, rows);
        assert!(matches!(read_csv(&path, "other/v2"), Err(IoError::SchemaMismatch { .. })));
    }

    #[test]
    fn csv_output_is_byte_deterministic() {
        let dir = std::env::temp_dir().join("imt-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
        let rows = || vec![vec![std::f64::consts::PI, 1e-300], vec![-0.1, 3.0]];
        write_csv(&a, "test/v1", &["x", "y"], rows()).unwrap();
        write_csv(&b, "test/v1", &["x", "y"], rows()).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = std::env::temp_dir().join("imt-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.snap");
        let grid = Grid::new(17, 9, 2.0, 5.0);
        let field = ComplexField2D::from_fn(grid, |z, y| C64::new(z * y, z - y));
        write_snapshot(&path, &field, 12.5).unwrap();
        let (back, t) = read_snapshot(&path).unwrap();
        assert_eq!(t, 12.5);
        assert_eq!(back.grid.nz, 17);
        assert_eq!(back.grid.ny, 9);
        for (a, b) in field.data.iter().zip(back.data.iter()) {
            assert_eq!(a, b);
        }
    }
}
