//! CSV rendering and atomic file output.
//!
//! Every number is written with `{:.16e}` (17 significant digits, enough to
//! round-trip an `f64`), so identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use cavmirror::analysis::WignerGrid;
use cavmirror::{DensityOperator, StateVector, C64};

/// A file to be written, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

/// `# key = value` lines recording the parameters behind a CSV.
#[derive(Debug, Clone, Default)]
pub struct Header(Vec<(String, String)>);

impl Header {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn complex(self, key: &str, z: C64) -> Self {
        self.set(key, format!("[{}, {}]", z.re, z.im))
    }

    fn render(&self, out: &mut String) {
        for (k, v) in &self.0 {
            let _ = writeln!(out, "# {k} = {v}");
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn levels(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn mode_columns(dims: &[usize], suffix: &str) -> Vec<String> {
    (0..dims.len()).map(|m| format!("n{m}{suffix}")).collect()
}

/// Long-form `x,y,W` rows, x slowest.
pub fn wigner_csv(header: &Header, grid: &WignerGrid) -> String {
    let mut out = String::new();
    header.render(&mut out);
    out.push_str("x,y,W\n");
    for (i, &x) in grid.x.iter().enumerate() {
        for (j, &y) in grid.y.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", num(x), num(y), num(grid.values[(i, j)]));
        }
    }
    out
}

/// `t,S` rows.
pub fn entropy_csv(header: &Header, curve: &[(f64, f64)]) -> String {
    let mut out = String::new();
    header.render(&mut out);
    out.push_str("t,S\n");
    for &(t, s) in curve {
        let _ = writeln!(out, "{},{}", num(t), num(s));
    }
    out
}

/// `n0,…,re,im` rows of a state vector, one per basis state; mode `m` is
/// column `n{m}` (field modes first, mirror last).
pub fn state_csv(header: &Header, state: &StateVector) -> String {
    let dims = state.dims();
    let mut out = String::new();
    header.render(&mut out);
    let mut cols = mode_columns(dims, "");
    cols.extend(["re".into(), "im".into()]);
    let _ = writeln!(out, "{}", cols.join(","));
    for (i, z) in state.amplitudes().iter().enumerate() {
        let idx: Vec<String> = levels(i, dims).iter().map(|l| l.to_string()).collect();
        let _ = writeln!(out, "{},{},{}", idx.join(","), num(z.re), num(z.im));
    }
    out
}

/// `n0,…,n0',…,re,im` rows of a density operator: row levels, then column
/// levels (primed).
pub fn density_csv(header: &Header, rho: &DensityOperator) -> String {
    let dims = rho.dims();
    let m = rho.matrix();
    let mut out = String::new();
    header.render(&mut out);
    let mut cols = mode_columns(dims, "");
    cols.extend(mode_columns(dims, "p"));
    cols.extend(["re".into(), "im".into()]);
    let _ = writeln!(out, "{}", cols.join(","));
    for i in 0..m.nrows() {
        let row: Vec<String> = levels(i, dims).iter().map(|l| l.to_string()).collect();
        for j in 0..m.ncols() {
            let col: Vec<String> = levels(j, dims).iter().map(|l| l.to_string()).collect();
            let z = m[(i, j)];
            let _ = writeln!(out, "{},{},{},{}", row.join(","), col.join(","), num(z.re), num(z.im));
        }
    }
    out
}

/// `n,P` rows.
pub fn number_csv(header: &Header, p: &[f64]) -> String {
    let mut out = String::new();
    header.render(&mut out);
    out.push_str("n,P\n");
    for (n, v) in p.iter().enumerate() {
        let _ = writeln!(out, "{n},{}", num(*v));
    }
    out
}

/// `n,m,D` rows of the decoherence exponent table.
pub fn decoherence_csv(header: &Header, table: &[(usize, usize, f64)]) -> String {
    let mut out = String::new();
    header.render(&mut out);
    out.push_str("n,m,D\n");
    for &(n, m, d) in table {
        let _ = writeln!(out, "{n},{m},{}", num(d));
    }
    out
}

/// Write `contents` to `dir/file` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, file: &str, contents: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(file);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_are_row_major() {
        assert_eq!(levels(7, &[2, 4]), vec![1, 3]);
        assert_eq!(levels(5, &[3, 2, 1]), vec![2, 1, 0]);
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn state_csv_layout() {
        let s = StateVector::basis(vec![2, 2], &[1, 0]).unwrap();
        let csv = state_csv(&Header::new().set("k", 0.5), &s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# k = 0.5");
        assert_eq!(lines[1], "n0,n1,re,im");
        assert_eq!(lines[4], "1,0,1.0000000000000000e0,0.0000000000000000e0");
    }

    #[test]
    fn atomic_write_replaces_existing() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.csv", "old").unwrap();
        let p = write_atomic(dir.path(), "a.csv", "new").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "new");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
