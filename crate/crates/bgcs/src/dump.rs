//! Plain-text sparse triplet format: one nonzero per line,
//! `row col re im`, zero-based indices, whitespace separated. Lines that are
//! empty or start with `#` are ignored on reading.

use std::io::{self, BufRead, Write};

use bgcs_core::fock::SparseOperator;
use bgcs_core::Complex64;

pub fn write_triplets<W: Write>(op: &SparseOperator, mut out: W) -> io::Result<()> {
    writeln!(out, "# dim {}", op.dim())?;
    for (r, c, v) in op.entries() {
        writeln!(out, "{r} {c} {:e} {:e}", v.re, v.im)?;
    }
    Ok(())
}

pub fn read_triplets<R: BufRead>(input: R, dim: usize) -> io::Result<SparseOperator> {
    let bad = |line: usize, msg: &str| io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"));
    let mut op = SparseOperator::zeros(dim);
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad(i + 1, "expected `row col re im`"));
        }
        let r: usize = f[0].parse().map_err(|_| bad(i + 1, "bad row"))?;
        let c: usize = f[1].parse().map_err(|_| bad(i + 1, "bad column"))?;
        if r >= dim || c >= dim {
            return Err(bad(i + 1, "index out of range"));
        }
        let re: f64 = f[2].parse().map_err(|_| bad(i + 1, "bad real part"))?;
        let im: f64 = f[3].parse().map_err(|_| bad(i + 1, "bad imaginary part"))?;
        op.insert(r, c, Complex64::new(re, im));
    }
    Ok(op)
}
