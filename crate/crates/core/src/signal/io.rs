//! CSV and compact binary encodings of [`SampledFunction`].
//!
//! CSV: header `x,re,im`, one row per node. Binary (little-endian):
//! `x0: f64`, `dx: f64`, `len: u64`, then `len` pairs of `f32` (re, im).

use super::{SampledFunction, C64};
use crate::error::{LabError, Result};
use std::io::{BufRead, Read, Write};

pub fn write_csv<W: Write>(f: &SampledFunction, mut out: W) -> Result<()> {
    writeln!(out, "x,re,im")?;
    for (n, v) in f.values().iter().enumerate() {
        writeln!(out, "{},{},{}", f.x(n), v.re, v.im)?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<SampledFunction> {
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| LabError::Io(format!("line {}: {e}", i + 1)))?;
        if fields.len() != 3 {
            return Err(LabError::Io(format!("line {}: expected 3 fields", i + 1)));
        }
        xs.push(fields[0]);
        values.push(C64::new(fields[1], fields[2]));
    }
    if xs.len() < 2 {
        return Err(LabError::Io("too few rows".into()));
    }
    let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    SampledFunction::new(xs[0], dx, values)
}

pub fn write_binary<W: Write>(f: &SampledFunction, mut out: W) -> Result<()> {
    out.write_all(&f.x0().to_le_bytes())?;
    out.write_all(&f.dx().to_le_bytes())?;
    out.write_all(&(f.len() as u64).to_le_bytes())?;
    for v in f.values() {
        out.write_all(&(v.re as f32).to_le_bytes())?;
        out.write_all(&(v.im as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<SampledFunction> {
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let x0 = f64::from_le_bytes(b8);
    input.read_exact(&mut b8)?;
    let dx = f64::from_le_bytes(b8);
    input.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut payload = vec![0u8; len * 8];
    input.read_exact(&mut payload)?;
    let values = payload
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            C64::new(re as f64, im as f64)
        })
        .collect();
    SampledFunction::new(x0, dx, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Grid;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip(vals in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 16)) {
            let grid = Grid::symmetric(3.0, 16).unwrap();
            let f = SampledFunction::on_grid(grid, vals.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
            let mut buf = Vec::new();
            write_csv(&f, &mut buf).unwrap();
            let g = read_csv(&buf[..]).unwrap();
            prop_assert_eq!(f.values(), g.values());
            prop_assert!((f.dx() - g.dx()).abs() < 1e-12);
        }

        #[test]
        fn binary_round_trip_is_f32_exact(vals in proptest::collection::vec((-1e3f32..1e3, -1e3f32..1e3), 32)) {
            let grid = Grid::new(-1.5, 0.125, 32).unwrap();
            let f = SampledFunction::on_grid(grid, vals.iter().map(|&(a, b)| C64::new(a as f64, b as f64)).collect()).unwrap();
            let mut buf = Vec::new();
            write_binary(&f, &mut buf).unwrap();
            prop_assert_eq!(buf.len(), 24 + 32 * 8);
            let g = read_binary(&buf[..]).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
