//! Solution dumps.

use std::io::Write;

use crate::error::Result;
use crate::grid::GridFunction;
use crate::weights::fmt_f64;

/// Column names: `x` or `x1..xN`, then `u` or `u1..uM`.
pub fn solution_header(dim: usize, m: usize) -> Vec<String> {
    let mut h: Vec<String> = if dim == 1 {
        vec!["x".into()]
    } else {
        (1..=dim).map(|i| format!("x{i}")).collect()
    };
    if m == 1 {
        h.push("u".into());
    } else {
        h.extend((1..=m).map(|i| format!("u{i}")));
    }
    h
}

/// One row per grid node in lexicographic order, floats with 17 significant digits.
pub fn write_solution_csv<W: Write>(u: &GridFunction<f64>, w: W) -> Result<()> {
    let grid = u.grid();
    let mut out = csv::Writer::from_writer(w);
    out.write_record(solution_header(grid.dim(), u.components()))?;
    let mut x = Vec::with_capacity(grid.dim());
    for node in 0..grid.len() {
        grid.node_into(node, &mut x);
        let row: Vec<String> = x.iter().chain(u.at(node)).map(|v| fmt_f64(*v)).collect();
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
