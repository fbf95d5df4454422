//! One-dimensional quadrature plans over grid-aligned intervals.

use crate::grid::locate;

/// Composite trapezoid plan for `(lo, hi)` on a grid axis: the abscissae are
/// `lo`, every node strictly inside, and `hi`. Values at `lo` and `hi` come
/// from linear interpolation between neighbouring nodes, so the plan
/// integrates the piecewise linear interpolant exactly.
#[derive(Debug, Clone)]
pub struct AxisPlan {
    pub abscissae: Vec<f64>,
    pub weights: Vec<f64>,
    /// `(cell, s)` for each abscissa, see [`locate`].
    pub cells: Vec<(usize, f64)>,
    /// First node touched by the plan.
    pub first_node: usize,
    /// Dense node coefficients starting at `first_node`: integral of the
    /// interpolant equals `sum coef[i] * value[first_node + i]`.
    pub coef: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanError {
    OutOfRange,
}

/// Builds the plan, or `Ok(None)` when the interval is empty.
pub fn axis_plan(coords: &[f64], lo: f64, hi: f64) -> Result<Option<AxisPlan>, PlanError> {
    if !(lo < hi) {
        return Ok(None);
    }
    let first = coords[0];
    let last = *coords.last().unwrap();
    let tol = 1e-9 * (1.0 + first.abs().max(last.abs()));
    if lo < first - tol || hi > last + tol || !lo.is_finite() || !hi.is_finite() {
        return Err(PlanError::OutOfRange);
    }
    let lo = lo.max(first);
    let hi = hi.min(last);
    if !(lo < hi) {
        return Ok(None);
    }
    let i0 = coords.partition_point(|c| *c <= lo);
    let i1 = coords.partition_point(|c| *c < hi);
    let mut abscissae = Vec::with_capacity(i1.saturating_sub(i0) + 2);
    abscissae.push(lo);
    abscissae.extend_from_slice(&coords[i0..i1.max(i0)]);
    abscissae.push(hi);
    let k = abscissae.len();
    let mut weights = vec![0.0; k];
    for j in 0..k - 1 {
        let half = 0.5 * (abscissae[j + 1] - abscissae[j]);
        weights[j] += half;
        weights[j + 1] += half;
    }
    let cells: Vec<(usize, f64)> = abscissae.iter().map(|a| locate(coords, *a)).collect();
    let first_node = cells[0].0;
    let last_node = (cells[k - 1].0 + 1).min(coords.len() - 1);
    let mut coef = vec![0.0; last_node - first_node + 1];
    for ((j, s), w) in cells.iter().zip(&weights) {
        coef[j - first_node] += w * (1.0 - s);
        if *s != 0.0 {
            coef[j + 1 - first_node] += w * s;
        }
    }
    Ok(Some(AxisPlan {
        abscissae,
        weights,
        cells,
        first_node,
        coef,
    }))
}

impl AxisPlan {
    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    /// Interpolation pairs `(node, weight)` for abscissa `i`.
    pub fn interp(&self, i: usize, node_count: usize) -> [(usize, f64); 2] {
        let (j, s) = self.cells[i];
        [(j, 1.0 - s), ((j + 1).min(node_count - 1), s)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(n: usize, h: f64) -> Vec<f64> {
        (0..=n).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn plan_integrates_linear_interpolant_exactly() {
        let c = coords(10, 0.1);
        let p = axis_plan(&c, 0.05, 0.93).unwrap().unwrap();
        let f = |y: f64| 2.0 * y + 1.0;
        let by_abscissa: f64 = p.abscissae.iter().zip(&p.weights).map(|(a, w)| w * f(*a)).sum();
        let by_nodes: f64 = p
            .coef
            .iter()
            .enumerate()
            .map(|(i, w)| w * f(c[p.first_node + i]))
            .sum();
        let exact = (0.93f64 * 0.93 + 0.93) - (0.05 * 0.05 + 0.05);
        assert!((by_abscissa - exact).abs() < 1e-14);
        assert!((by_nodes - exact).abs() < 1e-14);
    }

    #[test]
    fn empty_and_out_of_range() {
        let c = coords(4, 0.25);
        assert!(axis_plan(&c, 0.5, 0.5).unwrap().is_none());
        assert!(axis_plan(&c, 0.7, 0.2).unwrap().is_none());
        assert_eq!(axis_plan(&c, -0.5, 0.5).unwrap_err(), PlanError::OutOfRange);
        assert!(axis_plan(&c, -1e-12, 1.0 + 1e-12).unwrap().is_some());
    }
}
