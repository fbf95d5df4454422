//! Tensor grids over boxes and vector-valued functions sampled on them.

use crate::domain::BoxSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tensor grid over the closure of a bounded box. Dimension `i` has
/// `cells[i] + 1` nodes; nodes are stored in lexicographic order with the
/// first coordinate varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    coords: Vec<Vec<T>>,
    strides: Vec<usize>,
}

impl<T: Scalar> Grid<T> {
    /// Uniform grid with the largest step not exceeding `h` in each dimension.
    pub fn over(b: &BoxSet<T>, h: T) -> Result<Grid<T>> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::GridMismatch(format!("grid step must be positive, got {h}")));
        }
        let mut coords = Vec::with_capacity(b.dim());
        for i in 0..b.dim() {
            let (lo, hi) = (b.lower[i], b.upper[i]);
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::GridMismatch(format!(
                    "cannot grid side {i} = ({lo}, {hi})"
                )));
            }
            let ext = hi - lo;
            let m = (ext / h - T::lit(1e-9)).ceil().max(T::one());
            let m = m.to_usize().ok_or_else(|| {
                Error::GridMismatch(format!("too many cells ({m}) in dimension {i}"))
            })?;
            let step = ext / T::count(m);
            let mut c: Vec<T> = (0..m).map(|j| lo + step * T::count(j)).collect();
            c.push(hi);
            coords.push(c);
        }
        Ok(Grid::from_coords(coords))
    }

    /// Grid with explicit (strictly increasing) per-dimension node lists.
    pub fn from_coords(coords: Vec<Vec<T>>) -> Grid<T> {
        let mut strides = vec![1usize; coords.len()];
        for d in (0..coords.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * coords[d + 1].len();
        }
        Grid { coords, strides }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self, d: usize) -> &[T] {
        &self.coords[d]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.coords.iter().map(Vec::len).collect()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.coords.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest spacing between neighbouring nodes.
    pub fn max_step(&self) -> T {
        self.coords
            .iter()
            .flat_map(|c| c.windows(2).map(|w| w[1] - w[0]))
            .fold(T::zero(), T::max)
    }

    pub fn bounds(&self) -> BoxSet<T> {
        BoxSet::new(
            self.coords.iter().map(|c| c[0]).collect(),
            self.coords.iter().map(|c| *c.last().unwrap()).collect(),
        )
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rest = flat;
        self.strides
            .iter()
            .map(|s| {
                let i = rest / s;
                rest %= s;
                i
            })
            .collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn node(&self, flat: usize) -> Vec<T> {
        let mut p = Vec::with_capacity(self.dim());
        self.node_into(flat, &mut p);
        p
    }

    pub fn node_into(&self, flat: usize, out: &mut Vec<T>) {
        out.clear();
        let mut rest = flat;
        for (c, s) in self.coords.iter().zip(&self.strides) {
            out.push(c[rest / s]);
            rest %= s;
        }
    }

    pub fn nodes(&self) -> Vec<Vec<T>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Pairs of nodes adjacent along one coordinate axis.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let shape = self.shape();
        let mut out = Vec::new();
        for flat in 0..self.len() {
            let idx = self.multi_index(flat);
            for d in 0..self.dim() {
                if idx[d] + 1 < shape[d] {
                    out.push((flat, flat + self.strides[d]));
                }
            }
        }
        out
    }

    /// Whether `x` lies in the closure of the grid box up to `tol`.
    pub fn covers(&self, x: &[T], tol: T) -> bool {
        x.iter().zip(&self.coords).all(|(v, c)| {
            *v >= c[0] - tol && *v <= *c.last().unwrap() + tol
        })
    }
}

/// Cell index `j` and local coordinate `s in [0, 1]` with
/// `a = c[j] + s (c[j+1] - c[j])`; `a` must lie within the node range.
pub fn locate<T: Scalar>(c: &[T], a: T) -> (usize, T) {
    let m = c.len() - 1;
    if m == 0 {
        return (0, T::zero());
    }
    let j = c.partition_point(|v| *v <= a).saturating_sub(1).min(m - 1);
    let s = ((a - c[j]) / (c[j + 1] - c[j])).max(T::zero()).min(T::one());
    (j, s)
}

/// Values of `u: grid -> R^M`, stored node by node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid<T>,
    m: usize,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: Grid<T>, m: usize, values: Vec<T>) -> Result<Self> {
        if m == 0 || values.len() != grid.len() * m {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes with {} components",
                values.len(),
                grid.len(),
                m
            )));
        }
        Ok(GridFunction { grid, m, values })
    }

    pub fn zeros(grid: Grid<T>, m: usize) -> Self {
        let values = vec![T::zero(); grid.len() * m];
        GridFunction { grid, m, values }
    }

    pub fn from_fn(grid: Grid<T>, m: usize, mut f: impl FnMut(&[T]) -> Vec<T>) -> Self {
        let mut values = Vec::with_capacity(grid.len() * m);
        let mut p = Vec::new();
        for i in 0..grid.len() {
            grid.node_into(i, &mut p);
            let v = f(&p);
            assert_eq!(v.len(), m, "component count");
            values.extend(v);
        }
        GridFunction { grid, m, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn at(&self, node: usize) -> &[T] {
        &self.values[node * self.m..(node + 1) * self.m]
    }

    pub fn norm_at(&self, node: usize) -> T {
        euclid(self.at(node))
    }

    /// Grid maximum of the Euclidean norm.
    pub fn sup_norm(&self) -> T {
        (0..self.grid.len())
            .map(|i| self.norm_at(i))
            .fold(T::zero(), T::max)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.m != other.m {
            return Err(Error::GridMismatch(
                "grid functions live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// Grid maximum of `|self(x) - other(x)|`.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        Ok((0..self.grid.len())
            .map(|i| {
                self.at(i)
                    .iter()
                    .zip(other.at(i))
                    .fold(T::zero(), |s, (a, b)| s + (*a - *b) * (*a - *b))
                    .sqrt()
            })
            .fold(T::zero(), T::max))
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * *a + beta * *b)
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            m: self.m,
            values,
        })
    }

    /// Multilinear interpolation at a point inside the grid box.
    pub fn interpolate(&self, x: &[T]) -> Vec<T> {
        let dim = self.grid.dim();
        let cells: Vec<(usize, T)> = (0..dim).map(|d| locate(self.grid.coords(d), x[d])).collect();
        let mut out = vec![T::zero(); self.m];
        for corner in 0..(1usize << dim) {
            let mut wgt = T::one();
            let mut flat = 0;
            for (d, (j, s)) in cells.iter().enumerate() {
                let up = (corner >> (dim - 1 - d)) & 1 == 1;
                let jd = if up { (*j + 1).min(self.grid.coords(d).len() - 1) } else { *j };
                wgt = wgt * if up { *s } else { T::one() - *s };
                flat += jd * self.grid.strides()[d];
            }
            if wgt != T::zero() {
                for (o, v) in out.iter_mut().zip(self.at(flat)) {
                    *o = *o + wgt * *v;
                }
            }
        }
        out
    }
}

pub(crate) fn euclid<T: Scalar>(v: &[T]) -> T {
    if v.len() == 1 {
        return v[0].abs();
    }
    v.iter().fold(T::zero(), |s, a| s + *a * *a).sqrt()
}

/// Finite collection of grid functions on one grid.
#[derive(Debug, Clone)]
pub struct FunctionFamily<T> {
    members: Vec<GridFunction<T>>,
}

impl<T: Scalar> FunctionFamily<T> {
    pub fn new(members: Vec<GridFunction<T>>) -> Result<Self> {
        if let Some(first) = members.first() {
            for f in &members[1..] {
                first.check_same_grid(f)?;
            }
        }
        Ok(FunctionFamily { members })
    }

    pub fn members(&self) -> &[GridFunction<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn grid(&self) -> Option<&Grid<T>> {
        self.members.first().map(GridFunction::grid)
    }

    pub fn with_member(&self, extra: GridFunction<T>) -> Result<Self> {
        let mut members = self.members.clone();
        members.push(extra);
        FunctionFamily::new(members)
    }
}

/// Discrete modulus of equicontinuity: the largest jump `|f(x) - f(y)|`
/// over axis-adjacent node pairs and family members.
pub fn equicontinuity_modulus<T: Scalar>(fam: &FunctionFamily<T>) -> T {
    let Some(grid) = fam.grid() else {
        return T::zero();
    };
    let pairs = grid.adjacent_pairs();
    let mut worst = T::zero();
    for f in fam.members() {
        for &(a, b) in &pairs {
            let d = f
                .at(a)
                .iter()
                .zip(f.at(b))
                .fold(T::zero(), |s, (p, q)| s + (*p - *q) * (*p - *q))
                .sqrt();
            worst = worst.max(d);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(h: f64) -> Grid<f64> {
        Grid::over(&BoxSet::new(vec![0.0], vec![1.0]), h).unwrap()
    }

    #[test]
    fn grid_steps_and_order() {
        let g = Grid::over(&BoxSet::new(vec![0.0, -1.0], vec![1.0, 1.0]), 0.3).unwrap();
        assert_eq!(g.shape(), vec![5, 8]);
        assert_eq!(g.node(0), vec![0.0, -1.0]);
        assert_eq!(g.node(1)[0], 0.0);
        assert_eq!(g.node(8)[0], 0.25);
        assert_eq!(*g.coords(1).last().unwrap(), 1.0);
        let g = unit_grid(1.0 / 512.0);
        assert_eq!(g.len(), 513);
        assert_eq!(g.coords(0)[256], 0.5);
    }

    #[test]
    fn f32_grid_works() {
        let g: Grid<f32> = Grid::over(&BoxSet::new(vec![0.0f32], vec![2.0]), 0.5).unwrap();
        assert_eq!(g.len(), 5);
        let f = GridFunction::from_fn(g, 1, |x| vec![3.0 * x[0]]);
        let fam = FunctionFamily::new(vec![f]).unwrap();
        assert_eq!(equicontinuity_modulus(&fam), 1.5f32);
    }

    #[test]
    fn modulus_examples() {
        let g = unit_grid(0.01);
        let consts = (0..5)
            .map(|k| GridFunction::from_fn(g.clone(), 1, |_| vec![k as f64]))
            .collect();
        assert_eq!(equicontinuity_modulus(&FunctionFamily::new(consts).unwrap()), 0.0);

        let s = GridFunction::from_fn(g.clone(), 1, |x| vec![x[0].sin()]);
        let e = equicontinuity_modulus(&FunctionFamily::new(vec![s]).unwrap());
        assert!(e <= g.max_step() + 1e-15);

        let k = 7.0;
        let lin = GridFunction::from_fn(g.clone(), 1, |x| vec![k * x[0]]);
        let e = equicontinuity_modulus(&FunctionFamily::new(vec![lin]).unwrap());
        assert!((e - k * g.max_step()).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_exact_for_multilinear_functions() {
        let g = Grid::over(&BoxSet::new(vec![0.0, 0.0], vec![2.0, 1.0]), 0.25).unwrap();
        let f = GridFunction::from_fn(g, 1, |x| vec![1.0 + 2.0 * x[0] - x[1] + 3.0 * x[0] * x[1]]);
        for p in [[0.1f64, 0.7], [1.99, 0.01], [2.0, 1.0], [0.0, 0.0]] {
            let exact = 1.0 + 2.0 * p[0] - p[1] + 3.0 * p[0] * p[1];
            assert!((f.interpolate(&p)[0] - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn mismatched_family_is_rejected() {
        let a = GridFunction::zeros(unit_grid(0.1), 1);
        let b = GridFunction::zeros(unit_grid(0.2), 1);
        assert!(matches!(FunctionFamily::new(vec![a, b]), Err(Error::GridMismatch(_))));
    }
}
