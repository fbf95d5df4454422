//! Kernel, Volterra operator, Nemytskii selection, outer maps and the
//! composite fixed-point operator, plus sampled hypothesis checks.
//!
//! Every expression is compiled against one slot vector
//! `[x_1..x_N, u_1..u_M, w_1..w_M]` (kernels use `[x_1..x_N, y_1..y_N]`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::convex::{hausdorff, ConvexSet};
use crate::domain::{integration_names, point_names, push_names, BoxSet, Region};
use crate::error::{Error, Result};
use crate::expr::{CompiledExpr, Expr, VarLayout};
use crate::grid::{euclid, Grid, GridFunction};
use crate::problem::{Form, ProblemSpec, Strategy};
use crate::quadrature::{axis_plan, AxisPlan, PlanError};

fn state_names(prefix: &str, m: usize, i: usize) -> Vec<String> {
    if m == 1 {
        vec![prefix.to_string(), format!("{prefix}1")]
    } else {
        vec![format!("{prefix}{}", i + 1)]
    }
}

/// Layout `[x, u, w]` exposing only the requested groups by name.
fn state_layout(dim: usize, m: usize, with_u: bool, with_w: bool, nested: bool) -> VarLayout {
    let mut l = VarLayout::new();
    for i in 0..dim {
        push_names(&mut l, &point_names(dim, i));
    }
    for i in 0..m {
        let mut names = if with_u { state_names("u", m, i) } else { vec![] };
        if nested && m == 1 {
            names.push("u1".into());
        }
        push_names(&mut l, &names);
    }
    for i in 0..m {
        let mut names = if with_w { state_names("w", m, i) } else { vec![] };
        if nested && m == 1 {
            names.push("u2".into());
        }
        push_names(&mut l, &names);
    }
    l
}

fn compile_all(es: &[Expr], layout: &VarLayout, what: &str) -> Result<Vec<CompiledExpr>> {
    es.iter()
        .enumerate()
        .map(|(i, e)| {
            e.compile(layout)
                .map_err(Error::expr_in(format!("{what} component {}", i + 1)))
        })
        .collect()
}

/// Matrix kernel `k(x, y)`, row major, `M x M`.
#[derive(Debug, Clone)]
pub struct Kernel {
    dim: usize,
    m: usize,
    entries: Vec<Expr>,
    compiled: Vec<CompiledExpr>,
    y_free: bool,
}

impl Kernel {
    pub fn new(entries: Vec<Vec<Expr>>, dim: usize) -> Result<Kernel> {
        let m = entries.len();
        if m == 0 || entries.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidProblem("kernel must be a nonempty square matrix".into()));
        }
        let mut layout = VarLayout::new();
        for i in 0..dim {
            push_names(&mut layout, &point_names(dim, i));
        }
        for i in 0..dim {
            push_names(&mut layout, &integration_names(dim, i));
        }
        let flat: Vec<Expr> = entries.into_iter().flatten().collect();
        let compiled = compile_all(&flat, &layout, "kernel")?;
        let ys: Vec<usize> = (dim..2 * dim).collect();
        let y_free = compiled.iter().all(|c| c.independent_of(&ys));
        Ok(Kernel {
            dim,
            m,
            entries: flat,
            compiled,
            y_free,
        })
    }

    pub fn scalar(k: Expr, dim: usize) -> Result<Kernel> {
        Kernel::new(vec![vec![k]], dim)
    }

    pub fn parse_scalar(k: &str, dim: usize) -> Result<Kernel> {
        Kernel::scalar(Expr::parse(k)?, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    /// True when no entry depends on the integration variable.
    pub fn independent_of_y(&self) -> bool {
        self.y_free
    }

    /// Evaluates the matrix at `xy = [x..., y...]`.
    pub fn eval_into(&self, xy: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, c) in out.iter_mut().zip(&self.compiled) {
            *o = c
                .eval(xy)
                .map_err(Error::expr_in(format!("kernel at {xy:?}")))?;
        }
        Ok(())
    }
}

/// Operator norm of a row-major `m x m` matrix.
pub fn operator_norm(a: &[f64], m: usize) -> f64 {
    if m == 1 {
        return a[0].abs();
    }
    // power iteration on a^T a
    let mut v: Vec<f64> = (0..m).map(|i| 1.0 / (i + 1) as f64).collect();
    let mut sigma2 = 0.0;
    for _ in 0..50 {
        let av: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|j| a[i * m + j] * v[j]).sum())
            .collect();
        let mut atav: Vec<f64> = (0..m)
            .map(|j| (0..m).map(|i| a[i * m + j] * av[i]).sum())
            .collect();
        let nrm = euclid(&atav);
        if nrm == 0.0 {
            return 0.0;
        }
        sigma2 = nrm / euclid(&v);
        atav.iter_mut().for_each(|x| *x /= nrm);
        v = atav;
    }
    sigma2.sqrt()
}

/// Set-valued right-hand side with interval-box values
/// `F(x, u) = prod [h1_i(x, u), h2_i(x, u)]`.
#[derive(Debug, Clone)]
pub struct MultiMapF {
    dim: usize,
    lower: Vec<Expr>,
    upper: Vec<Expr>,
    lower_c: Vec<CompiledExpr>,
    upper_c: Vec<CompiledExpr>,
    singleton: bool,
    b: Expr,
    eta: Expr,
    b_c: CompiledExpr,
    eta_c: CompiledExpr,
}

impl MultiMapF {
    pub fn envelopes(lower: Vec<Expr>, upper: Vec<Expr>, b: Expr, eta: Expr, dim: usize) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidProblem("F needs matching envelope lists".into()));
        }
        let m = lower.len();
        let layout = state_layout(dim, m, true, false, false);
        let lower_c = compile_all(&lower, &layout, "F lower envelope")?;
        let upper_c = compile_all(&upper, &layout, "F upper envelope")?;
        let pl = crate::domain::point_layout(dim);
        let b_c = b.compile(&pl).map_err(Error::expr_in("F growth bound b"))?;
        let eta_c = eta.compile(&pl).map_err(Error::expr_in("F condensing bound eta"))?;
        let singleton = lower == upper;
        Ok(MultiMapF {
            dim,
            lower,
            upper,
            lower_c,
            upper_c,
            singleton,
            b,
            eta,
            b_c,
            eta_c,
        })
    }

    pub fn singleton(f: Vec<Expr>, b: Expr, eta: Expr, dim: usize) -> Result<Self> {
        MultiMapF::envelopes(f.clone(), f, b, eta, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.lower.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.singleton
    }

    pub fn lower_exprs(&self) -> &[Expr] {
        &self.lower
    }

    pub fn upper_exprs(&self) -> &[Expr] {
        &self.upper
    }

    pub fn b(&self) -> &Expr {
        &self.b
    }

    pub fn eta(&self) -> &Expr {
        &self.eta
    }

    pub fn b_at(&self, x: &[f64]) -> Result<f64> {
        self.b_c.eval(x).map_err(Error::expr_in(format!("b at {x:?}")))
    }

    pub fn eta_at(&self, x: &[f64]) -> Result<f64> {
        self.eta_c.eval(x).map_err(Error::expr_in(format!("eta at {x:?}")))
    }

    /// Envelopes at `slots = [x, u, w]`; fails when they cross.
    pub fn bounds(&self, slots: &[f64], lo: &mut [f64], hi: &mut [f64]) -> Result<()> {
        let ctx = || format!("F at {slots:?}");
        for i in 0..lo.len() {
            lo[i] = self.lower_c[i].eval(slots).map_err(Error::expr_in(ctx()))?;
            hi[i] = if self.singleton {
                lo[i]
            } else {
                self.upper_c[i].eval(slots).map_err(Error::expr_in(ctx()))?
            };
            if lo[i] > hi[i] {
                return Err(Error::InvalidMultimap {
                    point: slots[..self.dim].to_vec(),
                    u: slots[self.dim..self.dim + lo.len()].to_vec(),
                    lower: lo[i],
                    upper: hi[i],
                });
            }
        }
        Ok(())
    }
}

/// Scalar modulus `x -> phi(x)` given as an expression in `x`.
#[derive(Debug, Clone)]
pub struct Modulus {
    expr: Expr,
    compiled: CompiledExpr,
}

impl Modulus {
    pub fn new(expr: Expr) -> Result<Modulus> {
        let mut l = VarLayout::new();
        l.push(&["x"]);
        let compiled = expr.compile(&l).map_err(Error::expr_in("modulus"))?;
        Ok(Modulus { expr, compiled })
    }

    pub fn parse(s: &str) -> Result<Modulus> {
        Modulus::new(Expr::parse(s)?)
    }

    pub fn identity() -> Modulus {
        Modulus::parse("x").expect("valid")
    }

    pub fn zero() -> Modulus {
        Modulus::new(Expr::constant(0.0)).expect("valid")
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.compiled
            .eval(&[x])
            .map_err(Error::expr_in(format!("modulus at {x}")))
    }
}

#[derive(Debug, Clone)]
enum OuterKind {
    Additive(Vec<CompiledExpr>),
    Nested(Vec<CompiledExpr>),
    SetValued {
        lower: Vec<CompiledExpr>,
        upper: Vec<CompiledExpr>,
    },
}

/// The map outside the integral: `g(x, u)`, `g(x, u, w)` or the box-valued
/// `G(x, w)`, together with its declared moduli.
#[derive(Debug, Clone)]
pub struct OuterMap {
    dim: usize,
    m: usize,
    exprs: Vec<Expr>,
    upper_exprs: Vec<Expr>,
    kind: OuterKind,
    pub phi: Modulus,
    pub theta: Option<Modulus>,
    pub vartheta: Option<Modulus>,
}

impl OuterMap {
    /// `g(x, u)` for the additive form.
    pub fn additive(g: Vec<Expr>, phi: Modulus, dim: usize) -> Result<OuterMap> {
        let m = g.len();
        let c = compile_all(&g, &state_layout(dim, m, true, false, false), "g")?;
        Ok(OuterMap {
            dim,
            m,
            exprs: g,
            upper_exprs: vec![],
            kind: OuterKind::Additive(c),
            phi,
            theta: None,
            vartheta: None,
        })
    }

    /// `g(x, u, w)` where `w` receives the value of the integral.
    pub fn nested(g: Vec<Expr>, phi: Modulus, vartheta: Option<Modulus>, dim: usize) -> Result<OuterMap> {
        let m = g.len();
        let c = compile_all(&g, &state_layout(dim, m, true, true, true), "g")?;
        Ok(OuterMap {
            dim,
            m,
            exprs: g,
            upper_exprs: vec![],
            kind: OuterKind::Nested(c),
            phi,
            theta: None,
            vartheta,
        })
    }

    /// Box-valued `G(x, w) = prod [lower_i, upper_i]`.
    pub fn set_valued(
        lower: Vec<Expr>,
        upper: Vec<Expr>,
        phi: Modulus,
        theta: Option<Modulus>,
        dim: usize,
    ) -> Result<OuterMap> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidProblem("G needs matching envelope lists".into()));
        }
        let m = lower.len();
        let layout = state_layout(dim, m, false, true, false);
        let lc = compile_all(&lower, &layout, "G lower")?;
        let uc = compile_all(&upper, &layout, "G upper")?;
        Ok(OuterMap {
            dim,
            m,
            exprs: lower,
            upper_exprs: upper,
            kind: OuterKind::SetValued { lower: lc, upper: uc },
            phi,
            theta,
            vartheta: None,
        })
    }

    pub fn form(&self) -> Form {
        match self.kind {
            OuterKind::Additive(_) => Form::Additive,
            OuterKind::Nested(_) => Form::Nested,
            OuterKind::SetValued { .. } => Form::SetValued,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.m
    }

    /// `g` expressions (lower envelope of `G` for the set-valued form).
    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    pub fn upper_exprs(&self) -> &[Expr] {
        &self.upper_exprs
    }

    pub fn vartheta_or_identity(&self) -> Modulus {
        self.vartheta.clone().unwrap_or_else(Modulus::identity)
    }

    pub fn theta_or_zero(&self) -> Modulus {
        self.theta.clone().unwrap_or_else(Modulus::zero)
    }

    /// Single-valued `g` at `slots = [x, u, w]` (additive and nested forms).
    pub fn eval_g(&self, slots: &[f64], out: &mut [f64]) -> Result<()> {
        let cs = match &self.kind {
            OuterKind::Additive(c) | OuterKind::Nested(c) => c,
            OuterKind::SetValued { .. } => {
                return Err(Error::InvalidProblem("set-valued G has no single value".into()))
            }
        };
        for (o, c) in out.iter_mut().zip(cs) {
            *o = c.eval(slots).map_err(Error::expr_in(format!("g at {slots:?}")))?;
        }
        Ok(())
    }

    /// Box `G(x, w)` at `slots = [x, u, w]`.
    pub fn eval_box(&self, slots: &[f64], lo: &mut [f64], hi: &mut [f64]) -> Result<()> {
        match &self.kind {
            OuterKind::SetValued { lower, upper } => {
                for i in 0..lo.len() {
                    let ctx = || format!("G at {slots:?}");
                    lo[i] = lower[i].eval(slots).map_err(Error::expr_in(ctx()))?;
                    hi[i] = upper[i].eval(slots).map_err(Error::expr_in(ctx()))?;
                    if lo[i] > hi[i] {
                        return Err(Error::InvalidMultimap {
                            point: slots[..self.dim].to_vec(),
                            u: slots[self.dim + self.m..].to_vec(),
                            lower: lo[i],
                            upper: hi[i],
                        });
                    }
                }
                Ok(())
            }
            _ => {
                self.eval_g(slots, lo)?;
                hi.copy_from_slice(lo);
                Ok(())
            }
        }
    }
}

fn coverage(x: &[f64]) -> impl FnOnce(PlanError) -> Error + '_ {
    move |_| Error::GridCoverage { point: x.to_vec() }
}

/// Per-axis plans for `Lambda(x)`, or `None` when the region is empty.
pub(crate) fn region_plans(
    r: &Region,
    omega: &BoxSet<f64>,
    grid: &Grid<f64>,
    x: &[f64],
) -> Result<Option<Vec<AxisPlan>>> {
    let lam = r.clipped(x, omega)?;
    if lam.is_empty() {
        return Ok(None);
    }
    let mut plans = Vec::with_capacity(grid.dim());
    for d in 0..grid.dim() {
        match axis_plan(grid.coords(d), lam.lower[d], lam.upper[d]).map_err(coverage(x))? {
            Some(p) => plans.push(p),
            None => return Ok(None),
        }
    }
    Ok(Some(plans))
}

/// `sum_j prod_d coef_d[j_d] * w[j]` over the nodes touched by the plans.
fn contract_nodes(plans: &[AxisPlan], w: &GridFunction<f64>, acc: &mut [f64]) {
    let strides = w.grid().strides();
    let m = w.components();
    let vals = w.values();
    fn rec(
        d: usize,
        base: usize,
        weight: f64,
        plans: &[AxisPlan],
        strides: &[usize],
        vals: &[f64],
        m: usize,
        acc: &mut [f64],
    ) {
        let p = &plans[d];
        if d + 1 == plans.len() {
            for (i, c) in p.coef.iter().enumerate() {
                let node = base + (p.first_node + i) * strides[d];
                let wc = weight * c;
                for k in 0..m {
                    acc[k] += wc * vals[node * m + k];
                }
            }
        } else {
            for (i, c) in p.coef.iter().enumerate() {
                let node = base + (p.first_node + i) * strides[d];
                rec(d + 1, node, weight * c, plans, strides, vals, m, acc);
            }
        }
    }
    rec(0, 0, 1.0, plans, strides, vals, m, acc);
}

/// `V(w)(x) = ∫_{Lambda(x)} k(x, y) w(y) dy` by composite trapezoid
/// quadrature on the grid of `w` with interpolated end values.
pub fn volterra_apply(
    k: &Kernel,
    r: &Region,
    omega: &BoxSet<f64>,
    w: &GridFunction<f64>,
    x: &[f64],
) -> Result<Vec<f64>> {
    let m = w.components();
    let dim = x.len();
    let mut out = vec![0.0; m];
    let Some(plans) = region_plans(r, omega, w.grid(), x)? else {
        return Ok(out);
    };
    let mut kmat = vec![0.0; m * m];
    let mut xy = Vec::with_capacity(2 * dim);
    xy.extend_from_slice(x);
    if k.independent_of_y() {
        xy.extend_from_slice(x);
        k.eval_into(&xy, &mut kmat)?;
        let mut acc = vec![0.0; m];
        contract_nodes(&plans, w, &mut acc);
        for i in 0..m {
            out[i] = (0..m).map(|j| kmat[i * m + j] * acc[j]).sum();
        }
        return Ok(out);
    }
    xy.resize(2 * dim, 0.0);
    let counts: Vec<usize> = plans.iter().map(AxisPlan::len).collect();
    let node_counts = w.grid().shape();
    let strides = w.grid().strides().to_vec();
    let mut idx = vec![0usize; dim];
    let mut wv = vec![0.0; m];
    'outer: loop {
        let mut weight = 1.0;
        for d in 0..dim {
            xy[dim + d] = plans[d].abscissae[idx[d]];
            weight *= plans[d].weights[idx[d]];
        }
        if weight != 0.0 {
            wv.iter_mut().for_each(|v| *v = 0.0);
            for corner in 0..(1usize << dim) {
                let mut cw = 1.0;
                let mut node = 0;
                for d in 0..dim {
                    let pair = plans[d].interp(idx[d], node_counts[d]);
                    let (j, s) = pair[(corner >> (dim - 1 - d)) & 1];
                    cw *= s;
                    node += j * strides[d];
                }
                if cw != 0.0 {
                    for (v, a) in wv.iter_mut().zip(w.at(node)) {
                        *v += cw * a;
                    }
                }
            }
            k.eval_into(&xy, &mut kmat)?;
            for i in 0..m {
                out[i] += weight * (0..m).map(|j| kmat[i * m + j] * wv[j]).sum::<f64>();
            }
        }
        let mut d = dim;
        loop {
            if d == 0 {
                break 'outer;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < counts[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

/// Pointwise selection `w(x) ∈ F(x, u(x))`.
pub fn nemytskii_select(
    f: &MultiMapF,
    u: &GridFunction<f64>,
    strategy: Strategy,
) -> Result<GridFunction<f64>> {
    let (lo, hi) = selection_bounds(f, u)?;
    Ok(match strategy {
        Strategy::Lower => lo,
        Strategy::Upper => hi,
        Strategy::Midpoint => lo.combine(0.5, &hi, 0.5)?,
    })
}

/// Lower and upper selections of `F(·, u(·))`.
pub fn selection_bounds(
    f: &MultiMapF,
    u: &GridFunction<f64>,
) -> Result<(GridFunction<f64>, GridFunction<f64>)> {
    let m = f.components();
    if u.components() != m {
        return Err(Error::GridMismatch(format!(
            "state has {} components, F has {m}",
            u.components()
        )));
    }
    let grid = u.grid();
    let dim = grid.dim();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut slots = grid.node(i);
            slots.extend_from_slice(u.at(i));
            slots.resize(dim + 2 * m, 0.0);
            let mut lo = vec![0.0; m];
            let mut hi = vec![0.0; m];
            f.bounds(&slots, &mut lo, &mut hi)?;
            Ok((lo, hi))
        })
        .collect::<Result<_>>()?;
    let (lo, hi): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok((
        GridFunction::new(grid.clone(), m, lo.concat())?,
        GridFunction::new(grid.clone(), m, hi.concat())?,
    ))
}

/// Values of `V(w)` at every node of `w`'s grid.
pub fn volterra_grid(spec: &ProblemSpec, w: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    let grid = w.grid();
    let omega = spec.exhaustion.omega();
    let vals: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| volterra_apply(&spec.kernel, &spec.region, omega, w, &grid.node(i)))
        .collect::<Result<_>>()?;
    GridFunction::new(grid.clone(), w.components(), vals.concat())
}

/// Applies the outer map to `u` and precomputed integral values `z`.
pub fn outer_apply(
    spec: &ProblemSpec,
    u: &GridFunction<f64>,
    z: &GridFunction<f64>,
) -> Result<GridFunction<f64>> {
    let grid = u.grid();
    let m = spec.components();
    let vals: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut slots = grid.node(i);
            slots.extend_from_slice(u.at(i));
            slots.extend_from_slice(z.at(i));
            let mut v = vec![0.0; m];
            match spec.form {
                Form::Additive => {
                    spec.outer.eval_g(&slots, &mut v)?;
                    v.iter_mut().zip(z.at(i)).for_each(|(a, b)| *a += b);
                }
                Form::Nested => spec.outer.eval_g(&slots, &mut v)?,
                Form::SetValued => {
                    let mut hi = vec![0.0; m];
                    spec.outer.eval_box(&slots, &mut v, &mut hi)?;
                    let set = ConvexSet::Interval { lower: v, upper: hi };
                    v = set.steiner()?;
                }
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    GridFunction::new(grid.clone(), m, vals.concat())
}

/// The composite operator `H(u)` of the configured form.
pub fn h_apply(spec: &ProblemSpec, u: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    let w = nemytskii_select(&spec.f, u, spec.disc.strategy)?;
    let z = volterra_grid(spec, &w)?;
    outer_apply(spec, u, &z)
}

/// Grid maximum of the kernel's operator norm over `x` in the grid and
/// `y` among the quadrature abscissae of `Lambda(x)`.
pub fn sup_kernel_norm(spec: &ProblemSpec, grid: &Grid<f64>) -> Result<f64> {
    let k = &spec.kernel;
    let m = k.components();
    let dim = grid.dim();
    let omega = spec.exhaustion.omega();
    let per_node: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let Some(plans) = region_plans(&spec.region, omega, grid, &x)? else {
                return Ok(0.0);
            };
            let mut kmat = vec![0.0; m * m];
            let mut xy = x.clone();
            if k.independent_of_y() {
                xy.extend_from_slice(&x);
                k.eval_into(&xy, &mut kmat)?;
                return Ok(operator_norm(&kmat, m));
            }
            xy.resize(2 * dim, 0.0);
            let mut best = 0.0f64;
            let mut idx = vec![0usize; dim];
            loop {
                for d in 0..dim {
                    xy[dim + d] = plans[d].abscissae[idx[d]];
                }
                k.eval_into(&xy, &mut kmat)?;
                best = best.max(operator_norm(&kmat, m));
                let mut d = dim;
                loop {
                    if d == 0 {
                        return Ok(best);
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < plans[d].len() {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(per_node.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub check: &'static str,
    pub point: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct HypothesisReport {
    /// `(check name, samples evaluated)`.
    pub checks: Vec<(&'static str, usize)>,
    pub violations: Vec<Violation>,
}

impl HypothesisReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations_of(&self, check: &str) -> usize {
        self.violations.iter().filter(|v| v.check == check).count()
    }
}

fn sample_in(rng: &mut ChaCha8Rng, b: &BoxSet<f64>) -> Vec<f64> {
    (0..b.dim())
        .map(|i| {
            let t: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
            b.lower[i] + t * (b.upper[i] - b.lower[i])
        })
        .collect()
}

fn sample_state(rng: &mut ChaCha8Rng, m: usize, r: f64) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-r..=r)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Randomized checks of the growth bound, envelope order, outer-map modulus
/// and kernel continuity on member `n`. States are drawn from `[-R, R]^M`
/// with `R = max(1, a_n)`.
pub fn check_hypotheses(spec: &ProblemSpec, n: usize, samples: usize, seed: u64) -> Result<HypothesisReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let member = spec.exhaustion.member(n);
    let dim = spec.dim();
    let m = spec.components();
    let a_n = spec.disc.a_scale.unwrap_or(1.0) * n as f64;
    let r = a_n.max(1.0);
    let mut rep = HypothesisReport::default();
    let tol = |scale: f64| 1e-10 * (1.0 + scale.abs());

    let mut lo = vec![0.0; m];
    let mut hi = vec![0.0; m];
    for _ in 0..samples {
        let x = sample_in(&mut rng, &member);
        let u = sample_state(&mut rng, m, r);
        let mut slots = x.clone();
        slots.extend_from_slice(&u);
        slots.resize(dim + 2 * m, 0.0);
        match spec.f.bounds(&slots, &mut lo, &mut hi) {
            Err(Error::InvalidMultimap { lower, upper, .. }) => {
                rep.violations.push(Violation {
                    check: "envelope-order",
                    point: slots[..dim + m].to_vec(),
                    detail: format!("h1 = {lower} > h2 = {upper}"),
                });
                continue;
            }
            Err(e) => return Err(e),
            Ok(()) => {}
        }
        let size: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a.abs().max(b.abs())).collect();
        let fnorm = euclid(&size);
        let bound = spec.f.b_at(&x)? * (1.0 + euclid(&u));
        if fnorm > bound + tol(bound) {
            rep.violations.push(Violation {
                check: "growth",
                point: slots[..dim + m].to_vec(),
                detail: format!("|F(x,u)| = {fnorm} > b(x)(1+|u|) = {bound}"),
            });
        }
    }
    rep.checks.push(("envelope-order", samples));
    rep.checks.push(("growth", samples));

    let phi = &spec.outer.phi;
    let phi0 = phi.eval(0.0)?;
    if phi0.abs() > 1e-12 {
        rep.violations.push(Violation {
            check: "modulus",
            point: vec![0.0],
            detail: format!("phi(0) = {phi0}, expected 0"),
        });
    }
    for _ in 0..samples {
        let x = sample_in(&mut rng, &member);
        let u = sample_state(&mut rng, m, r);
        let v = sample_state(&mut rng, m, r);
        let mut s1 = x.clone();
        let mut s2 = x.clone();
        match spec.form {
            Form::Additive => {
                s1.extend(&u);
                s1.resize(dim + 2 * m, 0.0);
                s2.extend(&v);
                s2.resize(dim + 2 * m, 0.0);
                let mut g1 = vec![0.0; m];
                let mut g2 = vec![0.0; m];
                spec.outer.eval_g(&s1, &mut g1)?;
                spec.outer.eval_g(&s2, &mut g2)?;
                let lhs = dist(&g1, &g2);
                let rhs = phi.eval(dist(&u, &v))?;
                if lhs > rhs + tol(rhs) {
                    rep.violations.push(Violation {
                        check: "modulus",
                        point: [x.clone(), u.clone(), v.clone()].concat(),
                        detail: format!("|g(x,u) - g(x,w)| = {lhs} > phi(|u-w|) = {rhs}"),
                    });
                }
            }
            Form::Nested => {
                let z1 = sample_state(&mut rng, m, r);
                let z2 = sample_state(&mut rng, m, r);
                s1.extend(&u);
                s1.extend(&z1);
                s2.extend(&v);
                s2.extend(&z2);
                let mut g1 = vec![0.0; m];
                let mut g2 = vec![0.0; m];
                spec.outer.eval_g(&s1, &mut g1)?;
                spec.outer.eval_g(&s2, &mut g2)?;
                let lhs = dist(&g1, &g2);
                let rhs = phi.eval(dist(&u, &v))? + spec.outer.vartheta_or_identity().eval(dist(&z1, &z2))?;
                if lhs > rhs + tol(rhs) {
                    rep.violations.push(Violation {
                        check: "modulus",
                        point: [x.clone(), u.clone(), v.clone()].concat(),
                        detail: format!("|g(x,u1,u2) - g(x,w1,w2)| = {lhs} > {rhs}"),
                    });
                }
            }
            Form::SetValued => {
                let x2 = if spec.outer.theta.is_some() {
                    let cand: Vec<f64> = x
                        .iter()
                        .map(|c| c + rng.gen_range(-spec.disc.h..spec.disc.h))
                        .collect();
                    if member.contains_point(&cand) {
                        cand
                    } else {
                        x.clone()
                    }
                } else {
                    x.clone()
                };
                let mut s2 = x2.clone();
                s1.resize(dim + m, 0.0);
                s1.extend(&u);
                s2.resize(dim + m, 0.0);
                s2.extend(&v);
                let (mut l1, mut h1, mut l2, mut h2) =
                    (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
                spec.outer.eval_box(&s1, &mut l1, &mut h1)?;
                spec.outer.eval_box(&s2, &mut l2, &mut h2)?;
                let a = ConvexSet::Interval { lower: l1, upper: h1 };
                let b = ConvexSet::Interval { lower: l2, upper: h2 };
                let lhs = hausdorff(&a, &b)?;
                let rhs = spec.outer.theta_or_zero().eval(dist(&x, &x2))? + phi.eval(dist(&u, &v))?;
                if lhs > rhs + tol(rhs) {
                    rep.violations.push(Violation {
                        check: "modulus",
                        point: [x.clone(), u.clone(), v.clone()].concat(),
                        detail: format!("h(G(x,u), G(y,w)) = {lhs} > {rhs}"),
                    });
                }
            }
        }
    }
    rep.checks.push(("modulus", samples));

    let h = spec.disc.h;
    let km = spec.kernel.components();
    let mut ka = vec![0.0; km * km];
    let mut kb = vec![0.0; km * km];
    let mut checked = 0;
    for _ in 0..samples {
        let x = sample_in(&mut rng, &member);
        let dir: Vec<f64> = {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nv = euclid(&v).max(1e-300);
            v.iter().map(|c| c / nv).collect()
        };
        let lam = spec.region.clipped(&x, spec.exhaustion.omega())?;
        if lam.is_empty() {
            continue;
        }
        let ys: Vec<Vec<f64>> = (0..5).map(|_| sample_in(&mut rng, &lam)).collect();
        // largest kernel change over the listed signed steps along `dir`
        let mut var = |steps: &[f64]| -> Result<Option<(f64, f64)>> {
            let (mut v, mut mag) = (0.0f64, 0.0f64);
            for delta in steps {
                let xp: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + delta * d).collect();
                if !member.contains_point(&xp) {
                    return Ok(None);
                }
                for y in &ys {
                    spec.kernel.eval_into(&[x.as_slice(), y].concat(), &mut ka)?;
                    spec.kernel.eval_into(&[xp.as_slice(), y].concat(), &mut kb)?;
                    for (p, q) in ka.iter().zip(&kb) {
                        v = v.max((p - q).abs());
                        mag = mag.max(p.abs());
                    }
                }
            }
            Ok(Some((v, mag)))
        };
        let coarse = var(&[h, -h, 0.5 * h, -0.5 * h])?;
        let fine = var(&[0.1 * h, -0.1 * h])?;
        let (Some((v1, mag)), Some((v2, _))) = (coarse, fine) else {
            continue;
        };
        checked += 1;
        if v2 > 0.2 * v1 + 1e-9 * (1.0 + mag) {
            rep.violations.push(Violation {
                check: "kernel-continuity",
                point: x.clone(),
                detail: format!("variation {v2} at step h/10 vs {v1} at step h"),
            });
        }
    }
    rep.checks.push(("kernel-continuity", checked));
    Ok(rep)
}
