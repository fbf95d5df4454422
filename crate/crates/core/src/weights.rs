//! Exponential weights: the functional
//! `Phi(L, zeta)_n = sup_{x in Omega_n} e^{-L tau(x)} ∫_{Lambda(x)} e^{L tau(y)} zeta(y) dy`,
//! weight selection, boundary-condition verdicts, weighted norms and the
//! per-member weight schedule.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Deserialize;

use crate::domain::{point_layout, BoxSet, Region, TauMap};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{euclid, Grid, GridFunction};
use crate::operators::{region_plans, sup_kernel_norm, Modulus};
use crate::problem::{Form, ProblemSpec};
use crate::scalar::Scalar;

/// Ladder top for [`select_l`].
pub const L_MAX: f64 = 1048576.0;
pub const K_SEED: f64 = 0.5;

#[derive(Debug, Clone)]
struct PhiPoint {
    /// Cell widths per axis.
    widths: Vec<Vec<f64>>,
    shape: Vec<usize>,
    /// `tau(y) - tau(x)` at the tensor abscissae.
    dtau: Vec<f64>,
    zeta: Vec<f64>,
}

/// Precomputed geometry for evaluating `Phi(L, zeta)_n` at many `L`.
///
/// Inside each quadrature cell the exponent `L (tau(y) - tau(x))` is replaced
/// by an affine fit and `zeta` by its multilinear interpolant; the product
/// is then integrated in closed form. The rule is exact when `tau` is affine
/// on the cell and `zeta` multilinear, and stays accurate for large `L`
/// where plain trapezoid sums lose all resolution.
#[derive(Debug, Clone)]
pub struct PhiContext {
    dim: usize,
    points: Vec<PhiPoint>,
    zero: bool,
}

impl PhiContext {
    pub fn new(
        grid: &Grid<f64>,
        omega: &BoxSet<f64>,
        region: &Region,
        tau: &TauMap,
        zeta: &Expr,
    ) -> Result<PhiContext> {
        let dim = grid.dim();
        let zc = zeta
            .compile(&point_layout(dim))
            .map_err(Error::expr_in("weight function zeta"))?;
        let points: Vec<Option<PhiPoint>> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.node(i);
                let tx = tau.eval_checked(&x, omega)?;
                let Some(plans) = region_plans(region, omega, grid, &x)? else {
                    return Ok(None);
                };
                let shape: Vec<usize> = plans.iter().map(|p| p.len()).collect();
                let widths = plans
                    .iter()
                    .map(|p| p.abscissae.windows(2).map(|w| w[1] - w[0]).collect())
                    .collect();
                let total: usize = shape.iter().product();
                let mut dtau = Vec::with_capacity(total);
                let mut zv = Vec::with_capacity(total);
                let mut idx = vec![0usize; dim];
                let mut y = vec![0.0; dim];
                for _ in 0..total {
                    for d in 0..dim {
                        y[d] = plans[d].abscissae[idx[d]];
                    }
                    dtau.push(tau.eval(&y)? - tx);
                    let z = zc
                        .eval(&y)
                        .map_err(Error::expr_in(format!("zeta at {y:?}")))?;
                    if z < 0.0 {
                        return Err(Error::NegativeWeightFunction { point: y.clone(), value: z });
                    }
                    zv.push(z);
                    for d in (0..dim).rev() {
                        idx[d] += 1;
                        if idx[d] < shape[d] {
                            break;
                        }
                        idx[d] = 0;
                    }
                }
                Ok(Some(PhiPoint {
                    widths,
                    shape,
                    dtau,
                    zeta: zv,
                }))
            })
            .collect::<Result<_>>()?;
        let points: Vec<PhiPoint> = points.into_iter().flatten().collect();
        let zero = points.iter().all(|p| p.zeta.iter().all(|z| *z == 0.0));
        Ok(PhiContext { dim, points, zero })
    }

    /// Context on the weight grid of member `n` of `spec`.
    pub fn for_spec(spec: &ProblemSpec, zeta: &Expr, n: usize) -> Result<PhiContext> {
        PhiContext::new(
            &spec.phi_grid(n)?,
            spec.exhaustion.omega(),
            &spec.region,
            &spec.tau,
            zeta,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `Phi(L, zeta)_n`; `+inf` on overflow.
    pub fn phi(&self, l: f64) -> f64 {
        if self.zero {
            return 0.0;
        }
        self.points
            .par_iter()
            .map(|p| point_value(p, self.dim, l))
            .collect::<Vec<f64>>()
            .into_iter()
            .fold(0.0, |a, b| if b.is_nan() || b > a { b } else { a })
    }
}

/// `e^{-g} A(g)` and `e^{-g} B(g)` for `g >= 0`, or `A(g)`, `B(g)` for `g < 0`,
/// where `A(g) = ∫_0^1 e^{gs}(1-s) ds` and `B(g) = ∫_0^1 e^{gs} s ds`.
fn fitted_pair(g: f64) -> (f64, f64) {
    let a = g.abs();
    if a < 1e-3 {
        let pa = 0.5 + g * (1.0 / 6.0 + g * (1.0 / 24.0 + g / 120.0));
        let pb = 0.5 + g * (1.0 / 3.0 + g * (1.0 / 8.0 + g / 30.0));
        if g >= 0.0 {
            let s = (-g).exp();
            return (pa * s, pb * s);
        }
        return (pa, pb);
    }
    let e = (-a).exp();
    let a2 = a * a;
    // with s = e^{-a}: A(-a) = (a - 1 + s)/a^2, B(-a) = (1 - (1 + a) s)/a^2,
    // and e^{-a} A(a) = B(-a), e^{-a} B(a) = A(-a)
    let lo = (a - 1.0 + e) / a2;
    let hi = (1.0 - (1.0 + a) * e) / a2;
    if g > 0.0 {
        (hi, lo)
    } else {
        (lo, hi)
    }
}

fn point_value(p: &PhiPoint, dim: usize, l: f64) -> f64 {
    let cells: Vec<usize> = p.shape.iter().map(|s| s - 1).collect();
    let mut strides = vec![1usize; dim];
    for d in (0..dim.saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * p.shape[d + 1];
    }
    let corners = 1usize << dim;
    let offs: Vec<usize> = (0..corners)
        .map(|c| (0..dim).map(|d| ((c >> (dim - 1 - d)) & 1) * strides[d]).sum())
        .collect();
    let ncell: usize = cells.iter().product();
    let mut idx = vec![0usize; dim];
    let mut total = 0.0;
    let mut e = vec![0.0; corners];
    let mut g = vec![0.0; dim];
    let mut fac = vec![(0.0, 0.0); dim];
    for _ in 0..ncell {
        let base: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        let mut any = false;
        for c in 0..corners {
            any |= p.zeta[base + offs[c]] != 0.0;
        }
        let vol: f64 = (0..dim).map(|d| p.widths[d][idx[d]]).product();
        if any && vol > 0.0 {
            let mut mean = 0.0;
            for c in 0..corners {
                e[c] = l * p.dtau[base + offs[c]];
                mean += e[c];
            }
            mean /= corners as f64;
            let half_edges = (corners / 2) as f64;
            let mut e0 = mean;
            let mut shift = 0.0;
            for d in 0..dim {
                let bit = 1usize << (dim - 1 - d);
                let mut s = 0.0;
                for c in 0..corners {
                    if c & bit != 0 {
                        s += e[c] - e[c ^ bit];
                    }
                }
                g[d] = s / half_edges;
                e0 -= 0.5 * g[d];
                if g[d] > 0.0 {
                    shift += g[d];
                }
                fac[d] = fitted_pair(g[d]);
            }
            let scale = (e0 + shift).exp();
            let mut sum = 0.0;
            for c in 0..corners {
                let z = p.zeta[base + offs[c]];
                if z == 0.0 {
                    continue;
                }
                let mut w = z;
                for d in 0..dim {
                    w *= if (c >> (dim - 1 - d)) & 1 == 1 { fac[d].1 } else { fac[d].0 };
                }
                sum += w;
            }
            total += vol * scale * sum;
        }
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < cells[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    total
}

/// Smallest rung `L` of the ladder `1, 2, 4, ..., 2^20` with
/// `Phi(L) <= target`, refined by 20 bisection steps on the last bracket.
pub fn select_l(target: f64, ctx: &PhiContext) -> Result<f64> {
    let ok = |l: f64| {
        let v = ctx.phi(l);
        v.is_finite() && v <= target
    };
    if target.is_infinite() && target > 0.0 || ok(1.0) {
        return Ok(1.0);
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while !ok(hi) {
        if hi >= L_MAX {
            let best = [1.0, L_MAX]
                .iter()
                .map(|l| ctx.phi(*l))
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min);
            return Err(Error::WeightSelectionFailed { target, best });
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone)]
pub struct BrzegReport {
    /// `d_n = a_n - phi(a_n) - ||g(·,0)||_n` for `n = 1..=n_max`.
    pub values: Vec<f64>,
    /// Checked window `[first, last]` (1-based).
    pub window: (usize, usize),
    pub window_min: f64,
    pub nondecreasing: bool,
    pub slope: f64,
    pub pass: bool,
}

/// Finite-horizon verdict on `liminf (a_n - phi(a_n) - ||g(·,0)||_n) > 0`
/// over the window `[ceil(n_max/2), n_max]`: the minimum must be positive
/// and the tail nondecreasing or with a nonnegative least-squares slope.
pub fn check_brzeg(g_norm: &[f64], phi: &Modulus, a: &[f64], n_max: usize) -> Result<BrzegReport> {
    if n_max == 0 || g_norm.len() < n_max || a.len() < n_max {
        return Err(Error::LengthMismatch(format!(
            "need {n_max} values, got {} norms and {} bounds",
            g_norm.len(),
            a.len()
        )));
    }
    let values: Vec<f64> = (0..n_max)
        .map(|i| Ok(a[i] - phi.eval(a[i])? - g_norm[i]))
        .collect::<Result<_>>()?;
    let first = n_max.div_ceil(2).max(1);
    let tail = &values[first - 1..n_max];
    let window_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let nondecreasing = tail.windows(2).all(|w| w[1] >= w[0]);
    let slope = if tail.len() < 2 {
        0.0
    } else {
        let k = tail.len() as f64;
        let mx = (k - 1.0) / 2.0;
        let my = tail.iter().sum::<f64>() / k;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, v) in tail.iter().enumerate() {
            sxy += (i as f64 - mx) * (v - my);
            sxx += (i as f64 - mx).powi(2);
        }
        sxy / sxx
    };
    Ok(BrzegReport {
        pass: window_min > 0.0 && (nondecreasing || slope >= 0.0),
        values,
        window: (first, n_max),
        window_min,
        nondecreasing,
        slope,
    })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScheduleRow {
    pub n: usize,
    #[serde(rename = "L_n")]
    pub l: f64,
    #[serde(rename = "Lhat_n")]
    pub l_hat: f64,
    #[serde(rename = "a_n")]
    pub a: f64,
    #[serde(rename = "k_n")]
    pub k: f64,
    #[serde(rename = "r_n")]
    pub r: f64,
    pub phi_b: f64,
    pub phi_eta: f64,
    #[serde(default)]
    pub sup_tau: Option<f64>,
    #[serde(rename = "sup_K", default)]
    pub sup_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSchedule {
    /// First index from which the schedule is valid.
    pub start: usize,
    pub rows: Vec<ScheduleRow>,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl WeightSchedule {
    pub fn row(&self, n: usize) -> Option<&ScheduleRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "n", "L_n", "Lhat_n", "a_n", "k_n", "r_n", "phi_b", "phi_eta", "sup_tau", "sup_K",
        ])?;
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for r in &self.rows {
            wr.write_record([
                r.n.to_string(),
                fmt_f64(r.l),
                fmt_f64(r.l_hat),
                fmt_f64(r.a),
                fmt_f64(r.k),
                fmt_f64(r.r),
                fmt_f64(r.phi_b),
                fmt_f64(r.phi_eta),
                opt(r.sup_tau),
                opt(r.sup_k),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<WeightSchedule> {
        let mut rd = csv::Reader::from_reader(r);
        let rows: Vec<ScheduleRow> = rd.deserialize().collect::<std::result::Result<_, _>>()?;
        let start = rows
            .iter()
            .map(|r| r.n)
            .min()
            .ok_or_else(|| Error::InvalidProblem("schedule file has no rows".into()))?;
        Ok(WeightSchedule { start, rows })
    }
}

/// `psi_n(x) = phi(x) + k_n x`.
pub fn psi(n: usize, x: f64, sched: &WeightSchedule, phi: &Modulus) -> Result<f64> {
    let row = sched
        .row(n)
        .ok_or_else(|| Error::InvalidProblem(format!("schedule has no row for n = {n}")))?;
    Ok(phi.eval(x)? + row.k * x)
}

/// `sup_x e^{-L tau(x)} |u(x)|` with `tau` given at the grid nodes.
pub fn bielecki_norm<T: Scalar>(u: &GridFunction<T>, l: T, tau: &[T]) -> Result<T> {
    if tau.len() != u.grid().len() {
        return Err(Error::GridMismatch(format!(
            "{} weight values for {} nodes",
            tau.len(),
            u.grid().len()
        )));
    }
    Ok((0..tau.len())
        .map(|i| {
            let a = u.norm_at(i);
            if a == T::zero() {
                T::zero()
            } else {
                (a.ln() - l * tau[i]).exp()
            }
        })
        .fold(T::zero(), T::max))
}

/// `tau` at every node of `grid`.
pub fn tau_values(tau: &TauMap, grid: &Grid<f64>) -> Result<Vec<f64>> {
    (0..grid.len()).map(|i| tau.eval(&grid.node(i))).collect()
}

/// Per-member size of the part of the outer map that does not depend on
/// the unknown: `||g(·,0)||_n`, `||g(·,0,0)||_n`, or for the set-valued form
/// `sup theta(|x|) + ||G(0,0)||^+`.
pub fn g0_norms(spec: &ProblemSpec, n_max: usize) -> Result<Vec<f64>> {
    let dim = spec.dim();
    let m = spec.components();
    (1..=n_max)
        .map(|n| {
            let grid = spec.grid(n)?;
            match spec.form {
                Form::SetValued => {
                    let theta = spec.outer.theta_or_zero();
                    let mut sup_theta = 0.0f64;
                    for i in 0..grid.len() {
                        sup_theta = sup_theta.max(theta.eval(euclid(&grid.node(i)))?);
                    }
                    let slots = vec![0.0; dim + 2 * m];
                    let (mut lo, mut hi) = (vec![0.0; m], vec![0.0; m]);
                    spec.outer.eval_box(&slots, &mut lo, &mut hi)?;
                    let size: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a.abs().max(b.abs())).collect();
                    Ok(sup_theta + euclid(&size))
                }
                _ => {
                    let mut best = 0.0f64;
                    let mut g = vec![0.0; m];
                    for i in 0..grid.len() {
                        let mut slots = grid.node(i);
                        slots.resize(dim + 2 * m, 0.0);
                        spec.outer.eval_g(&slots, &mut g)?;
                        best = best.max(euclid(&g));
                    }
                    Ok(best)
                }
            }
        })
        .collect()
}

/// Modulus entering the boundary condition (zero for the set-valued form).
pub fn boundary_modulus(spec: &ProblemSpec) -> Modulus {
    match spec.form {
        Form::SetValued => Modulus::zero(),
        _ => spec.outer.phi.clone(),
    }
}

/// `a_n = c n`: the configured scale, or `c = 1 + max_n ||g(·,0)||_n / n`
/// doubled until the boundary condition holds.
pub fn a_sequence(spec: &ProblemSpec, n_max: usize) -> Result<Vec<f64>> {
    let seq = |c: f64| (1..=n_max).map(|n| c * n as f64).collect::<Vec<f64>>();
    if let Some(c) = spec.disc.a_scale {
        return Ok(seq(c));
    }
    let norms = g0_norms(spec, n_max)?;
    let phi = boundary_modulus(spec);
    let mut c = 1.0
        + norms
            .iter()
            .enumerate()
            .map(|(i, g)| g / (i + 1) as f64)
            .fold(0.0, f64::max);
    for _ in 0..40 {
        let a = seq(c);
        if check_brzeg(&norms, &phi, &a, n_max)?.pass {
            return Ok(a);
        }
        c *= 2.0;
    }
    Ok(seq(c))
}

/// `sup phi(x)/x` over 1000 log-spaced points of `(0, r]`.
pub fn modulus_slope(phi: &Modulus, r: f64) -> Result<f64> {
    let r = r.min(f64::MAX);
    let lo = (1e-12f64).min(r * 1e-12).max(f64::MIN_POSITIVE);
    let (llo, lhi) = (lo.ln(), r.ln());
    let mut best = 0.0f64;
    for i in 0..1000 {
        let x = if i == 999 { r } else { (llo + (lhi - llo) * i as f64 / 999.0).exp() };
        best = best.max(phi.eval(x)? / x);
    }
    Ok(best)
}

/// Builds weights `L_n`, `Lhat_n`, coefficients `k_n` and radii `r_n` for
/// the members `N..=n_max`, `N` being the first index from which the
/// boundary margin stays positive.
pub fn build_schedule(spec: &ProblemSpec, a: &[f64], n_max: usize) -> Result<WeightSchedule> {
    let norms = g0_norms(spec, n_max)?;
    let phi = boundary_modulus(spec);
    let brzeg = check_brzeg(&norms, &phi, a, n_max)?;
    if !brzeg.pass {
        return Err(Error::BoundaryCondition(format!(
            "a_n - phi(a_n) - |g(.,0)|_n has minimum {} on n in [{}, {}]",
            brzeg.window_min, brzeg.window.0, brzeg.window.1
        )));
    }
    let d = &brzeg.values;
    let start = (1..=n_max)
        .find(|&s| d[s - 1..].iter().all(|v| *v > 0.0))
        .expect("window minimum is positive");
    let mut rows = Vec::new();
    let (mut l_prev, mut lh_prev) = (0.0f64, 0.0f64);
    for n in start..=n_max {
        let grid = spec.grid(n)?;
        let sup_k = sup_kernel_norm(spec, &grid)?;
        let sup_tau = tau_values(&spec.tau, &grid)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let an = a[n - 1];
        let ctx_b = PhiContext::for_spec(spec, spec.f.b(), n)?;
        let ctx_eta = PhiContext::for_spec(spec, spec.f.eta(), n)?;
        let target = if sup_k == 0.0 {
            f64::INFINITY
        } else {
            d[n - 1] / (sup_k * (1.0 + an))
        };
        let l = select_l(target, &ctx_b)?.max(l_prev);
        let r = (l * sup_tau).exp() * an;
        let lambda = modulus_slope(&phi, r)?;
        let k_max = if lambda < 1.0 {
            1.0 - lambda
        } else if spec.form == Form::SetValued {
            1.0
        } else {
            return Err(Error::NoContractionMargin(lambda));
        };
        let target_hat = if sup_k == 0.0 {
            f64::INFINITY
        } else {
            K_SEED * k_max / (4.0 * sup_k)
        };
        let l_hat = select_l(target_hat, &ctx_eta)?.max(lh_prev);
        let phi_eta = ctx_eta.phi(l_hat);
        let k = 0.5 * (4.0 * sup_k * phi_eta + k_max);
        rows.push(ScheduleRow {
            n,
            l,
            l_hat,
            a: an,
            k,
            r,
            phi_b: ctx_b.phi(l),
            phi_eta,
            sup_tau: Some(sup_tau),
            sup_k: Some(sup_k),
        });
        l_prev = l;
        lh_prev = l_hat;
    }
    Ok(WeightSchedule { start, rows })
}
