//! Weighted Picard iteration, residuals and the discrete
//! measure-of-nonequicontinuity harness.
//!
//! Value spaces are finite dimensional, so the Hausdorff measure of every
//! bounded set of values vanishes; only the equicontinuity term is computed.

use rayon::prelude::*;

use crate::convex::steiner_lipschitz_constant;
use crate::domain::rho;
use crate::error::{Error, Result};
use crate::grid::{equicontinuity_modulus, euclid, FunctionFamily, GridFunction};
use crate::operators::{
    h_apply, nemytskii_select, outer_apply, region_plans, selection_bounds, volterra_grid,
};
use crate::problem::{Form, ProblemSpec};
use crate::weights::{bielecki_norm, tau_values, ScheduleRow, WeightSchedule};

/// Width of the trailing window used to detect a non-contracting iteration.
pub const RATIO_WINDOW: usize = 10;

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// A solution of the selected single-valued equation, hence of the inclusion.
    pub solution: GridFunction<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Weighted deltas `||u_{k+1} - u_k||_{L_n}`.
    pub deltas: Vec<f64>,
    /// Unweighted deltas `max |u_{k+1} - u_k|`.
    pub sup_deltas: Vec<f64>,
    pub residual: f64,
    /// Median of `delta_{k+1} / delta_k`.
    pub ratio: f64,
    pub schedule: ScheduleRow,
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn ratios(deltas: &[f64]) -> Vec<f64> {
    deltas
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| w[1] / w[0])
        .collect()
}

/// Starting iterate: `g(·,0)`, `g(·,0,0)` or the Steiner point of `G(·,0)`.
pub fn initial_iterate(spec: &ProblemSpec) -> Result<GridFunction<f64>> {
    let grid = spec.grid(spec.disc.n)?;
    let zero = GridFunction::zeros(grid, spec.components());
    outer_apply(spec, &zero, &zero)
}

/// Iterates `u_{k+1} = H(u_k)` on member `spec.disc.n`. Stops once the
/// weighted delta is below `tol_fix` and the unweighted delta is below
/// `tol_fix * max(1, ||u||)`.
pub fn picard_solve(spec: &ProblemSpec, sched: &WeightSchedule) -> Result<SolveReport> {
    let n = spec.disc.n;
    let row = sched.row(n).cloned().ok_or_else(|| {
        Error::BoundaryCondition(format!(
            "no weight for n = {n}; the schedule starts at n = {}",
            sched.start
        ))
    })?;
    let mut u = initial_iterate(spec)?;
    let tau = tau_values(&spec.tau, u.grid())?;
    let tol = spec.disc.tol_fix;
    let mut deltas = Vec::new();
    let mut sup_deltas = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < spec.disc.max_iter {
        let next = h_apply(spec, &u)?;
        iterations += 1;
        let diff = next.combine(1.0, &u, -1.0)?;
        let d = bielecki_norm(&diff, row.l, &tau)?;
        let sd = diff.sup_norm();
        deltas.push(d);
        sup_deltas.push(sd);
        let scale = next.sup_norm().max(1.0);
        u = next;
        if !d.is_finite() || !sd.is_finite() {
            return Err(Error::NonContractive {
                ratio: f64::INFINITY,
                window: deltas.len(),
            });
        }
        if d < tol && sd <= tol * scale {
            converged = true;
            break;
        }
        let rs = ratios(&deltas);
        if rs.len() >= RATIO_WINDOW {
            let mut tail = rs[rs.len() - RATIO_WINDOW..].to_vec();
            let m = median(&mut tail);
            if m >= 1.0 {
                return Err(Error::NonContractive {
                    ratio: m,
                    window: RATIO_WINDOW,
                });
            }
        }
    }
    let res = residual(spec, &u)?;
    let ratio = median(&mut ratios(&deltas));
    Ok(SolveReport {
        solution: u,
        iterations,
        converged,
        deltas,
        sup_deltas,
        residual: res,
        ratio,
        schedule: row,
    })
}

fn box_distance(p: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let ex: Vec<f64> = (0..p.len())
        .map(|i| (lo[i] - p[i]).max(p[i] - hi[i]).max(0.0))
        .collect();
    euclid(&ex)
}

/// Grid maximum of the distance from `u(x)` to the admissible values at
/// `x`. Single-valued data gives `|u - H(u)|`; interval data uses the
/// lower and upper selections as bounds of the admissible box.
pub fn residual(spec: &ProblemSpec, u: &GridFunction<f64>) -> Result<f64> {
    if spec.f.is_singleton() && spec.form != Form::SetValued {
        return u.sup_distance(&h_apply(spec, u)?);
    }
    let (wl, wh) = selection_bounds(&spec.f, u)?;
    let zl = volterra_grid(spec, &wl)?;
    let zh = if spec.f.is_singleton() {
        zl.clone()
    } else {
        volterra_grid(spec, &wh)?
    };
    let grid = u.grid();
    let m = spec.components();
    let dists: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (a, b) = (zl.at(i), zh.at(i));
            let zlo: Vec<f64> = a.iter().zip(b).map(|(p, q)| p.min(*q)).collect();
            let zhi: Vec<f64> = a.iter().zip(b).map(|(p, q)| p.max(*q)).collect();
            let mut s1 = grid.node(i);
            s1.extend_from_slice(u.at(i));
            let mut s2 = s1.clone();
            s1.extend_from_slice(&zlo);
            s2.extend_from_slice(&zhi);
            let (mut l1, mut h1, mut l2, mut h2) =
                (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
            match spec.form {
                Form::Additive => {
                    spec.outer.eval_g(&s1, &mut l1)?;
                    for k in 0..m {
                        h1[k] = l1[k] + zhi[k];
                        l1[k] += zlo[k];
                    }
                    Ok(box_distance(u.at(i), &l1, &h1))
                }
                Form::Nested => {
                    spec.outer.eval_g(&s1, &mut l1)?;
                    spec.outer.eval_g(&s2, &mut l2)?;
                    let lo: Vec<f64> = (0..m).map(|k| l1[k].min(l2[k])).collect();
                    let hi: Vec<f64> = (0..m).map(|k| l1[k].max(l2[k])).collect();
                    Ok(box_distance(u.at(i), &lo, &hi))
                }
                Form::SetValued => {
                    spec.outer.eval_box(&s1, &mut l1, &mut h1)?;
                    spec.outer.eval_box(&s2, &mut l2, &mut h2)?;
                    let lo: Vec<f64> = (0..m).map(|k| l1[k].min(l2[k])).collect();
                    let hi: Vec<f64> = (0..m).map(|k| h1[k].max(h2[k])).collect();
                    Ok(box_distance(u.at(i), &lo, &hi))
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(dists.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone)]
pub struct CondensingReport {
    pub eps_in: f64,
    pub eps_out: f64,
    /// `phi(eps_in)` (zero for the set-valued form).
    pub bound: f64,
    /// Resolution slack added to the bound.
    pub slack: f64,
    pub pass: bool,
}

/// Discrete surrogate of `e_n(H(M)) <= phi(e_n(M))`: passes iff
/// `eps_out <= phi(eps_in) + slack`, the slack collecting the variation of
/// the outer map in `x` and of the integral term between adjacent nodes.
pub fn condensing_check(spec: &ProblemSpec, fam: &FunctionFamily<f64>) -> Result<CondensingReport> {
    let Some(grid) = fam.grid() else {
        return Ok(CondensingReport {
            eps_in: 0.0,
            eps_out: 0.0,
            bound: 0.0,
            slack: 0.0,
            pass: true,
        });
    };
    let m = spec.components();
    let dim = grid.dim();
    let omega = spec.exhaustion.omega();
    let pairs = grid.adjacent_pairs();
    let eps_in = equicontinuity_modulus(fam);
    let mut outs = Vec::with_capacity(fam.len());

    // region and kernel geometry shared by every member
    let mut max_rho = 0.0f64;
    let mut kvar = 0.0f64;
    let mut max_measure = 0.0f64;
    let km = m * m;
    let (mut ka, mut kb) = (vec![0.0; km], vec![0.0; km]);
    for &(a, b) in &pairs {
        let (xa, xb) = (grid.node(a), grid.node(b));
        max_rho = max_rho.max(rho(&spec.region, &xa, &xb, omega)?);
        max_measure = max_measure.max(spec.region.clipped(&xa, omega)?.measure());
        if let Some(plans) = region_plans(&spec.region, omega, grid, &xa)? {
            let mut idx = vec![0usize; dim];
            loop {
                let y: Vec<f64> = (0..dim).map(|d| plans[d].abscissae[idx[d]]).collect();
                spec.kernel.eval_into(&[xa.as_slice(), &y].concat(), &mut ka)?;
                spec.kernel.eval_into(&[xb.as_slice(), &y].concat(), &mut kb)?;
                for (p, q) in ka.iter().zip(&kb) {
                    kvar = kvar.max((p - q).abs() * m as f64);
                }
                if spec.kernel.independent_of_y() {
                    break;
                }
                let mut d = dim;
                let mut done = true;
                while d > 0 {
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < plans[d].len() {
                        done = false;
                        break;
                    }
                    idx[d] = 0;
                }
                if done {
                    break;
                }
            }
        }
    }
    for i in 0..grid.len() {
        max_measure = max_measure.max(spec.region.clipped(&grid.node(i), omega)?.measure());
    }
    let sup_k = crate::operators::sup_kernel_norm(spec, grid)?;

    let mut slack = 0.0f64;
    for u in fam.members() {
        let w = nemytskii_select(&spec.f, u, spec.disc.strategy)?;
        let z = volterra_grid(spec, &w)?;
        let hu = outer_apply(spec, u, &z)?;
        let bw = w.sup_norm();
        let v_slack = sup_k * bw * max_rho + kvar * bw * max_measure;
        // variation of the outer map in x alone
        let mut xvar = 0.0f64;
        let (mut g1, mut g2, mut h1, mut h2) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for &(a, b) in &pairs {
            for (p, q) in [(a, b), (b, a)] {
                let mut s1 = grid.node(p);
                s1.extend_from_slice(u.at(p));
                s1.extend_from_slice(z.at(p));
                let mut s2 = grid.node(q);
                s2.extend_from_slice(u.at(p));
                s2.extend_from_slice(z.at(p));
                let d = match spec.form {
                    Form::SetValued => {
                        spec.outer.eval_box(&s1, &mut g1, &mut h1)?;
                        spec.outer.eval_box(&s2, &mut g2, &mut h2)?;
                        let m1: Vec<f64> = (0..m).map(|k| 0.5 * (g1[k] + h1[k]) - 0.5 * (g2[k] + h2[k])).collect();
                        let r1: Vec<f64> = (0..m)
                            .map(|k| ((g1[k] - g2[k]).abs()).max((h1[k] - h2[k]).abs()))
                            .collect();
                        euclid(&m1).max(euclid(&r1))
                    }
                    _ => {
                        spec.outer.eval_g(&s1, &mut g1)?;
                        spec.outer.eval_g(&s2, &mut g2)?;
                        let diff: Vec<f64> = g1.iter().zip(&g2).map(|(p, q)| p - q).collect();
                        euclid(&diff)
                    }
                };
                xvar = xvar.max(d);
            }
        }
        let s = match spec.form {
            Form::Additive => xvar + v_slack,
            Form::Nested => xvar + spec.outer.vartheta_or_identity().eval(v_slack)?,
            Form::SetValued => {
                steiner_lipschitz_constant::<f64>(m) * (xvar + spec.outer.phi.eval(v_slack)?)
            }
        };
        slack = slack.max(s);
        outs.push(hu);
    }
    let eps_out = equicontinuity_modulus(&FunctionFamily::new(outs)?);
    let bound = match spec.form {
        Form::SetValued => 0.0,
        _ => spec.outer.phi.eval(eps_in)?,
    };
    let tol = 1e-9 * (1.0 + eps_out);
    Ok(CondensingReport {
        eps_in,
        eps_out,
        bound,
        slack,
        pass: eps_out <= bound + slack + tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub values: Vec<f64>,
    pub certified: bool,
}

/// Componentwise `k_n y_n - x_n`; certified iff every component is
/// nonnegative and at least one is positive.
pub fn condensing_certificate(xs: &[f64], ys: &[f64], ks: &[f64]) -> Result<Certificate> {
    if xs.len() != ys.len() || xs.len() != ks.len() {
        return Err(Error::LengthMismatch(format!(
            "xs {}, ys {}, ks {}",
            xs.len(),
            ys.len(),
            ks.len()
        )));
    }
    if let Some(k) = ks.iter().find(|k| !(**k > 0.0 && **k < 1.0)) {
        return Err(Error::InvalidProblem(format!("coefficient {k} outside (0, 1)")));
    }
    let values: Vec<f64> = (0..xs.len()).map(|i| ks[i] * ys[i] - xs[i]).collect();
    let certified = values.iter().all(|v| *v >= 0.0) && values.iter().any(|v| *v > 0.0);
    Ok(Certificate { values, certified })
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub base: f64,
    pub with_extra: f64,
    /// Lipschitz constant of the adjoined member on the grid.
    pub extra_lipschitz: f64,
    pub adjoin_ok: bool,
    pub monotone_ok: bool,
    pub convex_ok: bool,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.adjoin_ok && self.monotone_ok && self.convex_ok
    }
}

/// Checks on the discrete modulus: adjoining a Lipschitz member moves it by
/// at most `l h`, it is monotone under inclusion, and convex combinations
/// of members do not increase it.
pub fn mnc_axiom_check(fam: &FunctionFamily<f64>, extra: &GridFunction<f64>) -> Result<AxiomReport> {
    let base = equicontinuity_modulus(fam);
    let bigger = fam.with_member(extra.clone())?;
    let with_extra = equicontinuity_modulus(&bigger);
    let grid = extra.grid();
    let h = grid.max_step();
    let mut lip = 0.0f64;
    for (a, b) in grid.adjacent_pairs() {
        let dx = euclid(
            &grid
                .node(a)
                .iter()
                .zip(grid.node(b))
                .map(|(p, q)| p - q)
                .collect::<Vec<_>>(),
        );
        let dv = euclid(
            &extra
                .at(a)
                .iter()
                .zip(extra.at(b))
                .map(|(p, q)| p - q)
                .collect::<Vec<_>>(),
        );
        lip = lip.max(dv / dx);
    }
    let adjoin_ok = (with_extra - base).abs() <= lip * h + 1e-12;
    let monotone_ok = (1..=fam.len()).all(|k| {
        let sub = FunctionFamily::new(fam.members()[..k].to_vec()).expect("shared grid");
        equicontinuity_modulus(&sub) <= base + 1e-15
    }) && base <= with_extra;
    let mut convex_ok = true;
    let ms = fam.members();
    for i in 0..ms.len() {
        for j in i + 1..ms.len() {
            for lam in [0.25, 0.5, 0.75] {
                let c = ms[i].combine(lam, &ms[j], 1.0 - lam)?;
                let e = equicontinuity_modulus(&FunctionFamily::new(vec![c])?);
                convex_ok &= e <= base + 1e-12;
            }
        }
    }
    Ok(AxiomReport {
        base,
        with_extra,
        extra_lipschitz: lip,
        adjoin_ok,
        monotone_ok,
        convex_ok,
    })
}
