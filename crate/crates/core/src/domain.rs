//! Domains, exhaustions, moving integration regions and weight functions.
//!
//! The open domain and every member of its exhaustion are coordinate boxes
//! (bounds may be infinite for the domain itself). The moving region
//! `x -> Lambda(x)` is a box whose bounds are expressions in the point
//! coordinates, clipped to the domain.

use crate::error::{Error, Result};
use crate::expr::{CompiledExpr, Expr, VarLayout};
use crate::scalar::Scalar;

pub const TOL_GEOM: f64 = 1e-9;
pub const TOL_STRICT: f64 = 1e-12;

/// Axis-aligned box `prod_i (lower_i, upper_i)`. Empty when any side has
/// `lower_i >= upper_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> BoxSet<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Self {
        assert_eq!(lower.len(), upper.len(), "box bounds differ in dimension");
        BoxSet { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(l, u)| l >= u)
    }

    pub fn measure(&self) -> T {
        if self.is_empty() {
            return T::zero();
        }
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(T::one(), |m, (l, u)| m * (*u - *l))
    }

    pub fn intersect(&self, other: &BoxSet<T>) -> BoxSet<T> {
        BoxSet {
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a.max(*b))
                .collect(),
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.min(*b))
                .collect(),
        }
    }

    /// Lebesgue measure of the symmetric difference.
    pub fn sym_diff_measure(&self, other: &BoxSet<T>) -> T {
        let two = T::one() + T::one();
        let d = self.measure() + other.measure() - two * self.intersect(other).measure();
        d.max(T::zero())
    }

    /// How far `inner` sticks out of the closure of `self` (0 when contained
    /// or when `inner` is empty).
    pub fn excess(&self, inner: &BoxSet<T>) -> T {
        if inner.is_empty() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..self.dim() {
            worst = worst
                .max(self.lower[i] - inner.lower[i])
                .max(inner.upper[i] - self.upper[i]);
        }
        worst
    }

    pub fn contains_box(&self, inner: &BoxSet<T>, tol: T) -> bool {
        self.excess(inner) <= tol
    }

    pub fn contains_point(&self, x: &[T]) -> bool {
        x.iter()
            .enumerate()
            .all(|(i, v)| *v > self.lower[i] && *v < self.upper[i])
    }

    /// Largest Euclidean norm over the closure.
    pub fn sup_norm(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(T::zero(), |s, (l, u)| {
                let m = l.abs().max(u.abs());
                s + m * m
            })
            .sqrt()
    }
}

/// Names bound to coordinate `i` (0-based) of the evaluation point.
pub fn point_names(dim: usize, i: usize) -> Vec<String> {
    let mut v = vec![format!("x{}", i + 1)];
    if dim == 1 {
        v.push("x".into());
        v.push("t".into());
    }
    v
}

/// Names bound to coordinate `i` (0-based) of the integration variable.
pub fn integration_names(dim: usize, i: usize) -> Vec<String> {
    let mut v = vec![format!("y{}", i + 1)];
    if dim == 1 {
        v.push("y".into());
        v.push("s".into());
    }
    v
}

pub(crate) fn push_names(layout: &mut VarLayout, names: &[String]) -> usize {
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    layout.push(&refs)
}

/// Layout with one slot per point coordinate.
pub fn point_layout(dim: usize) -> VarLayout {
    let mut layout = VarLayout::new();
    for i in 0..dim {
        push_names(&mut layout, &point_names(dim, i));
    }
    layout
}

/// Moving integration region `x -> prod_i (lower_i(x), upper_i(x))`.
#[derive(Debug, Clone)]
pub struct Region {
    lower: Vec<Expr>,
    upper: Vec<Expr>,
    lower_c: Vec<CompiledExpr>,
    upper_c: Vec<CompiledExpr>,
}

impl Region {
    pub fn new(lower: Vec<Expr>, upper: Vec<Expr>) -> Result<Region> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidProblem(format!(
                "region needs matching nonempty bound lists (got {} lower, {} upper)",
                lower.len(),
                upper.len()
            )));
        }
        let layout = point_layout(lower.len());
        let compile = |es: &[Expr], what: &str| -> Result<Vec<CompiledExpr>> {
            es.iter()
                .enumerate()
                .map(|(i, e)| {
                    e.compile(&layout)
                        .map_err(Error::expr_in(format!("region {what} bound {}", i + 1)))
                })
                .collect()
        };
        let lower_c = compile(&lower, "lower")?;
        let upper_c = compile(&upper, "upper")?;
        Ok(Region {
            lower,
            upper,
            lower_c,
            upper_c,
        })
    }

    /// Convenience constructor from expression strings.
    pub fn parse(lower: &[&str], upper: &[&str]) -> Result<Region> {
        let p = |s: &[&str]| -> Result<Vec<Expr>> {
            s.iter().map(|t| Ok(Expr::parse(t)?)).collect()
        };
        Region::new(p(lower)?, p(upper)?)
    }

    /// `Lambda(x) = prod (0, x_i)`.
    pub fn lower_orthant(dim: usize) -> Region {
        let lower = vec![Expr::constant(0.0); dim];
        let upper = (0..dim)
            .map(|i| Expr::parse(&format!("x{}", i + 1)).expect("valid"))
            .collect();
        Region::new(lower, upper).expect("valid region")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower_exprs(&self) -> &[Expr] {
        &self.lower
    }

    pub fn upper_exprs(&self) -> &[Expr] {
        &self.upper
    }

    /// The unclipped box at `x`.
    pub fn at(&self, x: &[f64]) -> Result<BoxSet<f64>> {
        let ev = |cs: &[CompiledExpr]| -> Result<Vec<f64>> {
            cs.iter()
                .map(|c| c.eval(x).map_err(Error::expr_in(format!("region at {x:?}"))))
                .collect()
        };
        Ok(BoxSet::new(ev(&self.lower_c)?, ev(&self.upper_c)?))
    }

    /// The box at `x` clipped to `omega`.
    pub fn clipped(&self, x: &[f64], omega: &BoxSet<f64>) -> Result<BoxSet<f64>> {
        Ok(self.at(x)?.intersect(omega))
    }
}

/// Measure of `Lambda(x)` after clipping to the domain.
pub fn region_measure(r: &Region, x: &[f64], omega: &BoxSet<f64>) -> Result<f64> {
    Ok(r.clipped(x, omega)?.measure())
}

/// Pseudometric `rho(x, x') = measure(Lambda(x) symmetric-difference Lambda(x'))`.
pub fn rho(r: &Region, x: &[f64], xp: &[f64], omega: &BoxSet<f64>) -> Result<f64> {
    let a = r.clipped(x, omega)?;
    let b = r.clipped(xp, omega)?;
    Ok(a.sym_diff_measure(&b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExhaustionRule {
    /// Finite bounds stay put, infinite ones are replaced by `lo + n`,
    /// `hi - n` or `(-n, n)`.
    Anchored,
    /// `(lo + 1/n, hi - 1/n) ∩ (-n, n)` per coordinate: the box form of
    /// "points at distance > 1/n from the boundary, inside the n-ball".
    Standard,
}

impl std::str::FromStr for ExhaustionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anchored" => Ok(ExhaustionRule::Anchored),
            "standard" => Ok(ExhaustionRule::Standard),
            other => Err(Error::InvalidProblem(format!(
                "unknown exhaustion rule `{other}` (expected anchored or standard)"
            ))),
        }
    }
}

/// Increasing sequence of bounded open boxes covering the domain.
#[derive(Debug, Clone)]
pub struct Exhaustion {
    omega: BoxSet<f64>,
    rule: ExhaustionRule,
}

impl Exhaustion {
    pub fn new(omega: BoxSet<f64>, rule: ExhaustionRule) -> Result<Exhaustion> {
        if omega.is_empty() {
            return Err(Error::InvalidProblem("domain box is empty".into()));
        }
        Ok(Exhaustion { omega, rule })
    }

    pub fn omega(&self) -> &BoxSet<f64> {
        &self.omega
    }

    pub fn rule(&self) -> ExhaustionRule {
        self.rule
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn member(&self, n: usize) -> BoxSet<f64> {
        assert!(n >= 1, "exhaustion index starts at 1");
        let nf = n as f64;
        let mut lower = Vec::with_capacity(self.dim());
        let mut upper = Vec::with_capacity(self.dim());
        for (&lo, &hi) in self.omega.lower.iter().zip(&self.omega.upper) {
            let (l, u) = match self.rule {
                ExhaustionRule::Anchored => match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => (lo, hi),
                    (true, false) => (lo, lo + nf),
                    (false, true) => (hi - nf, hi),
                    (false, false) => (-nf, nf),
                },
                ExhaustionRule::Standard => {
                    let l = if lo.is_finite() { lo + 1.0 / nf } else { lo };
                    let u = if hi.is_finite() { hi - 1.0 / nf } else { hi };
                    (l.max(-nf), u.min(nf))
                }
            };
            lower.push(l);
            upper.push(u);
        }
        BoxSet::new(lower, upper)
    }

    /// `||Omega_n||^+`: largest Euclidean norm over the closure of member `n`.
    pub fn sup_norm(&self, n: usize) -> f64 {
        self.member(n).sup_norm()
    }

    /// Checks `Omega_n ⊆ Omega_{n+1}` for `n < n_max`; returns the first
    /// offending index.
    pub fn check_increasing(&self, n_max: usize) -> Option<usize> {
        (1..n_max).find(|&n| {
            let a = self.member(n);
            !a.is_empty() && !self.member(n + 1).contains_box(&a, TOL_GEOM)
        })
    }

    /// Smallest `n <= limit` whose member contains the compact box `probe`.
    pub fn index_containing(&self, probe: &BoxSet<f64>, limit: usize) -> Option<usize> {
        (1..=limit).find(|&n| {
            let m = self.member(n);
            (0..self.dim()).all(|i| probe.lower[i] > m.lower[i] && probe.upper[i] < m.upper[i])
        })
    }
}

/// Positive weight function `tau` on the domain.
#[derive(Debug, Clone)]
pub struct TauMap {
    expr: Expr,
    compiled: CompiledExpr,
}

impl TauMap {
    pub fn new(expr: Expr, dim: usize) -> Result<TauMap> {
        let compiled = expr
            .compile(&point_layout(dim))
            .map_err(Error::expr_in("tau"))?;
        Ok(TauMap { expr, compiled })
    }

    pub fn parse(text: &str, dim: usize) -> Result<TauMap> {
        TauMap::new(Expr::parse(text)?, dim)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.compiled
            .eval(x)
            .map_err(Error::expr_in(format!("tau at {x:?}")))
    }

    /// Evaluates and enforces positivity at points of the open domain.
    pub fn eval_checked(&self, x: &[f64], omega: &BoxSet<f64>) -> Result<f64> {
        let v = self.eval(x)?;
        if omega.contains_point(x) && v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidProblem(format!(
                "tau must be positive on the domain, got {v} at {x:?}"
            )));
        }
        Ok(v)
    }
}

/// Outcome of [`check_lambda_invariance`].
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub pass: bool,
    pub n: usize,
    pub samples: usize,
    pub worst_point: Option<Vec<f64>>,
    pub worst_excess: f64,
}

/// Evenly spaced sample points over the closure of `b`, pulled inward by a
/// relative `1e-9` so that every point lies in the open box.
pub fn sample_box(b: &BoxSet<f64>, per_dim: usize) -> Vec<Vec<f64>> {
    let per_dim = per_dim.max(2);
    let dim = b.dim();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let p: Vec<f64> = (0..dim)
            .map(|i| {
                let t = (idx[i] as f64 / (per_dim - 1) as f64).clamp(1e-9, 1.0 - 1e-9);
                b.lower[i] + t * (b.upper[i] - b.lower[i])
            })
            .collect();
        out.push(p);
        let mut d = dim;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Checks that `Lambda(x)` stays inside the closure of `Omega_n` for sampled
/// `x in Omega_n`.
pub fn check_lambda_invariance(
    e: &Exhaustion,
    r: &Region,
    n: usize,
    samples_per_dim: usize,
) -> Result<InvarianceReport> {
    let member = e.member(n);
    let mut worst = 0.0f64;
    let mut worst_point = None;
    let points = if member.is_empty() {
        Vec::new()
    } else {
        sample_box(&member, samples_per_dim)
    };
    for x in &points {
        let lam = r.clipped(x, e.omega())?;
        let ex = member.excess(&lam);
        if ex > worst {
            worst = ex;
            worst_point = Some(x.clone());
        }
    }
    Ok(InvarianceReport {
        pass: worst <= TOL_GEOM,
        n,
        samples: points.len(),
        worst_point,
        worst_excess: worst,
    })
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub x0: Vec<f64>,
    pub delta: f64,
    pub tau_x0: f64,
    /// A point `x` with `sup tau(Lambda(x) ∩ Lambda(x0)) < tau(x0) - tol`.
    pub witness: Option<Vec<f64>>,
    /// Smallest sampled `sup tau(Lambda(x) ∩ Lambda(x0))` (−inf for empty intersections).
    pub best_sup: f64,
}

#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub pass: bool,
    pub probes: Vec<ProbeResult>,
}

fn local_offsets(dim: usize) -> Vec<Vec<f64>> {
    let m: i64 = match dim {
        1 => 32,
        2 => 8,
        _ => 3,
    };
    let mut out = Vec::new();
    let mut idx = vec![-m; dim];
    loop {
        out.push(idx.iter().map(|&j| j as f64 / (m + 1) as f64).collect());
        let mut d = dim;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] <= m {
                break;
            }
            idx[d] = -m;
        }
    }
}

fn sampled_sup(tau: &TauMap, b: &BoxSet<f64>) -> Result<f64> {
    if b.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let q = match b.dim() {
        1 => 33,
        2 => 9,
        _ => 5,
    };
    let mut sup = f64::NEG_INFINITY;
    let dim = b.dim();
    let mut idx = vec![0usize; dim];
    loop {
        let p: Vec<f64> = (0..dim)
            .map(|i| b.lower[i] + (b.upper[i] - b.lower[i]) * idx[i] as f64 / (q - 1) as f64)
            .collect();
        sup = sup.max(tau.eval(&p)?);
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(sup);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < q {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Sampled check of `tau`'s admissibility for `Lambda`: for each probe
/// `(x0, delta)` look for `x` in `B(x0, delta) ∩ Omega` with
/// `sup tau(Lambda(x) ∩ Lambda(x0)) < tau(x0) - tol_strict`.
pub fn check_tau_admissible(
    tau: &TauMap,
    r: &Region,
    omega: &BoxSet<f64>,
    probes: &[(Vec<f64>, f64)],
) -> Result<AdmissibilityReport> {
    let offsets = local_offsets(r.dim());
    let mut results = Vec::with_capacity(probes.len());
    for (x0, delta) in probes {
        if !omega.contains_point(x0) {
            return Err(Error::InvalidProblem(format!(
                "admissibility probe {x0:?} lies outside the domain"
            )));
        }
        let tau0 = tau.eval(x0)?;
        let lam0 = r.clipped(x0, omega)?;
        let mut best = f64::INFINITY;
        let mut witness = None;
        for off in &offsets {
            let norm = off.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm >= 1.0 {
                continue;
            }
            let x: Vec<f64> = x0.iter().zip(off).map(|(a, o)| a + delta * o).collect();
            if !omega.contains_point(&x) {
                continue;
            }
            let inter = r.clipped(&x, omega)?.intersect(&lam0);
            let s = sampled_sup(tau, &inter)?;
            if s < best {
                best = s;
                if s < tau0 - TOL_STRICT {
                    witness = Some(x.clone());
                }
            }
        }
        results.push(ProbeResult {
            x0: x0.clone(),
            delta: *delta,
            tau_x0: tau0,
            witness,
            best_sup: best,
        });
    }
    Ok(AdmissibilityReport {
        pass: results.iter().all(|p| p.witness.is_some()),
        probes: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const INF: f64 = f64::INFINITY;

    fn half_line() -> BoxSet<f64> {
        BoxSet::new(vec![0.0], vec![INF])
    }

    #[test]
    fn region_measure_examples() {
        let quad = BoxSet::new(vec![0.0, 0.0], vec![INF, INF]);
        let r = Region::lower_orthant(2);
        assert_eq!(region_measure(&r, &[2.0, 3.0], &quad).unwrap(), 6.0);

        let line = BoxSet::new(vec![-INF], vec![INF]);
        let r = Region::parse(&["sin(t)"], &["abs(t)"]).unwrap();
        let pi = std::f64::consts::PI;
        assert!((region_measure(&r, &[pi], &line).unwrap() - pi).abs() < 1e-15);
        assert_eq!(region_measure(&r, &[0.0], &line).unwrap(), 0.0);
    }

    #[test]
    fn rho_examples() {
        let r = Region::parse(&["0"], &["x"]).unwrap();
        assert_eq!(rho(&r, &[1.0], &[1.0], &half_line()).unwrap(), 0.0);
        let quad = BoxSet::new(vec![0.0, 0.0], vec![INF, INF]);
        let r2 = Region::lower_orthant(2);
        assert_eq!(rho(&r2, &[1.0, 1.0], &[2.0, 1.0], &quad).unwrap(), 1.0);
    }

    #[test]
    fn rho_of_offset_intervals_matches_monte_carlo() {
        let a = BoxSet::new(vec![0.0], vec![1.0]);
        let b = BoxSet::new(vec![0.5], vec![2.0]);
        assert_eq!(a.sym_diff_measure(&b), 1.5);
        // membership sampling over (0, 2)
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| {
                let y: f64 = rng.gen_range(0.0..2.0);
                (a.contains_point(&[y])) != (b.contains_point(&[y]))
            })
            .count();
        let mc = 2.0 * hits as f64 / n as f64;
        assert!((mc - 1.5).abs() < 0.01, "monte carlo {mc}");
    }

    #[test]
    fn empty_region_has_zero_measure() {
        let b = BoxSet::new(vec![1.0, 0.0], vec![1.0, 5.0]);
        assert!(b.is_empty());
        assert_eq!(b.measure(), 0.0);
    }

    #[test]
    fn invariance_examples() {
        let e = Exhaustion::new(half_line(), ExhaustionRule::Anchored).unwrap();
        let r = Region::parse(&["0"], &["x"]).unwrap();
        assert!(check_lambda_invariance(&e, &r, 3, 50).unwrap().pass);

        let line = BoxSet::new(vec![-INF], vec![INF]);
        let e1 = Exhaustion::new(line, ExhaustionRule::Anchored).unwrap();
        let r1 = Region::parse(&["sin(t)"], &["abs(t)"]).unwrap();
        for n in 1..=4 {
            assert!(check_lambda_invariance(&e1, &r1, n, 200).unwrap().pass);
        }

        let r2 = Region::parse(&["0"], &["2*x"]).unwrap();
        let rep = check_lambda_invariance(&e, &r2, 2, 50).unwrap();
        assert!(!rep.pass);
        assert!(rep.worst_point.unwrap()[0] > 1.0);
    }

    #[test]
    fn standard_exhaustion_is_invariant_for_norm_bounded_regions() {
        let plane = BoxSet::new(vec![-INF, -INF], vec![INF, INF]);
        let e = Exhaustion::new(plane, ExhaustionRule::Standard).unwrap();
        let r = Region::parse(&["-abs(x1)/2", "-abs(x2)"], &["abs(x1)", "abs(x2)/3"]).unwrap();
        for n in 1..=5 {
            assert!(check_lambda_invariance(&e, &r, n, 15).unwrap().pass);
        }
        assert_eq!(e.check_increasing(10), None);
    }

    #[test]
    fn exhaustion_members_and_probes() {
        let e = Exhaustion::new(BoxSet::new(vec![2.0], vec![INF]), ExhaustionRule::Anchored).unwrap();
        assert_eq!(e.member(3), BoxSet::new(vec![2.0], vec![5.0]));
        assert_eq!(e.check_increasing(20), None);
        let probe = BoxSet::new(vec![2.5], vec![7.5]);
        assert_eq!(e.index_containing(&probe, 100), Some(6));
        let outside = BoxSet::new(vec![1.0], vec![3.0]);
        assert_eq!(e.index_containing(&outside, 100), None);
        assert!((e.sup_norm(3) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn tau_admissibility_examples() {
        let r = Region::parse(&["0"], &["x"]).unwrap();
        let tau = TauMap::parse("x", 1).unwrap();
        let rep = check_tau_admissible(&tau, &r, &half_line(), &[(vec![1.0], 0.5)]).unwrap();
        assert!(rep.pass);
        let w = rep.probes[0].witness.as_ref().unwrap()[0];
        assert!(w < 1.0);

        let quad = BoxSet::new(vec![0.0, 0.0], vec![INF, INF]);
        let r2 = Region::lower_orthant(2);
        let tau2 = TauMap::parse("x1*x2", 2).unwrap();
        let probes = vec![(vec![1.0, 1.0], 0.5), (vec![0.3, 2.0], 0.1)];
        assert!(check_tau_admissible(&tau2, &r2, &quad, &probes).unwrap().pass);

        let one = TauMap::parse("1", 1).unwrap();
        let rep = check_tau_admissible(&one, &r, &half_line(), &[(vec![1.0], 0.5)]).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn tau_positivity_enforced_inside_domain_only() {
        let tau = TauMap::parse("x", 1).unwrap();
        assert!(tau.eval_checked(&[0.0], &half_line()).is_ok());
        assert!(tau.eval_checked(&[0.5], &half_line()).is_ok());
        let bad = TauMap::parse("x - 1", 1).unwrap();
        assert!(bad.eval_checked(&[0.5], &half_line()).is_err());
    }

    #[test]
    fn rho_is_a_pseudometric_on_random_boxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rand_box = |rng: &mut ChaCha8Rng| {
            let mut lo = Vec::new();
            let mut hi = Vec::new();
            for _ in 0..2 {
                let a: f64 = rng.gen_range(-4.0..4.0);
                let b: f64 = rng.gen_range(-4.0..4.0);
                lo.push(a.min(b));
                hi.push(a.max(b));
            }
            BoxSet::new(lo, hi)
        };
        for _ in 0..1000 {
            let a = rand_box(&mut rng);
            let b = rand_box(&mut rng);
            let c = rand_box(&mut rng);
            let ab = a.sym_diff_measure(&b);
            assert_eq!(ab, b.sym_diff_measure(&a));
            assert!(ab <= a.sym_diff_measure(&c) + c.sym_diff_measure(&b) + 1e-12);
        }
    }

    #[test]
    fn measure_equals_rho_to_an_empty_region() {
        // Lambda(x) = (1 - x, x): empty for x <= 1/2.
        let r = Region::parse(&["1 - x"], &["x"]).unwrap();
        let omega = half_line();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x: f64 = rng.gen_range(0.01..5.0);
            let m = region_measure(&r, &[x], &omega).unwrap();
            assert_eq!(m, rho(&r, &[x], &[0.25], &omega).unwrap());
        }
    }
}
