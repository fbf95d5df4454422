//! Mixed-derivative (Goursat) problems `d^N u / dx1..dxN = f(x, u)` on the
//! positive orthant, rewritten as an additive Volterra equation over the
//! boxes `prod_i (0, x_i)` with an alternating sum of boundary traces as `g`.

use std::collections::{BTreeMap, HashMap};

use crate::domain::{BoxSet, Exhaustion, ExhaustionRule, Region, TauMap};
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, Node};
use crate::operators::{Kernel, Modulus, MultiMapF, OuterMap};
use crate::problem::{Discretization, ProblemSpec};

const COMPAT_TOL: f64 = 1e-9;
const MAX_DIM: usize = 8;

/// Boundary data of a Goursat problem. Trace keys are strings of `N` binary
/// digits; digit `i` is `1` when coordinate `i` stays free on that face and `0`
/// when it is pinned to zero. Faces without a trace inherit the restriction of
/// a larger face, or zero.
#[derive(Debug, Clone)]
pub struct GoursatData {
    pub dim: usize,
    pub f: Expr,
    pub b: Expr,
    pub eta: Expr,
    pub u0: f64,
    pub traces: BTreeMap<String, Expr>,
}

impl GoursatData {
    /// Zero traces and zero corner value.
    pub fn zero_boundary(dim: usize, f: Expr) -> GoursatData {
        GoursatData {
            dim,
            f,
            b: Expr::constant(1.0),
            eta: Expr::constant(1.0),
            u0: 0.0,
            traces: BTreeMap::new(),
        }
    }
}

fn coord_name(i: usize) -> String {
    format!("x{}", i + 1)
}

/// Replaces every pinned coordinate by the literal zero.
fn pin(node: &Node, free: &[bool]) -> Node {
    match node {
        Node::Num(v) => Node::Num(*v),
        Node::Var(name) => {
            let pinned = free
                .iter()
                .enumerate()
                .any(|(i, f)| !f && *name == coord_name(i));
            if pinned {
                Node::Num(0.0)
            } else {
                Node::Var(name.clone())
            }
        }
        Node::Neg(a) => Node::Neg(Box::new(pin(a, free))),
        Node::Bin(op, a, b) => Node::Bin(*op, Box::new(pin(a, free)), Box::new(pin(b, free))),
        Node::Call(func, args) => Node::Call(*func, args.iter().map(|a| pin(a, free)).collect()),
    }
}

fn parse_bits(key: &str, dim: usize) -> Result<Vec<bool>> {
    let bits: Vec<bool> = key.chars().map(|c| c == '1').collect();
    if key.len() != dim || !key.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::InvalidProblem(format!("trace key `{key}` needs {dim} binary digits")));
    }
    if bits.iter().all(|b| *b) || bits.iter().all(|b| !*b) {
        return Err(Error::InvalidProblem(format!("trace key `{key}` does not name a proper face")));
    }
    Ok(bits)
}

fn is_subface(small: &[bool], big: &[bool]) -> bool {
    small.iter().zip(big).all(|(s, b)| !*s || *b)
}

/// Trace for every proper face, each restricted to its own free coordinates.
fn effective_traces(traces: &BTreeMap<String, Expr>, dim: usize) -> Result<Vec<(Vec<bool>, Expr)>> {
    let given: Vec<(Vec<bool>, &Expr)> = traces
        .iter()
        .map(|(k, e)| Ok((parse_bits(k, dim)?, e)))
        .collect::<Result<_>>()?;
    for (bits, e) in &given {
        let free: Vec<String> = (0..dim).filter(|i| bits[*i]).map(coord_name).collect();
        let pinned = Expr::from_node(pin(e.root(), bits));
        if let Some(bad) = pinned.variables().into_iter().find(|v| !free.contains(v)) {
            return Err(Error::InvalidProblem(format!(
                "trace on face {} uses `{bad}`, which is not a free coordinate there",
                bits.iter().map(|b| if *b { '1' } else { '0' }).collect::<String>()
            )));
        }
    }
    let mut out = Vec::new();
    for mask in 1..(1usize << dim) - 1 {
        let bits: Vec<bool> = (0..dim).map(|i| mask >> (dim - 1 - i) & 1 == 1).collect();
        let source = given
            .iter()
            .find(|(b, _)| *b == bits)
            .or_else(|| given.iter().find(|(b, _)| is_subface(&bits, b)));
        let e = match source {
            Some((_, e)) => Expr::from_node(pin(e.root(), &bits)),
            None => Expr::constant(0.0),
        };
        out.push((bits, e));
    }
    Ok(out)
}

fn eval_at(e: &Expr, x: &[f64]) -> Result<f64> {
    let b: HashMap<String, f64> = x.iter().enumerate().map(|(i, v)| (coord_name(i), *v)).collect();
    e.eval(&b).map_err(Error::expr_in("boundary trace"))
}

/// Sample points on the face with free coordinates `free`.
fn face_samples(free: &[bool]) -> Vec<Vec<f64>> {
    const LEVELS: [f64; 5] = [0.0, 0.3, 0.75, 1.0, 2.5];
    let k = free.iter().filter(|f| **f).count();
    let total = LEVELS.len().pow(k as u32);
    (0..total)
        .map(|mut idx| {
            free.iter()
                .map(|f| {
                    if *f {
                        let v = LEVELS[idx % LEVELS.len()];
                        idx /= LEVELS.len();
                        v
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// The outer map `g(x) = sum_sigma (-1)^(#zeros + 1) u_sigma(x_sigma) + (-1)^(N+1) u0`.
pub fn goursat_outer(traces: &BTreeMap<String, Expr>, u0: f64, dim: usize) -> Result<OuterMap> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Error::InvalidProblem(format!(
            "mixed-derivative problems need 2 <= N <= {MAX_DIM}, got {dim}"
        )));
    }
    let faces = effective_traces(traces, dim)?;
    let corner = vec![false; dim];
    let mut all: Vec<(&[bool], Option<&Expr>)> = faces.iter().map(|(b, e)| (b.as_slice(), Some(e))).collect();
    all.push((&corner, None));
    for (i, (bi, ei)) in all.iter().enumerate() {
        for (bj, ej) in all.iter().skip(i + 1) {
            let common: Vec<bool> = bi.iter().zip(bj.iter()).map(|(a, b)| *a && *b).collect();
            for x in face_samples(&common) {
                let left = match ei {
                    Some(e) => eval_at(e, &x)?,
                    None => u0,
                };
                let right = match ej {
                    Some(e) => eval_at(e, &x)?,
                    None => u0,
                };
                if (left - right).abs() > COMPAT_TOL * (1.0 + left.abs().max(right.abs())) {
                    return Err(Error::IncompatibleTraces { point: x, left, right });
                }
            }
        }
    }

    let mut sum: Option<Node> = None;
    for (bits, e) in &faces {
        let zeros = bits.iter().filter(|b| !**b).count();
        let term = e.root().clone();
        sum = Some(match sum {
            None if zeros % 2 == 1 => term,
            None => Node::Neg(Box::new(term)),
            Some(acc) => {
                let op = if zeros % 2 == 1 { BinOp::Add } else { BinOp::Sub };
                Node::Bin(op, Box::new(acc), Box::new(term))
            }
        });
    }
    let corner_sign = if dim % 2 == 1 { 1.0 } else { -1.0 };
    let g = Node::Bin(
        BinOp::Add,
        Box::new(sum.expect("N >= 2 has proper faces")),
        Box::new(Node::Num(corner_sign * u0)),
    );
    OuterMap::additive(vec![Expr::from_node(g)], Modulus::zero(), dim)
}

/// Full problem: `Omega = (0, inf)^N` with cubes `(0, n)^N`, `Lambda(x) = prod (0, x_i)`,
/// `k = 1`, `tau = x1 * ... * xN`.
pub fn goursat_spec(data: &GoursatData, disc: Discretization) -> Result<ProblemSpec> {
    let dim = data.dim;
    let outer = goursat_outer(&data.traces, data.u0, dim)?;
    let omega = BoxSet::new(vec![0.0; dim], vec![f64::INFINITY; dim]);
    let exhaustion = Exhaustion::new(omega, ExhaustionRule::Anchored)?;
    let tau = (0..dim).map(coord_name).collect::<Vec<_>>().join(" * ");
    let tau = TauMap::parse(&tau, dim)?;
    let kernel = Kernel::scalar(Expr::constant(1.0), dim)?;
    let f = MultiMapF::singleton(vec![data.f.clone()], data.b.clone(), data.eta.clone(), dim)?;
    ProblemSpec::new(exhaustion, Region::lower_orthant(dim), tau, kernel, f, outer, disc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traces(pairs: &[(&str, &str)]) -> BTreeMap<String, Expr> {
        pairs
            .iter()
            .map(|(k, e)| (k.to_string(), Expr::parse(e).unwrap()))
            .collect()
    }

    fn g_at(outer: &OuterMap, x: &[f64]) -> f64 {
        let mut slots = x.to_vec();
        slots.extend([0.0, 0.0]);
        let mut out = [0.0];
        outer.eval_g(&slots, &mut out).unwrap();
        out[0]
    }

    #[test]
    fn two_dimensional_sum() {
        let o = goursat_outer(&traces(&[("10", "x1"), ("01", "x2^2")]), 0.0, 2).unwrap();
        for x in [[0.3, 0.7], [1.5, 2.0], [0.0, 0.4]] {
            assert!((g_at(&o, &x) - (x[0] + x[1] * x[1])).abs() < 1e-14);
        }
    }

    #[test]
    fn corner_value_enters_with_sign() {
        let o = goursat_outer(&traces(&[("10", "1 + x1"), ("01", "1 + sin(x2)")]), 1.0, 2).unwrap();
        let x = [0.4, 0.9];
        assert!((g_at(&o, &x) - (1.0 + x[0] + 1.0 + x[1].sin() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn three_dimensional_inclusion_exclusion() {
        // u = x1 x2 + x3 has traces x1 x2 on x3=0, x3 on x1=0 and on x2=0.
        let t = traces(&[("110", "x1*x2 + x3"), ("101", "x1*x2 + x3"), ("011", "x1*x2 + x3")]);
        let o = goursat_outer(&t, 0.0, 3).unwrap();
        let x = [0.5, 0.8, 1.3];
        // g = u(x1,x2,0) + u(x1,0,x3) + u(0,x2,x3) - u(x1,0,0) - u(0,x2,0) - u(0,0,x3) + u(0)
        let expect = 0.4 + 1.3 + 1.3 - 0.0 - 0.0 - 1.3 + 0.0;
        assert!((g_at(&o, &x) - expect).abs() < 1e-14);
    }

    #[test]
    fn zero_traces_give_zero() {
        let o = goursat_outer(&BTreeMap::new(), 0.0, 3).unwrap();
        assert_eq!(g_at(&o, &[0.2, 0.3, 0.4]), 0.0);
    }

    #[test]
    fn incompatible_traces_are_reported() {
        let e = goursat_outer(&traces(&[("10", "1 + x1"), ("01", "x2")]), 0.0, 2).unwrap_err();
        match e {
            Error::IncompatibleTraces { point, .. } => assert_eq!(point, vec![0.0, 0.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trace_using_pinned_coordinate_only_through_zero_is_fine() {
        assert!(goursat_outer(&traces(&[("10", "x1 + x2")]), 0.0, 2).is_ok());
        assert!(goursat_outer(&traces(&[("10", "x1 + y")]), 0.0, 2).is_err());
    }

    #[test]
    fn dimension_bounds() {
        assert!(goursat_outer(&BTreeMap::new(), 0.0, 1).is_err());
    }
}
