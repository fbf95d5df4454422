use volterra::solver::initial_iterate;
use volterra::weights::a_sequence;
use volterra::{
    build_schedule, condensing_check, goursat_spec, mnc_axiom_check, parse_config, picard_solve,
    residual, Error, Expr, FunctionFamily, GoursatData, GridFunction, ProblemSpec, Strategy,
    WeightSchedule,
};

const SECOND_KIND: &str = include_str!("../examples/second_kind.cfg");

fn half_line(k: &str, f: &str, outer: &str, n: usize, h: f64) -> ProblemSpec {
    let text = format!(
        r#"
[domain]
dim = 1
lower = [0]
upper = ["inf"]
lambda_lower = ["0"]
lambda_upper = ["x"]
tau = "x"

[kernel]
k = "{k}"

[F]
{f}

[outer]
{outer}

[solve]
n = {n}
h = {h}
"#
    );
    parse_config(&text).unwrap().spec
}

fn schedule(spec: &ProblemSpec) -> WeightSchedule {
    let n = spec.disc.n;
    build_schedule(spec, &a_sequence(spec, n).unwrap(), n).unwrap()
}

#[test]
fn constant_outer_map_converges_at_once() {
    let spec = half_line("1", "f = \"0\"\nb = \"1\"", "g = \"2.5\"\nphi = \"x/2\"", 1, 0.0625);
    let rep = picard_solve(&spec, &schedule(&spec)).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.iterations, 1);
    assert!(rep.solution.values().iter().all(|v| *v == 2.5));
    assert_eq!(rep.residual, 0.0);
}

#[test]
fn second_kind_solution_and_convergence_shape() {
    let spec = parse_config(SECOND_KIND).unwrap().spec;
    let rep = picard_solve(&spec, &schedule(&spec)).unwrap();
    let g = rep.solution.grid();
    let one = g.coords(0).iter().position(|c| *c == 1.0).unwrap();
    assert!((rep.solution.at(one)[0] - 1f64.exp()).abs() < 1e-4);
    assert!(rep.ratio < 1.0);
    assert!(rep.deltas[3..].windows(2).all(|w| w[1] < w[0]), "{:?}", rep.deltas);
    // fixed-point residual against the quadrature scale C h^2 with C = sup |k| = 1
    assert!(rep.residual <= 10.0 * spec.disc.h * spec.disc.h);
}

#[test]
fn residual_examples() {
    let spec = parse_config(SECOND_KIND).unwrap().spec;
    let grid = spec.grid(3).unwrap();
    let exact = GridFunction::from_fn(grid.clone(), 1, |x| vec![x[0].exp()]);
    let h = spec.disc.h;
    let r = residual(&spec, &exact).unwrap();
    assert!(r <= 10.0 * h * h, "{r}");

    let fixed = picard_solve(&spec, &schedule(&spec)).unwrap().solution;
    let mut bumped = fixed.clone();
    bumped.values_mut()[100] += 1.0;
    let r = residual(&spec, &bumped).unwrap();
    assert!(r >= 1.0 - 2.0 * h, "{r}");
}

#[test]
fn multivalued_residual_uses_the_admissible_interval() {
    let spec = half_line(
        "1",
        "h1 = \"u - 1\"\nh2 = \"u + 1\"\nb = \"3\"",
        "g = \"1\"\nphi = \"x/2\"",
        1,
        0.015625,
    );
    let rep = picard_solve(&spec, &schedule(&spec)).unwrap();
    assert!(rep.converged);
    assert!(rep.residual <= 1e-8);
    // a function strictly inside the band of admissible values
    let grid = spec.grid(1).unwrap();
    let u = GridFunction::from_fn(grid, 1, |x| vec![x[0].exp() + 0.1 * x[0]]);
    assert!(residual(&spec, &u).unwrap() <= 1e-3);
}

#[test]
fn selection_strategies_are_ordered() {
    let mut solutions = Vec::new();
    for s in [Strategy::Lower, Strategy::Midpoint, Strategy::Upper] {
        let mut spec = half_line(
            "exp(-x*y)",
            "h1 = \"u\"\nh2 = \"u + 1 + sin(x)^2\"\nb = \"3\"",
            "g = \"1\"\nphi = \"x/2\"",
            1,
            0.015625,
        );
        spec.disc.strategy = s;
        let rep = picard_solve(&spec, &schedule(&spec)).unwrap();
        assert!(rep.converged);
        solutions.push(rep.solution);
    }
    for i in 0..solutions[0].values().len() {
        let (l, m, u) = (solutions[0].values()[i], solutions[1].values()[i], solutions[2].values()[i]);
        assert!(l <= m + 1e-12 && m <= u + 1e-12);
    }
}

#[test]
fn expanding_iteration_is_flagged() {
    // declared modulus is wrong: g doubles the state
    let spec = half_line("1", "f = \"0\"\nb = \"1\"", "g = \"2*u + 1\"\nphi = \"x/2\"", 1, 0.0625);
    match picard_solve(&spec, &schedule(&spec)) {
        Err(Error::NonContractive { ratio, window }) => {
            assert!(ratio >= 1.0);
            assert_eq!(window, 10);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn missing_schedule_row_is_a_boundary_failure() {
    let spec = parse_config(SECOND_KIND).unwrap().spec;
    let sched = schedule(&spec.with_n(1));
    assert!(matches!(
        picard_solve(&spec, &sched),
        Err(Error::BoundaryCondition(_))
    ));
}

#[test]
fn iteration_cap_is_not_an_error() {
    let mut spec = parse_config(SECOND_KIND).unwrap().spec;
    spec.disc.max_iter = 3;
    let rep = picard_solve(&spec, &schedule(&spec)).unwrap();
    assert!(!rep.converged);
    assert_eq!(rep.iterations, 3);
    assert_eq!(rep.deltas.len(), 3);
}

#[test]
fn initial_iterate_is_the_outer_map_at_zero() {
    let spec = half_line("1", "f = \"u\"\nb = \"1\"", "g = \"x + 1\"\nphi = \"x/2\"", 1, 0.125);
    let u0 = initial_iterate(&spec).unwrap();
    let g = u0.grid();
    for i in 0..g.len() {
        assert_eq!(u0.at(i)[0], g.node(i)[0] + 1.0);
    }
}

#[test]
fn condensing_examples() {
    let spec = parse_config(SECOND_KIND).unwrap().spec;
    let grid = spec.grid(3).unwrap();
    let consts = FunctionFamily::new((0..5).map(|c| GridFunction::from_fn(grid.clone(), 1, |_| vec![c as f64])).collect()).unwrap();
    let rep = condensing_check(&spec, &consts).unwrap();
    assert_eq!(rep.eps_in, 0.0);
    assert!(rep.pass);
    assert!(rep.eps_out <= rep.slack + 1e-9);

    let steep = half_line("1", "f = \"u\"\nb = \"1\"", "g = \"2*u\"\nphi = \"x\"", 3, 0.00390625);
    let fam = FunctionFamily::new(vec![
        GridFunction::from_fn(grid.clone(), 1, |x| vec![(5.0 * x[0]).sin()]),
        GridFunction::from_fn(grid.clone(), 1, |x| vec![(7.0 * x[0]).cos()]),
    ])
    .unwrap();
    assert!(!condensing_check(&steep, &fam).unwrap().pass);
}

#[test]
fn mnc_axioms_on_the_discrete_modulus() {
    let spec = parse_config(SECOND_KIND).unwrap().spec;
    let grid = spec.grid(1).unwrap();
    let fam = FunctionFamily::new(vec![
        GridFunction::from_fn(grid.clone(), 1, |x| vec![x[0].sin()]),
        GridFunction::from_fn(grid.clone(), 1, |x| vec![0.5 * x[0] * x[0]]),
    ])
    .unwrap();
    let constant = GridFunction::from_fn(grid.clone(), 1, |_| vec![3.0]);
    let rep = mnc_axiom_check(&fam, &constant).unwrap();
    assert!(rep.pass());
    assert_eq!(rep.base, rep.with_extra);

    let k = 40.0;
    let steep = GridFunction::from_fn(grid.clone(), 1, |x| vec![k * x[0]]);
    let rep = mnc_axiom_check(&fam, &steep).unwrap();
    assert!(rep.pass());
    assert!((rep.with_extra - k * grid.max_step()).abs() < 1e-9);
}

#[test]
fn goursat_with_traces_and_no_source() {
    let mut data = GoursatData::zero_boundary(2, Expr::constant(0.0));
    data.traces.insert("10".into(), Expr::parse("x1").unwrap());
    data.traces.insert("01".into(), Expr::parse("x2^2").unwrap());
    let disc = volterra::Discretization { n: 1, h: 1.0 / 32.0, ..Default::default() };
    let spec = goursat_spec(&data, disc).unwrap();
    let rep = picard_solve(&spec, &schedule(&spec)).unwrap();
    let g = rep.solution.grid();
    for i in 0..g.len() {
        let x = g.node(i);
        assert!((rep.solution.at(i)[0] - (x[0] + x[1] * x[1])).abs() < 1e-12);
    }
}

#[test]
fn goursat_three_dimensional_zero_data() {
    let data = GoursatData::zero_boundary(3, Expr::constant(0.0));
    let disc = volterra::Discretization { n: 1, h: 0.25, ..Default::default() };
    let spec = goursat_spec(&data, disc).unwrap();
    let rep = picard_solve(&spec, &schedule(&spec)).unwrap();
    assert!(rep.solution.values().iter().all(|v| *v == 0.0));
}

/// `d^2 u / dx1 dx2 = u` with `u = 1` on both axes is solved by
/// `I0(2 sqrt(x1 x2)) = sum_k (x1 x2)^k / (k!)^2`.
#[test]
fn goursat_bessel_solution() {
    let mut data = GoursatData::zero_boundary(2, Expr::parse("u").unwrap());
    data.traces.insert("10".into(), Expr::constant(1.0));
    data.traces.insert("01".into(), Expr::constant(1.0));
    data.u0 = 1.0;
    let disc = volterra::Discretization { n: 1, h: 1.0 / 64.0, ..Default::default() };
    let spec = goursat_spec(&data, disc).unwrap();
    let rep = picard_solve(&spec, &schedule(&spec)).unwrap();
    assert!(rep.converged);
    let bessel = |p: f64| {
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..30 {
            term *= p / (k * k) as f64;
            sum += term;
        }
        sum
    };
    let u = &rep.solution;
    let g = u.grid();
    let err = (0..g.len())
        .map(|i| {
            let x = g.node(i);
            (u.at(i)[0] - bessel(x[0] * x[1])).abs()
        })
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
    let (xs, ys) = (g.coords(0), g.coords(1));
    let v = |a: usize, b: usize| u.at(g.flat_index(&[a, b]))[0];
    for i in 1..xs.len() {
        for j in 1..ys.len() {
            let d = (v(i, j) - v(i - 1, j) - v(i, j - 1) + v(i - 1, j - 1)) / ((xs[i] - xs[i - 1]) * (ys[j] - ys[j - 1]));
            let mean = 0.25 * (v(i, j) + v(i - 1, j) + v(i, j - 1) + v(i - 1, j - 1));
            assert!((d - mean).abs() < 5e-2);
        }
    }
}
