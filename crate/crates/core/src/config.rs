//! TOML problem files.
//!
//! ```toml
//! [domain]
//! dim = 1
//! lower = [0]
//! upper = [inf]
//! exhaustion = "anchored"      # or "standard"
//! lambda_lower = ["0"]
//! lambda_upper = ["x"]
//! tau = "x"
//!
//! [kernel]
//! k = "1"                      # or entries = [["..", ".."], ["..", ".."]]
//!
//! [F]
//! f = "u"                      # or h1 = "...", h2 = "..."
//! b = "1"
//! eta = "1"
//!
//! [outer]
//! form = 13                    # 13, 21 or 24
//! g = "1"                      # G_lower / G_upper for form 24
//! phi = "x/2"
//!
//! [solve]
//! n = 3
//! h = 0.00390625
//! ```
//!
//! A `[goursat]` section replaces `[domain]`, `[kernel]`, `[F]` and
//! `[outer]` for mixed-derivative problems, see [`crate::goursat`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;
use toml::{Table, Value};

use crate::domain::{BoxSet, Exhaustion, ExhaustionRule, Region, TauMap};
use crate::error::Result;
use crate::expr::Expr;
use crate::goursat::{goursat_spec, GoursatData};
use crate::operators::{Kernel, Modulus, MultiMapF, OuterMap};
use crate::problem::{Discretization, Form, ProblemSpec, Strategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub section: String,
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(l) = self.line {
            write!(f, " at line {l}")?;
        }
        if !self.section.is_empty() {
            write!(f, " in [{}]", self.section)?;
        }
        if let Some(k) = &self.key {
            write!(f, " key `{k}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// A validated problem file.
#[derive(Debug, Clone)]
pub struct Config {
    pub spec: ProblemSpec,
    pub goursat: Option<GoursatData>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text)
}

/// 1-based line of `key` inside `[section]`, or of the header itself.
fn find_line(text: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if key.is_none() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if let Some(k) = key {
            if current == section {
                if let Some(rest) = line.strip_prefix(k) {
                    if rest.trim_start().starts_with('=') {
                        return Some(i + 1);
                    }
                }
            }
        }
    }
    None
}

struct Section<'a> {
    name: &'static str,
    table: &'a Table,
    text: &'a str,
}

impl<'a> Section<'a> {
    fn err(&self, key: Option<&str>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            section: self.name.to_string(),
            key: key.map(str::to_string),
            line: find_line(self.text, self.name, key),
            message: message.into(),
        }
    }

    fn check_keys(&self, allowed: &[&str], prefixes: &[&str]) -> std::result::Result<(), ConfigError> {
        for k in self.table.keys() {
            if !allowed.contains(&k.as_str()) && !prefixes.iter().any(|p| k.starts_with(p)) {
                return Err(self.err(Some(k), "unknown key"));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.get(key)
    }

    fn need(&self, key: &str) -> std::result::Result<&'a Value, ConfigError> {
        self.get(key).ok_or_else(|| self.err(Some(key), "missing required key"))
    }

    fn int(&self, key: &str, default: Option<i64>) -> std::result::Result<i64, ConfigError> {
        match (self.get(key), default) {
            (Some(Value::Integer(v)), _) => Ok(*v),
            (Some(_), _) => Err(self.err(Some(key), "expected an integer")),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.err(Some(key), "missing required key")),
        }
    }

    fn float_value(&self, key: &str, v: &Value) -> std::result::Result<f64, ConfigError> {
        match v {
            Value::Integer(i) => Ok(*i as f64),
            Value::Float(f) => Ok(*f),
            Value::String(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| self.err(Some(key), format!("`{s}` is not a number"))),
            _ => Err(self.err(Some(key), "expected a number")),
        }
    }

    fn float(&self, key: &str) -> std::result::Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| self.float_value(key, v)).transpose()
    }

    fn floats(&self, key: &str) -> std::result::Result<Vec<f64>, ConfigError> {
        match self.need(key)? {
            Value::Array(a) => a.iter().map(|v| self.float_value(key, v)).collect(),
            v => Ok(vec![self.float_value(key, v)?]),
        }
    }

    fn string(&self, key: &str) -> std::result::Result<Option<String>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.err(Some(key), "expected a string")),
        }
    }

    fn expr_value(&self, key: &str, v: &Value) -> std::result::Result<Expr, ConfigError> {
        match v {
            Value::String(s) => {
                Expr::parse(s).map_err(|e| self.err(Some(key), format!("in `{s}`: {e}")))
            }
            Value::Integer(i) => Ok(Expr::constant(*i as f64)),
            Value::Float(f) => Ok(Expr::constant(*f)),
            _ => Err(self.err(Some(key), "expected an expression string")),
        }
    }

    fn expr(&self, key: &str) -> std::result::Result<Option<Expr>, ConfigError> {
        self.get(key).map(|v| self.expr_value(key, v)).transpose()
    }

    /// A single expression or an array of them.
    fn exprs(&self, key: &str) -> std::result::Result<Option<Vec<Expr>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => {
                if a.is_empty() {
                    return Err(self.err(Some(key), "empty list"));
                }
                a.iter().map(|v| self.expr_value(key, v)).collect::<std::result::Result<_, _>>().map(Some)
            }
            Some(v) => Ok(Some(vec![self.expr_value(key, v)?])),
        }
    }

    fn lift<T>(&self, key: Option<&str>, r: Result<T>) -> std::result::Result<T, ConfigError> {
        r.map_err(|e| self.err(key, e.to_string()))
    }
}

fn section<'a>(root: &'a Table, text: &'a str, name: &'static str) -> std::result::Result<Option<Section<'a>>, ConfigError> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(Section { name, table: t, text })),
        Some(_) => Err(ConfigError {
            section: name.into(),
            key: None,
            line: find_line(text, name, None),
            message: "expected a table".into(),
        }),
    }
}

fn required<'a>(root: &'a Table, text: &'a str, name: &'static str) -> std::result::Result<Section<'a>, ConfigError> {
    section(root, text, name)?.ok_or_else(|| ConfigError {
        section: name.into(),
        key: None,
        line: None,
        message: "missing required section".into(),
    })
}

fn parse_discretization(s: Option<&Section>) -> std::result::Result<Discretization, ConfigError> {
    let mut d = Discretization::default();
    let Some(s) = s else {
        return Ok(d);
    };
    s.check_keys(&["n", "h", "h_phi", "tol_fix", "max_iter", "strategy", "a_scale"], &[])?;
    let n = s.int("n", Some(1))?;
    if n < 1 {
        return Err(s.err(Some("n"), "must be at least 1"));
    }
    d.n = n as usize;
    if let Some(h) = s.float("h")? {
        if !(h > 0.0 && h.is_finite()) {
            return Err(s.err(Some("h"), "must be a positive number"));
        }
        d.h = h;
    }
    d.h_phi = s.float("h_phi")?;
    if let Some(t) = s.float("tol_fix")? {
        if !(t > 0.0) {
            return Err(s.err(Some("tol_fix"), "must be positive"));
        }
        d.tol_fix = t;
    }
    let it = s.int("max_iter", Some(d.max_iter as i64))?;
    if it < 1 {
        return Err(s.err(Some("max_iter"), "must be at least 1"));
    }
    d.max_iter = it as usize;
    if let Some(st) = s.string("strategy")? {
        d.strategy = s.lift(Some("strategy"), st.parse::<Strategy>())?;
    }
    d.a_scale = s.float("a_scale")?;
    if let Some(a) = d.a_scale {
        if !(a > 0.0) {
            return Err(s.err(Some("a_scale"), "must be positive"));
        }
    }
    Ok(d)
}

fn expr_list_len(s: &Section, key: &str, v: Vec<Expr>, dim: usize) -> std::result::Result<Vec<Expr>, ConfigError> {
    if v.len() != dim {
        return Err(s.err(Some(key), format!("expected {dim} entries, got {}", v.len())));
    }
    Ok(v)
}

/// Parses and validates a problem file.
pub fn parse_config(text: &str) -> Result<Config> {
    let root: Table = text.parse::<Table>().map_err(|e| {
        let line = e.span().map(|sp| text[..sp.start.min(text.len())].lines().count().max(1));
        ConfigError {
            section: String::new(),
            key: None,
            line,
            message: e.message().to_string(),
        }
    })?;
    for k in root.keys() {
        if !["domain", "kernel", "F", "outer", "solve", "goursat"].contains(&k.as_str()) {
            return Err(ConfigError {
                section: k.clone(),
                key: None,
                line: find_line(text, k, None),
                message: "unknown section".into(),
            }
            .into());
        }
    }
    let disc = parse_discretization(section(&root, text, "solve")?.as_ref())?;

    if let Some(g) = section(&root, text, "goursat")? {
        for other in ["domain", "kernel", "F", "outer"] {
            if root.contains_key(other) {
                return Err(ConfigError {
                    section: other.into(),
                    key: None,
                    line: find_line(text, other, None),
                    message: "not allowed together with [goursat]".into(),
                }
                .into());
            }
        }
        g.check_keys(&["dim", "f", "b", "eta", "u0"], &["trace_"])?;
        let dim = g.int("dim", None)?;
        if dim < 2 {
            return Err(g.err(Some("dim"), "mixed-derivative problems need dim >= 2").into());
        }
        let dim = dim as usize;
        let f = g.expr("f")?.ok_or_else(|| g.err(Some("f"), "missing required key"))?;
        let b = g.expr("b")?.unwrap_or_else(|| Expr::constant(1.0));
        let eta = g.expr("eta")?.unwrap_or_else(|| b.clone());
        let u0 = g.float("u0")?.unwrap_or(0.0);
        let mut traces = BTreeMap::new();
        for (k, _) in g.table.iter().filter(|(k, _)| k.starts_with("trace_")) {
            let bits = &k["trace_".len()..];
            if bits.len() != dim || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(g.err(Some(k), format!("trace key needs {dim} binary digits")).into());
            }
            if !bits.contains('0') || !bits.contains('1') {
                return Err(g.err(Some(k), "trace keys name proper faces (mixed digits)").into());
            }
            traces.insert(bits.to_string(), g.expr(k)?.expect("present"));
        }
        let data = GoursatData { dim, f, b, eta, u0, traces };
        let spec = goursat_spec(&data, disc).map_err(|e| g.err(None, e.to_string()))?;
        return Ok(Config { spec, goursat: Some(data) });
    }

    let dom = required(&root, text, "domain")?;
    dom.check_keys(&["dim", "lower", "upper", "exhaustion", "lambda_lower", "lambda_upper", "tau"], &[])?;
    let dim = dom.int("dim", None)?;
    if dim < 1 {
        return Err(dom.err(Some("dim"), "must be at least 1").into());
    }
    let dim = dim as usize;
    let lower = dom.floats("lower")?;
    let upper = dom.floats("upper")?;
    if lower.len() != dim {
        return Err(dom.err(Some("lower"), format!("expected {dim} bounds")).into());
    }
    if upper.len() != dim {
        return Err(dom.err(Some("upper"), format!("expected {dim} bounds")).into());
    }
    let rule = match dom.string("exhaustion")? {
        None => ExhaustionRule::Anchored,
        Some(s) => dom.lift(Some("exhaustion"), s.parse())?,
    };
    let exhaustion = dom.lift(None, Exhaustion::new(BoxSet::new(lower, upper), rule))?;
    let ll = dom.exprs("lambda_lower")?.ok_or_else(|| dom.err(Some("lambda_lower"), "missing required key"))?;
    let lu = dom.exprs("lambda_upper")?.ok_or_else(|| dom.err(Some("lambda_upper"), "missing required key"))?;
    let ll = expr_list_len(&dom, "lambda_lower", ll, dim)?;
    let lu = expr_list_len(&dom, "lambda_upper", lu, dim)?;
    let region = dom.lift(Some("lambda_lower"), Region::new(ll, lu))?;
    let tau = dom.expr("tau")?.ok_or_else(|| dom.err(Some("tau"), "missing required key"))?;
    let tau = dom.lift(Some("tau"), TauMap::new(tau, dim))?;

    let fs = required(&root, text, "F")?;
    fs.check_keys(&["f", "h1", "h2", "b", "eta"], &[])?;
    let b = fs.expr("b")?.ok_or_else(|| fs.err(Some("b"), "missing required key"))?;
    let eta = fs.expr("eta")?.unwrap_or_else(|| b.clone());
    let f = match (fs.exprs("f")?, fs.exprs("h1")?, fs.exprs("h2")?) {
        (Some(f), None, None) => fs.lift(Some("f"), MultiMapF::singleton(f, b, eta, dim))?,
        (None, Some(h1), Some(h2)) => {
            if h1.len() != h2.len() {
                return Err(fs.err(Some("h2"), "h1 and h2 differ in length").into());
            }
            fs.lift(Some("h1"), MultiMapF::envelopes(h1, h2, b, eta, dim))?
        }
        _ => return Err(fs.err(None, "give either `f` or both `h1` and `h2`").into()),
    };
    let m = f.components();

    let ks = required(&root, text, "kernel")?;
    ks.check_keys(&["k", "entries"], &[])?;
    let entries = match (ks.get("k"), ks.get("entries")) {
        (Some(v), None) => vec![vec![ks.expr_value("k", v)?]],
        (None, Some(Value::Array(rows))) => rows
            .iter()
            .map(|r| match r {
                Value::Array(cells) => cells.iter().map(|c| ks.expr_value("entries", c)).collect(),
                _ => Err(ks.err(Some("entries"), "expected an array of rows")),
            })
            .collect::<std::result::Result<Vec<Vec<Expr>>, _>>()?,
        _ => return Err(ks.err(None, "give exactly one of `k` or `entries`").into()),
    };
    if entries.len() != m {
        return Err(ks.err(None, format!("kernel must be {m} x {m} to match F")).into());
    }
    let kernel = ks.lift(None, Kernel::new(entries, dim))?;

    let os = required(&root, text, "outer")?;
    os.check_keys(&["form", "g", "G_lower", "G_upper", "phi", "theta", "vartheta"], &[])?;
    let form = Form::from_code(os.int("form", Some(13))?)
        .ok_or_else(|| os.err(Some("form"), "expected 13, 21 or 24"))?;
    let modulus = |key: &str| -> std::result::Result<Option<Modulus>, ConfigError> {
        os.expr(key)?
            .map(|e| os.lift(Some(key), Modulus::new(e)))
            .transpose()
    };
    let phi = modulus("phi")?.ok_or_else(|| os.err(Some("phi"), "missing required key"))?;
    let theta = modulus("theta")?;
    let vartheta = modulus("vartheta")?;
    let outer = match form {
        Form::Additive | Form::Nested => {
            let g = os.exprs("g")?.ok_or_else(|| os.err(Some("g"), "missing required key"))?;
            let g = expr_list_len(&os, "g", g, m)?;
            if form == Form::Additive {
                os.lift(Some("g"), OuterMap::additive(g, phi, dim))?
            } else {
                os.lift(Some("g"), OuterMap::nested(g, phi, vartheta, dim))?
            }
        }
        Form::SetValued => {
            let lo = os.exprs("G_lower")?.ok_or_else(|| os.err(Some("G_lower"), "missing required key"))?;
            let hi = os.exprs("G_upper")?.ok_or_else(|| os.err(Some("G_upper"), "missing required key"))?;
            let lo = expr_list_len(&os, "G_lower", lo, m)?;
            let hi = expr_list_len(&os, "G_upper", hi, m)?;
            os.lift(Some("G_lower"), OuterMap::set_valued(lo, hi, phi, theta, dim))?
        }
    };
    let spec = ProblemSpec::new(exhaustion, region, tau, kernel, f, outer, disc)?;
    Ok(Config { spec, goursat: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const SECOND_KIND: &str = include_str!("../examples/second_kind.cfg");

    fn config_err(text: &str) -> ConfigError {
        match parse_config(text) {
            Err(Error::Config(c)) => c,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn second_kind_loads() {
        let c = parse_config(SECOND_KIND).unwrap();
        assert_eq!(c.spec.form, Form::Additive);
        assert_eq!(c.spec.disc.n, 3);
        assert!(c.spec.f.is_singleton());
    }

    #[test]
    fn missing_kernel_section_is_named() {
        let text = SECOND_KIND.replace("[kernel]", "[unused]").replace("k = \"1\"", "");
        let text = text.replace("[unused]", "");
        let e = config_err(&text);
        assert_eq!(e.section, "kernel");
        assert!(e.to_string().contains("[kernel]"));
    }

    #[test]
    fn bad_expression_reports_line() {
        let text = SECOND_KIND.replace("tau = \"x\"", "tau = \"x +\"");
        let e = config_err(&text);
        assert_eq!(e.section, "domain");
        assert_eq!(e.key.as_deref(), Some("tau"));
        let expected = SECOND_KIND.lines().position(|l| l.starts_with("tau")).unwrap() + 1;
        assert_eq!(e.line, Some(expected));
    }

    #[test]
    fn toml_syntax_error_has_line() {
        let e = config_err("[domain]\ndim = 1\nlower = [0\n");
        assert!(e.line.is_some());
    }

    #[test]
    fn unknown_key_rejected() {
        let text = SECOND_KIND.replace("[solve]", "[solve]\nbogus = 1");
        let e = config_err(&text);
        assert_eq!(e.key.as_deref(), Some("bogus"));
    }
}
