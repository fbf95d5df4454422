//! Scalar arithmetic expressions used by configuration files.
//!
//! Grammar (loosest to tightest binding):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?          right associative
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-2^2` is `-4`, and `^` is right
//! associative, so `2^3^2` is `512`. There is no implicit multiplication.
//! Evaluation is plain IEEE binary64; operations that would silently
//! produce NaN (`ln` of a nonpositive number, `sqrt` of a negative one,
//! division by zero) are reported as [`ExprError::Domain`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown function `{name}` at position {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("function `{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: &'static str,
        got: usize,
    },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {op} of {value}")]
    Domain { op: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Abs,
    Sqrt,
    Arctan,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Ln,
        Func::Abs,
        Func::Sqrt,
        Func::Arctan,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Arctan => "arctan",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    fn is_variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

/// Abstract syntax node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(String),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression. Immutable; cheap to share between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
}

/// Source of variable values for [`Expr::eval`].
pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Bindings for HashMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for HashMap<&str, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for [(&str, f64)] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const K: usize> Bindings for [(&str, f64); K] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.as_slice().lookup(name)
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        Parser::new(text)?.parse_all()
    }

    pub fn constant(value: f64) -> Expr {
        Expr {
            root: Node::Num(value),
        }
    }

    pub fn from_node(root: Node) -> Expr {
        Expr { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates with named bindings. Names `pi` and `e` are resolved at parse time.
    pub fn eval<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<f64, ExprError> {
        eval_node(&self.root, &|name: &str| {
            bindings
                .lookup(name)
                .ok_or_else(|| ExprError::UnboundVariable(name.to_string()))
        })
    }

    /// Free variable names, sorted.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_vars(&self.root, &mut out);
        out
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    pub fn uses_any(&self, names: &[&str]) -> bool {
        let vars = self.variables();
        names.iter().any(|n| vars.contains(*n))
    }

    /// Canonical, fully parenthesized rendering; `parse(render(e))` evaluates
    /// bitwise identically to `e`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        render_node(&self.root, &mut s);
        s
    }

    /// Resolves variable names against `layout`, producing a slot-indexed form
    /// for fast repeated evaluation.
    pub fn compile(&self, layout: &VarLayout) -> Result<CompiledExpr, ExprError> {
        Ok(CompiledExpr {
            node: compile_node(&self.root, layout)?,
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

fn collect_vars(node: &Node, out: &mut BTreeSet<String>) {
    match node {
        Node::Num(_) => {}
        Node::Var(v) => {
            out.insert(v.clone());
        }
        Node::Neg(a) => collect_vars(a, out),
        Node::Bin(_, a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Node::Call(_, args) => args.iter().for_each(|a| collect_vars(a, out)),
    }
}

fn render_node(node: &Node, s: &mut String) {
    match node {
        Node::Num(v) => {
            if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                s.push_str("(-");
                s.push_str(&format!("{:?}", -v));
                s.push(')');
            } else {
                s.push_str(&format!("{:?}", v));
            }
        }
        Node::Var(v) => s.push_str(v),
        Node::Neg(a) => {
            s.push_str("(-");
            render_node(a, s);
            s.push(')');
        }
        Node::Bin(op, a, b) => {
            s.push('(');
            render_node(a, s);
            s.push(op.symbol());
            render_node(b, s);
            s.push(')');
        }
        Node::Call(f, args) => {
            s.push_str(f.name());
            s.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                render_node(a, s);
            }
            s.push(')');
        }
    }
}

#[inline]
fn apply_bin(op: BinOp, a: f64, b: f64) -> Result<f64, ExprError> {
    let r = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err(ExprError::Domain {
                    op: "division",
                    value: a,
                });
            }
            a / b
        }
        BinOp::Pow => {
            let r = a.powf(b);
            if a == 0.0 && b < 0.0 {
                return Err(ExprError::Domain {
                    op: "negative power",
                    value: a,
                });
            }
            r
        }
    };
    if r.is_nan() && !a.is_nan() && !b.is_nan() {
        return Err(ExprError::Domain {
            op: match op {
                BinOp::Pow => "power",
                _ => "arithmetic",
            },
            value: a,
        });
    }
    Ok(r)
}

#[inline]
fn apply_func(f: Func, args: &[f64]) -> Result<f64, ExprError> {
    let a = args[0];
    let r = match f {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => a.tan(),
        Func::Exp => a.exp(),
        Func::Ln => {
            if a <= 0.0 {
                return Err(ExprError::Domain { op: "ln", value: a });
            }
            a.ln()
        }
        Func::Abs => a.abs(),
        Func::Sqrt => {
            if a < 0.0 {
                return Err(ExprError::Domain {
                    op: "sqrt",
                    value: a,
                });
            }
            a.sqrt()
        }
        Func::Arctan => a.atan(),
        Func::Min => args[1..].iter().fold(a, |m, &v| m.min(v)),
        Func::Max => args[1..].iter().fold(a, |m, &v| m.max(v)),
    };
    if r.is_nan() && !args.iter().any(|v| v.is_nan()) {
        return Err(ExprError::Domain {
            op: f.name(),
            value: a,
        });
    }
    Ok(r)
}

fn eval_node(
    node: &Node,
    resolve: &dyn Fn(&str) -> Result<f64, ExprError>,
) -> Result<f64, ExprError> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Var(name) => resolve(name),
        Node::Neg(a) => Ok(-eval_node(a, resolve)?),
        Node::Bin(op, a, b) => {
            let x = eval_node(a, resolve)?;
            let y = eval_node(b, resolve)?;
            apply_bin(*op, x, y)
        }
        Node::Call(f, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_node(a, resolve)?);
            }
            apply_func(*f, &vals)
        }
    }
}

/// Mapping from variable names (and aliases) to evaluation slots.
#[derive(Debug, Clone, Default)]
pub struct VarLayout {
    names: Vec<(String, usize)>,
    slots: usize,
}

impl VarLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a new slot reachable under every name in `names`; returns its index.
    pub fn push(&mut self, names: &[&str]) -> usize {
        let slot = self.slots;
        self.slots += 1;
        for n in names {
            self.names.push((n.to_string(), slot));
        }
        slot
    }

    pub fn slot_count(&self) -> usize {
        self.slots
    }

    pub fn slot_of(&self, name: &str) -> Option<usize> {
        self.names
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|(n, _)| n.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum CNode {
    Num(f64),
    Slot(usize),
    Neg(Box<CNode>),
    Bin(BinOp, Box<CNode>, Box<CNode>),
    Unary(Func, Box<CNode>),
    Fold(Func, Vec<CNode>),
}

/// Expression with variables resolved to slots of a [`VarLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    node: CNode,
}

impl CompiledExpr {
    #[inline]
    pub fn eval(&self, slots: &[f64]) -> Result<f64, ExprError> {
        eval_c(&self.node, slots)
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.node {
            CNode::Num(v) => Some(v),
            _ => None,
        }
    }

    /// True when the value does not depend on any slot in `slots`.
    pub fn independent_of(&self, slots: &[usize]) -> bool {
        fn walk(n: &CNode, s: &[usize]) -> bool {
            match n {
                CNode::Num(_) => true,
                CNode::Slot(i) => !s.contains(i),
                CNode::Neg(a) | CNode::Unary(_, a) => walk(a, s),
                CNode::Bin(_, a, b) => walk(a, s) && walk(b, s),
                CNode::Fold(_, args) => args.iter().all(|a| walk(a, s)),
            }
        }
        walk(&self.node, slots)
    }
}

fn compile_node(node: &Node, layout: &VarLayout) -> Result<CNode, ExprError> {
    let c = match node {
        Node::Num(v) => CNode::Num(*v),
        Node::Var(name) => CNode::Slot(
            layout
                .slot_of(name)
                .ok_or_else(|| ExprError::UnboundVariable(name.clone()))?,
        ),
        Node::Neg(a) => CNode::Neg(Box::new(compile_node(a, layout)?)),
        Node::Bin(op, a, b) => CNode::Bin(
            *op,
            Box::new(compile_node(a, layout)?),
            Box::new(compile_node(b, layout)?),
        ),
        Node::Call(f, args) => {
            let mut cargs = args
                .iter()
                .map(|a| compile_node(a, layout))
                .collect::<Result<Vec<_>, _>>()?;
            if f.is_variadic() {
                CNode::Fold(*f, cargs)
            } else {
                CNode::Unary(*f, Box::new(cargs.remove(0)))
            }
        }
    };
    Ok(fold_constant(c))
}

/// Replaces a node whose children are all literals by its value, unless
/// evaluation fails (the error then surfaces at evaluation time).
fn fold_constant(c: CNode) -> CNode {
    let all_const = match &c {
        CNode::Num(_) | CNode::Slot(_) => return c,
        CNode::Neg(a) | CNode::Unary(_, a) => matches!(**a, CNode::Num(_)),
        CNode::Bin(_, a, b) => matches!(**a, CNode::Num(_)) && matches!(**b, CNode::Num(_)),
        CNode::Fold(_, args) => args.iter().all(|a| matches!(a, CNode::Num(_))),
    };
    if all_const {
        if let Ok(v) = eval_c(&c, &[]) {
            return CNode::Num(v);
        }
    }
    c
}

fn eval_c(node: &CNode, slots: &[f64]) -> Result<f64, ExprError> {
    match node {
        CNode::Num(v) => Ok(*v),
        CNode::Slot(i) => Ok(slots[*i]),
        CNode::Neg(a) => Ok(-eval_c(a, slots)?),
        CNode::Bin(op, a, b) => {
            let x = eval_c(a, slots)?;
            let y = eval_c(b, slots)?;
            apply_bin(*op, x, y)
        }
        CNode::Unary(f, a) => {
            let x = eval_c(a, slots)?;
            apply_func(*f, &[x])
        }
        CNode::Fold(f, args) => {
            let mut acc = eval_c(&args[0], slots)?;
            for a in &args[1..] {
                let v = eval_c(a, slots)?;
                acc = apply_func(*f, &[acc, v])?;
            }
            Ok(acc)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent only when followed by digits
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| ExprError::Syntax {
                    pos: start,
                    message: format!("malformed number `{s}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Ident(s), start));
                continue;
            }
            other => {
                return Err(ExprError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ExprError> {
        if text.trim().is_empty() {
            return Err(ExprError::Syntax {
                pos: 0,
                message: "expected an expression, found empty input".into(),
            });
        }
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expected(&self, what: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.pos(),
            message: format!("expected {what}, found {}", self.peek().describe()),
        }
    }

    fn parse_all(mut self) -> Result<Expr, ExprError> {
        let root = self.expr()?;
        if *self.peek() != Tok::End {
            return Err(self.expected("operator or end of input"));
        }
        Ok(Expr { root })
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.expected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let f = Func::lookup(&name)
                        .ok_or(ExprError::UnknownFunction { name: name.clone(), pos })?;
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    if *self.peek() != Tok::RParen {
                        return Err(self.expected("`,` or `)`"));
                    }
                    self.bump();
                    let ok = if f.is_variadic() {
                        args.len() >= 2
                    } else {
                        args.len() == 1
                    };
                    if !ok {
                        return Err(ExprError::Arity {
                            name,
                            expected: if f.is_variadic() { "at least 2" } else { "1" },
                            got: args.len(),
                        });
                    }
                    return Ok(Node::Call(f, args));
                }
                Ok(match name.as_str() {
                    "pi" => Node::Num(std::f64::consts::PI),
                    "e" => Node::Num(std::f64::consts::E),
                    _ => Node::Var(name),
                })
            }
            _ => Err(self.expected("a number, variable, function call or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str) -> f64 {
        Expr::parse(s).unwrap().eval(&[("x", 0.0)]).unwrap()
    }

    #[test]
    fn precedence_suite() {
        assert_eq!(ev("2+3*4"), 14.0);
        assert_eq!(ev("2-3-4"), -5.0);
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("8/4/2"), 1.0);
        assert_eq!(ev("exp(0)"), 1.0);
    }

    #[test]
    fn functions_and_constants() {
        assert!((ev("ln(2+abs(-1))") - 3f64.ln()).abs() < 1e-15);
        assert!((ev("ln(2+abs(-1))") - 1.0986123).abs() < 1e-7);
        assert_eq!(ev("min(3, 1, 2)"), 1.0);
        assert_eq!(ev("max(3, 1)"), 3.0);
        assert_eq!(ev("arctan(1)*4"), std::f64::consts::PI);
        assert_eq!(ev("pi"), std::f64::consts::PI);
        assert_eq!(ev("e"), std::f64::consts::E);
        assert_eq!(ev("1.5e2"), 150.0);
    }

    #[test]
    fn eval_with_bindings() {
        let e = Expr::parse("t*exp(-(1+t^2))").unwrap();
        assert_eq!(e.eval(&[("t", 0.0)]).unwrap(), 0.0);
        let e = Expr::parse("x1*x2").unwrap();
        assert_eq!(e.eval(&[("x1", 0.5), ("x2", 0.25)]).unwrap(), 0.125);
        let e = Expr::parse("cos(u)+2").unwrap();
        assert_eq!(e.eval(&[("u", std::f64::consts::PI)]).unwrap(), 1.0);
    }

    #[test]
    fn syntax_errors_carry_position() {
        match Expr::parse("2 3") {
            Err(ExprError::Syntax { pos, message }) => {
                assert_eq!(pos, 2);
                assert!(message.contains("expected"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("(1+2"), Err(ExprError::Syntax { pos: 4, .. })));
        assert!(matches!(Expr::parse(""), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse("1 + $"), Err(ExprError::Syntax { pos: 4, .. })));
        // no implicit multiplication
        assert!(matches!(Expr::parse("2x"), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse("2(3)"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn unknown_function_at_parse_unknown_variable_at_eval() {
        assert!(matches!(
            Expr::parse("foo(1)"),
            Err(ExprError::UnknownFunction { pos: 0, .. })
        ));
        let e = Expr::parse("y + 1").unwrap();
        assert_eq!(
            e.eval(&[("x", 1.0)]),
            Err(ExprError::UnboundVariable("y".into()))
        );
        assert!(matches!(Expr::parse("sin(1,2)"), Err(ExprError::Arity { .. })));
        assert!(matches!(Expr::parse("max(1)"), Err(ExprError::Arity { .. })));
    }

    #[test]
    fn domain_errors_are_reported() {
        let b = [("x", -1.0)];
        assert!(matches!(
            Expr::parse("ln(x+1)").unwrap().eval(&b),
            Err(ExprError::Domain { op: "ln", .. })
        ));
        assert!(matches!(
            Expr::parse("sqrt(x)").unwrap().eval(&b),
            Err(ExprError::Domain { op: "sqrt", .. })
        ));
        assert!(matches!(
            Expr::parse("1/(x+1)").unwrap().eval(&b),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            Expr::parse("x^0.5").unwrap().eval(&b),
            Err(ExprError::Domain { .. })
        ));
    }

    #[test]
    fn compiled_matches_named_eval() {
        let mut layout = VarLayout::new();
        layout.push(&["x1", "x", "t"]);
        layout.push(&["u"]);
        let e = Expr::parse("t*exp(-(1+t^2)) + ln(2 + abs(u))").unwrap();
        let c = e.compile(&layout).unwrap();
        let v = c.eval(&[0.7, -3.0]).unwrap();
        let w = e.eval(&[("t", 0.7), ("u", -3.0)]).unwrap();
        assert_eq!(v.to_bits(), w.to_bits());
        assert!(c.independent_of(&[5]));
        assert!(!c.independent_of(&[1]));
        let k = Expr::parse("2*3+1").unwrap().compile(&layout).unwrap();
        assert_eq!(k.constant_value(), Some(7.0));
        assert!(matches!(
            Expr::parse("zz").unwrap().compile(&layout),
            Err(ExprError::UnboundVariable(_))
        ));
    }

    #[test]
    fn render_is_reparseable() {
        let e = Expr::parse("-2^2 + min(x, 3)*1e-7").unwrap();
        let r = Expr::parse(&e.render()).unwrap();
        assert_eq!(
            e.eval(&[("x", 2.5)]).unwrap().to_bits(),
            r.eval(&[("x", 2.5)]).unwrap().to_bits()
        );
    }
}
