//! A small single-variable expression language.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := primary ("^" exponent)*
//! exponent:= ["-" | "+"] integer | "(" expr ")"      -- must fold to an integer
//! primary := number | VAR | FUNC "(" expr ")" | "(" expr ")"
//! FUNC    := exp | log | sin | cos | sqrt
//! ```
//!
//! Binary operators associate to the left, `^` included. Exponents are
//! restricted to integer constants so that symbolic derivatives stay closed.

mod derive;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::scalar::{lit, Real};

pub use parser::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply_f64(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn apply_f64(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }
}

/// Expression tree. Constructors fold constant subtrees whose value is finite.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
}

fn finite_const(v: f64) -> Option<Node> {
    v.is_finite().then_some(Node::Const(v))
}

impl Node {
    pub fn constant(v: f64) -> Node {
        Node::Const(v)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn negate(a: Node) -> Node {
        match a {
            Node::Const(c) => Node::Const(-c),
            a => Node::Neg(Box::new(a)),
        }
    }

    pub fn call(f: Func, a: Node) -> Node {
        if let Some(folded) = a.as_const().and_then(|c| finite_const(f.apply_f64(c))) {
            return folded;
        }
        Node::Call(f, Box::new(a))
    }

    pub fn binary(op: BinOp, a: Node, b: Node) -> Node {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(folded) = finite_const(op.apply_f64(x, y)) {
                return folded;
            }
        }
        Node::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn pow(a: Node, k: i32) -> Node {
        if let Some(folded) = a.as_const().and_then(|c| finite_const(c.powi(k))) {
            return folded;
        }
        Node::Pow(Box::new(a), k)
    }

    pub fn plus(a: Node, b: Node) -> Node {
        Node::binary(BinOp::Add, a, b)
    }

    pub fn minus(a: Node, b: Node) -> Node {
        Node::binary(BinOp::Sub, a, b)
    }

    pub fn times(a: Node, b: Node) -> Node {
        Node::binary(BinOp::Mul, a, b)
    }

    pub fn over(a: Node, b: Node) -> Node {
        Node::binary(BinOp::Div, a, b)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var => 1,
            Node::Neg(a) | Node::Call(_, a) | Node::Pow(a, _) => 1 + a.size(),
            Node::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    fn eval<T: Real>(&self, x: T, var: &str) -> Result<T, EvalError> {
        let fail = |kind| EvalError {
            kind,
            node: Rendered(self, var).to_string(),
        };
        let out = match self {
            Node::Const(c) => lit(*c),
            Node::Var => x,
            Node::Neg(a) => -a.eval(x, var)?,
            Node::Call(f, a) => {
                let v = a.eval(x, var)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log if v <= T::zero() => return Err(fail(EvalErrorKind::LogDomain)),
                    Func::Log => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sqrt if v < T::zero() => return Err(fail(EvalErrorKind::SqrtDomain)),
                    Func::Sqrt => v.sqrt(),
                }
            }
            Node::Binary(op, a, b) => {
                let (u, v) = (a.eval(x, var)?, b.eval(x, var)?);
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div if v == T::zero() => {
                        return Err(fail(EvalErrorKind::DivisionByZero))
                    }
                    BinOp::Div => u / v,
                }
            }
            Node::Pow(a, k) => {
                let v = a.eval(x, var)?;
                if *k < 0 && v == T::zero() {
                    return Err(fail(EvalErrorKind::DivisionByZero));
                }
                v.powi(*k)
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(fail(EvalErrorKind::NonFinite))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivisionByZero,
    LogDomain,
    SqrtDomain,
    NonFinite,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::LogDomain => "log of a non-positive value",
            EvalErrorKind::SqrtDomain => "sqrt of a negative value",
            EvalErrorKind::NonFinite => "non-finite result",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{node}`")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    /// The offending subexpression, rendered in the input grammar.
    pub node: String,
}

/// A parsed expression in one named free variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    var: String,
    root: Node,
}

impl Expr {
    pub fn parse(text: &str, var: &str) -> Result<Expr, ParseError> {
        parser::parse(text, var)
    }

    pub fn from_node(root: Node, var: &str) -> Expr {
        Expr {
            var: var.to_owned(),
            root,
        }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval_at<T: Real>(&self, x: T) -> Result<T, EvalError> {
        self.root.eval(x, &self.var)
    }

    /// Symbolic derivative with respect to the free variable.
    pub fn derive(&self) -> Expr {
        Expr {
            var: self.var.clone(),
            root: derive::derivative(&self.root),
        }
    }

    /// `Some(c)` when the expression folded to a constant.
    pub fn as_const(&self) -> Option<f64> {
        self.root.as_const()
    }
}

/// Renders in the input grammar; binaries are fully parenthesized so the
/// output parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Rendered(&self.root, &self.var).fmt(f)
    }
}

struct Rendered<'a>(&'a Node, &'a str);

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Rendered(node, var) = *self;
        let sub = |n| Rendered(n, var);
        match node {
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Node::Const(c) => write!(f, "{c}"),
            Node::Var => f.write_str(var),
            Node::Neg(a) => write!(f, "-({})", sub(a)),
            Node::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
            Node::Binary(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
            Node::Pow(a, k) => write!(f, "({})^{k}", sub(a)),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eval(text: &str, var: &str, x: f64) -> f64 {
        Expr::parse(text, var).unwrap().eval_at(x).unwrap()
    }

    #[test]
    fn basic_evaluation() {
        assert_eq!(eval("1+z*z", "z", 2.0), 5.0);
        assert_eq!(eval("2*3+1", "s", 0.0), 7.0);
        assert_eq!(eval("s^2", "s", 3.0), 9.0);
        assert_eq!(eval("exp(0)", "s", 0.0), 1.0);
        assert_eq!(eval("-s^2", "s", 3.0), -9.0);
        assert_eq!(eval("s^-1", "s", 4.0), 0.25);
        assert_eq!(eval("8/2/2", "s", 0.0), 2.0);
        assert_eq!(eval("5-3-1", "s", 0.0), 1.0);
        assert_eq!(eval("s^2^3", "s", 2.0), 64.0);
        assert_eq!(eval("2.5e1 + .5", "s", 0.0), 25.5);
        assert!((eval("sqrt(s)*log(s)+sin(s)-cos(s)", "s", 2.0)
            - (2f64.sqrt() * 2f64.ln() + 2f64.sin() - 2f64.cos()))
        .abs()
            < 1e-15);
    }

    #[test]
    fn division_by_zero_is_reported() {
        let e = Expr::parse("1/(s-1)", "s").unwrap();
        let err = e.eval_at(1.0).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivisionByZero);
        assert_eq!(err.node, "(1 / (s - 1))");
    }

    #[test]
    fn domain_errors() {
        let e = Expr::parse("log(s)", "s").unwrap();
        assert_eq!(e.eval_at(0.0).unwrap_err().kind, EvalErrorKind::LogDomain);
        let e = Expr::parse("sqrt(s)", "s").unwrap();
        assert_eq!(e.eval_at(-1.0).unwrap_err().kind, EvalErrorKind::SqrtDomain);
        let e = Expr::parse("exp(s)", "s").unwrap();
        assert_eq!(e.eval_at(1000.0).unwrap_err().kind, EvalErrorKind::NonFinite);
        let e = Expr::parse("s^-2", "s").unwrap();
        assert_eq!(e.eval_at(0.0).unwrap_err().kind, EvalErrorKind::DivisionByZero);
    }

    #[test]
    fn single_precision_evaluation() {
        let e = Expr::parse("1+z*z", "z").unwrap();
        assert_eq!(e.eval_at(2.0f32).unwrap(), 5.0f32);
    }

    #[test]
    fn constants_fold_but_errors_survive() {
        assert_eq!(Expr::parse("2*3+1", "s").unwrap().as_const(), Some(7.0));
        assert_eq!(Expr::parse("-(2)", "s").unwrap().as_const(), Some(-2.0));
        // 1/0 does not fold, so evaluation still reports it.
        let e = Expr::parse("1/0", "s").unwrap();
        assert_eq!(e.as_const(), None);
        assert!(e.eval_at(0.0).is_err());
    }

    #[test]
    fn derivatives() {
        let d = Expr::parse("s^2", "s").unwrap().derive();
        assert_eq!(d.eval_at(5.0).unwrap(), 10.0);
        let d = Expr::parse("exp(2*s)", "s").unwrap().derive();
        assert_eq!(d.eval_at(0.0).unwrap(), 2.0);
        let h = 1e-5f64;
        let f = Expr::parse("exp(2*s)", "s").unwrap();
        let fd = (f.eval_at(h).unwrap() - f.eval_at(-h).unwrap()) / (2.0 * h);
        assert!((fd - 2.0).abs() < 1e-8);
        let d = Expr::parse("3.5", "s").unwrap().derive();
        assert_eq!(d.as_const(), Some(0.0));
    }

    #[test]
    fn repeated_derivatives() {
        let f = Expr::parse("s^3", "s").unwrap();
        let d3 = f.derive().derive().derive();
        assert_eq!(d3.as_const(), Some(6.0));
        let g = Expr::parse("sin(s)", "s").unwrap();
        let g4 = g.derive().derive().derive().derive();
        for x in [0.1f64, 1.3, -2.0] {
            assert!((g4.eval_at(x).unwrap() - x.sin()).abs() < 1e-15);
        }
    }

    /// Random expressions whose domain is all of the reals.
    pub(crate) fn random_node(rng: &mut ChaCha8Rng, depth: u32) -> Node {
        if depth == 0 || rng.gen_bool(0.2) {
            return if rng.gen_bool(0.6) {
                Node::Var
            } else {
                Node::Const((rng.gen_range(-2.0..2.0f64) * 8.0).round() / 8.0)
            };
        }
        let a = random_node(rng, depth - 1);
        let positive = |n: Node| Node::plus(Node::times(n.clone(), n), Node::Const(1.0));
        match rng.gen_range(0..10) {
            0 => Node::negate(a),
            1 => Node::call(Func::Sin, a),
            2 => Node::call(Func::Cos, a),
            3 => Node::call(Func::Exp, Node::call(Func::Sin, a)),
            4 => Node::call(Func::Log, positive(a)),
            5 => Node::call(Func::Sqrt, positive(a)),
            6 => Node::pow(a, rng.gen_range(0..4)),
            7 => Node::pow(positive(a), -rng.gen_range(1..3)),
            8 => Node::over(a, positive(random_node(rng, depth - 1))),
            _ => {
                let b = random_node(rng, depth - 1);
                match rng.gen_range(0..3) {
                    0 => Node::plus(a, b),
                    1 => Node::minus(a, b),
                    _ => Node::times(a, b),
                }
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences_on_random_expressions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..50 {
            let e = Expr::from_node(random_node(&mut rng, 4), "s");
            let d = e.derive();
            for _ in 0..10 {
                let p: f64 = rng.gen_range(-1.5..1.5);
                let h = 1e-5;
                let fd = (e.eval_at(p + h).unwrap() - e.eval_at(p - h).unwrap()) / (2.0 * h);
                let exact = d.eval_at(p).unwrap();
                assert!(
                    (exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()),
                    "{e} at {p}: {exact} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn derivative_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let a = random_node(&mut rng, 3);
            let b = random_node(&mut rng, 3);
            let sum = Expr::from_node(Node::Binary(BinOp::Add, Box::new(a.clone()), Box::new(b.clone())), "s");
            let (da, db) = (Expr::from_node(a, "s").derive(), Expr::from_node(b, "s").derive());
            let ds = sum.derive();
            for p in [-1.0, -0.25, 0.5, 1.25] {
                let lhs = ds.eval_at(p).unwrap();
                let rhs = da.eval_at(p).unwrap() + db.eval_at(p).unwrap();
                assert_eq!(lhs, rhs, "{sum} at {p}");
            }
        }
    }

    #[test]
    fn unparse_round_trip_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let e = Expr::from_node(random_node(&mut rng, 5), "z");
            let once = Expr::parse(&e.to_string(), "z").unwrap();
            let twice = Expr::parse(&once.to_string(), "z").unwrap();
            assert_eq!(once, twice);
        }
        for text in ["1+z*z", "-z^2", "exp(-z)/(1+z)^3", "z^-2", "0.1*z - 1e-7"] {
            let once = Expr::parse(text, "z").unwrap();
            assert_eq!(Expr::parse(&once.to_string(), "z").unwrap(), once, "{text}");
        }
    }
}
