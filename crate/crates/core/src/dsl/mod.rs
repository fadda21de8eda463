//! Scalar expression language for coefficient fields and certificate functions.
//!
//! Grammar (whitespace-insensitive, no implicit multiplication):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?            // right-associative
//! primary := number | variable | call | '(' expr ')'
//! call    := func '(' expr (',' expr)* ')' | 'norm' ['(' ')']
//! number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! variable:= 't' | 'x1' .. 'xd' | 'z' | 'rho'
//! func    := exp | log | sqrt | abs | min | max | pow
//! ```
//!
//! `norm` is the Euclidean norm of the whole state vector. `z` and `rho` read
//! the radial argument of certificate functions. `pow(a, b)` and `a ^ b` build
//! the same node.

mod eval;
mod parse;

use std::fmt;

use thiserror::Error;

pub use eval::Point;
pub use parse::parse_expr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },
    #[error("function `{function}` takes {want} argument(s), got {got}")]
    Arity {
        function: String,
        got: usize,
        want: usize,
    },
    #[error("variable `{name}` is not available in a {scope} expression")]
    Unbound { name: String, scope: String },
    #[error("domain error: {message} at t={t}, x={x:?}")]
    Domain {
        message: String,
        t: f64,
        x: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Time,
    /// 1-based coordinate index.
    State(usize),
    Z,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression tree. Literals produced by the parser are finite and
/// non-negative; negation is always an explicit [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Norm,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Which variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Coefficient fields in `(t, x1..xd)`.
    State { dim: usize },
    /// Radial certificates in `z` / `rho`.
    Radial,
    /// Time-only functions such as ζ.
    Time,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::State { dim } => write!(f, "state (d={dim})"),
            Scope::Radial => f.write_str("radial"),
            Scope::Time => f.write_str("time"),
        }
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    /// Parses and checks `source` against `scope` in one go.
    pub fn parse_in(source: &str, scope: Scope) -> Result<Expr, DslError> {
        let e = parse_expr(source)?;
        e.check_scope(scope)?;
        Ok(e)
    }

    pub fn check_scope(&self, scope: Scope) -> Result<(), DslError> {
        let mut err = None;
        self.visit(&mut |e| {
            if err.is_some() {
                return;
            }
            let bad = match (e, scope) {
                (Expr::Var(Var::Time), Scope::State { .. } | Scope::Time) => None,
                (Expr::Var(Var::State(i)), Scope::State { dim }) if *i >= 1 && *i <= dim => None,
                (Expr::Norm, Scope::State { .. }) => None,
                (Expr::Var(Var::Z | Var::Rho), Scope::Radial) => None,
                (Expr::Var(v), _) => Some(var_name(*v)),
                (Expr::Norm, _) => Some("norm".to_string()),
                _ => None,
            };
            if let Some(name) = bad {
                err = Some(DslError::Unbound {
                    name,
                    scope: scope.to_string(),
                });
            }
        });
        err.map_or(Ok(()), Err)
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(e) => e.visit(f),
            Expr::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            _ => {}
        }
    }

    fn any(&self, pred: impl Fn(&Expr) -> bool) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= pred(e));
        hit
    }

    pub fn uses_time(&self) -> bool {
        self.any(|e| matches!(e, Expr::Var(Var::Time)))
    }

    pub fn uses_state(&self) -> bool {
        self.any(|e| matches!(e, Expr::Var(Var::State(_)) | Expr::Norm))
    }

    pub fn is_constant(&self) -> bool {
        !self.any(|e| matches!(e, Expr::Var(_) | Expr::Norm))
    }

    /// Literal zero after parsing, e.g. `"0"`.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Norm => 1,
            Expr::Neg(e) => 1 + e.depth(),
            Expr::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
            Expr::Call(_, args) => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
        }
    }
}

fn var_name(v: Var) -> String {
    match v {
        Var::Time => "t".into(),
        Var::State(i) => format!("x{i}"),
        Var::Z => "z".into(),
        Var::Rho => "rho".into(),
    }
}

/// Canonical fully-parenthesised rendering; `parse_expr` of the output
/// reproduces the tree exactly.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(&var_name(*v)),
            Expr::Norm => f.write_str("norm"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    e.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_printing() {
        assert_eq!(print_expr(&parse_expr("x1+x2*t").unwrap()), "(x1 + (x2 * t))");
        assert_eq!(print_expr(&parse_expr("min(1,2)").unwrap()), "min(1, 2)");
        assert_eq!(print_expr(&parse_expr("-x1^2").unwrap()), "(-(x1 ^ 2))");
        assert_eq!(print_expr(&parse_expr("pow(x1, 0.5)").unwrap()), "(x1 ^ 0.5)");
    }

    #[test]
    fn round_trip_corpus() {
        let corpus = [
            "min(abs(x1)^0.5, 1)",
            "exp(t) + (x1 - x2)*x1",
            "(max(norm,1))^3",
            "2*z*(sqrt(2*z))^3",
            "3/(2*z)",
            "rho^3",
            "1e-3 * x1 / (1 + t)",
            "-(-x1)",
            "2^-1^2",
            "sqrt(abs(x1)) - log(1 + x1^2)",
        ];
        for s in corpus {
            let e = parse_expr(s).unwrap();
            let again = parse_expr(&print_expr(&e)).unwrap();
            assert_eq!(e, again, "{s}");
        }
    }

    #[test]
    fn scope_checks() {
        let e = parse_expr("x3 + t").unwrap();
        assert!(e.check_scope(Scope::State { dim: 3 }).is_ok());
        assert!(matches!(
            e.check_scope(Scope::State { dim: 2 }),
            Err(DslError::Unbound { .. })
        ));
        assert!(parse_expr("rho^3").unwrap().check_scope(Scope::Radial).is_ok());
        assert!(parse_expr("x1").unwrap().check_scope(Scope::Radial).is_err());
        assert!(parse_expr("norm").unwrap().check_scope(Scope::Time).is_err());
    }

    #[test]
    fn dependency_queries() {
        let e = parse_expr("exp(t) * 2").unwrap();
        assert!(e.uses_time() && !e.uses_state() && !e.is_constant());
        assert!(parse_expr("norm").unwrap().uses_state());
        assert!(parse_expr("0").unwrap().is_zero_literal());
        assert!(parse_expr("max(1, 2)^3").unwrap().is_constant());
    }
}
