use super::{BinOp, DslError, Expr, Func, Var};

/// Evaluation point. `radial` feeds `z` / `rho`; `x` feeds `x1..xd` and `norm`.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub radial: f64,
}

impl<'a> Point<'a> {
    pub fn state(t: f64, x: &'a [f64]) -> Self {
        Point { t, x, radial: f64::NAN }
    }
}

impl Expr {
    pub fn eval(&self, p: &Point<'_>) -> Result<f64, DslError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::Time) => p.t,
            Expr::Var(Var::State(i)) => match p.x.get(i - 1) {
                Some(v) => *v,
                None => return Err(domain(p, &format!("x{i} is outside dimension {}", p.x.len()))),
            },
            Expr::Var(Var::Z | Var::Rho) => p.radial,
            Expr::Norm => p.x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Expr::Neg(e) => -e.eval(p)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval(p)?;
                let b = r.eval(p)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(domain(p, "division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b).map_err(|m| domain(p, m))?,
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(p)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(domain(p, "log of non-positive value"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(domain(p, "sqrt of negative value"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Min => a.min(args[1].eval(p)?),
                    Func::Max => a.max(args[1].eval(p)?),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain(p, "non-finite result"))
        }
    }

    /// Evaluates a `(t, x)` field.
    pub fn eval_state(&self, t: f64, x: &[f64]) -> Result<f64, DslError> {
        self.eval(&Point::state(t, x))
    }

    /// Evaluates a radial certificate at `z`.
    pub fn eval_radial(&self, z: f64) -> Result<f64, DslError> {
        self.eval(&Point {
            t: 0.0,
            x: &[],
            radial: z,
        })
    }

    /// Evaluates a time-only function.
    pub fn eval_time(&self, t: f64) -> Result<f64, DslError> {
        self.eval(&Point {
            t,
            x: &[],
            radial: f64::NAN,
        })
    }
}

fn pow(a: f64, b: f64) -> Result<f64, &'static str> {
    if a == 0.0 && b < 0.0 {
        return Err("zero raised to a negative power");
    }
    let integral = b.fract() == 0.0;
    if a < 0.0 && !integral {
        return Err("negative base with non-integer exponent");
    }
    if integral && b.abs() <= 64.0 {
        Ok(a.powi(b as i32))
    } else {
        Ok(a.powf(b))
    }
}

fn domain(p: &Point<'_>, message: &str) -> DslError {
    let x = if p.x.is_empty() && p.radial.is_finite() {
        vec![p.radial]
    } else {
        p.x.to_vec()
    };
    DslError::Domain {
        message: message.to_string(),
        t: p.t,
        x,
    }
}
