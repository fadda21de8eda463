use super::{BinOp, DslError, Expr, Func, Var};

pub fn parse_expr(source: &str) -> Result<Expr, DslError> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("operator or end of input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, expected: &str) -> DslError {
        DslError::Syntax {
            position: self.pos,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&format!("'{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(self.syntax("number, identifier or '('")),
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<Expr, DslError> {
        let start = self.pos;
        let int = self.digits();
        let mut frac = 0;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac = self.digits();
        }
        if int + frac == 0 {
            return Err(self.syntax("digit"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mut look = self.pos + 1;
            if matches!(self.src.get(look), Some(b'+' | b'-')) {
                look += 1;
            }
            if self.src.get(look).is_some_and(u8::is_ascii_digit) {
                self.pos = look;
                self.digits();
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        let v: f64 = text.parse().map_err(|_| DslError::Syntax {
            position: start,
            expected: "numeric literal".into(),
        })?;
        if !v.is_finite() {
            return Err(DslError::Syntax {
                position: start,
                expected: "finite numeric literal".into(),
            });
        }
        Ok(Expr::Num(v))
    }

    fn identifier(&mut self) -> Result<Expr, DslError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        let func = match name {
            "t" => return Ok(Expr::Var(Var::Time)),
            "z" => return Ok(Expr::Var(Var::Z)),
            "rho" => return Ok(Expr::Var(Var::Rho)),
            "norm" => {
                if self.eat(b'(') {
                    self.expect(b')').map_err(|_| DslError::Arity {
                        function: "norm".into(),
                        got: 1,
                        want: 0,
                    })?;
                }
                return Ok(Expr::Norm);
            }
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            "min" => Some(Func::Min),
            "max" => Some(Func::Max),
            "pow" => None,
            _ => {
                if let Some(idx) = state_index(name) {
                    return Ok(Expr::Var(Var::State(idx)));
                }
                return Err(DslError::UnknownIdentifier { name: name.into() });
            }
        };
        let fname = name.to_string();
        self.expect(b'(')?;
        let mut args = Vec::new();
        if !self.eat(b')') {
            loop {
                args.push(self.expr()?);
                if self.eat(b')') {
                    break;
                }
                self.expect(b',')?;
            }
        }
        let want = func.map_or(2, Func::arity);
        if args.len() != want {
            return Err(DslError::Arity {
                function: fname,
                got: args.len(),
                want,
            });
        }
        Ok(match func {
            Some(f) => Expr::Call(f, args),
            None => {
                let exp = args.pop().expect("two args");
                let base = args.pop().expect("two args");
                Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp))
            }
        })
    }
}

fn state_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Box<Expr> {
        Box::new(Expr::Num(v))
    }

    fn x(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(Var::State(i)))
    }

    #[test]
    fn girsanov_coefficient() {
        let e = parse_expr("min(abs(x1)^0.5, 1)").unwrap();
        let want = Expr::Call(
            Func::Min,
            vec![
                Expr::Binary(
                    BinOp::Pow,
                    Box::new(Expr::Call(Func::Abs, vec![*x(1)])),
                    num(0.5),
                ),
                Expr::Num(1.0),
            ],
        );
        assert_eq!(e, want);
    }

    #[test]
    fn zero_literal() {
        assert_eq!(parse_expr("0").unwrap(), Expr::Num(0.0));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("exp(t) + (x1 - x2)*x1").unwrap();
        let want = Expr::Binary(
            BinOp::Add,
            Box::new(Expr::Call(Func::Exp, vec![Expr::Var(Var::Time)])),
            Box::new(Expr::Binary(
                BinOp::Mul,
                Box::new(Expr::Binary(BinOp::Sub, x(1), x(2))),
                x(1),
            )),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_minus() {
        let e = parse_expr("2^3^2").unwrap();
        assert_eq!(
            e,
            Expr::Binary(BinOp::Pow, num(2.0), Box::new(Expr::Binary(BinOp::Pow, num(3.0), num(2.0))))
        );
        let e = parse_expr("-2^2").unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::Binary(BinOp::Pow, num(2.0), num(2.0)))));
        let e = parse_expr("2^-1").unwrap();
        assert_eq!(e, Expr::Binary(BinOp::Pow, num(2.0), Box::new(Expr::Neg(num(1.0)))));
    }

    #[test]
    fn left_associative_arithmetic() {
        let e = parse_expr("1 - 2 - 3").unwrap();
        assert_eq!(
            e,
            Expr::Binary(BinOp::Sub, Box::new(Expr::Binary(BinOp::Sub, num(1.0), num(2.0))), num(3.0))
        );
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse_expr("1.5e-3").unwrap(), Expr::Num(1.5e-3));
        assert_eq!(parse_expr("2E+2").unwrap(), Expr::Num(200.0));
        assert_eq!(parse_expr(".25").unwrap(), Expr::Num(0.25));
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse_expr(" x1 *\t2 ").unwrap(), parse_expr("x1*2").unwrap());
    }

    #[test]
    fn norm_forms() {
        assert_eq!(parse_expr("norm").unwrap(), Expr::Norm);
        assert_eq!(parse_expr("norm()").unwrap(), Expr::Norm);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_expr("1 +"), Err(DslError::Syntax { position: 3, .. })));
        assert!(matches!(parse_expr("2 x1"), Err(DslError::Syntax { position: 2, .. })));
        assert!(matches!(parse_expr("(1"), Err(DslError::Syntax { .. })));
        assert!(matches!(parse_expr("y"), Err(DslError::UnknownIdentifier { name }) if name == "y"));
        assert!(matches!(parse_expr("x0"), Err(DslError::UnknownIdentifier { .. })));
        assert!(matches!(
            parse_expr("min(1)"),
            Err(DslError::Arity { got: 1, want: 2, .. })
        ));
        assert!(matches!(
            parse_expr("exp(1, 2)"),
            Err(DslError::Arity { got: 2, want: 1, .. })
        ));
        assert!(matches!(parse_expr("pow(2)"), Err(DslError::Arity { .. })));
        assert!(matches!(parse_expr(""), Err(DslError::Syntax { position: 0, .. })));
        assert!(matches!(parse_expr("1e999"), Err(DslError::Syntax { .. })));
    }
}
