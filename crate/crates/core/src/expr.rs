//! A small arithmetic expression language over `x1..xd` and `xi1..xid`.
//!
//! Two dialects share one parser. The weight dialect is deliberately total:
//! no division, no logarithms, subtraction only inside `exp(...)`, and powers
//! either with a nonnegative even integer exponent or on an `abs(...)` base.
//! The symbol dialect additionally allows `-`, `sin`, `cos`, `sqrt`, the
//! imaginary unit `i` and real exponents.

use crate::error::{Error, Result};
use crate::jet::Scalar;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    Weight,
    Symbol,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Exp,
    Sin,
    Cos,
    Sqrt,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Imag,
    /// Variables are numbered `x1..xd` then `xi1..xid`.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str, d: usize, dialect: Dialect) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            d,
            dialect,
        };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        if dialect == Dialect::Weight {
            e.check_weight(false)?;
        }
        Ok(e)
    }

    fn check_weight(&self, in_exp: bool) -> Result<()> {
        let bad = |msg: &str| Err(Error::MalformedWeight(msg.to_string()));
        match self {
            Expr::Num(v) => {
                if !in_exp && *v < 0.0 {
                    return bad("negative constant outside exp");
                }
                Ok(())
            }
            Expr::Imag => bad("imaginary unit not allowed in weights"),
            Expr::Var(_) => Ok(()),
            Expr::Add(a, b) | Expr::Mul(a, b) => {
                a.check_weight(in_exp)?;
                b.check_weight(in_exp)
            }
            Expr::Sub(a, b) => {
                if !in_exp {
                    return bad("'-' only allowed inside exp(...)");
                }
                a.check_weight(in_exp)?;
                b.check_weight(in_exp)
            }
            Expr::Neg(a) => {
                if !in_exp {
                    return bad("'-' only allowed inside exp(...)");
                }
                a.check_weight(in_exp)
            }
            Expr::Pow(base, r) => {
                let even = *r >= 0.0 && r.fract() == 0.0 && (*r as i64) % 2 == 0;
                let abs_base = matches!(**base, Expr::Call(Func::Abs, _)) && *r >= 0.0;
                if !(even || abs_base || in_exp && *r >= 0.0 && r.fract() == 0.0) {
                    return bad("power needs a nonnegative even exponent or an abs(...) base");
                }
                base.check_weight(in_exp)
            }
            Expr::Call(Func::Abs, a) => a.check_weight(in_exp),
            Expr::Call(Func::Exp, a) => a.check_weight(true),
            Expr::Call(f, _) => Err(Error::MalformedWeight(format!(
                "function {f:?} not allowed in weights"
            ))),
        }
    }

    /// True if the expression reads variable `v`.
    pub fn uses_var(&self, v: usize) -> bool {
        match self {
            Expr::Var(u) => *u == v,
            Expr::Num(_) | Expr::Imag => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.uses_var(v) || b.uses_var(v),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.uses_var(v),
        }
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> S {
        let like = &vars[0];
        match self {
            Expr::Num(v) => like.cst(Complex64::new(*v, 0.0)),
            Expr::Imag => like.cst(Complex64::new(0.0, 1.0)),
            Expr::Var(i) => vars[*i].clone(),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Pow(a, r) => {
                let base = a.eval(vars);
                if r.fract() == 0.0 && *r >= 0.0 && *r <= 16.0 {
                    let mut acc = like.cst(Complex64::new(1.0, 0.0));
                    for _ in 0..(*r as usize) {
                        acc = acc * base.clone();
                    }
                    acc
                } else {
                    base.powf(*r)
                }
            }
            Expr::Call(f, a) => {
                let u = a.eval(vars);
                match f {
                    Func::Abs => u.abs_real(),
                    Func::Exp => u.exp(),
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Sqrt => u.sqrt(),
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    d: usize,
    dialect: Dialect,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
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

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let r = self.number()?;
            return Ok(Expr::Pow(Box::new(base), if neg { -r } else { r }));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'+' || c == b'-')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map_err(|_| Error::Parse {
            pos: start,
            msg: format!("bad number '{text}'"),
        })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                self.ident(name, start)
            }
            _ => Err(self.err("expected number, variable or '('")),
        }
    }

    fn ident(&mut self, name: &str, start: usize) -> Result<Expr> {
        let func = match name {
            "abs" => Some(Func::Abs),
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        };
        if let Some(f) = func {
            if self.dialect == Dialect::Weight && !matches!(f, Func::Abs | Func::Exp) {
                return Err(Error::MalformedWeight(format!("function '{name}' not allowed in weights")));
            }
            if self.peek() != Some(b'(') {
                return Err(self.err("expected '(' after function name"));
            }
            self.pos += 1;
            let arg = self.sum()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        if name == "i" {
            return Ok(Expr::Imag);
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        let var = if let Some(rest) = name.strip_prefix("xi") {
            parse_index(rest, self.d).map(|k| self.d + k)
        } else if let Some(rest) = name.strip_prefix('x') {
            parse_index(rest, self.d)
        } else {
            None
        };
        var.map(Expr::Var).ok_or(Error::Parse {
            pos: start,
            msg: format!("unknown identifier '{name}'"),
        })
    }
}

/// `""` is accepted as index 1 when d = 1.
fn parse_index(rest: &str, d: usize) -> Option<usize> {
    if rest.is_empty() {
        return (d == 1).then_some(0);
    }
    let k: usize = rest.parse().ok()?;
    (1..=d).contains(&k).then(|| k - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, d: usize, dialect: Dialect, vars: &[f64]) -> Complex64 {
        let e = Expr::parse(src, d, dialect).unwrap();
        let v: Vec<Complex64> = vars.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        e.eval(&v)
    }

    #[test]
    fn precedence_and_variables() {
        let z = ev("1 + xi1^2 + xi2^2 * 2", 2, Dialect::Weight, &[0.0, 0.0, 1.0, 2.0]);
        assert_eq!(z, Complex64::new(10.0, 0.0));
        let z = ev("(1 + xi^2)*abs(x)^0.5", 1, Dialect::Weight, &[4.0, 3.0]);
        assert!((z.re - 20.0).abs() < 1e-12);
    }

    #[test]
    fn weight_dialect_rejects_unsafe_forms() {
        assert!(Expr::parse("1 - xi1", 1, Dialect::Weight).is_err());
        assert!(Expr::parse("xi1^3", 1, Dialect::Weight).is_err());
        assert!(Expr::parse("sin(xi1)", 1, Dialect::Weight).is_err());
        assert!(Expr::parse("xi1/2", 1, Dialect::Weight).is_err());
        assert!(Expr::parse("exp(-x1^2)", 1, Dialect::Weight).is_ok());
        assert!(Expr::parse("abs(xi1)^1.5", 1, Dialect::Weight).is_ok());
    }

    #[test]
    fn symbol_dialect_complex_and_trig() {
        let z = ev("xi1^2 + i*xi2", 2, Dialect::Symbol, &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(z, Complex64::new(1.0, 1.0));
        let z = ev("cos(x1) - 2", 1, Dialect::Symbol, &[0.0, 0.0]);
        assert!((z.re + 1.0).abs() < 1e-15);
        let z = ev("1e-1*xi^-2", 1, Dialect::Symbol, &[0.0, 2.0]);
        assert!((z.re - 0.025).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_position() {
        match Expr::parse("1 + foo", 1, Dialect::Symbol) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Expr::parse("x3", 2, Dialect::Symbol).is_err());
    }
}
