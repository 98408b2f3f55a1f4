//! Expression DSL for declarative test fields.
//!
//! Expressions are built from the coordinates `xt` (axial), `xb`/`xb1`,
//! `xb2` (cross), numeric literals and `pi`, the operators `+ - * / ^`, and
//! the functions `sin`, `cos`, `exp`, `abs` and `bump` (the C-infinity
//! cutoff `bump(t) = exp(1 - 1/(1-t^2))` supported on |t| < 1). A field
//! declaration pairs an expression with its support radius:
//!
//! ```text
//! f1: bump(xt/0.8)*sin(3*xb) @ 2.5
//! ```

use crate::field::{bump_profile, Field, Smoothness};
use crate::point::Point;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate index: 0 = xt, 1 = xb1, 2 = xb2.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Bump,
}

impl Expr {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x.coord(*i),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Neg(a) => -a.eval(x),
            Expr::Call(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Abs => v.abs(),
                    Func::Bump => bump_profile(v),
                }
            }
        }
    }

    fn contains_abs(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.contains_abs() || b.contains_abs()
            }
            Expr::Neg(a) => a.contains_abs(),
            Expr::Call(Func::Abs, _) => true,
            Expr::Call(_, a) => a.contains_abs(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
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

    fn bump_char(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.bump_char();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.bump_char();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.bump_char();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.bump_char();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.bump_char();
            let exp = self.factor()?; // right-associative
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.bump_char();
            // exponentiation binds tighter: -2^2 is -(2^2)
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.bump_char();
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Expr("expected ')'".into()));
                }
                self.bump_char();
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            other => Err(Error::Expr(format!("unexpected token {other:?}"))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos > start
                && self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|&n| n.is_ascii_digit() || n == b'+' || n == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Expr(format!("bad number '{text}'")))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "xt" => Ok(Expr::Var(0)),
            "xb" | "xb1" => Ok(Expr::Var(1)),
            "xb2" => Ok(Expr::Var(2)),
            "pi" => Ok(Expr::Const(std::f64::consts::PI)),
            "sin" | "cos" | "exp" | "abs" | "bump" => {
                if self.peek() != Some(b'(') {
                    return Err(Error::Expr(format!("{name} expects an argument list")));
                }
                self.bump_char();
                let arg = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::Expr("expected ')'".into()));
                }
                self.bump_char();
                let f = match name {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "abs" => Func::Abs,
                    _ => Func::Bump,
                };
                Ok(Expr::Call(f, Box::new(arg)))
            }
            _ => Err(Error::Expr(format!("unknown identifier '{name}'"))),
        }
    }
}

/// Parse a bare expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser::new(src);
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Expr(format!(
            "trailing input at byte {} of '{src}'",
            p.pos
        )));
    }
    Ok(e)
}

/// Parse a field declaration `id: expr @ support_radius`.
pub fn parse_field_decl(line: &str) -> Result<(String, Field)> {
    let (id, rest) = line
        .split_once(':')
        .ok_or_else(|| Error::Expr(format!("field declaration '{line}' needs 'id: expr @ r'")))?;
    let (expr_src, support) = rest
        .rsplit_once('@')
        .ok_or_else(|| Error::Expr(format!("field declaration '{line}' misses '@ support'")))?;
    let support: f64 = support
        .trim()
        .parse()
        .map_err(|_| Error::Expr(format!("bad support radius in '{line}'")))?;
    if !(support > 0.0) {
        return Err(Error::Expr("support radius must be positive".into()));
    }
    let expr = parse_expr(expr_src)?;
    let smoothness = if expr.contains_abs() {
        Smoothness::C0
    } else {
        Smoothness::Cinf
    };
    let field = Field::new(move |x: &Point| expr.eval(x), support, smoothness);
    Ok((id.trim().to_string(), field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_and_evaluates() {
        let e = parse_expr("xt^2 + 3*xb - sin(pi*xt)/2").unwrap();
        let x = Point::d2(0.5, -1.0);
        assert_abs_diff_eq!(
            e.eval(&x),
            0.25 - 3.0 - (std::f64::consts::PI * 0.5).sin() / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse_expr("-2^2").unwrap();
        assert_abs_diff_eq!(e.eval(&Point::d1(0.0)), -4.0, epsilon = 0.0); // -(2^2)
        let e = parse_expr("2*3+4").unwrap();
        assert_eq!(e.eval(&Point::d1(0.0)), 10.0);
        let e = parse_expr("2+3*4").unwrap();
        assert_eq!(e.eval(&Point::d1(0.0)), 14.0);
        let e = parse_expr("2^3^2").unwrap(); // right assoc
        assert_eq!(e.eval(&Point::d1(0.0)), 512.0);
    }

    #[test]
    fn bump_support() {
        let e = parse_expr("bump(xt/2)").unwrap();
        assert_eq!(e.eval(&Point::d1(2.0)), 0.0);
        assert_eq!(e.eval(&Point::d1(0.0)), 1.0);
        assert!(e.eval(&Point::d1(1.0)) > 0.0);
    }

    #[test]
    fn field_declarations() {
        let (id, f) = parse_field_decl("g2: bump(xt/1.5)*cos(xb) @ 1.5").unwrap();
        assert_eq!(id, "g2");
        assert_eq!(f.support_radius(), 1.5);
        assert_eq!(f.smoothness(), Smoothness::Cinf);
        assert_abs_diff_eq!(f.eval(&Point::d2(0.0, 0.0)), 1.0, epsilon = 1e-15);

        let (_, f) = parse_field_decl("t: abs(xt) @ 1").unwrap();
        assert_eq!(f.smoothness(), Smoothness::C0);

        assert!(parse_field_decl("missing support: xt").is_err());
        assert!(parse_expr("nope(xt)").is_err());
        assert!(parse_expr("xt +").is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn matches_closure_semantics(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let e = parse_expr("bump(xt/2)*(1 + 0.5*sin(3*xt) - xb*xb)").unwrap();
            let x = Point::d2(a, b);
            let expect = crate::field::bump_profile(a / 2.0) * (1.0 + 0.5 * (3.0 * a).sin() - b * b);
            proptest::prop_assert!((e.eval(&x) - expect).abs() < 1e-12);
        }
    }
}
