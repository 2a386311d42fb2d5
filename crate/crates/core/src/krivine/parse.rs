//! Recursive-descent parser for lattice terms.
//!
//! ```text
//! expr  := meet ('\/' meet)*
//! meet  := unary ('/\' unary)*
//! unary := number '*' unary | '0' | 'x' digits
//!        | ('neg' | 'abs') '(' expr ')' | 'avg' '(' expr ',' expr ')'
//!        | '(' expr ')'
//! ```
//!
//! Numbers are decimals or rationals `p/q`, optionally signed.

use super::{Expr, LatticeTerm};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parses `text` as a term of the given arity.
pub fn parse_term<T: Scalar>(text: &str, arity: usize) -> Result<LatticeTerm<T>> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    LatticeTerm::new(arity, expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{token}'")))
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Expr<T>> {
        let mut left = self.meet()?;
        while self.eat("\\/") {
            left = left.join(self.meet()?);
        }
        Ok(left)
    }

    fn meet<T: Scalar>(&mut self) -> Result<Expr<T>> {
        let mut left = self.unary()?;
        while self.eat("/\\") {
            left = left.meet(self.unary()?);
        }
        Ok(left)
    }

    fn unary<T: Scalar>(&mut self) -> Result<Expr<T>> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        match c {
            b'(' => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(")")?;
                Ok(inner)
            }
            b'x' => {
                self.pos += 1;
                let start = self.pos;
                while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(self.error("expected variable index"));
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let index = digits
                    .parse()
                    .map_err(|_| self.error("variable index too large"))?;
                Ok(Expr::Var(index))
            }
            b'n' | b'a' => self.call(),
            b'0'..=b'9' | b'-' | b'+' | b'.' => {
                let start = self.pos;
                let literal = self.number()?.to_string();
                if self.eat("*") {
                    let q = T::parse_literal(&literal)
                        .ok_or_else(|| Error::Syntax {
                            position: start,
                            message: format!("invalid number '{literal}'"),
                        })?;
                    Ok(self.unary()?.scale(q))
                } else if literal == "0" {
                    Ok(Expr::Zero)
                } else {
                    Err(self.error("expected '*' after coefficient"))
                }
            }
            _ => Err(self.error("expected a term")),
        }
    }

    fn call<T: Scalar>(&mut self) -> Result<Expr<T>> {
        if self.eat("neg") {
            self.expect("(")?;
            let a = self.expr()?;
            self.expect(")")?;
            Ok(a.neg())
        } else if self.eat("abs") {
            self.expect("(")?;
            let a = self.expr()?;
            self.expect(")")?;
            Ok(a.abs())
        } else if self.eat("avg") {
            self.expect("(")?;
            let a = self.expr()?;
            self.expect(",")?;
            let b = self.expr()?;
            self.expect(")")?;
            Ok(a.half_sum(b))
        } else {
            Err(self.error("unknown function"))
        }
    }

    /// Scans a signed decimal or rational literal.
    fn number(&mut self) -> Result<&str> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.src.get(p.pos).is_some_and(u8::is_ascii_digit) {
                p.pos += 1;
            }
            p.pos > s
        };
        if matches!(self.src.get(self.pos), Some(b'-' | b'+')) {
            self.pos += 1;
        }
        let mut any = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            any |= digits(self);
        }
        if !any {
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'-' | b'+')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        if self.src.get(self.pos) == Some(&b'/')
            && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit)
        {
            self.pos += 1;
            digits(self);
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn spec_examples() {
        let t: LatticeTerm<f64> = parse_term("abs(x0)", 1).unwrap();
        assert_eq!(t.expr(), &Expr::var(0).abs());
        let t: LatticeTerm<f64> = parse_term("x0 \\/ x1", 2).unwrap();
        assert_eq!(t.expr(), &Expr::var(0).join(Expr::var(1)));
        let t: LatticeTerm<f64> = parse_term("2*avg(x0, neg(x1))", 2).unwrap();
        assert_eq!(t.expr(), &Expr::var(0).half_sum(Expr::var(1).neg()).scale(2.0));
    }

    #[test]
    fn precedence_and_literals() {
        let t: LatticeTerm<Rational> = parse_term("x0 \\/ x1 /\\ 3/4*x2 \\/ 0", 3).unwrap();
        let q = Rational::from_ratio(3, 4);
        let expected = Expr::var(0)
            .join(Expr::var(1).meet(Expr::var(2).scale(q)))
            .join(Expr::Zero);
        assert_eq!(t.expr(), &expected);
        let t: LatticeTerm<f64> = parse_term("-0.5*x0 /\\ x0", 1).unwrap();
        assert_eq!(t.eval_scalar(&[2.0]).unwrap(), -1.0);
        let t: LatticeTerm<f64> = parse_term("1e-3*x0", 1).unwrap();
        assert_eq!(t.eval_scalar(&[1000.0]).unwrap(), 1.0);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_term::<f64>("abs(x0", 1) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_term::<f64>("x0 x1", 2), Err(Error::Syntax { position: 3, .. })));
        assert!(matches!(parse_term::<f64>("foo(x0)", 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_term::<f64>("x3", 2), Err(Error::VariableOutOfRange { index: 3, arity: 2 })));
        assert!(matches!(parse_term::<f64>("2 x0", 1), Err(Error::Syntax { .. })));
    }

    #[test]
    fn print_parse_round_trip() {
        let e = Expr::var(0)
            .meet(Expr::var(1).join(Expr::Zero))
            .half_sum(Expr::var(1).abs().scale(-2.5))
            .neg();
        let t = LatticeTerm::new(2, e).unwrap();
        let back: LatticeTerm<f64> = parse_term(&t.to_string(), 2).unwrap();
        assert_eq!(back, t);
    }
}
