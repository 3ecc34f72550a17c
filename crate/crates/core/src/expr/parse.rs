//! Recursive-descent parser for defining-function source text.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := 'Re(' expr ')' | 'Im(' expr ')' | 'abs2(' expr ')' | 'conj(' expr ')'
//!         | var | const | '(' expr ')'
//! var    := 'z' uint
//! const  := rational | rational 'i' | '(' rational ('+'|'-') rational 'i' ')'
//! ```
//!
//! `rational` is `['-'] digits ['/' digits]` (exact) or a decimal/exponent
//! literal (floating; rejected later by exact expansion). `+`/`-` chains are
//! left-associated. Errors carry the byte offset of the offending input.

use super::{abs2, add, conj, im_part, mul, pow, re_part, sub, ConstVal, Expr};
use crate::error::{Error, Result};
use crate::rational::GRat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub fn parse(source: &str, dim: usize) -> Result<Expr> {
    if dim < 2 {
        return Err(Error::ParameterRange {
            msg: format!("dimension must be at least 2, got {dim}"),
        });
    }
    let mut p = Parser { src: source.as_bytes(), pos: 0, dim };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

/// A lexed numeric literal: exact rational or floating.
enum Number {
    Exact(BigRational),
    Float(f64),
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { offset: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    acc = add(acc, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    acc = sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                self.skip_ws();
                let rhs = self.factor()?;
                acc = mul(acc, rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let k = self.uint()?;
            Ok(pow(base, k))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                // A parenthesized complex constant wins over a parenthesized
                // subexpression; backtrack if the constant shape fails.
                let mark = self.pos;
                if let Some(c) = self.try_paren_complex()? {
                    return Ok(Expr::Const(c));
                }
                self.pos = mark;
                self.expect(b'(')?;
                let inner = self.expr()?;
                self.skip_ws();
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'z') => self.variable(),
            Some(c) if c.is_ascii_digit() || c == b'-' => self.number_atom(),
            Some(_) => self.call(),
        }
    }

    fn variable(&mut self) -> Result<Expr> {
        self.expect(b'z')?;
        let idx = self.uint()? as usize;
        if idx == 0 {
            return Err(self.err("variable indices start at z1"));
        }
        if idx > self.dim {
            self.pos -= 1; // point at the index digits, roughly
            return Err(Error::VariableOutOfRange { index: idx, dim: self.dim });
        }
        Ok(Expr::var(idx - 1))
    }

    fn call(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| (c as char).is_ascii_alphanumeric())
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let builder: fn(Expr) -> Expr = match name {
            "Re" => re_part,
            "Im" => im_part,
            "abs2" => abs2,
            "conj" => conj,
            "" => return Err(self.err("expected an atom")),
            other => {
                self.pos = start;
                return Err(self.err(&format!("unknown function '{other}'")));
            }
        };
        self.skip_ws();
        self.expect(b'(')?;
        let inner = self.expr()?;
        self.skip_ws();
        self.expect(b')')?;
        Ok(builder(inner))
    }

    /// Numeric atom: a rational/float literal, optionally with an `i` suffix.
    fn number_atom(&mut self) -> Result<Expr> {
        let n = self.number()?;
        if self.eat_imag_suffix() {
            Ok(Expr::Const(match n {
                Number::Exact(q) => ConstVal::from_grat(GRat::new(BigRational::zero(), q)),
                Number::Float(x) => ConstVal::from_c64(num_complex::Complex64::new(0.0, x)),
            }))
        } else {
            Ok(Expr::Const(match n {
                Number::Exact(q) => ConstVal::from_grat(GRat::new(q, BigRational::zero())),
                Number::Float(x) => ConstVal::from_f64(x),
            }))
        }
    }

    /// `(a+bi)` / `(a-bi)` with both parts numeric literals.
    fn try_paren_complex(&mut self) -> Result<Option<ConstVal>> {
        if !self.eat(b'(') {
            return Ok(None);
        }
        self.skip_ws();
        let re = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'-' => match self.number() {
                Ok(n) => n,
                Err(_) => return Ok(None),
            },
            _ => return Ok(None),
        };
        self.skip_ws();
        let sign = match self.peek() {
            Some(b'+') => 1.0,
            Some(b'-') => -1.0,
            _ => return Ok(None),
        };
        self.pos += 1;
        self.skip_ws();
        let im = match self.peek() {
            Some(c) if c.is_ascii_digit() => match self.number() {
                Ok(n) => n,
                Err(_) => return Ok(None),
            },
            _ => return Ok(None),
        };
        if !self.eat_imag_suffix() {
            return Ok(None);
        }
        self.skip_ws();
        if !self.eat(b')') {
            return Ok(None);
        }
        Ok(Some(match (re, im) {
            (Number::Exact(a), Number::Exact(b)) => {
                let b = if sign < 0.0 { -b } else { b };
                ConstVal::from_grat(GRat::new(a, b))
            }
            (re, im) => {
                let a = match re {
                    Number::Exact(q) => crate::rational::rational_to_f64(&q),
                    Number::Float(x) => x,
                };
                let b = match im {
                    Number::Exact(q) => crate::rational::rational_to_f64(&q),
                    Number::Float(x) => x,
                };
                ConstVal::from_c64(num_complex::Complex64::new(a, sign * b))
            }
        }))
    }

    fn eat_imag_suffix(&mut self) -> bool {
        let mark = self.pos;
        self.skip_ws();
        if self.peek() == Some(b'i') {
            let after = self.src.get(self.pos + 1).copied();
            let terminates = after.map_or(true, |c| !(c as char).is_ascii_alphanumeric());
            if terminates {
                self.pos += 1;
                return true;
            }
        }
        self.pos = mark;
        false
    }

    fn uint(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer literal out of range"))
    }

    fn digits(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn number(&mut self) -> Result<Number> {
        let neg = self.eat(b'-');
        let int_part = self.digits()?;
        match self.peek() {
            Some(b'/') => {
                self.pos += 1;
                let den = self.digits()?;
                let d: BigInt = den.parse().unwrap();
                if d.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                let n: BigInt = int_part.parse().unwrap();
                let mut q = BigRational::new(n, d);
                if neg {
                    q = -q;
                }
                Ok(Number::Exact(q))
            }
            Some(b'.') | Some(b'e') | Some(b'E') => {
                let start = self.pos;
                if self.eat(b'.') {
                    self.digits()?;
                }
                if self.peek() == Some(b'e') || self.peek() == Some(b'E') {
                    self.pos += 1;
                    if self.peek() == Some(b'-') || self.peek() == Some(b'+') {
                        self.pos += 1;
                    }
                    self.digits()?;
                }
                let text = format!(
                    "{}{}",
                    int_part,
                    std::str::from_utf8(&self.src[start..self.pos]).unwrap()
                );
                let mut x: f64 = text.parse().map_err(|_| self.err("bad float literal"))?;
                if neg {
                    x = -x;
                }
                Ok(Number::Float(x))
            }
            _ => {
                let n: BigInt = int_part.parse().unwrap();
                let mut q = BigRational::from_integer(n);
                if neg {
                    q = -q;
                }
                Ok(Number::Exact(q))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn parses_the_model_domains() {
        assert!(parse("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3).is_ok());
        assert!(parse("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3).is_ok());
        assert!(parse("Re(z2)", 2).is_ok());
    }

    #[test]
    fn rejects_out_of_range_variables_with_position() {
        let err = parse("Re(z3)", 2).unwrap_err();
        assert!(matches!(err, Error::VariableOutOfRange { index: 3, dim: 2 }));
    }

    #[test]
    fn reports_byte_offsets_for_syntax_errors() {
        let err = parse("Re(z1) + ", 2).unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 9),
            other => panic!("unexpected error {other:?}"),
        }
        let err = parse("foo(z1)", 2).unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn left_associates_additive_chains() {
        let e = parse("z1 + z2 - z1 + z2", 2).unwrap();
        // ((z1 + z2) - z1) + z2
        match e {
            Expr::Add(lhs, _) => match lhs.as_ref() {
                Expr::Sub(ll, _) => assert!(matches!(ll.as_ref(), Expr::Add(..))),
                other => panic!("expected difference, got {other:?}"),
            },
            other => panic!("expected sum, got {other:?}"),
        }
    }

    #[test]
    fn imaginary_literals_and_powers() {
        let e = parse("1/2i*z1^3", 2).unwrap();
        let v = e.eval(&[Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(v, Complex64::new(0.0, 4.0));
    }

    #[test]
    fn leading_minus_on_numbers_only() {
        assert!(parse("-1*Re(z1)", 2).is_ok());
        assert!(parse("-Re(z1)", 2).is_err());
        let e = parse("0 - 2/3", 2).unwrap();
        assert_eq!(e.eval(&[]).unwrap().re, -2.0 / 3.0);
    }

    #[test]
    fn float_exponent_literals_parse() {
        let e = parse("1e-7 + z1*0.0", 2).unwrap();
        let v = e.eval(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(v.re, 1e-7);
    }
}
