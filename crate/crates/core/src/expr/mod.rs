//! Expression trees for defining functions.
//!
//! An [`Expr`] is a real- or complex-valued expression in the complex
//! coordinates `z1..zn`, built from rational (or floating) constants, `conj`,
//! `Re`, `Im`, `abs2`, sums, differences, products, and integer powers. The
//! tree is the single source of truth for a domain's defining function: the
//! evaluator, the Wirtinger derivatives, and the exact polynomial expansion
//! all consume it directly.
//!
//! Constructors fold constants and drop obvious identities (`0 + x`, `1 * x`,
//! `x^1`), which keeps iterated derivatives from ballooning. Folding preserves
//! exactness: combining two exact rational constants yields an exact constant,
//! anything touching a floating constant stays floating.

mod parse;
mod poly;
mod wirtinger;

pub use parse::parse;
pub use poly::{to_poly, Monomial, PolyExpr};
pub use wirtinger::wirtinger_derive;

use crate::error::{Error, Result};
use crate::rational::GRat;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// A complex constant. `exact` is present when the constant was written as a
/// rational pair; floating constants evaluate but refuse exact expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstVal {
    pub value: Complex64,
    pub exact: Option<GRat>,
}

impl ConstVal {
    pub fn from_grat(q: GRat) -> Self {
        ConstVal { value: q.to_c64(), exact: Some(q) }
    }

    pub fn from_f64(x: f64) -> Self {
        ConstVal { value: Complex64::new(x, 0.0), exact: None }
    }

    pub fn from_c64(value: Complex64) -> Self {
        ConstVal { value, exact: None }
    }

    fn combine(a: &ConstVal, b: &ConstVal, value: Complex64, exact: impl FnOnce(&GRat, &GRat) -> GRat) -> ConstVal {
        match (&a.exact, &b.exact) {
            (Some(x), Some(y)) => ConstVal::from_grat(exact(x, y)),
            _ => ConstVal { value, exact: None },
        }
    }
}

/// Expression node. Variables are stored zero-based; `Var(0)` is `z1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(ConstVal),
    Var(usize),
    Conj(Arc<Expr>),
    Re(Arc<Expr>),
    Im(Arc<Expr>),
    Abs2(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, u32),
}

impl Expr {
    pub fn constant(q: GRat) -> Expr {
        Expr::Const(ConstVal::from_grat(q))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(GRat::from_int(n))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::constant(GRat::from_ratio(num, den))
    }

    pub fn var(index_zero_based: usize) -> Expr {
        Expr::Var(index_zero_based)
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.value == Complex64::new(0.0, 0.0)
            && c.exact.as_ref().map_or(true, |q| q.is_zero()))
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.value == Complex64::new(1.0, 0.0))
    }

    /// Largest variable index used, if any (zero-based).
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(j) => Some(*j),
            Expr::Conj(u) | Expr::Re(u) | Expr::Im(u) | Expr::Abs2(u) | Expr::Pow(u, _) => u.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            },
        }
    }

    /// Evaluate at a point of ℂⁿ.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            Expr::Const(c) => Ok(c.value),
            Expr::Var(j) => z.get(*j).copied().ok_or(Error::VariableOutOfRange {
                index: *j + 1,
                dim: z.len(),
            }),
            Expr::Conj(u) => Ok(u.eval(z)?.conj()),
            Expr::Re(u) => Ok(Complex64::new(u.eval(z)?.re, 0.0)),
            Expr::Im(u) => Ok(Complex64::new(u.eval(z)?.im, 0.0)),
            Expr::Abs2(u) => Ok(Complex64::new(u.eval(z)?.norm_sqr(), 0.0)),
            Expr::Add(a, b) => Ok(a.eval(z)? + b.eval(z)?),
            Expr::Sub(a, b) => Ok(a.eval(z)? - b.eval(z)?),
            Expr::Mul(a, b) => Ok(a.eval(z)? * b.eval(z)?),
            Expr::Pow(u, k) => Ok(u.eval(z)?.powu(*k)),
        }
    }

    /// Evaluate an expression known to be real-valued; returns the real part.
    pub fn eval_real(&self, z: &[Complex64]) -> Result<f64> {
        Ok(self.eval(z)?.re)
    }

    /// Replace each variable `z_j` by `subs[j]`. Used for affine coordinate
    /// changes; the substituted expressions are spliced in unsimplified.
    pub fn substitute(&self, subs: &[Expr]) -> Result<Expr> {
        Ok(match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Var(j) => subs
                .get(*j)
                .cloned()
                .ok_or(Error::VariableOutOfRange { index: *j + 1, dim: subs.len() })?,
            Expr::Conj(u) => conj(u.substitute(subs)?),
            Expr::Re(u) => re_part(u.substitute(subs)?),
            Expr::Im(u) => im_part(u.substitute(subs)?),
            Expr::Abs2(u) => abs2(u.substitute(subs)?),
            Expr::Add(a, b) => add(a.substitute(subs)?, b.substitute(subs)?),
            Expr::Sub(a, b) => sub(a.substitute(subs)?, b.substitute(subs)?),
            Expr::Mul(a, b) => mul(a.substitute(subs)?, b.substitute(subs)?),
            Expr::Pow(u, k) => pow(u.substitute(subs)?, *k),
        })
    }

    /// Render the tree as source text that parses back to a structurally
    /// identical tree.
    pub fn unparse(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out
    }

    // prec: 1 = additive context, 2 = multiplicative, 3 = power base.
    fn write(&self, out: &mut String, parent_prec: u8) {
        let prec = self.precedence();
        let need = prec < parent_prec;
        if need {
            out.push('(');
        }
        match self {
            Expr::Const(c) => write_const(c, out),
            Expr::Var(j) => {
                out.push('z');
                out.push_str(&(j + 1).to_string());
            }
            Expr::Conj(u) => write_call("conj", u, out),
            Expr::Re(u) => write_call("Re", u, out),
            Expr::Im(u) => write_call("Im", u, out),
            Expr::Abs2(u) => write_call("abs2", u, out),
            Expr::Add(a, b) => {
                a.write(out, 1);
                out.push_str(" + ");
                // Right operand of an additive chain needs parens to preserve
                // left-associated structure.
                b.write(out, 2);
            }
            Expr::Sub(a, b) => {
                a.write(out, 1);
                out.push_str(" - ");
                b.write(out, 2);
            }
            Expr::Mul(a, b) => {
                a.write(out, 2);
                out.push('*');
                b.write(out, 3);
            }
            Expr::Pow(u, k) => {
                u.write(out, 4);
                out.push('^');
                out.push_str(&k.to_string());
            }
        }
        if need {
            out.push(')');
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }
}

fn write_call(name: &str, inner: &Expr, out: &mut String) {
    out.push_str(name);
    out.push('(');
    inner.write(out, 0);
    out.push(')');
}

fn write_const(c: &ConstVal, out: &mut String) {
    use num_traits::Zero;
    match &c.exact {
        Some(q) => {
            if q.im.is_zero() {
                out.push_str(&q.re.to_string());
            } else if q.re.is_zero() {
                out.push_str(&q.im.to_string());
                out.push('i');
            } else {
                use num_traits::Signed;
                let im_abs = q.im.abs();
                let sign = if q.im.is_negative() { '-' } else { '+' };
                out.push_str(&format!("({}{}{}i)", q.re, sign, im_abs));
            }
        }
        None => {
            let v = c.value;
            if v.im == 0.0 {
                out.push_str(&float_literal(v.re));
            } else if v.re == 0.0 {
                out.push_str(&float_literal(v.im));
                out.push('i');
            } else {
                let sign = if v.im < 0.0 { '-' } else { '+' };
                out.push_str(&format!("({}{}{}i)", float_literal(v.re), sign, float_literal(v.im.abs())));
            }
        }
    }
}

/// Shortest round-trip text for a floating constant, marked so it re-parses
/// as floating (never as an exact integer).
fn float_literal(x: f64) -> String {
    let s = format!("{}", x);
    if s.contains('.') || s.contains('e') || s.contains('E') {
        s
    } else {
        format!("{}.0", s)
    }
}

// --- smart constructors -----------------------------------------------------

pub fn add(a: Expr, b: Expr) -> Expr {
    if a.is_zero_const() {
        return b;
    }
    if b.is_zero_const() {
        return a;
    }
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        return Expr::Const(ConstVal::combine(x, y, x.value + y.value, |p, q| p.clone() + q.clone()));
    }
    Expr::Add(Arc::new(a), Arc::new(b))
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_zero_const() {
        return a;
    }
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        return Expr::Const(ConstVal::combine(x, y, x.value - y.value, |p, q| p.clone() - q.clone()));
    }
    Expr::Sub(Arc::new(a), Arc::new(b))
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_zero_const() || b.is_zero_const() {
        return Expr::int(0);
    }
    if a.is_one_const() {
        return b;
    }
    if b.is_one_const() {
        return a;
    }
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        return Expr::Const(ConstVal::combine(x, y, x.value * y.value, |p, q| p * q));
    }
    Expr::Mul(Arc::new(a), Arc::new(b))
}

pub fn pow(u: Expr, k: u32) -> Expr {
    match k {
        0 => Expr::int(1),
        1 => u,
        _ => {
            if let Expr::Const(c) = &u {
                let value = c.value.powu(k);
                let exact = c.exact.as_ref().map(|q| {
                    let mut acc = GRat::one();
                    for _ in 0..k {
                        acc = &acc * q;
                    }
                    acc
                });
                return Expr::Const(ConstVal { value, exact });
            }
            Expr::Pow(Arc::new(u), k)
        }
    }
}

pub fn conj(u: Expr) -> Expr {
    match u {
        Expr::Const(c) => Expr::Const(ConstVal {
            value: c.value.conj(),
            exact: c.exact.map(|q| q.conj()),
        }),
        // conj is an involution and fixes real-valued nodes.
        Expr::Conj(inner) => inner.as_ref().clone(),
        e @ (Expr::Re(_) | Expr::Im(_) | Expr::Abs2(_)) => e,
        e => Expr::Conj(Arc::new(e)),
    }
}

pub fn re_part(u: Expr) -> Expr {
    if let Expr::Const(c) = &u {
        return Expr::Const(ConstVal {
            value: Complex64::new(c.value.re, 0.0),
            exact: c.exact.as_ref().map(|q| GRat::new(q.re.clone(), num_traits::Zero::zero())),
        });
    }
    Expr::Re(Arc::new(u))
}

pub fn im_part(u: Expr) -> Expr {
    if let Expr::Const(c) = &u {
        return Expr::Const(ConstVal {
            value: Complex64::new(c.value.im, 0.0),
            exact: c.exact.as_ref().map(|q| GRat::new(q.im.clone(), num_traits::Zero::zero())),
        });
    }
    Expr::Im(Arc::new(u))
}

pub fn abs2(u: Expr) -> Expr {
    if let Expr::Const(c) = &u {
        return Expr::Const(ConstVal {
            value: Complex64::new(c.value.norm_sqr(), 0.0),
            exact: c.exact.as_ref().map(|q| {
                let conj = q.conj();
                q * &conj
            }),
        });
    }
    Expr::Abs2(Arc::new(u))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.unparse())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_model_sources() {
        let herbort = parse("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3).unwrap();
        let z = vec![c(0.1, 0.2), c(-0.3, 0.1), c(0.05, -0.4)];
        let z1 = z[0];
        let z2 = z[1];
        let expected = z[2].re + z1.powu(3).norm_sqr() + (z1 * z2).norm_sqr() + z2.powu(3).norm_sqr();
        let got = herbort.eval(&z).unwrap();
        assert!((got.re - expected).abs() <= 1e-15 * (1.0 + expected.abs()));
        assert_eq!(got.im, 0.0);
    }

    #[test]
    fn eval_rejects_out_of_range_variable() {
        let e = parse("Re(z2)", 2).unwrap();
        let err = e.eval(&[c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::VariableOutOfRange { .. }));
    }

    #[test]
    fn unparse_round_trips_model_sources() {
        for (src, n) in [
            ("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3),
            ("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3),
            ("Re(z2)", 2),
            ("abs2(z1) + abs2(z2) - 1", 2),
            ("Re(z2) + abs2(z1^2)", 2),
        ] {
            let e = parse(src, n).unwrap();
            let text = e.unparse();
            let back = parse(&text, n).unwrap();
            assert_eq!(e, back, "round trip failed for {src} -> {text}");
        }
    }

    #[test]
    fn mixed_complex_constants_round_trip_as_single_nodes() {
        let e = parse("(1/2+3/4i)*z1 + (-2-1/3i)", 2).unwrap();
        let text = e.unparse();
        assert_eq!(parse(&text, 2).unwrap(), e);
        // The parenthesized pair must lex as one constant, not a sum.
        match &e {
            Expr::Add(lhs, _) => match lhs.as_ref() {
                Expr::Mul(c0, _) => assert!(matches!(c0.as_ref(), Expr::Const(_))),
                other => panic!("expected product, got {other:?}"),
            },
            other => panic!("expected sum, got {other:?}"),
        }
    }

    #[test]
    fn floating_constants_stay_floating_through_round_trip() {
        let e = parse("0.5*z1 + 2.0", 2).unwrap();
        let text = e.unparse();
        let back = parse(&text, 2).unwrap();
        assert_eq!(e, back);
        fn first_const_exactness(e: &Expr) -> Option<bool> {
            match e {
                Expr::Const(c) => Some(c.exact.is_some()),
                Expr::Mul(a, b) | Expr::Add(a, b) | Expr::Sub(a, b) => {
                    first_const_exactness(a).or_else(|| first_const_exactness(b))
                }
                Expr::Conj(u) | Expr::Re(u) | Expr::Im(u) | Expr::Abs2(u) | Expr::Pow(u, _) => {
                    first_const_exactness(u)
                }
                _ => None,
            }
        }
        assert_eq!(first_const_exactness(&e), Some(false));
    }

    #[test]
    fn substitution_applies_affine_maps() {
        // r(z) = Re(z2); substitute z2 = z2 + 1 (translation).
        let e = parse("Re(z2)", 2).unwrap();
        let subs = vec![Expr::var(0), add(Expr::var(1), Expr::int(1))];
        let shifted = e.substitute(&subs).unwrap();
        let v = shifted.eval(&[c(0.0, 0.0), c(0.25, 0.5)]).unwrap();
        assert_eq!(v.re, 1.25);
    }
}
