//! Exact polynomial form of defining functions.
//!
//! A [`PolyExpr`] is a polynomial in `z1..zn` and their conjugates with
//! Gaussian rational coefficients, stored as a sorted map from exponent
//! vectors. Expansion is exact and only exists when every constant in the
//! source expression is rational; arithmetic on the expanded form never
//! rounds. Contact orders, tangency corrections, and the fast disc
//! restrictions all read coefficients off this form.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::Expr;
use crate::error::{Error, Result};
use crate::rational::GRat;

/// Exponent vector of length `2n`: the first `n` entries are powers of `z_j`,
/// the last `n` powers of `zbar_j`. Ordering is lexicographic, which fixes the
/// term order everywhere a polynomial is iterated or printed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial(Box<[u16]>);

impl Monomial {
    pub fn unit(n: usize) -> Self {
        Monomial(vec![0u16; 2 * n].into_boxed_slice())
    }

    pub fn variable(n: usize, j: usize, conjugated: bool) -> Self {
        let mut exps = vec![0u16; 2 * n];
        exps[if conjugated { n + j } else { j }] = 1;
        Monomial(exps.into_boxed_slice())
    }

    pub fn from_exponents(z: &[u16], zbar: &[u16]) -> Self {
        let mut exps = Vec::with_capacity(z.len() + zbar.len());
        exps.extend_from_slice(z);
        exps.extend_from_slice(zbar);
        Monomial(exps.into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn z_exponent(&self, j: usize) -> u16 {
        self.0[j]
    }

    pub fn zbar_exponent(&self, j: usize) -> u16 {
        self.0[self.0.len() / 2 + j]
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn product(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                .collect(),
        )
    }

    /// Swap the z and zbar halves; the monomial of the conjugate term.
    fn conj_swap(&self) -> Monomial {
        let n = self.0.len() / 2;
        let mut exps = Vec::with_capacity(2 * n);
        exps.extend_from_slice(&self.0[n..]);
        exps.extend_from_slice(&self.0[..n]);
        Monomial(exps.into_boxed_slice())
    }
}

/// Polynomial in `z1..zn, zbar1..zbarn` over the Gaussian rationals. Zero
/// coefficients are never stored, so structural equality is semantic equality.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyExpr {
    n: usize,
    terms: BTreeMap<Monomial, GRat>,
}

impl PolyExpr {
    pub fn zero(n: usize) -> Self {
        PolyExpr { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: GRat) -> Self {
        let mut p = PolyExpr::zero(n);
        if !c.is_zero() {
            p.terms.insert(Monomial::unit(n), c);
        }
        p
    }

    pub fn variable(n: usize, j: usize, conjugated: bool) -> Self {
        let mut p = PolyExpr::zero(n);
        p.terms.insert(Monomial::variable(n, j, conjugated), GRat::one());
        p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GRat)> {
        self.terms.iter()
    }

    /// Coefficient of the monomial with these exponents; zero if absent.
    pub fn coefficient(&self, z: &[u16], zbar: &[u16]) -> GRat {
        self.terms
            .get(&Monomial::from_exponents(z, zbar))
            .cloned()
            .unwrap_or_else(GRat::zero)
    }

    fn insert(&mut self, m: Monomial, c: GRat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &PolyExpr) -> PolyExpr {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &PolyExpr) -> PolyExpr {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> PolyExpr {
        PolyExpr {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, factor: &GRat) -> PolyExpr {
        if factor.is_zero() {
            return PolyExpr::zero(self.n);
        }
        PolyExpr {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), factor * c)).collect(),
        }
    }

    pub fn mul(&self, other: &PolyExpr) -> PolyExpr {
        debug_assert_eq!(self.n, other.n);
        let mut out = PolyExpr::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(ma.product(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> PolyExpr {
        let mut result = PolyExpr::constant(self.n, GRat::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Complex conjugate: swap z and zbar exponents, conjugate coefficients.
    pub fn conj(&self) -> PolyExpr {
        PolyExpr {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.conj_swap(), c.conj())).collect(),
        }
    }

    /// Partial derivative with respect to `z_{j+1}` (or `zbar_{j+1}`).
    pub fn derivative(&self, j: usize, conjugated: bool) -> PolyExpr {
        let idx = if conjugated { self.n + j } else { j };
        let mut out = PolyExpr::zero(self.n);
        for (m, c) in &self.terms {
            let e = m.0[idx];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.to_vec();
            exps[idx] = e - 1;
            out.insert(Monomial(exps.into_boxed_slice()), c * &GRat::from_int(e as i64));
        }
        out
    }

    pub fn min_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).min()
    }

    pub fn max_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// Evaluate in floating point. Conjugate powers come from the conjugates
    /// of the supplied coordinates.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.len() });
        }
        let tables = self.power_tables(z);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut term = c.to_c64();
            for (idx, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term *= tables[idx][e as usize];
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    fn power_tables(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut max_exp = vec![0u16; 2 * self.n];
        for m in self.terms.keys() {
            for (idx, &e) in m.0.iter().enumerate() {
                max_exp[idx] = max_exp[idx].max(e);
            }
        }
        (0..2 * self.n)
            .map(|idx| {
                let base = if idx < self.n { z[idx] } else { z[idx - self.n].conj() };
                let mut powers = Vec::with_capacity(max_exp[idx] as usize + 1);
                powers.push(Complex64::new(1.0, 0.0));
                for _ in 0..max_exp[idx] {
                    let last = *powers.last().expect("nonempty");
                    powers.push(last * base);
                }
                powers
            })
            .collect()
    }

    /// Evaluate exactly at a Gaussian rational point.
    pub fn eval_exact(&self, z: &[GRat]) -> Result<GRat> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.len() });
        }
        let mut acc = GRat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (j, zj) in z.iter().enumerate() {
                for _ in 0..m.0[j] {
                    term = &term * zj;
                }
                let conj = zj.conj();
                for _ in 0..m.0[self.n + j] {
                    term = &term * &conj;
                }
            }
            acc += term;
        }
        Ok(acc)
    }
}

/// Expand an expression into polynomial form. Fails with
/// [`Error::NonRationalConstant`] if any constant lacks an exact value.
pub fn to_poly(e: &Expr, n: usize) -> Result<PolyExpr> {
    match e {
        Expr::Const(c) => {
            let q = c.exact.clone().ok_or(Error::NonRationalConstant)?;
            Ok(PolyExpr::constant(n, q))
        }
        Expr::Var(j) => {
            if *j >= n {
                return Err(Error::VariableOutOfRange { index: *j + 1, dim: n });
            }
            Ok(PolyExpr::variable(n, *j, false))
        }
        Expr::Conj(u) => Ok(to_poly(u, n)?.conj()),
        Expr::Re(u) => {
            let p = to_poly(u, n)?;
            Ok(p.add(&p.conj()).scale(&GRat::from_ratio(1, 2)))
        }
        Expr::Im(u) => {
            let p = to_poly(u, n)?;
            // 1/(2i) = -i/2
            Ok(p.sub(&p.conj()).scale(&GRat::from_parts(0, 1, -1, 2)))
        }
        Expr::Abs2(u) => {
            let p = to_poly(u, n)?;
            Ok(p.mul(&p.conj()))
        }
        Expr::Add(a, b) => Ok(to_poly(a, n)?.add(&to_poly(b, n)?)),
        Expr::Sub(a, b) => Ok(to_poly(a, n)?.sub(&to_poly(b, n)?)),
        Expr::Mul(a, b) => Ok(to_poly(a, n)?.mul(&to_poly(b, n)?)),
        Expr::Pow(u, k) => Ok(to_poly(u, n)?.pow(*k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, wirtinger_derive};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn half() -> GRat {
        GRat::from_ratio(1, 2)
    }

    #[test]
    fn hexic_model_expands_to_five_monomials() {
        let e = parse("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3).unwrap();
        let p = to_poly(&e, 3).unwrap();
        assert_eq!(p.num_terms(), 5);
        assert_eq!(p.coefficient(&[0, 0, 1], &[0, 0, 0]), half());
        assert_eq!(p.coefficient(&[0, 0, 0], &[0, 0, 1]), half());
        assert_eq!(p.coefficient(&[3, 0, 0], &[3, 0, 0]), GRat::one());
        assert_eq!(p.coefficient(&[1, 1, 0], &[1, 1, 0]), GRat::one());
        assert_eq!(p.coefficient(&[0, 3, 0], &[0, 3, 0]), GRat::one());
    }

    #[test]
    fn cusp_model_expands_to_six_monomials() {
        let e = parse("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3).unwrap();
        let p = to_poly(&e, 3).unwrap();
        assert_eq!(p.num_terms(), 6);
        assert_eq!(p.coefficient(&[0, 0, 1], &[0, 0, 0]), half());
        assert_eq!(p.coefficient(&[0, 0, 0], &[0, 0, 1]), half());
        assert_eq!(p.coefficient(&[2, 0, 0], &[2, 0, 0]), GRat::one());
        assert_eq!(p.coefficient(&[2, 0, 0], &[0, 3, 0]), -GRat::one());
        assert_eq!(p.coefficient(&[0, 3, 0], &[2, 0, 0]), -GRat::one());
        assert_eq!(p.coefficient(&[0, 3, 0], &[0, 3, 0]), GRat::one());
    }

    #[test]
    fn sphere_expands_to_three_monomials() {
        let e = parse("abs2(z1) + abs2(z2) - 1", 2).unwrap();
        let p = to_poly(&e, 2).unwrap();
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.coefficient(&[1, 0], &[1, 0]), GRat::one());
        assert_eq!(p.coefficient(&[0, 1], &[0, 1]), GRat::one());
        assert_eq!(p.coefficient(&[0, 0], &[0, 0]), -GRat::one());
    }

    #[test]
    fn expansion_matches_tree_evaluation() {
        let sources = [
            ("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3usize),
            ("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3),
            ("abs2(z1) + abs2(z2) - 1", 2),
            ("Re(z2) + abs2(z1^2)", 2),
            ("Im(z1*z2) + Re(z2^2) - 1/3", 2),
            ("(1/2+3/4i)*z1^2*conj(z2) + abs2(z1 - z2)^2", 2),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (src, n) in sources {
            let e = parse(src, n).unwrap();
            let p = to_poly(&e, n).unwrap();
            for _ in 0..100 {
                let z: Vec<_> = (0..n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let a = e.eval(&z).unwrap();
                let b = p.eval(&z).unwrap();
                assert!(
                    (a - b).norm() <= 1e-12 * (1.0 + a.norm()),
                    "{src}: tree {a} vs poly {b}"
                );
            }
        }
    }

    #[test]
    fn real_valued_sources_are_self_conjugate() {
        for (src, n) in [
            ("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3usize),
            ("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3),
            ("abs2(z1) + abs2(z2) - 1", 2),
        ] {
            let p = to_poly(&parse(src, n).unwrap(), n).unwrap();
            assert_eq!(p, p.conj(), "{src}");
        }
    }

    #[test]
    fn derivative_agrees_with_tree_differentiation() {
        let sources = [
            ("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3usize),
            ("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3),
            ("abs2(z1) + abs2(z2) - 1", 2),
        ];
        for (src, n) in sources {
            let e = parse(src, n).unwrap();
            let p = to_poly(&e, n).unwrap();
            for j in 0..n {
                for conjugated in [false, true] {
                    let direct = p.derivative(j, conjugated);
                    let via_tree = to_poly(&wirtinger_derive(&e, j, conjugated), n).unwrap();
                    assert_eq!(direct, via_tree, "{src} d{j} conj={conjugated}");
                }
            }
        }
    }

    #[test]
    fn floating_constants_refuse_exact_expansion() {
        let e = parse("0.5*z1 + Re(z2)", 2).unwrap();
        assert!(matches!(to_poly(&e, 2), Err(Error::NonRationalConstant)));
    }

    #[test]
    fn exact_evaluation_at_rational_points() {
        let e = parse("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3).unwrap();
        let p = to_poly(&e, 3).unwrap();
        // z = (1/2, 1/3 i, -1/4): |z1^2 - z2^3|^2 = |1/4 + i/27|^2.
        let z = vec![
            GRat::from_ratio(1, 2),
            GRat::from_parts(0, 1, 1, 3),
            GRat::from_ratio(-1, 4),
        ];
        let got = p.eval_exact(&z).unwrap();
        let expected = GRat::from_ratio(-1, 4)
            + (GRat::from_ratio(1, 4) + GRat::from_parts(0, 1, 1, 27))
                * (GRat::from_ratio(1, 4) - GRat::from_parts(0, 1, 1, 27));
        assert_eq!(got, expected);
    }

    #[test]
    fn degree_bounds() {
        let p = to_poly(&parse("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3).unwrap(), 3).unwrap();
        assert_eq!(p.min_total_degree(), Some(1));
        assert_eq!(p.max_total_degree(), Some(6));
        assert!(PolyExpr::zero(2).min_total_degree().is_none());
    }
}
