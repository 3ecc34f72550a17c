//! Wirtinger differentiation on expression trees.
//!
//! With z = x + iy, the two first-order operators are
//! d/dz = (d/dx - i d/dy)/2 and d/dzbar = (d/dx + i d/dy)/2. The rules below
//! follow from that definition; the only ones worth restating are
//!
//! * d/dz conj(u) = conj(d/dzbar u)   (and symmetrically),
//! * Re u = (u + conj u)/2,  Im u = (u - conj u)/(2i),
//! * abs2 u = u * conj u.
//!
//! Derivatives are returned as ordinary expressions, so they can be evaluated,
//! differentiated again, or expanded exactly like any other tree.

use super::{add, conj, mul, pow, sub, Expr};
use crate::rational::GRat;

/// Differentiate `e` with respect to `z_{j+1}` (`conjugated = false`) or
/// `zbar_{j+1}` (`conjugated = true`). `j` is zero-based.
pub fn wirtinger_derive(e: &Expr, j: usize, conjugated: bool) -> Expr {
    match e {
        Expr::Const(_) => Expr::int(0),
        Expr::Var(k) => {
            if !conjugated && *k == j {
                Expr::int(1)
            } else {
                Expr::int(0)
            }
        }
        Expr::Conj(u) => conj(wirtinger_derive(u, j, !conjugated)),
        Expr::Re(u) => {
            let du = wirtinger_derive(u, j, conjugated);
            let dconj = conj(wirtinger_derive(u, j, !conjugated));
            mul(Expr::ratio(1, 2), add(du, dconj))
        }
        Expr::Im(u) => {
            let du = wirtinger_derive(u, j, conjugated);
            let dconj = conj(wirtinger_derive(u, j, !conjugated));
            // 1/(2i) = -i/2
            mul(Expr::constant(GRat::from_parts(0, 1, -1, 2)), sub(du, dconj))
        }
        Expr::Abs2(u) => {
            let du = wirtinger_derive(u, j, conjugated);
            let dconj = conj(wirtinger_derive(u, j, !conjugated));
            add(
                mul(conj(u.as_ref().clone()), du),
                mul(u.as_ref().clone(), dconj),
            )
        }
        Expr::Add(a, b) => add(wirtinger_derive(a, j, conjugated), wirtinger_derive(b, j, conjugated)),
        Expr::Sub(a, b) => sub(wirtinger_derive(a, j, conjugated), wirtinger_derive(b, j, conjugated)),
        Expr::Mul(a, b) => add(
            mul(wirtinger_derive(a, j, conjugated), b.as_ref().clone()),
            mul(a.as_ref().clone(), wirtinger_derive(b, j, conjugated)),
        ),
        Expr::Pow(u, k) => {
            if *k == 0 {
                return Expr::int(0);
            }
            mul(
                mul(Expr::int(*k as i64), pow(u.as_ref().clone(), k - 1)),
                wirtinger_derive(u, j, conjugated),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect()
    }

    #[test]
    fn half_space_normal_derivative_is_one_half() {
        let e = parse("Re(z2)", 2).unwrap();
        let d = wirtinger_derive(&e, 1, false);
        let z = [Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4)];
        assert_eq!(d.eval(&z).unwrap(), Complex64::new(0.5, 0.0));
        let dbar = wirtinger_derive(&e, 1, true);
        assert_eq!(dbar.eval(&z).unwrap(), Complex64::new(0.5, 0.0));
        let d1 = wirtinger_derive(&e, 0, false);
        assert_eq!(d1.eval(&z).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn holomorphic_parts_have_vanishing_conjugate_derivative() {
        let e = parse("z1^3 + (1/2+1/3i)*z2", 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let z = rand_point(&mut rng, 2);
            for j in 0..2 {
                let v = wirtinger_derive(&e, j, true).eval(&z).unwrap();
                assert_eq!(v, Complex64::new(0.0, 0.0));
            }
        }
    }

    /// For real-valued e, d/dzbar e = conj(d/dz e).
    #[test]
    fn conjugate_symmetry_on_real_valued_expressions() {
        let sources = [
            ("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3usize),
            ("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3),
            ("abs2(z1) + abs2(z2) - 1", 2),
            ("Im(z1*z2) + Re(z2^2)", 2),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (src, n) in sources {
            let e = parse(src, n).unwrap();
            for j in 0..n {
                let dz = wirtinger_derive(&e, j, false);
                let dzbar = wirtinger_derive(&e, j, true);
                for _ in 0..200 {
                    let z = rand_point(&mut rng, n);
                    let a = dz.eval(&z).unwrap();
                    let b = dzbar.eval(&z).unwrap();
                    let diff = (b - a.conj()).norm();
                    assert!(diff <= 1e-12 * (1.0 + a.norm()), "{src} d{j}: {diff:e}");
                }
            }
        }
    }

    /// Central difference along the real axis of coordinate j equals
    /// (d/dz_j + d/dzbar_j) e.
    #[test]
    fn finite_difference_cross_check() {
        let sources = [
            ("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3usize),
            ("Re(z3) + abs2(z1*z1 - z2*z2*z2)", 3),
            ("abs2(z1) + abs2(z2) - 1", 2),
        ];
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (src, n) in sources {
            let e = parse(src, n).unwrap();
            for j in 0..n {
                let dz = wirtinger_derive(&e, j, false);
                let dzbar = wirtinger_derive(&e, j, true);
                for _ in 0..40 {
                    let z = rand_point(&mut rng, n);
                    let mut zp = z.clone();
                    zp[j] += h;
                    let mut zm = z.clone();
                    zm[j] -= h;
                    let fd = (e.eval(&zp).unwrap() - e.eval(&zm).unwrap()) / (2.0 * h);
                    let sym = dz.eval(&z).unwrap() + dzbar.eval(&z).unwrap();
                    assert!((fd - sym).norm() <= 1e-6, "{src} d{j}: {:e}", (fd - sym).norm());
                }
            }
        }
    }

    #[test]
    fn second_derivatives_compose() {
        // d^2/dz1 dzbar1 of |z1|^2 is 1.
        let e = parse("abs2(z1)", 2).unwrap();
        let d = wirtinger_derive(&wirtinger_derive(&e, 0, true), 0, false);
        let z = [Complex64::new(0.3, 0.7), Complex64::new(0.0, 0.0)];
        assert_eq!(d.eval(&z).unwrap(), Complex64::new(1.0, 0.0));
    }
}
