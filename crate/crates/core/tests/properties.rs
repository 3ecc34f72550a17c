//! Property-based invariant checks across the library: algebraic identities
//! of the expression layer, gauge symmetries of the disc functionals, and
//! parametrization invariance of the exact contact oracle.

use num_complex::Complex64;
use proptest::prelude::*;

use tanlip_core::config::RunConfig;
use tanlip_core::contact::{self, HoloCurve};
use tanlip_core::disc::{self, DiscContext};
use tanlip_core::domain::{builtins, find_domain, Domain};
use tanlip_core::expr::wirtinger_derive;
use tanlip_core::rational::GRat;
use tanlip_core::report::fmt_sig17;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A random point inside the domain's coordinate box (not necessarily inside
/// the domain itself: the algebraic identities hold everywhere).
fn box_point(d: &Domain, coords: &[f64]) -> Vec<Complex64> {
    (0..d.dimension)
        .map(|j| {
            let (rlo, rhi) = d.re_bounds(j);
            let (ilo, ihi) = d.im_bounds(j);
            c(
                rlo + (rhi - rlo) * coords[2 * j],
                ilo + (ihi - ilo) * coords[2 * j + 1],
            )
        })
        .collect()
}

fn coord_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, 2 * n)
}

/// Tangent direction in the z' plane for the graph-form builtins (dimension
/// n: last coordinate zero keeps it in the complex tangent space at 0).
fn tangent_from(parts: &[f64], n: usize) -> Option<Vec<Complex64>> {
    let mut v: Vec<Complex64> = (0..n - 1).map(|j| c(parts[2 * j], parts[2 * j + 1])).collect();
    v.push(c(0.0, 0.0));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-3 {
        return None;
    }
    Some(v.iter().map(|z| z / norm).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The tree evaluator and the expanded polynomial agree wherever the
    /// exact expansion exists.
    #[test]
    fn poly_expansion_matches_tree_eval(
        idx in 0usize..6,
        coords in coord_strategy(3),
    ) {
        let names = ["halfspace", "ball", "herbort", "dangelo", "egg4", "egg6"];
        let d = find_domain(&[], names[idx]).unwrap();
        let poly = d.poly.clone().expect("builtins expand exactly");
        let z = box_point(&d, &coords);
        let tree = d.defining.eval(&z).unwrap();
        let expanded = poly.eval(&z).unwrap();
        prop_assert!(
            (tree - expanded).norm() <= 1e-12 * (1.0 + tree.norm()),
            "{} vs {}", tree, expanded
        );
    }

    /// Defining functions are real-valued everywhere.
    #[test]
    fn defining_functions_are_real(
        idx in 0usize..6,
        coords in coord_strategy(3),
    ) {
        let all = builtins();
        let d = &all[idx % all.len()];
        let z = box_point(d, &coords);
        let v = d.defining.eval(&z).unwrap();
        prop_assert!(v.im.abs() <= 1e-13 * (1.0 + v.re.abs()), "Im r = {}", v.im);
    }

    /// For real-valued r, the two Wirtinger derivatives are conjugates.
    #[test]
    fn wirtinger_derivatives_pair_conjugately(
        idx in 0usize..6,
        j in 0usize..3,
        coords in coord_strategy(3),
    ) {
        let all = builtins();
        let d = &all[idx % all.len()];
        let j = j % d.dimension;
        let z = box_point(d, &coords);
        let dz = wirtinger_derive(&d.defining, j, false).eval(&z).unwrap();
        let dzbar = wirtinger_derive(&d.defining, j, true).eval(&z).unwrap();
        prop_assert!(
            (dz.conj() - dzbar).norm() <= 1e-12 * (1.0 + dz.norm()),
            "dz = {dz}, dzbar = {dzbar}"
        );
    }

    /// S grows with the disc radius.
    #[test]
    fn gauge_is_monotone_in_radius(
        parts in proptest::collection::vec(-1.0f64..1.0, 4),
        t_lo in 0.05f64..0.6,
        t_ratio in 0.1f64..0.95,
    ) {
        let d = find_domain(&[], "herbort").unwrap();
        let v = match tangent_from(&parts, 3) {
            Some(v) => v,
            None => return Ok(()),
        };
        let ctx = DiscContext::new(&d, &d.base_point().to_vec(), &v, &RunConfig::default()).unwrap();
        let t2 = t_lo * ctx.t_max;
        let t1 = t2 * t_ratio;
        let s1 = disc::s_of_t(&ctx, t1).unwrap();
        let s2 = disc::s_of_t(&ctx, t2).unwrap();
        prop_assert!(s1 <= s2 * (1.0 + 1e-9) + 1e-18, "S({t1}) = {s1} > S({t2}) = {s2}");
    }

    /// S only sees the direction up to a unit phase.
    #[test]
    fn gauge_ignores_direction_phase(
        parts in proptest::collection::vec(-1.0f64..1.0, 4),
        theta in 0.0f64..std::f64::consts::TAU,
        t_frac in 0.05f64..0.8,
    ) {
        let d = find_domain(&[], "herbort").unwrap();
        let v = match tangent_from(&parts, 3) {
            Some(v) => v,
            None => return Ok(()),
        };
        let phase = Complex64::from_polar(1.0, theta);
        let v_rot: Vec<Complex64> = v.iter().map(|z| z * phase).collect();
        let base = d.base_point().to_vec();
        let cfg = RunConfig::default();
        let ctx = DiscContext::new(&d, &base, &v, &cfg).unwrap();
        let ctx_rot = DiscContext::new(&d, &base, &v_rot, &cfg).unwrap();
        let t = t_frac * ctx.t_max.min(ctx_rot.t_max);
        let s = disc::s_of_t(&ctx, t).unwrap();
        let s_rot = disc::s_of_t(&ctx_rot, t).unwrap();
        prop_assert!(
            (s - s_rot).abs() <= 1e-8 * s.max(s_rot) + 1e-16,
            "S = {s}, rotated = {s_rot}"
        );
    }

    /// Exact line type is invariant under rational rescaling of the
    /// direction; the leading coefficient scales accordingly.
    #[test]
    fn line_type_scale_invariance(
        num in 1i64..40,
        den in 1i64..40,
        negate in proptest::bool::ANY,
    ) {
        let d = find_domain(&[], "herbort").unwrap();
        let poly = d.poly.clone().unwrap();
        let base = vec![GRat::zero(), GRat::zero(), GRat::zero()];
        let dir = vec![GRat::one(), GRat::one(), GRat::zero()];
        let lambda = {
            let q = GRat::from_ratio(if negate { -num } else { num }, den);
            q
        };
        let scaled: Vec<GRat> = dir.iter().map(|g| g.clone() * lambda.clone()).collect();
        let plain = contact::line_type(&poly, &base, &dir).unwrap();
        let rescaled = contact::line_type(&poly, &base, &scaled).unwrap();
        prop_assert_eq!(plain.order, rescaled.order);
        prop_assert_eq!(plain.ratio, rescaled.ratio);
        prop_assert_eq!(plain.leading, rescaled.leading);
    }

    /// Contact ratios do not depend on the curve's parametrization speed.
    #[test]
    fn contact_ratio_reparametrization_invariance(
        num in 1i64..20,
        den in 1i64..20,
        im_num in -10i64..10,
    ) {
        let d = find_domain(&[], "dangelo").unwrap();
        let poly = d.poly.clone().unwrap();
        let curve = HoloCurve::parse("z; z^2; 0", 3).unwrap();
        let lambda = GRat::from_parts(num, den, im_num, 7);
        if lambda.is_zero() {
            return Ok(());
        }
        let plain = contact::compose_order(&poly, &curve).unwrap();
        let re = contact::compose_order(&poly, &curve.reparametrize(&lambda)).unwrap();
        prop_assert_eq!(plain.ratio, re.ratio);
        prop_assert_eq!(plain.leading, re.leading);
    }

    /// The 17-digit CSV formatter round-trips every finite double exactly.
    #[test]
    fn sig17_round_trips(bits in proptest::num::u64::ANY) {
        let x = f64::from_bits(bits);
        if !x.is_finite() {
            return Ok(());
        }
        let back: f64 = fmt_sig17(x).parse().unwrap();
        prop_assert!(back == x || (back == 0.0 && x == 0.0), "{x} -> {back}");
    }
}

/// Disc sampling is deterministic and interior, independent of proptest.
#[test]
fn disc_samples_are_deterministic_and_interior() {
    let d = find_domain(&[], "herbort").unwrap();
    let dir = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let ctx = DiscContext::new(&d, &d.base_point().to_vec(), &dir, &RunConfig::default()).unwrap();
    let a = disc::disc_samples(&ctx, 1e-5, 0.95, 64).unwrap();
    let b = disc::disc_samples(&ctx, 1e-5, 0.95, 64).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x, y);
    }
    for w in &a {
        assert!(d.defining.eval(w).unwrap().re < 0.0);
    }
}
