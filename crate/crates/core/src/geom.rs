//! Boundary frames and first-order geometry at a base point.
//!
//! All geometry here is first-order data of the defining function: the
//! outward normal, the complex tangent frame (the Hermitian orthogonal
//! complement of the normal, equivalently the annihilator of the holomorphic
//! gradient), graph-normalizing charts, and the boundary-distance estimator
//! `|r|/|∇r|`. The real gradient of a real-valued `r` is identified with the
//! complex vector `2 ∂r/∂z̄` throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{self, wirtinger_derive, Expr};

/// A point must satisfy `|r(P)| ≤ BOUNDARY_TOL` to count as a boundary point.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Gradient norms below this are treated as degenerate.
pub const GRADIENT_TOL: f64 = 1e-6;
/// Frame vectors are orthonormal and tangent to within this.
pub const FRAME_ORTHO_TOL: f64 = 1e-10;
/// Minimum |⟨n, ν⟩| for a direction to count as transverse.
pub const TRANSVERSE_TOL: f64 = 1e-2;

/// Unit outward normal and an orthonormal basis of the complex tangent space
/// at a boundary point.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    pub base_point: Vec<Complex64>,
    pub normal: Vec<Complex64>,
    pub tangent_basis: Vec<Vec<Complex64>>,
}

/// Affine coordinate change `w = U (z − P)` carrying the frame to coordinate
/// axes: tangent vectors to the first n−1 axes, the normal to the last.
#[derive(Clone, Debug)]
pub struct NormalizedChart {
    pub unitary: Vec<Vec<Complex64>>,
    pub translation: Vec<Complex64>,
    pub pullback: Expr,
}

/// Ratios `dist_to_boundary_est(P − s·n) / s` over a grid of step lengths.
#[derive(Clone, Debug)]
pub struct TransversalReport {
    pub ratios: Vec<(f64, f64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Recorded lower transversality constant: the smallest observed ratio.
    pub c0: f64,
    pub passes: bool,
}

pub fn hermitian_inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm(u: &[Complex64]) -> f64 {
    u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Holomorphic gradient (∂r/∂z_1, …, ∂r/∂z_n) at a point.
pub fn holomorphic_gradient(r: &Expr, z: &[Complex64]) -> Result<Vec<Complex64>> {
    (0..z.len())
        .map(|j| wirtinger_derive(r, j, false).eval(z))
        .collect()
}

/// The real gradient of a real-valued `r`, as the complex vector `2 ∂r/∂z̄`.
pub fn real_gradient(r: &Expr, z: &[Complex64]) -> Result<Vec<Complex64>> {
    (0..z.len())
        .map(|j| Ok(wirtinger_derive(r, j, true).eval(z)? * 2.0))
        .collect()
}

/// Unit outward normal at a boundary point. Outward means `r` increases along
/// the normal to first order.
pub fn outward_normal(r: &Expr, p: &[Complex64]) -> Result<Vec<Complex64>> {
    let value = r.eval(p)?.re;
    if value.abs() > BOUNDARY_TOL {
        return Err(Error::NotOnBoundary { value, tol: BOUNDARY_TOL });
    }
    let grad = real_gradient(r, p)?;
    let norm = vec_norm(&grad);
    if norm < GRADIENT_TOL {
        return Err(Error::DegenerateGradient { value: norm, tol: GRADIENT_TOL });
    }
    Ok(grad.into_iter().map(|g| g / norm).collect())
}

/// Orthonormal basis of the Hermitian complement of `normal`, built by
/// Gram-Schmidt over the standard basis. Seeds are processed in decreasing
/// order of |ν_k| (ties by index), so the seed most parallel to the normal is
/// consumed (and discarded) first; the result is deterministic.
pub fn tangent_basis_for(normal: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = normal.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        normal[b]
            .norm()
            .partial_cmp(&normal[a].norm())
            .expect("finite components")
            .then(a.cmp(&b))
    });
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n - 1);
    for k in order {
        if basis.len() == n - 1 {
            break;
        }
        let mut v: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        project_out(&mut v, normal);
        for b in &basis {
            project_out(&mut v, b);
        }
        let norm = vec_norm(&v);
        if norm < 1e-8 {
            continue;
        }
        // Second orthogonalization pass tightens the residual to ~1e-16.
        project_out(&mut v, normal);
        for b in &basis {
            project_out(&mut v, b);
        }
        let norm = vec_norm(&v);
        basis.push(v.into_iter().map(|c| c / norm).collect());
    }
    basis
}

fn project_out(v: &mut [Complex64], onto: &[Complex64]) {
    let coeff = hermitian_inner(v, onto);
    for (vj, oj) in v.iter_mut().zip(onto.iter()) {
        *vj -= coeff * oj;
    }
}

/// Outward normal plus complex tangent frame at a boundary point.
pub fn tangent_frame(r: &Expr, p: &[Complex64]) -> Result<TangentFrame> {
    let normal = outward_normal(r, p)?;
    let tangent_basis = tangent_basis_for(&normal);
    Ok(TangentFrame { base_point: p.to_vec(), normal, tangent_basis })
}

/// Chart `w = U (z − P)` in which the base point sits at the origin and the
/// outward normal is the last coordinate direction. The returned expression
/// is the defining function in the new coordinates.
pub fn normalize_chart(r: &Expr, p: &[Complex64]) -> Result<NormalizedChart> {
    let frame = tangent_frame(r, p)?;
    let n = p.len();
    // Rows of U are the conjugated frame vectors; then (Uu)_k = ⟨u, b_k⟩.
    let mut rows: Vec<&[Complex64]> = frame.tangent_basis.iter().map(|b| b.as_slice()).collect();
    rows.push(frame.normal.as_slice());
    let unitary: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|row| row.iter().map(|c| c.conj()).collect())
        .collect();
    // Inverse map z = P + Σ_k w_k b_k, spliced into r coordinate by coordinate.
    let subs: Vec<Expr> = (0..n)
        .map(|j| {
            let mut acc = Expr::Const(crate::expr::ConstVal::from_c64(p[j]));
            for (k, row) in rows.iter().enumerate() {
                acc = expr::add(
                    acc,
                    expr::mul(Expr::Const(crate::expr::ConstVal::from_c64(row[j])), Expr::var(k)),
                );
            }
            acc
        })
        .collect();
    let pullback = r.substitute(&subs)?;
    Ok(NormalizedChart {
        unitary,
        translation: p.iter().map(|c| -c).collect(),
        pullback,
    })
}

/// First-order boundary distance estimate `|r(z)| / |∇r(z)|` for interior
/// points. Exact for affine defining functions; two-sided comparable to the
/// true distance near the boundary.
pub fn dist_to_boundary_est(r: &Expr, z: &[Complex64]) -> Result<f64> {
    let value = r.eval(z)?.re;
    if value >= 0.0 {
        return Err(Error::OutsideDomain { r: value });
    }
    let grad = real_gradient(r, z)?;
    let norm = vec_norm(&grad);
    if norm < GRADIENT_TOL {
        return Err(Error::DegenerateGradient { value: norm, tol: GRADIENT_TOL });
    }
    Ok(-value / norm)
}

/// Distance from an interior point to the boundary along `dir`, by bracketing
/// the sign change of r and bisecting. `dir` need not be unit length; the
/// returned distance is in units of |dir|·t.
pub fn line_search_boundary_dist(
    r: &Expr,
    z: &[Complex64],
    dir: &[Complex64],
    max_t: f64,
) -> Result<f64> {
    let value = r.eval(z)?.re;
    if value >= 0.0 {
        return Err(Error::OutsideDomain { r: value });
    }
    let at = |t: f64| -> Result<f64> {
        let zt: Vec<Complex64> = z.iter().zip(dir.iter()).map(|(a, d)| a + d * t).collect();
        Ok(r.eval(&zt)?.re)
    };
    let steps = 1024;
    let mut lo = 0.0f64;
    let mut hi = max_t;
    let mut found = false;
    for k in 1..=steps {
        let t = max_t * k as f64 / steps as f64;
        if at(t)? >= 0.0 {
            hi = t;
            lo = max_t * (k - 1) as f64 / steps as f64;
            found = true;
            break;
        }
    }
    if !found {
        return Err(Error::LeavesBox { what: format!("no boundary crossing within {max_t}") });
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi) * vec_norm(dir))
}

/// Walk inward from `p` along `-n_vec` and compare the distance estimator
/// against the step length. Passes when the ratio never exceeds 1 + 10⁻² and
/// the recorded minimum ratio is positive.
pub fn transversal_dist_check(
    r: &Expr,
    p: &[Complex64],
    n_vec: &[Complex64],
    s_grid: &[f64],
) -> Result<TransversalReport> {
    let normal = outward_normal(r, p)?;
    let alignment = hermitian_inner(n_vec, &normal).norm();
    if alignment < TRANSVERSE_TOL {
        return Err(Error::ObliqueNormal { value: alignment, tol: TRANSVERSE_TOL });
    }
    let mut ratios = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if !(s > 0.0) {
            return Err(Error::ParameterRange { msg: format!("step {s} must be positive") });
        }
        let z: Vec<Complex64> = p.iter().zip(n_vec.iter()).map(|(a, nv)| a - nv * s).collect();
        let d = dist_to_boundary_est(r, &z)?;
        ratios.push((s, d / s));
    }
    let min_ratio = ratios.iter().map(|&(_, q)| q).fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().map(|&(_, q)| q).fold(f64::NEG_INFINITY, f64::max);
    let passes = max_ratio <= 1.0 + 1e-2 && min_ratio > 0.0;
    Ok(TransversalReport { ratios, min_ratio, max_ratio, c0: min_ratio, passes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ball() -> Expr {
        parse("abs2(z1) + abs2(z2) - 1", 2).unwrap()
    }

    fn hexic() -> Expr {
        parse("Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)", 3).unwrap()
    }

    fn assert_vec_close(got: &[Complex64], want: &[Complex64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).norm() <= tol, "got {got:?}, want {want:?}");
        }
    }

    /// Boundary point of the hexic model over given tangential coordinates.
    fn hexic_boundary_point(z1: Complex64, z2: Complex64) -> Vec<Complex64> {
        let height = z1.powu(3).norm_sqr() + (z1 * z2).norm_sqr() + z2.powu(3).norm_sqr();
        vec![z1, z2, c(-height, 0.0)]
    }

    #[test]
    fn normals_at_model_base_points() {
        let n = outward_normal(&ball(), &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_vec_close(&n, &[c(0.0, 0.0), c(1.0, 0.0)], 1e-12);

        let n = outward_normal(&hexic(), &[c(0.0, 0.0); 3]).unwrap();
        assert_vec_close(&n, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-12);

        let half = parse("Re(z2)", 2).unwrap();
        let n = outward_normal(&half, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_vec_close(&n, &[c(0.0, 0.0), c(1.0, 0.0)], 1e-12);
    }

    #[test]
    fn off_boundary_and_degenerate_points_are_rejected() {
        let err = outward_normal(&ball(), &[c(0.0, 0.0), c(0.9, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotOnBoundary { .. }));

        let flat = parse("abs2(z1)^2", 2).unwrap();
        let err = outward_normal(&flat, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::DegenerateGradient { .. }));
    }

    #[test]
    fn frames_at_model_base_points() {
        let f = tangent_frame(&hexic(), &[c(0.0, 0.0); 3]).unwrap();
        assert_eq!(f.tangent_basis.len(), 2);
        assert_vec_close(&f.tangent_basis[0], &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 1e-12);
        assert_vec_close(&f.tangent_basis[1], &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1e-12);

        let f = tangent_frame(&ball(), &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(f.tangent_basis.len(), 1);
        assert_vec_close(&f.tangent_basis[0], &[c(1.0, 0.0), c(0.0, 0.0)], 1e-12);
    }

    #[test]
    fn frame_invariants_at_a_generic_boundary_point() {
        let r = hexic();
        let p = hexic_boundary_point(c(0.3, 0.1), c(-0.2, 0.25));
        let f = tangent_frame(&r, &p).unwrap();
        assert!((vec_norm(&f.normal) - 1.0).abs() <= FRAME_ORTHO_TOL);
        let grad = holomorphic_gradient(&r, &p).unwrap();
        let mut all = vec![f.normal.clone()];
        all.extend(f.tangent_basis.iter().cloned());
        for (i, u) in all.iter().enumerate() {
            for (j, v) in all.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = hermitian_inner(u, v);
                assert!(
                    (got - c(want, 0.0)).norm() <= FRAME_ORTHO_TOL,
                    "inner({i},{j}) = {got}"
                );
            }
        }
        for v in &f.tangent_basis {
            let pairing: Complex64 = grad.iter().zip(v.iter()).map(|(g, vj)| g * vj).sum();
            assert!(pairing.norm() <= FRAME_ORTHO_TOL, "gradient pairing {pairing}");
        }
    }

    #[test]
    fn normal_commutes_with_unitary_rotation() {
        // U: rows of the conjugate-transpose appear in the substitution
        // (U^H w)_j = Σ_k conj(U_kj) w_k. Pythagorean block rotation in
        // (z1, z2) and a phase on z3 keep everything exactly representable.
        let u_mat = [
            [c(0.6, 0.0), c(0.8, 0.0), c(0.0, 0.0)],
            [c(-0.8, 0.0), c(0.6, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
        ];
        let r = hexic();
        let subs: Vec<Expr> = (0..3)
            .map(|j| {
                let mut acc = Expr::int(0);
                for k in 0..3 {
                    acc = crate::expr::add(
                        acc,
                        crate::expr::mul(
                            Expr::Const(crate::expr::ConstVal::from_c64(u_mat[k][j].conj())),
                            Expr::var(k),
                        ),
                    );
                }
                acc
            })
            .collect();
        let r_rotated = r.substitute(&subs).unwrap();

        let p = hexic_boundary_point(c(0.3, 0.1), c(-0.2, 0.25));
        let nu = outward_normal(&r, &p).unwrap();
        let p_rot: Vec<Complex64> = (0..3)
            .map(|k| (0..3).map(|j| u_mat[k][j] * p[j]).sum())
            .collect();
        let nu_rot = outward_normal(&r_rotated, &p_rot).unwrap();
        let want: Vec<Complex64> = (0..3)
            .map(|k| (0..3).map(|j| u_mat[k][j] * nu[j]).sum())
            .collect();
        assert_vec_close(&nu_rot, &want, 1e-8);
    }

    #[test]
    fn charts_at_normalized_base_points_are_identities() {
        let chart = normalize_chart(&hexic(), &[c(0.0, 0.0); 3]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((chart.unitary[i][j] - c(want, 0.0)).norm() <= 1e-12);
            }
        }
        assert_vec_close(&chart.translation, &[c(0.0, 0.0); 3], 1e-15);

        let chart = normalize_chart(&ball(), &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_vec_close(&chart.translation, &[c(0.0, 0.0), c(-1.0, 0.0)], 1e-15);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((chart.unitary[i][j] - c(want, 0.0)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn chart_pullback_matches_original_at_matched_samples() {
        let r = hexic();
        let p = hexic_boundary_point(c(0.3, 0.1), c(-0.2, 0.25));
        let chart = normalize_chart(&r, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let z: Vec<Complex64> = p
                .iter()
                .map(|pj| pj + c(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)))
                .collect();
            let w: Vec<Complex64> = (0..3)
                .map(|k| {
                    (0..3)
                        .map(|j| chart.unitary[k][j] * (z[j] - p[j]))
                        .sum()
                })
                .collect();
            let a = r.eval(&z).unwrap().re;
            let b = chart.pullback.eval(&w).unwrap().re;
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
        }
        // Base point maps to the origin; the normal to the last axis.
        let w0: Vec<Complex64> = vec![c(0.0, 0.0); 3];
        assert!(chart.pullback.eval(&w0).unwrap().re.abs() <= 1e-10);
        let nu_new = outward_normal(&chart.pullback, &w0).unwrap();
        assert_vec_close(&nu_new, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-8);
    }

    #[test]
    fn distance_estimates_on_models() {
        // Half-space: exact for affine r.
        let half = parse("Re(z2)", 2).unwrap();
        let d = dist_to_boundary_est(&half, &[c(0.0, 0.0), c(-0.3, 0.0)]).unwrap();
        assert!((d - 0.3).abs() <= 1e-15);

        // Ball: estimator error is delta^2/(2(1-delta)).
        for delta in [1e-2, 1e-3, 1e-4] {
            let d = dist_to_boundary_est(&ball(), &[c(0.0, 0.0), c(1.0 - delta, 0.0)]).unwrap();
            assert!((d - delta).abs() <= 2.0 * delta * delta, "delta={delta}, d={d}");
        }

        // Hexic model at (0,0,-delta): |r| = delta, |∇r| = 1.
        let delta = 1e-3;
        let d = dist_to_boundary_est(&hexic(), &[c(0.0, 0.0), c(0.0, 0.0), c(-delta, 0.0)]).unwrap();
        assert!((d - delta).abs() <= 0.1 * delta);

        let err = dist_to_boundary_est(&ball(), &[c(0.0, 0.0), c(1.5, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::OutsideDomain { .. }));
    }

    #[test]
    fn estimator_tracks_line_search_distance_near_boundary() {
        let cases: Vec<(Expr, Vec<Complex64>)> = vec![
            (ball(), vec![c(0.2, 0.1), c(0.95, 0.0)]),
            (hexic(), vec![c(0.2, 0.1), c(-0.1, 0.2), c(-3e-3, 0.3)]),
        ];
        for (r, mut z) in cases {
            // Pull the point inward until r(z) ∈ [-1e-3, 0).
            let mut value = r.eval(&z).unwrap().re;
            assert!(value < 0.0, "seed point must be interior, r = {value}");
            while value < -1e-3 {
                let grad = real_gradient(&r, &z).unwrap();
                let norm = vec_norm(&grad);
                let step = (-value) / (2.0 * norm);
                for (zj, g) in z.iter_mut().zip(grad.iter()) {
                    *zj += g * (step / norm);
                }
                value = r.eval(&z).unwrap().re;
            }
            let est = dist_to_boundary_est(&r, &z).unwrap();
            let grad = real_gradient(&r, &z).unwrap();
            let norm = vec_norm(&grad);
            let dir: Vec<Complex64> = grad.iter().map(|g| g / norm).collect();
            let line = line_search_boundary_dist(&r, &z, &dir, 0.1).unwrap();
            let ratio = est / line;
            assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn scaling_and_positive_multipliers_leave_geometry_stable() {
        let r = ball();
        let p = [c(0.0, 0.0), c(1.0, 0.0)];
        let z = [c(0.1, -0.2), c(0.9, 0.05)];
        assert!(r.eval(&z).unwrap().re < 0.0);

        let scaled = crate::expr::mul(Expr::int(5), r.clone());
        let nu = outward_normal(&r, &p).unwrap();
        let nu_scaled = outward_normal(&scaled, &p).unwrap();
        assert_vec_close(&nu_scaled, &nu, 1e-8);
        let d = dist_to_boundary_est(&r, &z).unwrap();
        let d_scaled = dist_to_boundary_est(&scaled, &z).unwrap();
        assert!((d_scaled / d - 1.0).abs() <= 1e-12);

        // Multiplier 1 + |z - P|^2: positive, equals 1 at P.
        let shift: Vec<Expr> = vec![
            crate::expr::sub(Expr::var(0), Expr::int(0)),
            crate::expr::sub(Expr::var(1), Expr::int(1)),
        ];
        let mut bump = Expr::int(1);
        for s in shift {
            bump = crate::expr::add(bump, crate::expr::abs2(s));
        }
        let multiplied = crate::expr::mul(bump, r.clone());
        let nu_mult = outward_normal(&multiplied, &p).unwrap();
        assert_vec_close(&nu_mult, &nu, 1e-8);
        let znear = [c(0.02, 0.01), c(0.9995, 0.0)];
        let rv = r.eval(&znear).unwrap().re;
        assert!((-1e-3..0.0).contains(&rv), "r = {rv}");
        let a = dist_to_boundary_est(&r, &znear).unwrap();
        let b = dist_to_boundary_est(&multiplied, &znear).unwrap();
        assert!((b / a - 1.0).abs() <= 0.1, "ratio {}", b / a);
    }

    #[test]
    fn transversal_ratios_on_models() {
        // Half-space along its own normal: ratio identically 1.
        let half = parse("Re(z2)", 2).unwrap();
        let p = [c(0.0, 0.0), c(0.0, 0.0)];
        let nu = outward_normal(&half, &p).unwrap();
        let grid = [1e-4, 1e-3, 5e-3, 1e-2];
        let rep = transversal_dist_check(&half, &p, &nu, &grid).unwrap();
        assert!(rep.passes);
        for &(_, q) in &rep.ratios {
            assert!((q - 1.0).abs() <= 1e-12);
        }

        // Ball along the normal: ratio (2-s)/(2-2s) ∈ [1, 1+s].
        let p = [c(0.0, 0.0), c(1.0, 0.0)];
        let nu = outward_normal(&ball(), &p).unwrap();
        let rep = transversal_dist_check(&ball(), &p, &nu, &grid).unwrap();
        assert!(rep.passes, "max ratio {}", rep.max_ratio);
        for &(s, q) in &rep.ratios {
            assert!(q >= 1.0 - 1e-12 && q <= 1.0 + s + 1e-12, "s={s}, q={q}");
        }
        assert!(rep.c0 > 0.0);

        // Hexic model, direction at 60 degrees from the normal: the ratio
        // degrades by exactly the alignment factor 1/2.
        let p = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let s3 = 3.0f64.sqrt() / 2.0;
        let oblique = [c(s3, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        let rep = transversal_dist_check(&hexic(), &p, &oblique, &grid).unwrap();
        assert!(rep.passes);
        assert!((rep.c0 - 0.5).abs() <= 0.05, "c0 = {}", rep.c0);

        // Tangential direction: rejected as non-transverse.
        let tang = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let err = transversal_dist_check(&hexic(), &p, &tang, &grid).unwrap_err();
        assert!(matches!(err, Error::ObliqueNormal { .. }));
    }
}
