//! Tangential disc calculus: the gauge S(t), the disc radius R(t), contact
//! order estimation, and the superadditivity margin.
//!
//! Everything here happens on one affine complex plane: the plane through a
//! boundary point P spanned by a unit complex-tangent direction v, shifted
//! inward along the unit normal ν. The two central quantities are
//!
//! * `s_of_t`: the maximum of the defining function over the closed disc
//!   `{P + ζv : |ζ| ≤ t}`, a direction-resolved flatness gauge, and
//! * `r_of_t`: the radius of the largest disc centred at the pushed-in point
//!   `P_t = P − tν` (direction v) that stays inside the domain.
//!
//! The two are inverse to each other once both are measured in graph terms:
//! the disc at depth t exits the domain exactly where the boundary's height
//! above the tangent plane (measured along ν) reaches t. `s_of_t_graph`
//! computes that height gauge; for graph-form domains at normalized base
//! points it coincides with `s_of_t` identically.
//!
//! For polynomial defining functions, restrictions to the plane are expanded
//! once into small dense polynomials in (ζ, ζ̄) (plus the normal coordinate
//! for the height solve), so grid sweeps cost a few dozen flops per point.
//! Non-polynomial sources fall back to direct tree evaluation.

use num_complex::Complex64;

use crate::config::RunConfig;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::{wirtinger_derive, Expr, PolyExpr};
use crate::geom::{self, NormalizedChart};

/// Dyadic grid exponent range: t_j = t_max · 2^{−j}.
pub const DYADIC_J_MIN: u32 = 4;
pub const DYADIC_J_MAX: u32 = 20;
/// Number of smallest-t grid points used for the log-log slope.
pub const SLOPE_WINDOW: usize = 8;
/// Exponent guarding the absolute floor of the S tolerance.
pub const S_TOL_EXPONENT: i32 = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// --- dense polynomial helpers -------------------------------------------------

fn poly_mul_1d(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow_1d(base: &[Complex64], e: u16) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..e {
        acc = poly_mul_1d(&acc, base);
    }
    acc
}

/// Dense polynomial in two formal variables; `c[i][j]` multiplies `a^i b^j`.
#[derive(Clone, Debug)]
struct Poly2 {
    c: Vec<Vec<Complex64>>,
}

impl Poly2 {
    fn constant(v: Complex64) -> Poly2 {
        Poly2 { c: vec![vec![v]] }
    }

    /// Linear form v0 + v1·a + v2·b.
    fn linear(v0: Complex64, v1: Complex64, v2: Complex64) -> Poly2 {
        Poly2 { c: vec![vec![v0, v2], vec![v1, ZERO]] }
    }

    fn mul(&self, other: &Poly2) -> Poly2 {
        let rows = self.c.len() + other.c.len() - 1;
        let cols = self.c[0].len() + other.c[0].len() - 1;
        let mut out = vec![vec![ZERO; cols]; rows];
        for (i, row_a) in self.c.iter().enumerate() {
            for (j, &x) in row_a.iter().enumerate() {
                if x == ZERO {
                    continue;
                }
                for (k, row_b) in other.c.iter().enumerate() {
                    for (l, &y) in row_b.iter().enumerate() {
                        out[i + k][j + l] += x * y;
                    }
                }
            }
        }
        Poly2 { c: out }
    }

    fn pow(&self, e: u16) -> Poly2 {
        let mut acc = Poly2::constant(Complex64::new(1.0, 0.0));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Restriction of a polynomial defining function to the affine plane
/// z = center + ζ·dir, stored densely: `c[i][j]` multiplies ζ^i ζ̄^j.
#[derive(Clone, Debug)]
pub struct PlanePoly {
    c: Vec<Vec<Complex64>>,
}

impl PlanePoly {
    pub fn eval_complex(&self, zeta: Complex64) -> Complex64 {
        let zbar = zeta.conj();
        let mut acc = ZERO;
        for row in self.c.iter().rev() {
            let mut inner = ZERO;
            for &coef in row.iter().rev() {
                inner = inner * zbar + coef;
            }
            acc = acc * zeta + inner;
        }
        acc
    }

    pub fn value(&self, zeta: Complex64) -> f64 {
        self.eval_complex(zeta).re
    }
}

fn restrict_to_plane(poly: &PolyExpr, center: &[Complex64], dir: &[Complex64]) -> PlanePoly {
    let n = poly.dim();
    let mut acc: Vec<Vec<Complex64>> = vec![vec![ZERO]];
    for (mono, coeff) in poly.terms() {
        let mut holo = vec![Complex64::new(1.0, 0.0)];
        let mut anti = vec![Complex64::new(1.0, 0.0)];
        for j in 0..n {
            let e = mono.z_exponent(j);
            if e > 0 {
                holo = poly_mul_1d(&holo, &poly_pow_1d(&[center[j], dir[j]], e));
            }
            let f = mono.zbar_exponent(j);
            if f > 0 {
                anti = poly_mul_1d(&anti, &poly_pow_1d(&[center[j].conj(), dir[j].conj()], f));
            }
        }
        let cv = coeff.to_c64();
        if acc.len() < holo.len() {
            acc.resize(holo.len(), Vec::new());
        }
        for (i, &h) in holo.iter().enumerate() {
            if acc[i].len() < anti.len() {
                acc[i].resize(anti.len(), ZERO);
            }
            for (j, &g) in anti.iter().enumerate() {
                acc[i][j] += cv * h * g;
            }
        }
    }
    PlanePoly { c: acc }
}

/// Restriction to z = p + ζ·v + x·ν with x real: a polynomial in x whose
/// coefficients are plane polynomials in (ζ, ζ̄).
fn restrict_to_lift(
    poly: &PolyExpr,
    p: &[Complex64],
    v: &[Complex64],
    nu: &[Complex64],
) -> Vec<PlanePoly> {
    let n = poly.dim();
    // acc[l][i][j] multiplies x^l ζ^i ζ̄^j.
    let mut acc: Vec<Vec<Vec<Complex64>>> = Vec::new();
    for (mono, coeff) in poly.terms() {
        // Holomorphic part: polynomial in (ζ, x); antiholomorphic in (ζ̄, x).
        let mut holo = Poly2::constant(Complex64::new(1.0, 0.0));
        let mut anti = Poly2::constant(Complex64::new(1.0, 0.0));
        for j in 0..n {
            let e = mono.z_exponent(j);
            if e > 0 {
                holo = holo.mul(&Poly2::linear(p[j], v[j], nu[j]).pow(e));
            }
            let f = mono.zbar_exponent(j);
            if f > 0 {
                anti = anti.mul(&Poly2::linear(p[j].conj(), v[j].conj(), nu[j].conj()).pow(f));
            }
        }
        let cv = coeff.to_c64();
        for (i, row_h) in holo.c.iter().enumerate() {
            for (l1, &h) in row_h.iter().enumerate() {
                if h == ZERO {
                    continue;
                }
                for (k, row_a) in anti.c.iter().enumerate() {
                    for (l2, &g) in row_a.iter().enumerate() {
                        if g == ZERO {
                            continue;
                        }
                        let l = l1 + l2;
                        if acc.len() <= l {
                            acc.resize(l + 1, Vec::new());
                        }
                        let plane = &mut acc[l];
                        if plane.len() <= i {
                            plane.resize(i + 1, Vec::new());
                        }
                        if plane[i].len() <= k {
                            plane[i].resize(k + 1, ZERO);
                        }
                        plane[i][k] += cv * h * g;
                    }
                }
            }
        }
    }
    if acc.is_empty() {
        acc.push(vec![vec![ZERO]]);
    }
    acc.into_iter()
        .map(|c| PlanePoly { c: if c.is_empty() { vec![vec![ZERO]] } else { c } })
        .collect()
}

// --- restriction evaluators ---------------------------------------------------

/// r restricted to a disc plane; polynomial fast path or tree fallback.
enum PlaneEval {
    Poly(PlanePoly),
    Tree { r: Expr, center: Vec<Complex64>, dir: Vec<Complex64> },
}

impl PlaneEval {
    fn value(&self, zeta: Complex64) -> f64 {
        match self {
            PlaneEval::Poly(p) => p.value(zeta),
            PlaneEval::Tree { r, center, dir } => {
                let z: Vec<Complex64> =
                    center.iter().zip(dir.iter()).map(|(c, d)| c + d * zeta).collect();
                r.eval(&z).expect("restriction eval").re
            }
        }
    }
}

/// The boundary height above the tangent plane, measured along the normal:
/// height(ζ) solves r(P + ζv + x·ν) = 0 with height = −x.
enum HeightEval {
    /// Graph-form domain at a normalized base point: height(ζ) = r(P + ζv).
    Direct(PlaneEval),
    /// x-polynomial with plane-polynomial coefficients; Newton in x.
    Poly(Vec<PlanePoly>),
    /// Tree fallback with cached normal-direction derivative.
    Tree { r: Expr, d_along_nu: Vec<Expr>, p: Vec<Complex64>, v: Vec<Complex64>, nu: Vec<Complex64> },
}

impl HeightEval {
    fn phi(&self, zeta: Complex64, x: f64) -> f64 {
        match self {
            HeightEval::Direct(_) => unreachable!("direct heights never solve"),
            HeightEval::Poly(coeffs) => {
                let mut acc = 0.0;
                for c in coeffs.iter().rev() {
                    acc = acc * x + c.value(zeta);
                }
                acc
            }
            HeightEval::Tree { r, p, v, nu, .. } => {
                let z: Vec<Complex64> = (0..p.len()).map(|j| p[j] + v[j] * zeta + nu[j] * x).collect();
                r.eval(&z).expect("lift eval").re
            }
        }
    }

    fn phi_prime(&self, zeta: Complex64, x: f64) -> f64 {
        match self {
            HeightEval::Direct(_) => unreachable!("direct heights never solve"),
            HeightEval::Poly(coeffs) => {
                let mut acc = 0.0;
                for (l, c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * x + l as f64 * c.value(zeta);
                }
                acc
            }
            HeightEval::Tree { d_along_nu, p, v, nu, .. } => {
                let z: Vec<Complex64> = (0..p.len()).map(|j| p[j] + v[j] * zeta + nu[j] * x).collect();
                // dφ/dx = 2 Re Σ (∂r/∂z_j) ν_j for real-valued r.
                let s: Complex64 = d_along_nu
                    .iter()
                    .zip(nu.iter())
                    .map(|(d, nuj)| d.eval(&z).expect("lift derivative eval") * nuj)
                    .sum();
                2.0 * s.re
            }
        }
    }
}

// --- disc maximization engine -------------------------------------------------

/// Maximum of `f` over the closed disc of the given radius: polar grid scan
/// followed by pattern search with shrinking steps (run twice; the second run
/// is a no-op once the first has converged). Returns (argmax, max).
fn disc_max<F: Fn(Complex64) -> f64>(f: &F, radius: f64, n_theta: usize, n_rho: usize) -> (Complex64, f64) {
    if radius <= 0.0 {
        return (ZERO, f(ZERO));
    }
    let mut best_z = ZERO;
    let mut best = f(ZERO);
    for i in 1..=n_rho {
        let rho = radius * i as f64 / n_rho as f64;
        for m in 0..n_theta {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / n_theta as f64;
            let z = Complex64::from_polar(rho, theta);
            let val = f(z);
            if val > best {
                best = val;
                best_z = z;
            }
        }
    }
    let step0 = radius * (2.0 * std::f64::consts::PI / n_theta as f64).max(1.0 / n_rho as f64);
    for _ in 0..2 {
        let mut step = step0;
        while step > 1e-16 * radius {
            let mut moved = false;
            for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let mut z = best_z + Complex64::new(dx, dy);
                let norm = z.norm();
                if norm > radius {
                    z *= radius / norm;
                }
                let val = f(z);
                if val > best {
                    best = val;
                    best_z = z;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
    }
    (best_z, best)
}

// --- context ------------------------------------------------------------------

/// Direction is too far from the complex tangent space beyond this residual.
pub const TANGENCY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusMode {
    /// Bisection on the disc radius with the interiority test of the
    /// definition.
    Definition,
    /// Inversion of the graph-height gauge.
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusOutcome {
    Converged,
    /// The disc never exits through the boundary within the neighborhood;
    /// the radius is clamped to t_max (flat directions).
    ClampedToTMax,
    /// No disc fits: the pushed-in center is not interior. Radius 0.
    NoFit,
}

#[derive(Clone, Copy, Debug)]
pub struct RadiusResult {
    pub radius: f64,
    pub outcome: RadiusOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrderEstimate {
    Determined(u32),
    Undetermined,
    /// S vanishes identically on the grid: flat direction.
    Infinite,
}

#[derive(Clone, Copy, Debug)]
pub struct K0Estimate {
    pub order: OrderEstimate,
    pub c_limit: Option<f64>,
    pub residual: Option<f64>,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct MarginReport {
    pub margin: f64,
    pub bound: f64,
    pub exceeds: bool,
}

/// Gauge and radius curves over a common grid, with the fitted contact order.
#[derive(Clone, Debug)]
pub struct SCurve {
    pub t_grid: Vec<f64>,
    pub s_values: Vec<f64>,
    pub r_values: Vec<f64>,
    pub k0: OrderEstimate,
    pub c_limit: Option<f64>,
    pub residual: Option<f64>,
}

/// A boundary point, a unit tangent direction, and everything derived from
/// them that disc computations reuse.
pub struct DiscContext {
    pub domain: Domain,
    pub base_point: Vec<Complex64>,
    pub direction: Vec<Complex64>,
    pub normal: Vec<Complex64>,
    pub chart: NormalizedChart,
    pub t_max: f64,
    pub config: RunConfig,
    height: HeightEval,
}

impl DiscContext {
    pub fn new(
        domain: &Domain,
        base_point: &[Complex64],
        direction: &[Complex64],
        config: &RunConfig,
    ) -> Result<DiscContext> {
        config.validate()?;
        let n = domain.dimension;
        if base_point.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: base_point.len() });
        }
        if direction.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: direction.len() });
        }
        let normal = geom::outward_normal(&domain.defining, base_point)?;
        let norm = geom::vec_norm(direction);
        if norm < 1e-12 {
            return Err(Error::ParameterRange { msg: "direction must be nonzero".into() });
        }
        let v: Vec<Complex64> = direction.iter().map(|c| c / norm).collect();
        let grad = geom::holomorphic_gradient(&domain.defining, base_point)?;
        let pairing: Complex64 = grad.iter().zip(v.iter()).map(|(g, vj)| g * vj).sum();
        let residual = pairing.norm() / geom::vec_norm(&grad);
        if residual > TANGENCY_TOL {
            return Err(Error::NotTangent { residual, tol: TANGENCY_TOL });
        }
        let chart = geom::normalize_chart(&domain.defining, base_point)?;

        // Largest t with the whole computation box-safe: moving depth and
        // radius up to t_max shifts coordinate j by at most t_max(|v_j|+|ν_j|).
        let margins = domain.coordinate_margins(base_point);
        let mut t_max = f64::INFINITY;
        for j in 0..n {
            let scale = v[j].norm() + normal[j].norm();
            if scale > 1e-15 {
                t_max = t_max.min(0.9 * margins[j] / scale);
            }
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::ParameterRange {
                msg: format!("no admissible radius at this base point (t_max = {t_max})"),
            });
        }

        let height = Self::build_height(domain, base_point, &v, &normal);
        Ok(DiscContext {
            domain: domain.clone(),
            base_point: base_point.to_vec(),
            direction: v,
            normal,
            chart,
            t_max,
            config: config.clone(),
            height,
        })
    }

    fn build_height(
        domain: &Domain,
        p: &[Complex64],
        v: &[Complex64],
        nu: &[Complex64],
    ) -> HeightEval {
        let n = domain.dimension;
        let mut axis_gap = 0.0f64;
        for j in 0..n {
            let want = if j == n - 1 { Complex64::new(1.0, 0.0) } else { ZERO };
            axis_gap = axis_gap.max((nu[j] - want).norm());
        }
        if domain.flags.graph_form && axis_gap <= 1e-10 {
            return HeightEval::Direct(plane_eval(domain, p, v));
        }
        match &domain.poly {
            Some(poly) => HeightEval::Poly(restrict_to_lift(poly, p, v, nu)),
            None => HeightEval::Tree {
                r: domain.defining.clone(),
                d_along_nu: (0..n).map(|j| wirtinger_derive(&domain.defining, j, false)).collect(),
                p: p.to_vec(),
                v: v.to_vec(),
                nu: nu.to_vec(),
            },
        }
    }

    /// Same context with different disc grid sizes (used for refinement
    /// comparisons).
    pub fn with_grids(&self, n_theta: usize, n_rho: usize) -> DiscContext {
        let mut config = self.config.clone();
        config.n_theta = n_theta;
        config.n_rho = n_rho;
        DiscContext {
            domain: self.domain.clone(),
            base_point: self.base_point.clone(),
            direction: self.direction.clone(),
            normal: self.normal.clone(),
            chart: self.chart.clone(),
            t_max: self.t_max,
            config,
            height: Self::build_height(&self.domain, &self.base_point, &self.direction, &self.normal),
        }
    }

    /// Plane restriction of r at the center pushed to the given depth.
    fn restriction_at(&self, depth: f64) -> PlaneEval {
        let center: Vec<Complex64> = self
            .base_point
            .iter()
            .zip(self.normal.iter())
            .map(|(p, nu)| p - nu * depth)
            .collect();
        match &self.domain.poly {
            Some(poly) => PlaneEval::Poly(restrict_to_plane(poly, &center, &self.direction)),
            None => PlaneEval::Tree { r: self.domain.defining.clone(), center, dir: self.direction.clone() },
        }
    }

    /// Tolerance guarantee for S values at radius t.
    pub fn s_tolerance(&self, t: f64, s: f64) -> f64 {
        self.config.tol_s_scale * s.abs().max(t.powi(S_TOL_EXPONENT))
    }

    /// Tolerance guarantee for reported radii.
    pub fn radius_tolerance(&self, radius: f64) -> f64 {
        self.config.tol_r_scale * radius.abs()
    }

    /// Boundary height above the tangent-plane point P + ζv, along ν.
    fn height_value(&self, zeta: Complex64, seed: f64) -> Result<f64> {
        match &self.height {
            HeightEval::Direct(plane) => Ok(plane.value(zeta)),
            solver => {
                let x = self.solve_height_root(solver, zeta, seed)?;
                Ok(-x)
            }
        }
    }

    fn solve_height_root(&self, h: &HeightEval, zeta: Complex64, seed: f64) -> Result<f64> {
        let bound = self.t_max;
        let mut x = seed.clamp(-0.5 * bound, 0.5 * bound);
        for _ in 0..60 {
            let fx = h.phi(zeta, x);
            let dx = h.phi_prime(zeta, x);
            if dx.abs() < 1e-10 {
                break;
            }
            let step = fx / dx;
            x -= step;
            if !x.is_finite() || x.abs() > bound {
                break;
            }
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                return Ok(x);
            }
        }
        // Newton failed to settle; bisect on the bracketed normal segment.
        let (mut lo, mut hi) = (-bound, bound);
        let flo = h.phi(zeta, lo);
        let fhi = h.phi(zeta, hi);
        if !(flo < 0.0 && fhi > 0.0) {
            return Err(Error::DiscNotInterior {
                what: format!("graph lift bracket failed at ζ = {zeta}"),
            });
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if h.phi(zeta, mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn plane_eval(domain: &Domain, center: &[Complex64], dir: &[Complex64]) -> PlaneEval {
    match &domain.poly {
        Some(poly) => PlaneEval::Poly(restrict_to_plane(poly, center, dir)),
        None => PlaneEval::Tree {
            r: domain.defining.clone(),
            center: center.to_vec(),
            dir: dir.to_vec(),
        },
    }
}

// --- public operations ---------------------------------------------------------

/// Maximum of r over the closed tangential disc of radius t at the base
/// point. Nonnegative (tiny negative grid noise is clamped to zero).
pub fn s_of_t(ctx: &DiscContext, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= ctx.t_max) {
        return Err(Error::ParameterRange { msg: format!("t = {t} outside (0, {}]", ctx.t_max) });
    }
    let plane = ctx.restriction_at(0.0);
    let (_, s) = disc_max(&|z| plane.value(z), t, ctx.config.n_theta, ctx.config.n_rho);
    Ok(if s < 0.0 { 0.0 } else { s })
}

/// Maximum boundary height (along ν, over the tangent plane) on the closed
/// disc of radius t. Coincides with [`s_of_t`] on graph-form domains at
/// normalized base points; on general domains this is the gauge whose
/// inversion gives the disc radius.
pub fn s_of_t_graph(ctx: &DiscContext, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= ctx.t_max) {
        return Err(Error::ParameterRange { msg: format!("t = {t} outside (0, {}]", ctx.t_max) });
    }
    if let HeightEval::Direct(plane) = &ctx.height {
        let (_, s) = disc_max(&|z| plane.value(z), t, ctx.config.n_theta, ctx.config.n_rho);
        return Ok(if s < 0.0 { 0.0 } else { s });
    }
    // Height solves are warm-started ring by ring; the engine's closure
    // interface is stateless, so run the same polar sweep explicitly.
    let n_theta = ctx.config.n_theta;
    let n_rho = ctx.config.n_rho;
    let mut best = 0.0f64;
    let mut best_z = ZERO;
    let mut seed = 0.0;
    for m in 0..n_theta {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / n_theta as f64;
        let mut ray_seed = seed;
        for i in 1..=n_rho {
            let rho = t * i as f64 / n_rho as f64;
            let z = Complex64::from_polar(rho, theta);
            let h = ctx.height_value(z, ray_seed)?;
            ray_seed = -h;
            if i == 1 && m == 0 {
                seed = -h;
            }
            if h > best {
                best = h;
                best_z = z;
            }
        }
    }
    let mut step = t * (2.0 * std::f64::consts::PI / n_theta as f64).max(1.0 / n_rho as f64);
    let mut seed = -best;
    while step > 1e-16 * t {
        let mut moved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let mut z = best_z + Complex64::new(dx, dy);
            let norm = z.norm();
            if norm > t {
                z *= t / norm;
            }
            let h = ctx.height_value(z, seed)?;
            if h > best {
                best = h;
                best_z = z;
                seed = -h;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(best.max(0.0))
}

/// Radius of the largest tangential disc centred at depth `depth` that stays
/// inside the domain.
pub fn r_of_t(ctx: &DiscContext, depth: f64, mode: RadiusMode) -> Result<RadiusResult> {
    if !(depth > 0.0) {
        return Err(Error::ParameterRange { msg: format!("depth {depth} must be positive") });
    }
    if depth > ctx.t_max {
        return Err(Error::LeavesBox { what: format!("pushed-in center at depth {depth}") });
    }
    match mode {
        RadiusMode::Definition => {
            let plane = ctx.restriction_at(depth);
            if plane.value(ZERO) >= 0.0 {
                return Ok(RadiusResult { radius: 0.0, outcome: RadiusOutcome::NoFit });
            }
            let feasible = |rho: f64| -> bool {
                if rho <= 0.0 {
                    return true;
                }
                let (_, m) = disc_max(&|z| plane.value(z), rho, ctx.config.n_theta, ctx.config.n_rho);
                m < 0.0
            };
            if feasible(ctx.t_max) {
                return Ok(RadiusResult { radius: ctx.t_max, outcome: RadiusOutcome::ClampedToTMax });
            }
            let (mut lo, mut hi) = (0.0f64, ctx.t_max);
            for _ in 0..60 {
                if hi - lo <= 1e-6 * lo {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(RadiusResult { radius: lo, outcome: RadiusOutcome::Converged })
        }
        RadiusMode::Inverse => inverse_radius(ctx, depth),
    }
}

/// Inverse-gauge radius: the smallest |ζ| at which the boundary height
/// reaches `depth`, i.e. the solution ρ of S_graph(ρ) = depth. Scans each
/// polar ray for the first crossing, takes the minimum over rays, then
/// refines the crossing direction by shrinking-step search.
fn inverse_radius(ctx: &DiscContext, depth: f64) -> Result<RadiusResult> {
    let n_theta = ctx.config.n_theta;
    let n_rho = ctx.config.n_rho;

    let crossing_on_ray = |theta: f64| -> Result<Option<f64>> {
        let dir = Complex64::from_polar(1.0, theta);
        let mut seed = 0.0;
        let mut prev_rho = 0.0;
        for i in 1..=n_rho {
            let rho = ctx.t_max * i as f64 / n_rho as f64;
            let h = ctx.height_value(rho * dir, seed)?;
            seed = -h;
            if h >= depth {
                let (mut lo, mut hi) = (prev_rho, rho);
                for _ in 0..60 {
                    if hi - lo <= 1e-9 * ctx.t_max {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if ctx.height_value(mid * dir, seed)? >= depth {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(Some(0.5 * (lo + hi)));
            }
            prev_rho = rho;
        }
        Ok(None)
    };

    let mut best: Option<(f64, f64)> = None;
    for m in 0..n_theta {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / n_theta as f64;
        if let Some(c) = crossing_on_ray(theta)? {
            if best.map_or(true, |(_, r)| c < r) {
                best = Some((theta, c));
            }
        }
    }
    let Some((mut theta, mut radius)) = best else {
        return Ok(RadiusResult { radius: ctx.t_max, outcome: RadiusOutcome::ClampedToTMax });
    };
    let mut step = 2.0 * std::f64::consts::PI / n_theta as f64;
    while step > 1e-7 {
        let mut moved = false;
        for cand in [theta - step, theta + step] {
            if let Some(c) = crossing_on_ray(cand)? {
                if c < radius {
                    radius = c;
                    theta = cand;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(RadiusResult { radius, outcome: RadiusOutcome::Converged })
}

/// Both radius modes, cross-checked: errors if they disagree beyond
/// 10 · tol_R. Returns the definition-mode result.
pub fn r_of_t_checked(ctx: &DiscContext, depth: f64) -> Result<RadiusResult> {
    let def = r_of_t(ctx, depth, RadiusMode::Definition)?;
    let inv = r_of_t(ctx, depth, RadiusMode::Inverse)?;
    let allowed = 10.0 * ctx.radius_tolerance(def.radius.max(inv.radius));
    if (def.radius - inv.radius).abs() > allowed {
        return Err(Error::InconsistentRadiusModes {
            definition: def.radius,
            inverse: inv.radius,
            allowed,
        });
    }
    Ok(def)
}

/// Stratified samples of the disc at the given depth: `n` points with radii
/// up to `fill · R(depth)`, rings ordered outermost first, alternate rings
/// staggered by half an angular slot. The outermost ring always contains the
/// phase-zero point. Every emitted point is verified interior.
pub fn disc_samples(
    ctx: &DiscContext,
    depth: f64,
    fill: f64,
    n: usize,
) -> Result<Vec<Vec<Complex64>>> {
    if !(0.0..=0.95).contains(&fill) {
        return Err(Error::ParameterRange { msg: format!("fill {fill} outside [0, 0.95]") });
    }
    let center: Vec<Complex64> = ctx
        .base_point
        .iter()
        .zip(ctx.normal.iter())
        .map(|(p, nu)| p - nu * depth)
        .collect();
    let plane = ctx.restriction_at(depth);
    if plane.value(ZERO) >= 0.0 {
        return Err(Error::DiscNotInterior { what: format!("center at depth {depth}") });
    }
    if fill == 0.0 || n <= 1 {
        return Ok(vec![center]);
    }
    let r = r_of_t(ctx, depth, RadiusMode::Definition)?;
    if r.outcome == RadiusOutcome::NoFit {
        return Err(Error::DiscNotInterior { what: format!("no disc at depth {depth}") });
    }
    let rho_scale = fill * r.radius;
    let k = (n as f64).sqrt().ceil() as usize;
    let mut points = Vec::with_capacity(n);
    'rings: for i in 0..k {
        let rho = rho_scale * (k - i) as f64 / k as f64;
        let offset = if i % 2 == 1 { 0.5 } else { 0.0 };
        for m in 0..k {
            if points.len() == n {
                break 'rings;
            }
            let theta = 2.0 * std::f64::consts::PI * (m as f64 + offset) / k as f64;
            let zeta = Complex64::from_polar(rho, theta);
            let value = plane.value(zeta);
            if value >= 0.0 {
                return Err(Error::InteriorSample {
                    msg: format!("sample at depth {depth}, ζ = {zeta} has r = {value:e}"),
                });
            }
            points.push(
                center
                    .iter()
                    .zip(ctx.direction.iter())
                    .map(|(c, d)| c + d * zeta)
                    .collect(),
            );
        }
    }
    Ok(points)
}

/// Dyadic radius grid t_j = t_max · 2^{−j}, ascending.
pub fn dyadic_grid(ctx: &DiscContext) -> Vec<f64> {
    (DYADIC_J_MIN..=DYADIC_J_MAX)
        .rev()
        .map(|j| ctx.t_max * (0.5f64).powi(j as i32))
        .collect()
}

/// Contact order of the boundary with the tangent line, from the log-log
/// slope of S on the dyadic grid. The slope is fitted over the smallest
/// [`SLOPE_WINDOW`] radii; the limit constant is the median of S(t)/t^{k0}
/// over the whole grid.
pub fn estimate_k0(ctx: &DiscContext) -> Result<K0Estimate> {
    let grid = dyadic_grid(ctx);
    let s: Vec<f64> = grid.iter().map(|&t| s_of_t(ctx, t)).collect::<Result<_>>()?;
    if s.iter().all(|&v| v == 0.0) {
        return Ok(K0Estimate { order: OrderEstimate::Infinite, c_limit: None, residual: None, slope: None });
    }
    if s.iter().take(SLOPE_WINDOW).any(|&v| v <= 0.0) {
        // Vanishes at small scales but not identically: no clean power law.
        return Ok(K0Estimate { order: OrderEstimate::Undetermined, c_limit: None, residual: None, slope: None });
    }
    let xs: Vec<f64> = grid.iter().take(SLOPE_WINDOW).map(|t| t.ln()).collect();
    let ys: Vec<f64> = s.iter().take(SLOPE_WINDOW).map(|v| v.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    let slope = num / den;
    let k0 = ((slope / 2.0).round() * 2.0).max(2.0);
    let residual = (slope - k0).abs();
    if residual > ctx.config.parity_residual_cap {
        return Ok(K0Estimate {
            order: OrderEstimate::Undetermined,
            c_limit: None,
            residual: Some(residual),
            slope: Some(slope),
        });
    }
    let mut ratios: Vec<f64> = grid
        .iter()
        .zip(s.iter())
        .filter(|&(_, &v)| v > 0.0)
        .map(|(&t, &v)| v / t.powi(k0 as i32))
        .collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let c_limit = ratios[ratios.len() / 2];
    Ok(K0Estimate {
        order: OrderEstimate::Determined(k0 as u32),
        c_limit: Some(c_limit),
        residual: Some(residual),
        slope: Some(slope),
    })
}

/// Lower bound that superadditivity margins must exceed.
pub fn superadditivity_bound(k0: u32) -> f64 {
    0.5 * (3.0f64.powf(1.0 / k0 as f64) - 2.0f64.powf(1.0 / k0 as f64))
}

/// The relative radius gain (R(v+x) − R(v)) / R(x) over the proof window,
/// paired with its theoretical lower bound for the given contact order.
pub fn superadditivity_margin(
    ctx: &DiscContext,
    v_small: f64,
    x: f64,
    k0: u32,
) -> Result<MarginReport> {
    let delta0 = ctx.config.delta0_factor * ctx.t_max;
    if !(v_small > 0.0 && v_small <= delta0) {
        return Err(Error::ParameterRange {
            msg: format!("v_small {v_small} outside (0, {delta0}]"),
        });
    }
    if !(x >= 0.5 * v_small && x <= 2.0 * delta0) {
        return Err(Error::ParameterRange {
            msg: format!("x {x} outside [{}, {}]", 0.5 * v_small, 2.0 * delta0),
        });
    }
    let radius_at = |d: f64| -> Result<f64> {
        let r = r_of_t(ctx, d, RadiusMode::Definition)?;
        if r.outcome != RadiusOutcome::Converged {
            return Err(Error::ParameterRange {
                msg: format!("radius at depth {d} did not converge ({:?})", r.outcome),
            });
        }
        Ok(r.radius)
    };
    let r_sum = radius_at(v_small + x)?;
    let r_v = radius_at(v_small)?;
    let r_x = radius_at(x)?;
    let margin = (r_sum - r_v) / r_x;
    let bound = superadditivity_bound(k0);
    Ok(MarginReport { margin, bound, exceeds: margin > bound })
}

/// Compute S and R over a grid (default: the dyadic grid) plus the fitted
/// contact order.
pub fn build_scurve(ctx: &DiscContext, t_grid: Option<Vec<f64>>) -> Result<SCurve> {
    let t_grid = t_grid.unwrap_or_else(|| dyadic_grid(ctx));
    let mut s_values = Vec::with_capacity(t_grid.len());
    let mut r_values = Vec::with_capacity(t_grid.len());
    for &t in &t_grid {
        s_values.push(s_of_t(ctx, t)?);
        r_values.push(r_of_t(ctx, t, RadiusMode::Definition)?.radius);
    }
    let k = estimate_k0(ctx)?;
    Ok(SCurve {
        t_grid,
        s_values,
        r_values,
        k0: k.order,
        c_limit: k.c_limit,
        residual: k.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::find_domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ctx_for(name: &str, dir: &[Complex64]) -> DiscContext {
        let d = find_domain(&[], name).unwrap();
        let p = d.base_point().to_vec();
        DiscContext::new(&d, &p, dir, &RunConfig::default()).unwrap()
    }

    fn e3(a: f64, b: f64) -> Vec<Complex64> {
        vec![c(a, 0.0), c(b, 0.0), c(0.0, 0.0)]
    }

    #[test]
    fn plane_restriction_matches_tree_evaluation() {
        let d = find_domain(&[], "herbort").unwrap();
        let poly = d.poly.as_ref().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let center: Vec<Complex64> =
                (0..3).map(|_| c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))).collect();
            let dir: Vec<Complex64> =
                (0..3).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let plane = restrict_to_plane(poly, &center, &dir);
            for _ in 0..20 {
                let zeta = c(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
                let z: Vec<Complex64> =
                    center.iter().zip(dir.iter()).map(|(a, b)| a + b * zeta).collect();
                let want = d.defining.eval(&z).unwrap().re;
                let got = plane.value(zeta);
                assert!((want - got).abs() <= 1e-12 * (1.0 + want.abs()), "{want} vs {got}");
            }
        }
    }

    #[test]
    fn lift_restriction_matches_tree_evaluation() {
        let d = find_domain(&[], "ball").unwrap();
        let poly = d.poly.as_ref().unwrap();
        let p = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let v = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let nu = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let lift = restrict_to_lift(poly, &p, &v, &nu);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let zeta = c(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            let x = rng.gen_range(-0.2..0.2);
            let z: Vec<Complex64> = (0..2).map(|j| p[j] + v[j] * zeta + nu[j] * x).collect();
            let want = d.defining.eval(&z).unwrap().re;
            let mut got = 0.0;
            for coeff in lift.iter().rev() {
                got = got * x + coeff.value(zeta);
            }
            assert!((want - got).abs() <= 1e-12 * (1.0 + want.abs()), "{want} vs {got}");
        }
    }

    #[test]
    fn closed_form_gauges() {
        // Ball: S(t) = t² exactly.
        let ctx = ctx_for("ball", &[c(1.0, 0.0), c(0.0, 0.0)]);
        for t in [0.01, 0.05, 0.1, 0.3] {
            let s = s_of_t(&ctx, t).unwrap();
            assert!((s - t * t).abs() <= 1e-9 * t * t, "t={t}: {s}");
        }

        // Hexic model, first axis: S(t) = t⁶.
        let ctx = ctx_for("herbort", &e3(1.0, 0.0));
        let s = s_of_t(&ctx, 0.1).unwrap();
        assert!((s - 1e-6).abs() <= 1e-9 * 1e-6, "{s}");

        // Diagonal: S(t) = t⁴/4 + t⁶/4.
        let ctx = ctx_for("herbort", &e3(1.0, 1.0));
        let s = s_of_t(&ctx, 0.1).unwrap();
        let want = 0.25e-4 + 0.25e-6;
        assert!((s - want).abs() <= 1e-9 * want, "{s} vs {want}");

        // egg4: S(t) = t⁴.
        let ctx = ctx_for("egg4", &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = s_of_t(&ctx, 0.2).unwrap();
        assert!((s - 0.2f64.powi(4)).abs() <= 1e-9 * 0.2f64.powi(4));
    }

    #[test]
    fn off_grid_phase_maxima_are_refined() {
        // Direction with a twisted second component: the cusp model's gauge
        // peaks at a phase that misses the 64-point angular grid, so only the
        // refinement stage reaches the closed form
        // S(t) = (t⁴/4)(1 + t/√2)².
        let phi = std::f64::consts::PI / 5.0;
        let dir = vec![c(1.0, 0.0), Complex64::from_polar(1.0, phi), c(0.0, 0.0)];
        let ctx = ctx_for("dangelo", &dir);
        for t in [0.05, 0.1, 0.2] {
            let s = s_of_t(&ctx, t).unwrap();
            let want = 0.25 * t.powi(4) * (1.0 + t / 2.0f64.sqrt()).powi(2);
            assert!((s - want).abs() <= 1e-9 * want, "t={t}: {s} vs {want}");
        }
    }

    #[test]
    fn gauge_is_monotone_and_nonnegative() {
        for (name, dir) in [
            ("herbort", e3(1.0, 1.0)),
            ("dangelo", e3(0.0, 1.0)),
            ("ball", vec![c(0.6, 0.0), c(0.0, 0.0)]),
        ] {
            let ctx = ctx_for(name, &dir);
            let grid = dyadic_grid(&ctx);
            let mut prev = -1.0;
            for &t in &grid {
                let s = s_of_t(&ctx, t).unwrap();
                assert!(s >= 0.0);
                assert!(s >= prev - 1e-12, "{name}: S({t}) = {s} < {prev}");
                prev = s;
            }
        }
    }

    #[test]
    fn radius_closed_forms_and_mode_agreement() {
        // Hexic axis: R(10⁻⁶) = 0.1.
        let ctx = ctx_for("herbort", &e3(1.0, 0.0));
        let r = r_of_t_checked(&ctx, 1e-6).unwrap();
        assert_eq!(r.outcome, RadiusOutcome::Converged);
        assert!((r.radius - 0.1).abs() <= ctx.radius_tolerance(0.1), "{}", r.radius);

        // Ball: R(δ) = √(2δ − δ²), both modes.
        let ctx = ctx_for("ball", &[c(1.0, 0.0), c(0.0, 0.0)]);
        for delta in [1e-4f64, 1e-3, 1e-2] {
            let want = (2.0 * delta - delta * delta).sqrt();
            for mode in [RadiusMode::Definition, RadiusMode::Inverse] {
                let r = r_of_t(&ctx, delta, mode).unwrap();
                assert_eq!(r.outcome, RadiusOutcome::Converged);
                assert!(
                    (r.radius - want).abs() <= ctx.radius_tolerance(want),
                    "δ={delta} {mode:?}: {} vs {want}",
                    r.radius
                );
            }
            r_of_t_checked(&ctx, delta).unwrap();
        }

        // Half-space: flat direction, both modes clamp to t_max.
        let ctx = ctx_for("halfspace", &[c(1.0, 0.0), c(0.0, 0.0)]);
        for mode in [RadiusMode::Definition, RadiusMode::Inverse] {
            let r = r_of_t(&ctx, 1e-3, mode).unwrap();
            assert_eq!(r.outcome, RadiusOutcome::ClampedToTMax);
            assert_eq!(r.radius, ctx.t_max);
        }
    }

    #[test]
    fn gauge_and_radius_are_inverse() {
        let cases: Vec<(&str, Vec<Complex64>)> = vec![
            ("ball", vec![c(1.0, 0.0), c(0.0, 0.0)]),
            ("herbort", e3(1.0, 0.0)),
            ("herbort", e3(1.0, 1.0)),
            ("egg4", vec![c(1.0, 0.0), c(0.0, 0.0)]),
        ];
        for (name, dir) in cases {
            let ctx = ctx_for(name, &dir);
            for &t in dyadic_grid(&ctx).iter().take(15) {
                let s = s_of_t_graph(&ctx, t).unwrap();
                assert!(s > 0.0, "{name}: flat gauge at t={t}");
                if s > ctx.t_max {
                    continue;
                }
                let r = r_of_t(&ctx, s, RadiusMode::Inverse).unwrap();
                assert_eq!(r.outcome, RadiusOutcome::Converged, "{name} t={t}");
                let tol = ctx.radius_tolerance(r.radius).max(1e-3 * t);
                assert!(
                    (r.radius - t).abs() <= tol,
                    "{name} t={t}: round trip {} (tol {tol})",
                    r.radius
                );
            }
        }
    }

    #[test]
    fn graph_gauge_matches_plain_gauge_on_graph_domains() {
        for (name, dir) in [("herbort", e3(1.0, 1.0)), ("egg4", vec![c(1.0, 0.0), c(0.0, 0.0)])] {
            let ctx = ctx_for(name, &dir);
            for t in [1e-3, 1e-2, 1e-1] {
                let a = s_of_t(&ctx, t).unwrap();
                let b = s_of_t_graph(&ctx, t).unwrap();
                assert_eq!(a, b, "{name} t={t}");
            }
        }
        // Ball: the graph gauge is 1 − √(1−t²), not the plain gauge t².
        let ctx = ctx_for("ball", &[c(1.0, 0.0), c(0.0, 0.0)]);
        let t = 0.1f64;
        let want = 1.0 - (1.0 - t * t).sqrt();
        let got = s_of_t_graph(&ctx, t).unwrap();
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn stratified_samples_stay_interior() {
        let ctx = ctx_for("herbort", &e3(1.0, 0.0));
        let samples = disc_samples(&ctx, 1e-6, 0.95, 256).unwrap();
        assert_eq!(samples.len(), 256);
        for z in &samples {
            assert!(ctx.domain.defining.eval(z).unwrap().re < 0.0);
        }
        // The outermost ring's phase-zero point is the first sample.
        let r = r_of_t(&ctx, 1e-6, RadiusMode::Definition).unwrap().radius;
        let expect = ctx.base_point[0] + ctx.direction[0] * 0.95 * r;
        assert!((samples[0][0] - expect).norm() <= 1e-15);

        let ball = ctx_for("ball", &[c(1.0, 0.0), c(0.0, 0.0)]);
        let samples = disc_samples(&ball, 1e-2, 0.95, 64).unwrap();
        assert_eq!(samples.len(), 64);
        for z in &samples {
            assert!(z.iter().map(|w| w.norm_sqr()).sum::<f64>() < 1.0);
        }

        let degenerate = disc_samples(&ball, 1e-2, 0.0, 64).unwrap();
        assert_eq!(degenerate.len(), 1);
        assert!((degenerate[0][1] - c(1.0 - 1e-2, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn contact_orders_on_models() {
        let cases: Vec<(&str, Vec<Complex64>, u32, f64)> = vec![
            ("ball", vec![c(1.0, 0.0), c(0.0, 0.0)], 2, 1.0),
            ("herbort", e3(1.0, 0.0), 6, 1.0),
            ("herbort", e3(0.0, 1.0), 6, 1.0),
            ("herbort", e3(1.0, 1.0), 4, 0.25),
            ("egg4", vec![c(1.0, 0.0), c(0.0, 0.0)], 4, 1.0),
            ("egg6", vec![c(1.0, 0.0), c(0.0, 0.0)], 6, 1.0),
            ("dangelo", e3(1.0, 0.0), 4, 1.0),
            ("dangelo", e3(0.0, 1.0), 6, 1.0),
        ];
        for (name, dir, want_k0, want_c) in cases {
            let ctx = ctx_for(name, &dir);
            let est = estimate_k0(&ctx).unwrap();
            assert_eq!(est.order, OrderEstimate::Determined(want_k0), "{name} {dir:?}: {est:?}");
            let c_limit = est.c_limit.unwrap();
            assert!(
                (c_limit - want_c).abs() <= 0.01 * want_c,
                "{name}: c_limit {c_limit} vs {want_c}"
            );
            assert!(est.residual.unwrap() <= 0.1);
        }

        let flat = ctx_for("halfspace", &[c(1.0, 0.0), c(0.0, 0.0)]);
        let est = estimate_k0(&flat).unwrap();
        assert_eq!(est.order, OrderEstimate::Infinite);
    }

    #[test]
    fn direction_phase_leaves_everything_invariant() {
        let base = ctx_for("herbort", &e3(1.0, 1.0));
        let phase = Complex64::from_polar(1.0, 0.7);
        let rotated_dir: Vec<Complex64> = e3(1.0, 1.0).iter().map(|v| v * phase).collect();
        let rotated = ctx_for("herbort", &rotated_dir);
        for t in [1e-3, 1e-2, 0.1] {
            let a = s_of_t(&base, t).unwrap();
            let b = s_of_t(&rotated, t).unwrap();
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "t={t}: {a} vs {b}");
        }
        let ka = estimate_k0(&base).unwrap();
        let kb = estimate_k0(&rotated).unwrap();
        assert_eq!(ka.order, kb.order);
    }

    #[test]
    fn superadditivity_margins_exceed_bounds() {
        // Ball, k0 = 2: margin ≈ √2 − 1 at equal small arguments.
        let ctx = ctx_for("ball", &[c(1.0, 0.0), c(0.0, 0.0)]);
        let rep = superadditivity_margin(&ctx, 1e-4, 1e-4, 2).unwrap();
        assert!(rep.exceeds);
        assert!((rep.bound - 0.5 * (3.0f64.sqrt() - 2.0f64.sqrt())).abs() <= 1e-12);
        assert!(
            (rep.margin - (2.0f64.sqrt() - 1.0)).abs() <= 1e-2,
            "margin {}",
            rep.margin
        );

        // Hexic axis, k0 = 6: margin ≈ 2^{1/6} − 1.
        let ctx = ctx_for("herbort", &e3(1.0, 0.0));
        let delta0 = ctx.config.delta0_factor * ctx.t_max;
        let v = 0.5 * delta0;
        let rep = superadditivity_margin(&ctx, v, v, 6).unwrap();
        assert!(rep.exceeds, "margin {} bound {}", rep.margin, rep.bound);
        assert!((rep.margin - (2.0f64.powf(1.0 / 6.0) - 1.0)).abs() <= 2e-2, "{}", rep.margin);

        // Window violations are rejected.
        assert!(superadditivity_margin(&ctx, 10.0 * delta0, v, 6).is_err());
        assert!(superadditivity_margin(&ctx, v, 0.1 * v, 6).is_err());
    }

    #[test]
    fn scurves_are_monotone_with_even_orders() {
        let ctx = ctx_for("herbort", &e3(1.0, 1.0));
        let curve = build_scurve(&ctx, None).unwrap();
        assert_eq!(curve.t_grid.len(), curve.s_values.len());
        for w in curve.s_values.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for w in curve.r_values.windows(2) {
            assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0));
        }
        match curve.k0 {
            OrderEstimate::Determined(k) => assert_eq!(k % 2, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_non_tangent_directions_and_bad_radii() {
        let d = find_domain(&[], "ball").unwrap();
        let p = d.base_point().to_vec();
        let err = match DiscContext::new(&d, &p, &[c(0.0, 0.0), c(1.0, 0.0)], &RunConfig::default()) {
            Err(e) => e,
            Ok(_) => panic!("normal direction accepted as tangent"),
        };
        assert!(matches!(err, Error::NotTangent { .. }));

        let ctx = ctx_for("ball", &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(s_of_t(&ctx, 0.0).is_err());
        assert!(s_of_t(&ctx, ctx.t_max * 1.01).is_err());
        assert!(r_of_t(&ctx, ctx.t_max * 1.01, RadiusMode::Definition).is_err());
    }

    #[test]
    fn quadratic_bound_constant_does_not_grow_under_refinement() {
        for (name, dir) in [
            ("ball", vec![c(1.0, 0.0), c(0.0, 0.0)]),
            ("herbort", e3(1.0, 1.0)),
            ("egg4", vec![c(1.0, 0.0), c(0.0, 0.0)]),
        ] {
            let coarse = ctx_for(name, &dir);
            let fine = coarse.with_grids(128, 128);
            let sup = |ctx: &DiscContext| -> f64 {
                dyadic_grid(ctx)
                    .iter()
                    .filter(|&&t| t <= 1e-2)
                    .map(|&t| s_of_t(ctx, t).unwrap() / (t * t))
                    .fold(0.0, f64::max)
            };
            let c_coarse = sup(&coarse);
            let c_fine = sup(&fine);
            assert!(
                c_fine <= c_coarse * (1.0 + 1e-9) + 1e-15,
                "{name}: refined {c_fine} vs {c_coarse}"
            );
        }
    }
}
