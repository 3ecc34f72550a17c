//! Holomorphic Hölder test functions and the gain experiments built on them.
//!
//! The central construction is the conjugate completion: a domain whose
//! boundary graph is a hermitian sum of squares Re z_n + Σ|p_j(z′)|² admits
//! the holomorphic function
//!
//!   g(z) = c − z_n − Σ_j p_j(z′)²,   c = the base point's z_n coordinate,
//!
//! whose real part dominates −r on the interior (|Σp²| ≤ Σ|p|²), so the
//! principal branch f = g^α is single-valued, holomorphic, and Lip-α with a
//! certified seminorm bound. These functions feed three experiment families:
//! Cauchy-integral derivative estimates on interior discs, Hardy-Littlewood
//! growth profiles, and the tangential gain ratios |f(P_δ)−f(w)| / S^α that
//! the main verification sweeps measure.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::disc::{self, DiscContext, OrderEstimate, RadiusMode};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::{to_poly, PolyExpr};
use crate::rational::{rationalize, GRat};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hölder constant of w ↦ w^α on the closed right half-plane. For
/// |w1−w2| ≥ |w2|/2 (larger modulus second) the crude bound
/// |w1^α|+|w2^α| ≤ 2|w2|^α ≤ 2^{1+α}|w1−w2|^α applies; otherwise the
/// segment stays at modulus ≥ |w2|/2 and the derivative bound gives
/// α·(|w2|/2)^{α−1}·|w1−w2| ≤ |w1−w2|^α. The maximum of the two is 2^{1+α}.
pub fn halfplane_holder_constant(alpha: f64) -> f64 {
    2.0f64.powf(1.0 + alpha)
}

#[derive(Clone, Debug)]
enum Kind {
    Constant(Complex64),
    /// z_j
    Coordinate(usize),
    /// z_j · z_k
    PairProduct(usize, usize),
    /// g(z)^α, principal branch, Re g > 0 on the interior.
    Completion { g: PolyExpr, grad: Vec<PolyExpr> },
}

/// A holomorphic test function with a certified Lip-α bound on the domain box.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub alpha: f64,
    pub lip_bound: f64,
    pub label: String,
    kind: Kind,
}

impl TestFunction {
    pub fn constant(value: Complex64, alpha: f64) -> TestFunction {
        TestFunction {
            alpha,
            lip_bound: 0.0,
            label: "constant".into(),
            kind: Kind::Constant(value),
        }
    }

    /// f(z) = z_j. Lip-α on a bounded box with seminorm ≤ diam^{1−α}.
    pub fn coordinate(domain: &Domain, j: usize, alpha: f64) -> TestFunction {
        TestFunction {
            alpha,
            lip_bound: box_diameter(domain).powf(1.0 - alpha),
            label: format!("coordinate z{}", j + 1),
            kind: Kind::Coordinate(j),
        }
    }

    /// f(z) = z_j · z_k.
    pub fn pair_product(domain: &Domain, j: usize, k: usize, alpha: f64) -> TestFunction {
        let m = coordinate_sups(domain);
        let lip = (m[j] + m[k]) * box_diameter(domain).powf(1.0 - alpha);
        TestFunction {
            alpha,
            lip_bound: lip,
            label: format!("product z{}·z{}", j + 1, k + 1),
            kind: Kind::PairProduct(j, k),
        }
    }

    /// f(z) = (c − z_j)^α: the one-variable completion used for flat
    /// comparisons; well-defined when Re(c − z_j) > 0 on the interior.
    pub fn normal_power(dim: usize, j: usize, shift: GRat, alpha: f64) -> TestFunction {
        let g = PolyExpr::constant(dim, shift)
            .sub(&PolyExpr::variable(dim, j, false));
        let grad = (0..dim).map(|k| g.derivative(k, false)).collect();
        TestFunction {
            alpha,
            lip_bound: halfplane_holder_constant(alpha),
            label: format!("normal power (c − z{})^α", j + 1),
            kind: Kind::Completion { g, grad },
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match &self.kind {
            Kind::Constant(c) => Ok(*c),
            Kind::Coordinate(j) => Ok(z[*j]),
            Kind::PairProduct(j, k) => Ok(z[*j] * z[*k]),
            Kind::Completion { g, .. } => Ok(g.eval(z)?.powf(self.alpha)),
        }
    }

    /// Exact holomorphic gradient (∂f/∂z_1, …, ∂f/∂z_n).
    pub fn gradient(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.kind {
            Kind::Constant(_) => Ok(vec![ZERO; z.len()]),
            Kind::Coordinate(j) => {
                let mut out = vec![ZERO; z.len()];
                out[*j] = Complex64::new(1.0, 0.0);
                Ok(out)
            }
            Kind::PairProduct(j, k) => {
                let mut out = vec![ZERO; z.len()];
                out[*j] += z[*k];
                out[*k] += z[*j];
                Ok(out)
            }
            Kind::Completion { g, grad } => {
                let gv = g.eval(z)?;
                let scale = self.alpha * gv.powf(self.alpha - 1.0);
                grad.iter().map(|d| Ok(scale * d.eval(z)?)).collect()
            }
        }
    }

    /// d/dζ f(z + ζ·dir) at ζ = 0, exactly.
    pub fn directional_derivative(&self, z: &[Complex64], dir: &[Complex64]) -> Result<Complex64> {
        let grad = self.gradient(z)?;
        Ok(grad.iter().zip(dir.iter()).map(|(g, d)| g * d).sum())
    }
}

fn box_diameter(domain: &Domain) -> f64 {
    domain
        .box_bounds
        .iter()
        .map(|(lo, hi)| (hi - lo) * (hi - lo))
        .sum::<f64>()
        .sqrt()
}

/// Per-coordinate sup of |z_j| over the box.
fn coordinate_sups(domain: &Domain) -> Vec<f64> {
    (0..domain.dimension)
        .map(|j| {
            let (rlo, rhi) = domain.box_bounds[2 * j];
            let (ilo, ihi) = domain.box_bounds[2 * j + 1];
            let re = rlo.abs().max(rhi.abs());
            let im = ilo.abs().max(ihi.abs());
            (re * re + im * im).sqrt()
        })
        .collect()
}

/// Rigorous sup of |q| over the box by coefficient norms:
/// |q(z)| ≤ Σ |c_m| Π sup|z_j|^{powers}.
fn coefficient_norm_bound(q: &PolyExpr, sups: &[f64]) -> f64 {
    let mut bound = 0.0;
    for (mono, coeff) in q.terms() {
        let mut term = coeff.to_c64().norm();
        for (j, &s) in sups.iter().enumerate() {
            term *= s.powi((mono.z_exponent(j) + mono.zbar_exponent(j)) as i32);
        }
        bound += term;
    }
    bound
}

/// Draw interior points (r < 0) uniformly from the box by rejection.
pub fn sample_interior(
    domain: &Domain,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<Complex64>>> {
    let n = domain.dimension;
    let mut out = Vec::with_capacity(count);
    for _ in 0..200 * count {
        if out.len() == count {
            break;
        }
        let z: Vec<Complex64> = (0..n)
            .map(|j| {
                let (rlo, rhi) = domain.box_bounds[2 * j];
                let (ilo, ihi) = domain.box_bounds[2 * j + 1];
                Complex64::new(rng.gen_range(rlo..rhi), rng.gen_range(ilo..ihi))
            })
            .collect();
        if domain.defining.eval(&z)?.re < 0.0 {
            out.push(z);
        }
    }
    if out.len() < count {
        return Err(Error::InteriorSample {
            msg: format!("only {} of {count} interior samples found", out.len()),
        });
    }
    Ok(out)
}

/// Build f = g^α with g = c − z_n − Σ_j p_j(z′)², c the base point's last
/// coordinate. Positivity of Re g on the interior is audited on seeded
/// samples at construction, not trusted.
pub fn make_conjugate_completion(
    domain: &Domain,
    base: &[Complex64],
    alpha: f64,
    config: &RunConfig,
) -> Result<TestFunction> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::ParameterRange { msg: format!("alpha {alpha} outside (0, 1)") });
    }
    let n = domain.dimension;
    if base.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: base.len() });
    }
    if !domain.flags.hermitian_sos && domain.p_list.is_empty() {
        return Err(Error::MissingSosStructure { name: domain.name.clone() });
    }
    let shift_float = base[n - 1];
    let shift = GRat::new(rationalize(shift_float.re, 1_000_000), rationalize(shift_float.im, 1_000_000));
    if (shift.to_c64() - shift_float).norm() > 1e-12 {
        return Err(Error::NonRationalBasePoint);
    }

    let mut g = PolyExpr::constant(n, shift).sub(&PolyExpr::variable(n, n - 1, false));
    for (idx, p_expr) in domain.p_list.iter().enumerate() {
        let p = to_poly(p_expr, n).map_err(|e| Error::BadCurve {
            index: idx,
            msg: format!("square term is not exactly polynomial: {e}"),
        })?;
        g = g.sub(&p.mul(&p));
    }
    let grad: Vec<PolyExpr> = (0..n).map(|j| g.derivative(j, false)).collect();

    // Runtime positivity audit: Re g > 0 on seeded interior samples.
    let mut rng = config.rng();
    for z in sample_interior(domain, 2000, &mut rng)? {
        let gv = g.eval(&z)?;
        if gv.re <= 0.0 {
            return Err(Error::MissingSosStructure { name: domain.name.clone() });
        }
    }

    // Certified chain bound: Hölder constant of w^α on Re w > 0 times the
    // box Lipschitz constant of g, to the α.
    let sups = coordinate_sups(domain);
    let grad_bound: f64 = grad
        .iter()
        .map(|d| {
            let b = coefficient_norm_bound(d, &sups);
            b * b
        })
        .sum::<f64>()
        .sqrt();
    let lip_bound = halfplane_holder_constant(alpha) * grad_bound.powf(alpha);

    Ok(TestFunction {
        alpha,
        lip_bound,
        label: format!("conjugate completion of {} (alpha = {alpha})", domain.name),
        kind: Kind::Completion { g, grad },
    })
}

/// Sampled Lip-α seminorm: sup over random interior pairs of
/// |f(x)−f(y)| / |x−y|^α.
pub fn holder_seminorm_est(
    f: &TestFunction,
    domain: &Domain,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    if n_pairs < 1000 {
        return Err(Error::ParameterRange { msg: format!("n_pairs {n_pairs} below minimum 1000") });
    }
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = sample_interior(domain, 2 * n_pairs, &mut rng)?;
    let mut sup = 0.0f64;
    for pair in points.chunks_exact(2) {
        let dist: f64 =
            pair[0].iter().zip(pair[1].iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        if dist < 1e-14 {
            continue;
        }
        let diff = (f.eval(&pair[0])? - f.eval(&pair[1])?).norm();
        sup = sup.max(diff / dist.powf(f.alpha));
    }
    Ok(sup)
}

/// Directional derivative by trapezoidal Cauchy quadrature on the circle of
/// radius `rho` around z in the complex line z + ζ·dir. The circle (and so
/// the closed disc, by the maximum principle applied to r's subharmonic
/// restriction being irrelevant here: every node is checked) must be
/// interior.
pub fn cauchy_derivative(
    domain: &Domain,
    f: &TestFunction,
    z: &[Complex64],
    dir: &[Complex64],
    rho: f64,
    m: usize,
) -> Result<Complex64> {
    if m < 16 {
        return Err(Error::ParameterRange { msg: format!("quadrature nodes {m} below minimum 16") });
    }
    if !(rho > 0.0) {
        return Err(Error::ParameterRange { msg: format!("radius {rho} must be positive") });
    }
    if domain.defining.eval(z)?.re >= 0.0 {
        return Err(Error::DiscNotInterior { what: "quadrature center".into() });
    }
    let mut acc = ZERO;
    for k in 0..m {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        let zeta = Complex64::from_polar(rho, theta);
        let w: Vec<Complex64> = z.iter().zip(dir.iter()).map(|(a, d)| a + d * zeta).collect();
        if domain.defining.eval(&w)?.re >= 0.0 {
            return Err(Error::DiscNotInterior {
                what: format!("quadrature node at angle {theta:.3}"),
            });
        }
        acc += f.eval(&w)? * Complex64::from_polar(1.0, -theta);
    }
    Ok(acc / (m as f64 * rho))
}

/// Mixed second derivative ∂²/∂ζ∂τ f(z + ζ·dir_n + τ·dir_v) at 0 by iterated
/// Cauchy quadrature over the bidisc skeleton |ζ| = delta, |τ| = rho.
pub fn bidisc_second_derivative(
    domain: &Domain,
    f: &TestFunction,
    z: &[Complex64],
    dir_n: &[Complex64],
    dir_v: &[Complex64],
    delta: f64,
    rho: f64,
    m: usize,
) -> Result<Complex64> {
    if m < 16 {
        return Err(Error::ParameterRange { msg: format!("quadrature nodes {m} below minimum 16") });
    }
    if !(delta > 0.0 && rho > 0.0) {
        return Err(Error::ParameterRange { msg: "bidisc radii must be positive".into() });
    }
    let mut acc = ZERO;
    for a in 0..m {
        let theta = 2.0 * std::f64::consts::PI * a as f64 / m as f64;
        let zeta = Complex64::from_polar(delta, theta);
        for b in 0..m {
            let phi = 2.0 * std::f64::consts::PI * b as f64 / m as f64;
            let tau = Complex64::from_polar(rho, phi);
            let w: Vec<Complex64> = (0..z.len())
                .map(|j| z[j] + dir_n[j] * zeta + dir_v[j] * tau)
                .collect();
            if domain.defining.eval(&w)?.re >= 0.0 {
                return Err(Error::DiscNotInterior {
                    what: format!("bidisc skeleton node ({theta:.3}, {phi:.3})"),
                });
            }
            acc += f.eval(&w)? * Complex64::from_polar(1.0, -theta) * Complex64::from_polar(1.0, -phi);
        }
    }
    Ok(acc / (m as f64 * m as f64 * delta * rho))
}

// --- Hardy-Littlewood growth ------------------------------------------------------

#[derive(Clone, Debug)]
pub struct DecadeRow {
    pub dist_lo: f64,
    pub dist_hi: f64,
    pub samples: usize,
    pub sup_product: f64,
}

#[derive(Clone, Debug)]
pub struct HlReport {
    pub rows: Vec<DecadeRow>,
    pub overall_sup: f64,
    /// sup over the closest populated decade / sup over the farthest.
    pub decade_ratio: f64,
    pub passed: bool,
}

/// Profile |∇f(x)| · dist(x)^{1−α} across distance decades [10⁻⁶, 10⁻¹].
/// Points march inward from the base point along the normal with tangential
/// jitter. Passes when the closest decade's sup stays within a factor 4 of
/// the farthest decade's sup.
pub fn hl_growth_check(
    domain: &Domain,
    f: &TestFunction,
    base: &[Complex64],
    n_samples: usize,
    config: &RunConfig,
) -> Result<HlReport> {
    if n_samples < 10 {
        return Err(Error::ParameterRange { msg: format!("n_samples {n_samples} below minimum 10") });
    }
    let normal = crate::geom::outward_normal(&domain.defining, base)?;
    let frame = crate::geom::tangent_frame(&domain.defining, base)?;
    let mut rng = config.rng();
    let dist_max = 1e-1f64;
    let dist_min = 1e-6f64;

    let mut rows: Vec<DecadeRow> = (0..5)
        .map(|d| DecadeRow {
            dist_lo: dist_min * 10f64.powi(d),
            dist_hi: dist_min * 10f64.powi(d + 1),
            samples: 0,
            sup_product: 0.0,
        })
        .collect();
    let mut overall = 0.0f64;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < n_samples && attempts < 100 * n_samples {
        attempts += 1;
        let u: f64 = rng.gen_range(0.0..1.0);
        let s = dist_min * (dist_max / dist_min).powf(u);
        let mut z: Vec<Complex64> =
            base.iter().zip(normal.iter()).map(|(p, nu)| p - nu * s).collect();
        // Small tangential drift, same scale as the depth.
        for t in &frame.tangent_basis {
            let jitter = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)) * s;
            for (zj, tj) in z.iter_mut().zip(t.iter()) {
                *zj += tj * jitter;
            }
        }
        if !domain.contains_in_box(&z) || domain.defining.eval(&z)?.re >= 0.0 {
            continue;
        }
        let dist = crate::geom::dist_to_boundary_est(&domain.defining, &z)?;
        if !(dist_min..dist_max).contains(&dist) {
            continue;
        }
        let grad_norm =
            f.gradient(&z)?.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
        let product = grad_norm * dist.powf(1.0 - f.alpha);
        overall = overall.max(product);
        let decade = ((dist / dist_min).log10().floor() as usize).min(rows.len() - 1);
        rows[decade].samples += 1;
        rows[decade].sup_product = rows[decade].sup_product.max(product);
        accepted += 1;
    }
    if accepted < n_samples {
        return Err(Error::InteriorSample {
            msg: format!("only {accepted} of {n_samples} growth samples found"),
        });
    }
    let populated: Vec<&DecadeRow> = rows.iter().filter(|r| r.samples > 0).collect();
    let closest = populated.first().map(|r| r.sup_product).unwrap_or(0.0);
    let farthest = populated.last().map(|r| r.sup_product).unwrap_or(0.0);
    let decade_ratio = if farthest > 0.0 { closest / farthest } else { 1.0 };
    Ok(HlReport { rows, overall_sup: overall, decade_ratio, passed: decade_ratio <= 4.0 })
}

// --- gain ratios and the box decomposition ----------------------------------------

/// |f(P_δ) − f(w)| / S(|P_δ − w|)^α, with the 0 convention at w = P_δ.
/// The caller is responsible for the hypothesis α < 1/k₀ (checked once per
/// sweep in [`verify_main_theorem`]); w must lie on the depth-δ disc plane.
pub fn gain_ratio(
    f: &TestFunction,
    ctx: &DiscContext,
    delta: f64,
    w: &[Complex64],
    alpha: f64,
) -> Result<f64> {
    let center: Vec<Complex64> = ctx
        .base_point
        .iter()
        .zip(ctx.normal.iter())
        .map(|(p, nu)| p - nu * delta)
        .collect();
    let offset: Vec<Complex64> = w.iter().zip(center.iter()).map(|(a, b)| a - b).collect();
    let zeta: Complex64 =
        offset.iter().zip(ctx.direction.iter()).map(|(o, v)| o * v.conj()).sum();
    let residual: f64 = offset
        .iter()
        .zip(ctx.direction.iter())
        .map(|(o, v)| (o - v * zeta).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-9 * (1.0 + zeta.norm()) {
        return Err(Error::ParameterRange { msg: "w is not on the disc plane".into() });
    }
    let t = zeta.norm();
    if t > ctx.t_max {
        return Err(Error::ParameterRange { msg: format!("|ζ| = {t} beyond t_max") });
    }
    let num = (f.eval(&center)? - f.eval(w)?).norm();
    if t < 1e-300 || num == 0.0 {
        return Ok(0.0);
    }
    let s = disc::s_of_t(ctx, t)?;
    if s == 0.0 {
        return Err(Error::ParameterRange {
            msg: "gauge vanishes but f separates the points".into(),
        });
    }
    Ok(num / s.powf(alpha))
}

#[derive(Clone, Copy, Debug)]
pub struct BoxTerms {
    /// |f(P_δ) − f(P_{δ+h})|: sliding deeper along the normal.
    pub i: f64,
    /// |f(P_{δ+h}) − f(w_h)|: tangential move at the safer depth.
    pub ii: f64,
    /// |f(w_h) − f(w)|: climbing back up the normal.
    pub iii: f64,
    /// The gauge value h = S(|P_δ − w|) used for the push.
    pub h: f64,
}

/// The three-leg path P_δ → P_{δ+h} → w_h → w with h = S(|P_δ−w|), both
/// intermediate points pushed along the base normal.
pub fn box_decomposition(
    f: &TestFunction,
    ctx: &DiscContext,
    delta: f64,
    w: &[Complex64],
) -> Result<BoxTerms> {
    let center: Vec<Complex64> = ctx
        .base_point
        .iter()
        .zip(ctx.normal.iter())
        .map(|(p, nu)| p - nu * delta)
        .collect();
    let t: f64 =
        w.iter().zip(center.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    if t < 1e-300 {
        return Ok(BoxTerms { i: 0.0, ii: 0.0, iii: 0.0, h: 0.0 });
    }
    let h = disc::s_of_t(ctx, t)?;
    let push = |z: &[Complex64], amount: f64| -> Vec<Complex64> {
        z.iter().zip(ctx.normal.iter()).map(|(a, nu)| a - nu * amount).collect()
    };
    let deeper_center = push(&center, h);
    let w_h = push(w, h);
    if !ctx.domain.contains_in_box(&deeper_center) || !ctx.domain.contains_in_box(&w_h) {
        return Err(Error::LeavesBox { what: "box-decomposition push".into() });
    }
    let f_center = f.eval(&center)?;
    let f_deeper = f.eval(&deeper_center)?;
    let f_wh = f.eval(&w_h)?;
    let f_w = f.eval(w)?;
    Ok(BoxTerms {
        i: (f_center - f_deeper).norm(),
        ii: (f_deeper - f_wh).norm(),
        iii: (f_wh - f_w).norm(),
        h,
    })
}

#[derive(Clone, Debug)]
pub struct GainRow {
    pub delta: f64,
    pub radius: f64,
    pub sup_ratio: f64,
    pub mean_ratio: f64,
    pub argmax: Vec<Complex64>,
    pub box_terms: BoxTerms,
}

#[derive(Clone, Debug)]
pub struct GainReport {
    pub alpha: f64,
    pub k0: u32,
    pub rows: Vec<GainRow>,
    /// The recorded constant: the overall sup of the gain ratio.
    pub c_constant: f64,
    /// max/min of the per-level sups (1 when all levels vanish).
    pub band_ratio: f64,
    pub passed: bool,
}

/// Sweep gain ratios over dyadic depth levels δ_j = δ₀·2^{−j}. Passes when
/// the per-level sups stay within a factor 10 of each other, the
/// finite-sample proxy for a bounded constant.
pub fn verify_main_theorem(
    f: &TestFunction,
    ctx: &DiscContext,
    alpha: f64,
    delta0: f64,
    levels: usize,
    fill: f64,
    n_per_disc: usize,
) -> Result<GainReport> {
    if levels < 2 {
        return Err(Error::ParameterRange { msg: format!("levels {levels} below minimum 2") });
    }
    if !(delta0 > 0.0 && delta0 <= ctx.t_max) {
        return Err(Error::ParameterRange { msg: format!("delta0 {delta0} outside (0, t_max]") });
    }
    let est = disc::estimate_k0(ctx)?;
    let k0 = match est.order {
        OrderEstimate::Determined(k) => k,
        other => {
            return Err(Error::ParameterRange {
                msg: format!("contact order is {other:?}; the gain hypothesis needs a finite even order"),
            })
        }
    };
    if alpha >= 1.0 / k0 as f64 {
        return Err(Error::ParameterRange {
            msg: format!("alpha {alpha} violates the hypothesis alpha < 1/{k0}"),
        });
    }
    let mut rows = Vec::with_capacity(levels);
    for j in 0..levels {
        let delta = delta0 * 0.5f64.powi(j as i32);
        let radius = disc::r_of_t(ctx, delta, RadiusMode::Definition)?.radius;
        let samples = disc::disc_samples(ctx, delta, fill, n_per_disc)?;
        let mut sup = 0.0f64;
        let mut sum = 0.0f64;
        let mut argmax = samples[0].clone();
        for w in &samples {
            let ratio = gain_ratio(f, ctx, delta, w, alpha)?;
            sum += ratio;
            if ratio > sup {
                sup = ratio;
                argmax = w.clone();
            }
        }
        let box_terms = box_decomposition(f, ctx, delta, &argmax)?;
        rows.push(GainRow {
            delta,
            radius,
            sup_ratio: sup,
            mean_ratio: sum / samples.len() as f64,
            argmax,
            box_terms,
        });
    }
    let c_constant = rows.iter().map(|r| r.sup_ratio).fold(0.0, f64::max);
    let positive: Vec<f64> = rows.iter().map(|r| r.sup_ratio).filter(|&s| s > 0.0).collect();
    let band_ratio = if positive.is_empty() {
        1.0
    } else {
        let max = positive.iter().cloned().fold(f64::MIN, f64::max);
        let min = positive.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    };
    Ok(GainReport {
        alpha,
        k0,
        rows,
        c_constant,
        band_ratio,
        passed: band_ratio <= 10.0,
    })
}
