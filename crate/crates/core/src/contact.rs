//! Exact contact orders along holomorphic curves.
//!
//! Order-of-vanishing is discontinuous in coefficients, so everything in this
//! module runs in Gaussian-rational arithmetic: curves carry exact
//! coefficients, compositions are expanded exactly, and a reported order is a
//! theorem about the input polynomial, not an estimate. The numeric
//! counterpart lives in [`crate::disc::estimate_k0`]; the two are
//! cross-checked in tests and in the CLI parity commands.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::config::RunConfig;
use crate::disc::{self, DiscContext, OrderEstimate};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::{to_poly, PolyExpr};
use crate::rational::{rationalize, GRat};

/// Continued-fraction denominator cap when float data is promoted to exact.
pub const RATIONALIZE_DENOMINATOR_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderValue {
    Finite(u32),
    Infinite,
}

impl OrderValue {
    pub fn finite(&self) -> Option<u32> {
        match self {
            OrderValue::Finite(k) => Some(*k),
            OrderValue::Infinite => None,
        }
    }
}

impl std::fmt::Display for OrderValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderValue::Finite(k) => write!(f, "{k}"),
            OrderValue::Infinite => write!(f, "inf"),
        }
    }
}

/// Sign classification of the lowest-degree stratum of a composition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeadingSign {
    /// Stratum is c·ζ^{m/2}ζ̄^{m/2} with c > 0 (the pseudoconvex shape).
    Positive,
    /// Composition vanishes identically.
    Zero,
    /// Diagonal stratum with negative coefficient.
    Negative,
    /// Off-diagonal monomials present in the lowest stratum (includes every
    /// odd-order case).
    Mixed,
}

#[derive(Clone, Debug)]
pub struct ContactReport {
    pub order: OrderValue,
    pub curve_order: u32,
    /// order / curve_order, reduced; `None` when the order is infinite.
    pub ratio: Option<(u32, u32)>,
    pub leading: LeadingSign,
    /// Coefficient of |ζ|^m when the lowest stratum is diagonal.
    pub leading_coefficient: Option<GRat>,
}

/// A polynomial holomorphic disc ζ ↦ (F_1(ζ), …, F_n(ζ)) with exact
/// coefficients. `components[j][k]` multiplies ζ^k.
#[derive(Clone, Debug)]
pub struct HoloCurve {
    components: Vec<Vec<GRat>>,
}

impl HoloCurve {
    pub fn new(components: Vec<Vec<GRat>>) -> Result<HoloCurve> {
        if components.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: components.len() });
        }
        let mut trimmed: Vec<Vec<GRat>> = Vec::with_capacity(components.len());
        for mut comp in components {
            while comp.last().map_or(false, GRat::is_zero) {
                comp.pop();
            }
            trimmed.push(comp);
        }
        if !trimmed.iter().any(|c| c.len() > 1) {
            return Err(Error::BadCurve { index: 0, msg: "every component is constant".into() });
        }
        Ok(HoloCurve { components: trimmed })
    }

    /// The affine line ζ ↦ base + ζ·dir.
    pub fn line(base: &[GRat], dir: &[GRat]) -> Result<HoloCurve> {
        if base.len() != dir.len() {
            return Err(Error::DimensionMismatch { expected: base.len(), got: dir.len() });
        }
        HoloCurve::new(
            base.iter().zip(dir.iter()).map(|(b, d)| vec![b.clone(), d.clone()]).collect(),
        )
    }

    /// Parse semicolon-separated component polynomials in the single
    /// variable z, e.g. `"z^3; z^2; 0"`.
    pub fn parse(src: &str, dim: usize) -> Result<HoloCurve> {
        let parts: Vec<&str> = src.split(';').collect();
        if parts.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: parts.len() });
        }
        let mut components = Vec::with_capacity(dim);
        for (index, part) in parts.iter().enumerate() {
            components.push(parse_component(part).map_err(|e| Error::BadCurve {
                index,
                msg: e.to_string(),
            })?);
        }
        HoloCurve::new(components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// F(0): the constant coefficients.
    pub fn base(&self) -> Vec<GRat> {
        self.components
            .iter()
            .map(|c| c.first().cloned().unwrap_or_else(GRat::zero))
            .collect()
    }

    /// ord(F): the order of vanishing of F − F(0) at ζ = 0.
    pub fn order(&self) -> u32 {
        self.components
            .iter()
            .filter_map(|c| c.iter().enumerate().skip(1).find(|(_, v)| !v.is_zero()))
            .map(|(k, _)| k as u32)
            .min()
            .expect("curve has a nonconstant component")
    }

    /// The reparametrized curve ζ ↦ F(λζ).
    pub fn reparametrize(&self, lambda: &GRat) -> HoloCurve {
        let components = self
            .components
            .iter()
            .map(|comp| {
                let mut power = GRat::one();
                comp.iter()
                    .map(|c| {
                        let out = c * &power;
                        power = &power * lambda;
                        out
                    })
                    .collect()
            })
            .collect();
        HoloCurve { components }
    }
}

/// Parse one curve component: a polynomial in the lone variable z.
fn parse_component(src: &str) -> Result<Vec<GRat>> {
    // The expression parser wants indexed variables; rename the bare z. A
    // leading minus sign is sugar for subtraction from zero.
    let src = src.trim();
    let src = if src.starts_with('-') { format!("0 {src}") } else { src.to_string() };
    let mut renamed = String::with_capacity(src.len() + 4);
    let chars: Vec<char> = src.chars().collect();
    for (i, &ch) in chars.iter().enumerate() {
        renamed.push(ch);
        if ch == 'z' && chars.get(i + 1).map_or(true, |c| !c.is_ascii_digit()) {
            renamed.push('1');
        }
    }
    let expr = crate::expr::parse(&renamed, 2)?;
    let poly = to_poly(&expr, 2)?;
    let mut coeffs: Vec<GRat> = Vec::new();
    for (mono, coeff) in poly.terms() {
        if mono.zbar_exponent(0) != 0 || mono.zbar_exponent(1) != 0 || mono.z_exponent(1) != 0 {
            return Err(Error::Parse {
                offset: 0,
                msg: "curve components must be holomorphic polynomials in z".into(),
            });
        }
        let k = mono.z_exponent(0) as usize;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, GRat::zero());
        }
        coeffs[k] = coeff.clone();
    }
    Ok(coeffs)
}

fn poly_mul_exact(a: &[GRat], b: &[GRat]) -> Vec<GRat> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![GRat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow_exact(base: &[GRat], e: u16) -> Vec<GRat> {
    let mut acc = vec![GRat::one()];
    for _ in 0..e {
        acc = poly_mul_exact(&acc, base);
    }
    acc
}

/// Exact expansion of r∘F as a polynomial in (ζ, ζ̄).
fn compose(r: &PolyExpr, f: &HoloCurve) -> BTreeMap<(u32, u32), GRat> {
    let n = r.dim();
    let mut acc: BTreeMap<(u32, u32), GRat> = BTreeMap::new();
    for (mono, coeff) in r.terms() {
        let mut holo = vec![GRat::one()];
        let mut anti = vec![GRat::one()];
        for j in 0..n {
            let e = mono.z_exponent(j);
            if e > 0 {
                holo = poly_mul_exact(&holo, &poly_pow_exact(&f.components[j], e));
            }
            let fbar = mono.zbar_exponent(j);
            if fbar > 0 {
                let conj: Vec<GRat> = f.components[j].iter().map(GRat::conj).collect();
                anti = poly_mul_exact(&anti, &poly_pow_exact(&conj, fbar));
            }
        }
        for (a, ca) in holo.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in anti.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let term = coeff * &(ca * cb);
                let slot = acc.entry((a as u32, b as u32)).or_insert_with(GRat::zero);
                *slot += term;
            }
        }
    }
    acc.retain(|_, v| !v.is_zero());
    acc
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact order of vanishing of r∘F, with the lowest-stratum shape analysis.
pub fn compose_order(r: &PolyExpr, f: &HoloCurve) -> Result<ContactReport> {
    if f.dim() != r.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), got: f.dim() });
    }
    let base = f.base();
    if !r.eval_exact(&base)?.is_zero() {
        return Err(Error::BaseNotOnZeroSet);
    }
    let curve_order = f.order();
    let expansion = compose(r, f);
    let Some(order) = expansion.keys().map(|&(a, b)| a + b).min() else {
        return Ok(ContactReport {
            order: OrderValue::Infinite,
            curve_order,
            ratio: None,
            leading: LeadingSign::Zero,
            leading_coefficient: None,
        });
    };
    let stratum: Vec<(&(u32, u32), &GRat)> =
        expansion.iter().filter(|&(&(a, b), _)| a + b == order).collect();
    let diagonal = order % 2 == 0
        && stratum.len() == 1
        && *stratum[0].0 == (order / 2, order / 2)
        && stratum[0].1.is_real();
    let (leading, leading_coefficient) = if diagonal {
        let c = stratum[0].1.clone();
        match c.real_sign() {
            Some(1) => (LeadingSign::Positive, Some(c)),
            _ => (LeadingSign::Negative, Some(c)),
        }
    } else {
        (LeadingSign::Mixed, None)
    };
    let g = gcd(order, curve_order);
    Ok(ContactReport {
        order: OrderValue::Finite(order),
        curve_order,
        ratio: Some((order / g, curve_order / g)),
        leading,
        leading_coefficient,
    })
}

/// Contact order of the line P + ζv with {r = 0}; v must annihilate the
/// holomorphic gradient at P exactly.
pub fn line_type(r: &PolyExpr, base: &[GRat], dir: &[GRat]) -> Result<ContactReport> {
    let n = r.dim();
    if base.len() != n || dir.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: base.len().min(dir.len()) });
    }
    let mut pairing = GRat::zero();
    for j in 0..n {
        let dj = r.derivative(j, false).eval_exact(base)?;
        pairing += &dj * &dir[j];
    }
    if !pairing.is_zero() {
        return Err(Error::NotTangent { residual: pairing.to_c64().norm(), tol: 0.0 });
    }
    compose_order(r, &HoloCurve::line(base, dir)?)
}

// --- direction sweeps -----------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub max_order: OrderValue,
    pub argmax: Vec<Complex64>,
    /// Directions per finite order.
    pub histogram: BTreeMap<u32, usize>,
    pub infinite_count: usize,
    pub undetermined_count: usize,
    /// Whether the exact rational path was used (false: numeric estimator
    /// fallback at a non-rational base point).
    pub exact: bool,
    pub n_dirs: usize,
}

const SQRT_PRIMES: [f64; 16] = [
    2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0, 47.0, 53.0,
];

/// Deterministic direction supply: coordinate axes, four-phase pairwise
/// combinations, then a Kronecker low-discrepancy fill.
fn candidate_directions(n: usize, count: usize) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(count + 2 * n * n);
    let mut axis = |j: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[j] = Complex64::new(1.0, 0.0);
        v
    };
    let axes: Vec<Vec<Complex64>> = (0..n).map(&mut axis).collect();
    out.extend(axes.iter().cloned());
    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    for j in 0..n {
        for k in (j + 1)..n {
            for ph in phases {
                let mut v = axes[j].clone();
                v[k] = ph;
                out.push(v);
            }
        }
    }
    let mut k = 0usize;
    while out.len() < count + 2 * n * n {
        k += 1;
        let mut v = Vec::with_capacity(n);
        for j in 0..n {
            let a = (k as f64 * SQRT_PRIMES[(2 * j) % SQRT_PRIMES.len()].sqrt()).fract();
            let b = (k as f64 * SQRT_PRIMES[(2 * j + 1) % SQRT_PRIMES.len()].sqrt()).fract();
            v.push(Complex64::new(2.0 * a - 1.0, 2.0 * b - 1.0));
        }
        out.push(v);
    }
    out
}

fn rationalize_c64(z: Complex64, cap: u64) -> GRat {
    GRat::new(rationalize(z.re, cap), rationalize(z.im, cap))
}

/// Maximum line type over a deterministic grid of tangent directions. Uses
/// exact arithmetic when the base point rationalizes onto the zero set;
/// otherwise falls back to the numeric order estimator with `exact: false`.
pub fn line_type_sweep(
    domain: &Domain,
    base: &[Complex64],
    n_dirs: usize,
    config: &RunConfig,
) -> Result<SweepReport> {
    if n_dirs < 8 {
        return Err(Error::ParameterRange { msg: format!("n_dirs {n_dirs} below minimum 8") });
    }
    if base.len() != domain.dimension {
        return Err(Error::DimensionMismatch { expected: domain.dimension, got: base.len() });
    }
    if let Some(poly) = &domain.poly {
        let base_exact: Vec<GRat> =
            base.iter().map(|&z| rationalize_c64(z, RATIONALIZE_DENOMINATOR_CAP)).collect();
        let on_zero_set = poly.eval_exact(&base_exact)?.is_zero();
        let close = base_exact
            .iter()
            .zip(base.iter())
            .all(|(q, z)| (q.to_c64() - z).norm() <= 1e-9);
        if on_zero_set && close {
            if let Some(report) = exact_sweep(poly, &base_exact, n_dirs)? {
                return Ok(report);
            }
        }
    }
    numeric_sweep(domain, base, n_dirs, config)
}

fn exact_sweep(poly: &PolyExpr, base: &[GRat], n_dirs: usize) -> Result<Option<SweepReport>> {
    let n = poly.dim();
    let grad: Vec<GRat> = (0..n)
        .map(|j| poly.derivative(j, false).eval_exact(base))
        .collect::<Result<_>>()?;
    let pivot = (0..n).max_by(|&a, &b| {
        grad[a]
            .to_c64()
            .norm()
            .partial_cmp(&grad[b].to_c64().norm())
            .expect("finite gradient")
    });
    let Some(pivot) = pivot else { return Ok(None) };
    let Some(pivot_inv) = grad[pivot].inv() else {
        // Degenerate exact gradient: leave this to the numeric path.
        return Ok(None);
    };

    let mut histogram: BTreeMap<u32, usize> = BTreeMap::new();
    let mut infinite_count = 0usize;
    let mut best: Option<(OrderValue, Vec<GRat>)> = None;
    let mut used = 0usize;
    for candidate in candidate_directions(n, 4 * n_dirs) {
        if used == n_dirs {
            break;
        }
        let mut dir: Vec<GRat> = candidate
            .iter()
            .map(|&z| rationalize_c64(z, RATIONALIZE_DENOMINATOR_CAP))
            .collect();
        // Exact tangency correction along the pivot coordinate.
        let mut pairing = GRat::zero();
        for j in 0..n {
            pairing += &grad[j] * &dir[j];
        }
        dir[pivot] = dir[pivot].clone() - &pairing * &pivot_inv;
        if dir.iter().all(GRat::is_zero) {
            continue;
        }
        used += 1;
        let report = line_type(poly, base, &dir)?;
        match report.order {
            OrderValue::Finite(k) => {
                *histogram.entry(k).or_insert(0) += 1;
                let better = match &best {
                    None => true,
                    Some((OrderValue::Infinite, _)) => false,
                    Some((OrderValue::Finite(b), _)) => k > *b,
                };
                if better {
                    best = Some((OrderValue::Finite(k), dir.clone()));
                }
            }
            OrderValue::Infinite => {
                infinite_count += 1;
                if !matches!(best, Some((OrderValue::Infinite, _))) {
                    best = Some((OrderValue::Infinite, dir.clone()));
                }
            }
        }
    }
    let Some((max_order, argmax)) = best else { return Ok(None) };
    Ok(Some(SweepReport {
        max_order,
        argmax: argmax.iter().map(GRat::to_c64).collect(),
        histogram,
        infinite_count,
        undetermined_count: 0,
        exact: true,
        n_dirs: used,
    }))
}

fn numeric_sweep(
    domain: &Domain,
    base: &[Complex64],
    n_dirs: usize,
    config: &RunConfig,
) -> Result<SweepReport> {
    let n = domain.dimension;
    let grad = crate::geom::holomorphic_gradient(&domain.defining, base)?;
    let pivot = (0..n)
        .max_by(|&a, &b| grad[a].norm().partial_cmp(&grad[b].norm()).expect("finite gradient"))
        .expect("positive dimension");
    if grad[pivot].norm() < 1e-12 {
        return Err(Error::DegenerateGradient { value: grad[pivot].norm(), tol: 1e-12 });
    }
    let mut histogram: BTreeMap<u32, usize> = BTreeMap::new();
    let mut infinite_count = 0usize;
    let mut undetermined_count = 0usize;
    let mut best: Option<(OrderValue, Vec<Complex64>)> = None;
    let mut used = 0usize;
    for mut dir in candidate_directions(n, 4 * n_dirs) {
        if used == n_dirs {
            break;
        }
        let pairing: Complex64 = grad.iter().zip(dir.iter()).map(|(g, d)| g * d).sum();
        dir[pivot] -= pairing / grad[pivot];
        let norm = crate::geom::vec_norm(&dir);
        if norm < 1e-9 {
            continue;
        }
        used += 1;
        let ctx = DiscContext::new(domain, base, &dir, config)?;
        let est = disc::estimate_k0(&ctx)?;
        match est.order {
            OrderEstimate::Determined(k) => {
                *histogram.entry(k).or_insert(0) += 1;
                let better = match &best {
                    None => true,
                    Some((OrderValue::Infinite, _)) => false,
                    Some((OrderValue::Finite(b), _)) => k > *b,
                };
                if better {
                    best = Some((OrderValue::Finite(k), dir.clone()));
                }
            }
            OrderEstimate::Undetermined => undetermined_count += 1,
            OrderEstimate::Infinite => {
                infinite_count += 1;
                if !matches!(best, Some((OrderValue::Infinite, _))) {
                    best = Some((OrderValue::Infinite, dir.clone()));
                }
            }
        }
    }
    let (max_order, argmax) = best.ok_or_else(|| Error::ParameterRange {
        msg: "no usable sweep directions".into(),
    })?;
    Ok(SweepReport {
        max_order,
        argmax,
        histogram,
        infinite_count,
        undetermined_count,
        exact: false,
        n_dirs: used,
    })
}

/// D'Angelo's openness bound Δ^{n−1} / 2^{n−2}, exactly.
pub fn openness_bound(delta_q: u32, n: u32) -> Result<BigRational> {
    if delta_q < 2 || delta_q % 2 != 0 {
        return Err(Error::ParameterRange {
            msg: format!("type bound must be an even integer ≥ 2, got {delta_q}"),
        });
    }
    if n < 2 {
        return Err(Error::ParameterRange { msg: format!("dimension {n} below 2") });
    }
    let num = BigInt::from(delta_q).pow(n - 1);
    let den = BigInt::from(2).pow(n - 2);
    Ok(BigRational::new(num, den))
}

// --- parity audit ---------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityStatus {
    Checked,
    /// Composition vanishes identically: nothing to audit.
    SkippedFlat,
    /// First-order (transverse) contact: the parity statement concerns
    /// tangential curves, so order-1 crossings are exempt.
    SkippedTransverse,
}

#[derive(Clone, Debug)]
pub struct ParityEntry {
    pub index: usize,
    pub order: OrderValue,
    pub leading: LeadingSign,
    pub status: ParityStatus,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct ParityReport {
    pub entries: Vec<ParityEntry>,
    pub violations: usize,
    pub passed: bool,
}

/// Audit even order and positive leading coefficient for each curve based at
/// `base`. Violations are evidence against pseudoconvexity of the input and
/// are reported, not raised.
pub fn parity_audit(r: &PolyExpr, base: &[GRat], curves: &[HoloCurve]) -> Result<ParityReport> {
    let mut entries = Vec::with_capacity(curves.len());
    let mut violations = 0usize;
    for (index, curve) in curves.iter().enumerate() {
        let curve_base = curve.base();
        if curve_base.len() != base.len()
            || curve_base.iter().zip(base.iter()).any(|(a, b)| a != b)
        {
            return Err(Error::BadCurve { index, msg: "curve is not based at the audit point".into() });
        }
        let report = compose_order(r, curve)?;
        let (status, ok) = match report.order {
            OrderValue::Infinite => (ParityStatus::SkippedFlat, true),
            OrderValue::Finite(1) => (ParityStatus::SkippedTransverse, true),
            OrderValue::Finite(k) => {
                let ok = k % 2 == 0 && report.leading == LeadingSign::Positive;
                (ParityStatus::Checked, ok)
            }
        };
        if !ok {
            violations += 1;
        }
        entries.push(ParityEntry { index, order: report.order, leading: report.leading, status, ok });
    }
    Ok(ParityReport { entries, violations, passed: violations == 0 })
}
