//! Model domains and the JSON registry.
//!
//! A [`Domain`] bundles a defining function with the data every experiment
//! needs: the ambient dimension, a neighborhood box, validated base points on
//! the boundary, structural flags, and (when the defining function is a graph
//! over `Re z_n` plus a Hermitian sum of squares) the holomorphic pieces of
//! that sum. Six built-in domains are always available; more can be loaded
//! from a JSON registry file, validated field by field with JSON-pointer
//! error positions.

use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::{parse, to_poly, Expr, PolyExpr};
use crate::geom;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DomainFlags {
    /// Defining function has the form Re z_n + h(z', Im z_n).
    pub graph_form: bool,
    /// h is a Hermitian sum of squares of the entries of `p_list`.
    pub hermitian_sos: bool,
    /// Pseudoconvexity is asserted by construction, not verified.
    pub pseudoconvex_asserted: bool,
}

/// A model domain `{r < 0}` with its study neighborhood.
#[derive(Clone, Debug)]
pub struct Domain {
    pub name: String,
    pub dimension: usize,
    pub defining_source: String,
    pub defining: Expr,
    /// Exact polynomial form; absent when the source has floating constants.
    pub poly: Option<PolyExpr>,
    /// 2n interval bounds, real/imag interleaved: entry 2j bounds Re z_{j+1},
    /// entry 2j+1 bounds Im z_{j+1}.
    pub box_bounds: Vec<(f64, f64)>,
    pub base_points: Vec<Vec<Complex64>>,
    pub flags: DomainFlags,
    pub p_sources: Vec<String>,
    /// Holomorphic pieces q_j: for SOS domains r = Re z_n + Σ|q_j|²; also the
    /// squares used to build conjugate test functions.
    pub p_list: Vec<Expr>,
}

impl Domain {
    /// Build and validate a domain. `box_bounds` holds 2n (lo, hi) pairs,
    /// real/imag interleaved.
    pub fn new(
        name: &str,
        dimension: usize,
        defining_source: &str,
        box_bounds: Vec<(f64, f64)>,
        base_points: Vec<Vec<Complex64>>,
        flags: DomainFlags,
        p_sources: Vec<String>,
    ) -> Result<Domain> {
        if dimension < 2 {
            return Err(Error::ParameterRange { msg: format!("dimension {dimension} < 2") });
        }
        if box_bounds.len() != 2 * dimension {
            return Err(Error::DimensionMismatch { expected: 2 * dimension, got: box_bounds.len() });
        }
        for (lo, hi) in &box_bounds {
            if !(lo < hi) {
                return Err(Error::ParameterRange { msg: format!("empty box interval [{lo}, {hi}]") });
            }
        }
        let defining = parse(defining_source, dimension)?;
        let poly = to_poly(&defining, dimension).ok();
        let p_list = p_sources
            .iter()
            .map(|src| parse(src, dimension))
            .collect::<Result<Vec<_>>>()?;
        let domain = Domain {
            name: name.to_string(),
            dimension,
            defining_source: defining_source.to_string(),
            defining,
            poly,
            box_bounds,
            base_points,
            flags,
            p_sources,
            p_list,
        };
        domain.validate_base_points()?;
        domain.validate_sos_identity()?;
        Ok(domain)
    }

    fn validate_base_points(&self) -> Result<()> {
        if self.base_points.is_empty() {
            return Err(Error::ParameterRange { msg: format!("domain {} has no base points", self.name) });
        }
        for p in &self.base_points {
            if p.len() != self.dimension {
                return Err(Error::DimensionMismatch { expected: self.dimension, got: p.len() });
            }
            if !self.contains_in_box(p) {
                return Err(Error::LeavesBox { what: format!("base point of {}", self.name) });
            }
            // Raises NotOnBoundary / DegenerateGradient on bad points.
            geom::outward_normal(&self.defining, p)?;
        }
        Ok(())
    }

    /// For SOS domains, `r − Re z_n − Σ|q_j|²` must vanish identically:
    /// exactly when the expansion is rational, else at sampled points.
    fn validate_sos_identity(&self) -> Result<()> {
        if !self.flags.hermitian_sos {
            return Ok(());
        }
        let n = self.dimension;
        let mut claimed = crate::expr::re_part(Expr::var(n - 1));
        for q in &self.p_list {
            claimed = crate::expr::add(claimed, crate::expr::abs2(q.clone()));
        }
        let diff = crate::expr::sub(self.defining.clone(), claimed);
        match to_poly(&diff, n) {
            Ok(p) => {
                if !p.is_zero() {
                    return Err(Error::MissingSosStructure { name: self.name.clone() });
                }
            }
            Err(_) => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
                for _ in 0..100 {
                    let z: Vec<Complex64> = (0..n)
                        .map(|_| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
                        .collect();
                    if diff.eval(&z)?.norm() > 1e-10 {
                        return Err(Error::MissingSosStructure { name: self.name.clone() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn re_bounds(&self, j: usize) -> (f64, f64) {
        self.box_bounds[2 * j]
    }

    pub fn im_bounds(&self, j: usize) -> (f64, f64) {
        self.box_bounds[2 * j + 1]
    }

    pub fn contains_in_box(&self, z: &[Complex64]) -> bool {
        z.len() == self.dimension
            && z.iter().enumerate().all(|(j, c)| {
                let (rlo, rhi) = self.re_bounds(j);
                let (ilo, ihi) = self.im_bounds(j);
                (rlo..=rhi).contains(&c.re) && (ilo..=ihi).contains(&c.im)
            })
    }

    /// Distance from `p` to the nearest box face, per coordinate: how far the
    /// j-th coordinate may move (in either real or imaginary direction)
    /// before leaving the box.
    pub fn coordinate_margins(&self, p: &[Complex64]) -> Vec<f64> {
        (0..self.dimension)
            .map(|j| {
                let (rlo, rhi) = self.re_bounds(j);
                let (ilo, ihi) = self.im_bounds(j);
                (p[j].re - rlo)
                    .min(rhi - p[j].re)
                    .min(p[j].im - ilo)
                    .min(ihi - p[j].im)
            })
            .collect()
    }

    /// First registered base point.
    pub fn base_point(&self) -> &[Complex64] {
        &self.base_points[0]
    }
}

/// The six domains available without a registry file.
pub fn builtins() -> Vec<Domain> {
    let sym = |half: f64, n: usize| vec![(-half, half); 2 * n];
    let all = DomainFlags { graph_form: true, hermitian_sos: true, pseudoconvex_asserted: true };
    vec![
        Domain::new(
            "halfspace",
            2,
            "Re(z2)",
            sym(0.5, 2),
            vec![vec![Complex64::new(0.0, 0.0); 2]],
            all,
            vec![],
        )
        .expect("builtin halfspace"),
        Domain::new(
            "ball",
            2,
            "abs2(z1) + abs2(z2) - 1",
            vec![(-0.35, 0.35), (-0.35, 0.35), (0.5, 1.5), (-0.5, 0.5)],
            vec![vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
            DomainFlags { graph_form: false, hermitian_sos: false, pseudoconvex_asserted: true },
            vec!["1/2*z1".to_string()],
        )
        .expect("builtin ball"),
        Domain::new(
            "herbort",
            3,
            "Re(z3) + abs2(z1*z1*z1) + abs2(z1*z2) + abs2(z2*z2*z2)",
            sym(0.5, 3),
            vec![vec![Complex64::new(0.0, 0.0); 3]],
            all,
            vec!["z1^3".to_string(), "z1*z2".to_string(), "z2^3".to_string()],
        )
        .expect("builtin herbort"),
        Domain::new(
            "dangelo",
            3,
            "Re(z3) + abs2(z1*z1 - z2*z2*z2)",
            sym(0.5, 3),
            vec![vec![Complex64::new(0.0, 0.0); 3]],
            all,
            vec!["z1^2 - z2^3".to_string()],
        )
        .expect("builtin dangelo"),
        Domain::new(
            "egg4",
            2,
            "Re(z2) + abs2(z1)^2",
            sym(0.5, 2),
            vec![vec![Complex64::new(0.0, 0.0); 2]],
            all,
            vec!["z1^2".to_string()],
        )
        .expect("builtin egg4"),
        Domain::new(
            "egg6",
            2,
            "Re(z2) + abs2(z1)^3",
            sym(0.5, 2),
            vec![vec![Complex64::new(0.0, 0.0); 2]],
            all,
            vec!["z1^3".to_string()],
        )
        .expect("builtin egg6"),
    ]
}

/// Look up a domain by name among built-ins plus `extra`.
pub fn find_domain(extra: &[Domain], name: &str) -> Result<Domain> {
    if let Some(d) = extra.iter().find(|d| d.name == name) {
        return Ok(d.clone());
    }
    builtins()
        .into_iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownDomain { name: name.to_string() })
}

pub fn load_registry(path: &Path) -> Result<Vec<Domain>> {
    let text = std::fs::read_to_string(path)?;
    load_registry_str(&text)
}

/// Parse and validate a registry document. Schema errors carry the JSON
/// pointer of the offending value.
pub fn load_registry_str(text: &str) -> Result<Vec<Domain>> {
    let root: Value = serde_json::from_str(text)?;
    let obj = expect_object(&root, "")?;
    let version = expect_u64(require(obj, "schema_version", "")?, "/schema_version")?;
    if version != 1 {
        return Err(violation("/schema_version", format!("unsupported version {version}")));
    }
    let domains_val = require(obj, "domains", "")?;
    let list = expect_array(domains_val, "/domains")?;
    let mut domains = Vec::with_capacity(list.len());
    for (i, entry) in list.iter().enumerate() {
        domains.push(domain_from_value(entry, &format!("/domains/{i}"))?);
    }
    Ok(domains)
}

fn domain_from_value(v: &Value, ptr: &str) -> Result<Domain> {
    let obj = expect_object(v, ptr)?;

    let name_ptr = format!("{ptr}/name");
    let name = expect_str(require(obj, "name", ptr)?, &name_ptr)?;
    if name.is_empty()
        || !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(violation(&name_ptr, format!("invalid identifier {name:?}")));
    }

    let dim_ptr = format!("{ptr}/dimension");
    let dimension = expect_u64(require(obj, "dimension", ptr)?, &dim_ptr)? as usize;
    if dimension < 2 {
        return Err(violation(&dim_ptr, format!("dimension {dimension} < 2")));
    }

    let defining_ptr = format!("{ptr}/defining");
    let defining_source = expect_str(require(obj, "defining", ptr)?, &defining_ptr)?;
    if let Err(e) = parse(defining_source, dimension) {
        return Err(violation(&defining_ptr, format!("does not parse: {e}")));
    }

    let box_ptr = format!("{ptr}/box");
    let box_list = expect_array(require(obj, "box", ptr)?, &box_ptr)?;
    if box_list.len() != 2 * dimension {
        return Err(violation(&box_ptr, format!("expected {} intervals, got {}", 2 * dimension, box_list.len())));
    }
    let mut box_bounds = Vec::with_capacity(box_list.len());
    for (k, iv) in box_list.iter().enumerate() {
        let iv_ptr = format!("{box_ptr}/{k}");
        let pair = expect_array(iv, &iv_ptr)?;
        if pair.len() != 2 {
            return Err(violation(&iv_ptr, format!("expected [lo, hi], got {} entries", pair.len())));
        }
        let lo = expect_f64(&pair[0], &format!("{iv_ptr}/0"))?;
        let hi = expect_f64(&pair[1], &format!("{iv_ptr}/1"))?;
        if !(lo < hi) {
            return Err(violation(&iv_ptr, format!("empty interval [{lo}, {hi}]")));
        }
        box_bounds.push((lo, hi));
    }

    let bp_ptr = format!("{ptr}/base_points");
    let bp_list = expect_array(require(obj, "base_points", ptr)?, &bp_ptr)?;
    if bp_list.is_empty() {
        return Err(violation(&bp_ptr, "at least one base point required".into()));
    }
    let mut base_points = Vec::with_capacity(bp_list.len());
    for (k, pt) in bp_list.iter().enumerate() {
        let pt_ptr = format!("{bp_ptr}/{k}");
        let coords = expect_array(pt, &pt_ptr)?;
        if coords.len() != dimension {
            return Err(violation(&pt_ptr, format!("expected {dimension} coordinates, got {}", coords.len())));
        }
        let mut point = Vec::with_capacity(dimension);
        for (j, cv) in coords.iter().enumerate() {
            let c_ptr = format!("{pt_ptr}/{j}");
            let pair = expect_array(cv, &c_ptr)?;
            if pair.len() != 2 {
                return Err(violation(&c_ptr, format!("expected [re, im], got {} entries", pair.len())));
            }
            point.push(Complex64::new(
                expect_f64(&pair[0], &format!("{c_ptr}/0"))?,
                expect_f64(&pair[1], &format!("{c_ptr}/1"))?,
            ));
        }
        base_points.push(point);
    }

    let mut flags = DomainFlags::default();
    if let Some(fv) = obj.get("flags") {
        let f_ptr = format!("{ptr}/flags");
        let fobj = expect_object(fv, &f_ptr)?;
        for key in fobj.keys() {
            if !matches!(key.as_str(), "graph_form" | "hermitian_sos" | "pseudoconvex_asserted") {
                return Err(violation(&format!("{f_ptr}/{key}"), "unknown flag".into()));
            }
        }
        let get_flag = |key: &str| -> Result<bool> {
            match fobj.get(key) {
                None => Ok(false),
                Some(Value::Bool(b)) => Ok(*b),
                Some(_) => Err(violation(&format!("{f_ptr}/{key}"), "expected boolean".into())),
            }
        };
        flags.graph_form = get_flag("graph_form")?;
        flags.hermitian_sos = get_flag("hermitian_sos")?;
        flags.pseudoconvex_asserted = get_flag("pseudoconvex_asserted")?;
    }

    let mut p_sources = Vec::new();
    if let Some(pv) = obj.get("p_list") {
        let p_ptr = format!("{ptr}/p_list");
        for (k, sv) in expect_array(pv, &p_ptr)?.iter().enumerate() {
            let s_ptr = format!("{p_ptr}/{k}");
            let src = expect_str(sv, &s_ptr)?;
            if let Err(e) = parse(src, dimension) {
                return Err(violation(&s_ptr, format!("does not parse: {e}")));
            }
            p_sources.push(src.to_string());
        }
    }

    Domain::new(name, dimension, defining_source, box_bounds, base_points, flags, p_sources)
        .map_err(|e| match e {
            Error::SchemaViolation { .. } => e,
            other => violation(ptr, other.to_string()),
        })
}

fn violation(pointer: &str, msg: String) -> Error {
    Error::SchemaViolation { pointer: pointer.to_string(), msg }
}

fn require<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| violation(&format!("{ptr}/{key}"), "missing field".into()))
}

fn expect_object<'a>(v: &'a Value, ptr: &str) -> Result<&'a serde_json::Map<String, Value>> {
    v.as_object().ok_or_else(|| violation(ptr, "expected object".into()))
}

fn expect_array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| violation(ptr, "expected array".into()))
}

fn expect_str<'a>(v: &'a Value, ptr: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| violation(ptr, "expected string".into()))
}

fn expect_u64(v: &Value, ptr: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| violation(ptr, "expected nonnegative integer".into()))
}

fn expect_f64(v: &Value, ptr: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| violation(ptr, "expected number".into()))
}
