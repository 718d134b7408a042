//! Finite Blaschke products, disk automorphisms and composition.
//!
//! A product of degree `n` is stored as its unimodular constant and the list
//! of its zeros (with repeats), never as expanded coefficients. Evaluation
//! walks the factors and accumulates the derivative with the product rule.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::polyroots::{self, poly};
use crate::ComplexPoint;

const POLE_GUARD: f64 = 1e-14;
const EVAL_RADIUS_SLACK: f64 = 1e-9;
/// Largest distance from 0 of the fiber point that normalization pins to 0.
const ORIGIN_SNAP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProduct")]
pub struct BlaschkeProduct {
    lambda: ComplexPoint,
    zeros: Vec<ComplexPoint>,
}

#[derive(Deserialize)]
struct RawProduct {
    lambda: ComplexPoint,
    zeros: Vec<ComplexPoint>,
}

impl TryFrom<RawProduct> for BlaschkeProduct {
    type Error = Error;

    fn try_from(raw: RawProduct) -> Result<Self> {
        BlaschkeProduct::new(raw.lambda, raw.zeros)
    }
}

impl BlaschkeProduct {
    /// Validates with the default unimodularity tolerance.
    pub fn new(lambda: ComplexPoint, zeros: Vec<ComplexPoint>) -> Result<Self> {
        Self::with_tolerance(lambda, zeros, Config::default().unimodular)
    }

    pub fn with_tolerance(lambda: ComplexPoint, zeros: Vec<ComplexPoint>, unimodular: f64) -> Result<Self> {
        if !is_finite(lambda) {
            return Err(Error::input("lambda", "components must be finite"));
        }
        if (lambda.norm() - 1.0).abs() > unimodular {
            return Err(Error::input(
                "lambda",
                format!("|lambda| = {} is not 1 within {unimodular:e}", lambda.norm()),
            ));
        }
        if zeros.is_empty() {
            return Err(Error::input("zeros", "degree must be at least 1"));
        }
        for (i, a) in zeros.iter().enumerate() {
            if !is_finite(*a) {
                return Err(Error::input(format!("zeros[{i}]"), "components must be finite"));
            }
            if a.norm() >= 1.0 {
                return Err(Error::input(
                    format!("zeros[{i}]"),
                    format!("|z| = {} is not inside the open unit disk", a.norm()),
                ));
            }
        }
        Ok(BlaschkeProduct { lambda, zeros })
    }

    /// `lambda * z^n`.
    pub fn monomial(n: usize, lambda: ComplexPoint) -> Result<Self> {
        Self::new(lambda, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn lambda(&self) -> ComplexPoint {
        self.lambda
    }

    pub fn zeros(&self) -> &[ComplexPoint] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// True when every zero is exactly the origin.
    pub fn is_monomial(&self) -> bool {
        self.zeros.iter().all(|a| a.re == 0.0 && a.im == 0.0)
    }

    /// Value and derivative at `z`.
    pub fn evaluate(&self, z: ComplexPoint) -> Result<(ComplexPoint, ComplexPoint)> {
        if !is_finite(z) || z.norm() > 1.0 + EVAL_RADIUS_SLACK {
            return Err(Error::Domain(format!(
                "evaluation point {z} lies outside the closed unit disk"
            )));
        }
        let mut value = self.lambda;
        let mut derivative = Complex64::new(0.0, 0.0);
        for a in &self.zeros {
            let denom = Complex64::new(1.0, 0.0) - a.conj() * z;
            if denom.norm() < POLE_GUARD {
                return Err(Error::Domain(format!("z = {z} is within {POLE_GUARD:e} of a pole")));
            }
            let factor = (z - a) / denom;
            let factor_derivative = (1.0 - a.norm_sqr()) / (denom * denom);
            derivative = derivative * factor + value * factor_derivative;
            value *= factor;
        }
        Ok((value, derivative))
    }

    pub fn value(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        self.evaluate(z).map(|(v, _)| v)
    }

    /// Numerator and denominator coefficients, ascending powers.
    pub fn to_rational(&self) -> RationalPair {
        let numerator = poly::from_roots(&self.zeros)
            .into_iter()
            .map(|c| c * self.lambda)
            .collect();
        // prod (1 - conj(a) z) = prod(-conj(a)) * prod(z - 1/conj(a)); expand directly instead.
        let mut denominator = vec![Complex64::new(1.0, 0.0)];
        for a in &self.zeros {
            denominator = poly::mul(&denominator, &[Complex64::new(1.0, 0.0), -a.conj()]);
        }
        RationalPair { numerator, denominator }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("finite values always serialize")
    }

    /// Parses the interchange schema `{"lambda": [re, im], "zeros": [[re, im], ...]}`,
    /// naming the offending field on failure.
    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::input("<root>", "expected a JSON object"))?;
        let lambda = obj
            .get("lambda")
            .ok_or_else(|| Error::input("lambda", "missing field"))
            .and_then(|v| parse_point(v, "lambda"))?;
        let zeros = obj
            .get("zeros")
            .ok_or_else(|| Error::input("zeros", "missing field"))?
            .as_array()
            .ok_or_else(|| Error::input("zeros", "expected an array of [re, im] pairs"))?
            .iter()
            .enumerate()
            .map(|(i, v)| parse_point(v, &format!("zeros[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(lambda, zeros)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::input("<document>", format!("malformed JSON: {e}")))?;
        Self::from_json(&value)
    }
}

fn parse_point(value: &Value, field: &str) -> Result<ComplexPoint> {
    let pair = value
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::input(field, "expected a two-element [re, im] array"))?;
    let re = pair[0]
        .as_f64()
        .ok_or_else(|| Error::input(field, "real part is not a number"))?;
    let im = pair[1]
        .as_f64()
        .ok_or_else(|| Error::input(field, "imaginary part is not a number"))?;
    Ok(Complex64::new(re, im))
}

pub(crate) fn is_finite(z: ComplexPoint) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `B = P / Q` with `P(z) = lambda * prod(z - a)` and `Q(z) = prod(1 - conj(a) z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPair {
    pub numerator: Vec<ComplexPoint>,
    pub denominator: Vec<ComplexPoint>,
}

impl RationalPair {
    pub fn degree(&self) -> usize {
        self.numerator.len() - 1
    }

    /// Coefficients of `P - w Q`, whose roots form the fiber over `w`.
    pub fn fiber_polynomial(&self, w: ComplexPoint) -> Vec<ComplexPoint> {
        self.numerator
            .iter()
            .zip(&self.denominator)
            .map(|(p, q)| p - w * q)
            .collect()
    }

    /// Numerator of `B'`, i.e. `P'Q - PQ'`.
    pub fn derivative_numerator(&self) -> Vec<ComplexPoint> {
        let dp = poly::derivative(&self.numerator);
        let dq = poly::derivative(&self.denominator);
        let left = poly::mul(&dp, &self.denominator);
        let right = poly::mul(&self.numerator, &dq);
        let len = left.len().max(right.len());
        (0..len)
            .map(|i| left.get(i).copied().unwrap_or_default() - right.get(i).copied().unwrap_or_default())
            .collect()
    }

    /// Newton step `(P - wQ) / (P' - wQ')` at `z`.
    pub fn newton_step(&self, z: ComplexPoint, w: ComplexPoint) -> ComplexPoint {
        let (p, dp) = poly::eval_with_derivative(&self.numerator, z);
        let (q, dq) = poly::eval_with_derivative(&self.denominator, z);
        (p - w * q) / (dp - w * dq)
    }
}

/// Disk automorphism `z -> rot * (a - z) / (1 - conj(a) z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusAuto {
    pub a: ComplexPoint,
    pub rot: ComplexPoint,
}

impl MobiusAuto {
    pub fn identity() -> Self {
        MobiusAuto {
            a: Complex64::new(0.0, 0.0),
            rot: Complex64::new(-1.0, 0.0),
        }
    }

    /// The automorphism `z -> (z - c) / (1 - conj(c) z)`, sending `c` to 0.
    pub fn sending_to_zero(c: ComplexPoint) -> Self {
        MobiusAuto {
            a: c,
            rot: Complex64::new(-1.0, 0.0),
        }
    }

    pub fn apply(&self, z: ComplexPoint) -> ComplexPoint {
        self.rot * (self.a - z) / (1.0 - self.a.conj() * z)
    }

    pub fn inverse(&self) -> Self {
        MobiusAuto {
            a: self.a * self.rot,
            rot: self.rot.conj(),
        }
    }

    pub fn to_blaschke(&self) -> BlaschkeProduct {
        BlaschkeProduct {
            lambda: -self.rot,
            zeros: vec![self.a],
        }
    }

    /// Recovers the automorphism from a degree-1 product.
    pub fn from_blaschke(b: &BlaschkeProduct) -> Option<Self> {
        (b.degree() == 1).then(|| MobiusAuto {
            a: b.zeros[0],
            rot: -b.lambda,
        })
    }
}

/// Seeded product with zeros uniform in the closed disk of radius `radius`
/// (by rejection) and a uniform unimodular constant.
pub fn random(degree: usize, seed: u64, radius: f64) -> Result<BlaschkeProduct> {
    if degree == 0 {
        return Err(Error::input("degree", "must be at least 1"));
    }
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::input("radius", "must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zeros = Vec::with_capacity(degree);
    while zeros.len() < degree {
        let z = Complex64::new(rng.gen_range(-radius..=radius), rng.gen_range(-radius..=radius));
        if z.norm() <= radius {
            zeros.push(z);
        }
    }
    let lambda = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    BlaschkeProduct::new(lambda, zeros)
}

/// `outer ∘ inner`. Zeros come from fiber solves of `inner` over each zero of
/// `outer`; the constant is matched against nested evaluation.
pub fn compose(outer: &BlaschkeProduct, inner: &BlaschkeProduct, cfg: &Config) -> Result<BlaschkeProduct> {
    let mut zeros = Vec::with_capacity(outer.degree() * inner.degree());
    for beta in &outer.zeros {
        zeros.extend(polyroots::fiber(inner, *beta, cfg)?);
    }
    let unit = BlaschkeProduct {
        lambda: Complex64::new(1.0, 0.0),
        zeros,
    };
    let (sample, partial) = match_point(&unit)?;
    let target = outer.value(inner.value(sample)?)?;
    let raw = target / partial;
    let lambda = raw / raw.norm();
    let mismatch = (lambda * partial - target).norm();
    if !mismatch.is_finite() || mismatch > cfg.residual * 0.1 {
        return Err(Error::Internal(format!(
            "composition constant mismatch {mismatch:e} at z = {sample}"
        )));
    }
    Ok(BlaschkeProduct {
        lambda,
        zeros: unit.zeros,
    })
}

/// First sample point at which the unit-constant product is safely nonzero.
fn match_point(unit: &BlaschkeProduct) -> Result<(ComplexPoint, ComplexPoint)> {
    const CANDIDATES: [(f64, f64); 6] = [
        (0.0, 0.0),
        (0.31, 0.0),
        (0.0, 0.31),
        (-0.31, 0.0),
        (0.0, -0.31),
        (0.47, 0.23),
    ];
    let mut best = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (re, im) in CANDIDATES {
        let z = Complex64::new(re, im);
        let v = unit.value(z)?;
        if v.norm() > 1e-3 {
            return Ok((z, v));
        }
        if v.norm() > best.1.norm() {
            best = (z, v);
        }
    }
    if best.1.norm() > 0.0 {
        Ok(best)
    } else {
        Err(Error::Internal("no sample point avoids the zeros".into()))
    }
}

/// Postcomposes with the automorphism sending `B(0)` to 0. Returns the
/// normalized product and that automorphism, so `Bn = m ∘ B`.
pub fn normalize_to_zero(b: &BlaschkeProduct, cfg: &Config) -> Result<(BlaschkeProduct, MobiusAuto)> {
    let c = b.value(Complex64::new(0.0, 0.0))?;
    if c.norm() == 0.0 {
        return Ok((b.clone(), MobiusAuto::identity()));
    }
    let m = MobiusAuto::sending_to_zero(c);
    let mut bn = compose(&m.to_blaschke(), b, cfg)?;
    // 0 lies in the fiber over B(0); pin it exactly.
    let nearest = bn
        .zeros
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(i, _)| i)
        .expect("degree >= 1");
    if bn.zeros[nearest].norm() > ORIGIN_SNAP {
        return Err(Error::Internal(format!(
            "normalized fiber misses the origin by {:e}",
            bn.zeros[nearest].norm()
        )));
    }
    bn.zeros[nearest] = Complex64::new(0.0, 0.0);
    Ok((bn, m))
}

/// Puts `inner` in canonical gauge: `b(0) = 0` with the first nonvanishing
/// derivative at 0 positive real. Returns `(g ∘ inner, g)`.
pub fn canonicalize(inner: &BlaschkeProduct, cfg: &Config) -> Result<(BlaschkeProduct, MobiusAuto)> {
    let (centered, shift) = normalize_to_zero(inner, cfg)?;
    let lambda = canonical_lambda(centered.zeros());
    // rotation r with r * centered.lambda = lambda; fold into the automorphism.
    let r = lambda / centered.lambda;
    let g = MobiusAuto {
        a: shift.a,
        rot: shift.rot * r,
    };
    Ok((BlaschkeProduct::new(lambda, centered.zeros)?, g))
}

/// The unimodular constant making the leading Taylor coefficient at 0
/// positive real, for a product with the given zeros.
pub fn canonical_lambda(zeros: &[ComplexPoint]) -> ComplexPoint {
    let c: Complex64 = zeros
        .iter()
        .filter(|a| a.re != 0.0 || a.im != 0.0)
        .map(|a| -a)
        .product();
    let c = if c.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { c };
    c.conj() / c.norm()
}

/// Checks `b(0) = 0` and a positive-real first nonvanishing derivative.
pub fn is_canonical(b: &BlaschkeProduct, tol: f64) -> bool {
    let Ok(v0) = b.value(Complex64::new(0.0, 0.0)) else {
        return false;
    };
    if v0.norm() > tol {
        return false;
    }
    let lead: Complex64 = b
        .zeros
        .iter()
        .filter(|a| a.norm() > tol)
        .map(|a| -a)
        .product::<Complex64>()
        * b.lambda;
    lead.re > 0.0 && lead.im.abs() <= tol * lead.norm().max(1.0)
}
