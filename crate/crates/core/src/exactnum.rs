//! Exact arithmetic over the rationals and the cyclotomic fields Q(ζ_N).
//!
//! Elements of Q(ζ_N) are kept in the power basis `{ζ^i : i < φ(N)}`, reduced
//! modulo the N-th cyclotomic polynomial, so two elements of the same order are
//! equal exactly when their coefficient vectors are equal.  Elements of
//! different orders are combined by first lifting both into the field of the
//! least common multiple order ([`CycElem::lift`]).

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Extra bits carried by [`BigComplex`] evaluations on top of the requested precision.
pub const EMBED_GUARD_BITS: usize = 64;

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclotomic orders differ ({0} vs {1}); lift to a common order first")]
    OrderMismatch(u64, u64),
    #[error("{ell} is not coprime to the cyclotomic order {order}")]
    NotCoprime { ell: i64, order: u64 },
    #[error("order {target} is not a multiple of {order}")]
    BadLift { order: u64, target: u64 },
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("coefficient vector has length {got}, expected φ(N) = {expected}")]
    BadLength { got: usize, expected: usize },
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p"` or `"p/q"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| ExactError::ParseRational(s.to_string()))?;
    let d: BigInt = den.parse().map_err(|_| ExactError::ParseRational(s.to_string()))?;
    if d.is_zero() {
        return Err(ExactError::ParseRational(s.to_string()));
    }
    Ok(Rational::new(n, d))
}

pub fn euler_phi(n: u64) -> u64 {
    let mut m = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn poly_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![BigInt::zero(); num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dc) in den.iter().enumerate() {
            rem[i + j] -= &c * dc;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    quot
}

/// The N-th cyclotomic polynomial Φ_N, coefficients in ascending degree.
///
/// Obtained by dividing x^N − 1 by Φ_d for every proper divisor d of N.
pub fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    assert!(n >= 1, "cyclotomic_poly: N must be positive");
    let mut cache: BTreeMap<u64, Vec<BigInt>> = BTreeMap::new();
    for d in divisors(n) {
        let mut p = vec![BigInt::zero(); d as usize + 1];
        p[0] = -BigInt::one();
        p[d as usize] = BigInt::one();
        for e in divisors(d).into_iter().filter(|&e| e < d) {
            p = poly_div_monic(&p, &cache[&e]);
        }
        cache.insert(d, p);
    }
    cache.remove(&n).unwrap()
}

/// Q(ζ_N) together with the reduced images of every power ζ^e, 0 ≤ e < N.
#[derive(Debug)]
pub struct CyclotomicField {
    order: u64,
    modulus: Vec<BigInt>,
    powers: Vec<Vec<BigInt>>,
    small_powers: Option<Vec<Vec<i64>>>,
}

impl CyclotomicField {
    pub fn new(order: u64) -> Arc<Self> {
        assert!(order >= 1, "cyclotomic order must be positive");
        let modulus = cyclotomic_poly(order);
        let deg = modulus.len() - 1;
        let mut powers = Vec::with_capacity(order as usize);
        let mut cur = vec![BigInt::zero(); deg];
        cur[0] = BigInt::one();
        for _ in 0..order {
            powers.push(cur.clone());
            // multiply by x and reduce the overflow coefficient
            let top = cur[deg - 1].clone();
            let mut next = vec![BigInt::zero(); deg];
            for i in (1..deg).rev() {
                next[i] = cur[i - 1].clone();
            }
            if !top.is_zero() {
                for i in 0..deg {
                    next[i] -= &top * &modulus[i];
                }
            }
            cur = next;
        }
        let small_powers = powers.iter().map(|p| p.iter().map(|c| c.to_i64()).collect::<Option<Vec<_>>>()).collect();
        Arc::new(CyclotomicField { order, modulus, powers, small_powers })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// φ(N), the dimension over Q.
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[BigInt] {
        &self.modulus
    }

    /// Reduced coordinates of ζ^e for any integer e.
    pub fn power(&self, e: i64) -> &[BigInt] {
        &self.powers[e.rem_euclid(self.order as i64) as usize]
    }

    /// The power table as machine integers, when every entry fits.
    pub fn small_powers(&self) -> Option<&[Vec<i64>]> {
        self.small_powers.as_deref()
    }
}

/// An element Σ cᵢ ζ_N^i of Q(ζ_N) in canonical reduced form.
#[derive(Clone)]
pub struct CycElem {
    field: Arc<CyclotomicField>,
    coeffs: Vec<Rational>,
}

impl CycElem {
    pub fn zero(field: &Arc<CyclotomicField>) -> Self {
        CycElem { field: field.clone(), coeffs: vec![Rational::zero(); field.degree()] }
    }

    pub fn from_rational(field: &Arc<CyclotomicField>, r: Rational) -> Self {
        let mut z = Self::zero(field);
        z.coeffs[0] = r;
        z
    }

    pub fn one(field: &Arc<CyclotomicField>) -> Self {
        Self::from_rational(field, Rational::one())
    }

    /// ζ_N^e.
    pub fn root_of_unity(field: &Arc<CyclotomicField>, e: i64) -> Self {
        Self::from_terms(field, [(e, Rational::one())])
    }

    /// Reduces a group-ring sum Σ c_e ζ^e (exponents arbitrary integers).
    pub fn from_terms<I>(field: &Arc<CyclotomicField>, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        let mut z = Self::zero(field);
        for (e, c) in terms {
            if c.is_zero() {
                continue;
            }
            z.add_scaled_power(e, &c);
        }
        z
    }

    pub fn from_coeffs(field: &Arc<CyclotomicField>, coeffs: Vec<Rational>) -> Result<Self, ExactError> {
        if coeffs.len() != field.degree() {
            return Err(ExactError::BadLength { got: coeffs.len(), expected: field.degree() });
        }
        Ok(CycElem { field: field.clone(), coeffs })
    }

    fn add_scaled_power(&mut self, e: i64, c: &Rational) {
        for (dst, p) in self.coeffs.iter_mut().zip(self.field.power(e)) {
            if !p.is_zero() {
                *dst += c * Rational::from_integer(p.clone());
            }
        }
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    pub fn order(&self) -> u64 {
        self.field.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational value, if this element lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check_order(&self, other: &CycElem) -> Result<(), ExactError> {
        if self.field.order != other.field.order {
            Err(ExactError::OrderMismatch(self.field.order, other.field.order))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &CycElem) -> Result<CycElem, ExactError> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CycElem { field: self.field.clone(), coeffs })
    }

    pub fn sub(&self, other: &CycElem) -> Result<CycElem, ExactError> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(CycElem { field: self.field.clone(), coeffs })
    }

    pub fn neg(&self) -> CycElem {
        CycElem { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, r: &Rational) -> CycElem {
        CycElem { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn mul(&self, other: &CycElem) -> Result<CycElem, ExactError> {
        self.check_order(other)?;
        let deg = self.field.degree();
        let mut full = vec![Rational::zero(); 2 * deg - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    full[i + j] += a * b;
                }
            }
        }
        let mut out = CycElem { field: self.field.clone(), coeffs: full[..deg].to_vec() };
        for (i, c) in full.iter().enumerate().skip(deg) {
            if !c.is_zero() {
                out.add_scaled_power(i as i64, c);
            }
        }
        Ok(out)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against Φ_N.
    pub fn inverse(&self) -> Result<CycElem, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let modulus: Vec<Rational> =
            self.field.modulus.iter().map(|c| Rational::from_integer(c.clone())).collect();
        let (g, u) = rat_poly_ext_gcd(&self.coeffs, &modulus);
        // Φ_N is irreducible, so the gcd is a nonzero constant.
        debug_assert_eq!(g.len(), 1);
        let inv_g = g[0].recip();
        let mut coeffs: Vec<Rational> = u.iter().map(|c| c * &inv_g).collect();
        coeffs.resize(self.field.degree(), Rational::zero());
        Ok(CycElem { field: self.field.clone(), coeffs })
    }

    pub fn div(&self, other: &CycElem) -> Result<CycElem, ExactError> {
        self.check_order(other)?;
        self.mul(&other.inverse()?)
    }

    /// The automorphism σ_ℓ : ζ_N ↦ ζ_N^ℓ.
    pub fn galois(&self, ell: i64) -> Result<CycElem, ExactError> {
        let n = self.field.order;
        if (ell.rem_euclid(n as i64) as u64).gcd(&n) != 1 {
            return Err(ExactError::NotCoprime { ell, order: n });
        }
        let mut out = CycElem::zero(&self.field);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.add_scaled_power(i as i64 * ell, c);
            }
        }
        Ok(out)
    }

    /// Image under Q(ζ_N) ⊂ Q(ζ_M), ζ_N ↦ ζ_M^{M/N}.
    pub fn lift(&self, target: &Arc<CyclotomicField>) -> Result<CycElem, ExactError> {
        let n = self.field.order;
        if !target.order.is_multiple_of(n) {
            return Err(ExactError::BadLift { order: n, target: target.order });
        }
        if target.order == n {
            return Ok(CycElem { field: target.clone(), coeffs: self.coeffs.clone() });
        }
        let step = (target.order / n) as i64;
        let terms = self.coeffs.iter().enumerate().map(|(i, c)| (i as i64 * step, c.clone()));
        Ok(CycElem::from_terms(target, terms))
    }

    /// Lifts both operands into Q(ζ_lcm).
    pub fn lift_pair(a: &CycElem, b: &CycElem) -> (CycElem, CycElem) {
        let l = a.order().lcm(&b.order());
        let field = if l == a.order() {
            a.field.clone()
        } else if l == b.order() {
            b.field.clone()
        } else {
            CyclotomicField::new(l)
        };
        (a.lift(&field).unwrap(), b.lift(&field).unwrap())
    }

    /// Evaluates at ζ_N = e^{2πi/N} carrying `precision_bits + EMBED_GUARD_BITS`
    /// working bits.  Each term contributes at most one rounding of relative size
    /// 2^-(precision_bits+64), so the absolute error stays below
    /// (Σ|cᵢ| + 1)·2^-precision_bits.
    pub fn embed_complex(&self, precision_bits: usize) -> BigComplex {
        Embedding::new(self.order(), precision_bits).eval(self)
    }

    /// Double-precision complex value.
    pub fn to_c64(&self) -> Complex64 {
        let step = std::f64::consts::TAU / self.order() as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| Complex64::from_polar(1.0, step * i as f64) * rational_to_f64(c))
            .sum()
    }
}

impl PartialEq for CycElem {
    fn eq(&self, other: &Self) -> bool {
        self.field.order == other.field.order && self.coeffs == other.coeffs
    }
}

impl Eq for CycElem {}

impl Hash for CycElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.order.hash(state);
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for CycElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycElem[{}]({})", self.field.order, self)
    }
}

impl fmt::Display for CycElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})·ζ")?,
                _ => write!(f, "({c})·ζ^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Wire form `{order, coeffs: ["p/q", ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycElemJson {
    pub order: u64,
    pub coeffs: Vec<String>,
}

impl From<&CycElem> for CycElemJson {
    fn from(x: &CycElem) -> Self {
        CycElemJson { order: x.order(), coeffs: x.coeffs.iter().map(|c| c.to_string()).collect() }
    }
}

impl CycElemJson {
    pub fn to_elem(&self, field: &Arc<CyclotomicField>) -> Result<CycElem, ExactError> {
        if field.order() != self.order {
            return Err(ExactError::OrderMismatch(self.order, field.order()));
        }
        let coeffs = self.coeffs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
        CycElem::from_coeffs(field, coeffs)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale down huge operands before dividing
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000) as usize;
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

fn trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn rat_poly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() <= db {
        return (vec![Rational::zero()], r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lead;
        if !c.is_zero() {
            for (j, bc) in b.iter().enumerate() {
                r[i + j] -= &c * bc;
            }
        }
        q[i] = c;
    }
    r.truncate(db.max(1));
    trim(&mut r);
    (q, r)
}

fn rat_poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn rat_poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out: Vec<Rational> = (0..n)
        .map(|i| {
            a.get(i).cloned().unwrap_or_else(Rational::zero) - b.get(i).cloned().unwrap_or_else(Rational::zero)
        })
        .collect();
    trim(&mut out);
    out
}

/// Returns (g, u) with g = gcd(a, m) and u·a ≡ g (mod m).
fn rat_poly_ext_gcd(a: &[Rational], m: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r1);
    let (mut u0, mut u1) = (vec![Rational::zero()], vec![Rational::one()]);
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = rat_poly_divrem(&r0, &r1);
        let u2 = rat_poly_sub(&u0, &rat_poly_mul(&q, &u1));
        r0 = std::mem::replace(&mut r1, r);
        u0 = std::mem::replace(&mut u1, u2);
    }
    let (_, u) = rat_poly_divrem(&u0, m);
    (r0, u)
}

/// A complex number with `astro-float` components.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: BigFloat,
    pub im: BigFloat,
    prec: usize,
}

impl BigComplex {
    pub fn zero(prec: usize) -> Self {
        BigComplex { re: BigFloat::from_u64(0, prec), im: BigFloat::from_u64(0, prec), prec }
    }

    pub fn from_real(re: BigFloat, prec: usize) -> Self {
        BigComplex { re, im: BigFloat::from_u64(0, prec), prec }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.prec;
        BigComplex { re: self.re.add(&o.re, p, RM), im: self.im.add(&o.im, p, RM), prec: p }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec;
        BigComplex { re: self.re.sub(&o.re, p, RM), im: self.im.sub(&o.im, p, RM), prec: p }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prec;
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        BigComplex { re, im, prec: p }
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: self.im.neg(), prec: self.prec }
    }

    pub fn norm_sqr(&self) -> BigFloat {
        let p = self.prec;
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn div(&self, o: &Self) -> Result<Self, ExactError> {
        let d = o.norm_sqr();
        if d.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let p = self.prec;
        let num = self.mul(&o.conj());
        Ok(BigComplex { re: num.re.div(&d, p, RM), im: num.im.div(&d, p, RM), prec: p })
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(bigfloat_to_f64(&self.re), bigfloat_to_f64(&self.im))
    }
}

pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let s = x.to_string();
    // astro-float prints mantissas like "7.e+0"
    s.replace(".e", ".0e").parse().unwrap_or(f64::NAN)
}

pub fn rational_to_bigfloat(r: &Rational, prec: usize, cc: &mut Consts) -> BigFloat {
    let conv = |b: &BigInt, cc: &mut Consts| match b.to_i64() {
        Some(v) => BigFloat::from_i64(v, prec),
        None => BigFloat::parse(&b.to_string(), Radix::Dec, prec, RM, cc),
    };
    let n = conv(r.numer(), cc);
    if r.denom().is_one() {
        return n;
    }
    n.div(&conv(r.denom(), cc), prec, RM)
}

/// Cached high-precision values of e^{2πij/N}, j < N.
pub struct Embedding {
    order: u64,
    prec: usize,
    roots: Vec<BigComplex>,
    consts: Consts,
}

impl Embedding {
    pub fn new(order: u64, precision_bits: usize) -> Self {
        assert!(precision_bits >= 53, "precision below double precision");
        let prec = precision_bits + EMBED_GUARD_BITS;
        let mut consts = Consts::new().expect("astro-float constants cache");
        let two_pi = consts.pi(prec, RM).mul(&BigFloat::from_u64(2, prec), prec, RM);
        let roots = (0..order)
            .map(|j| {
                let ang = two_pi.mul(&BigFloat::from_u64(j, prec), prec, RM).div(
                    &BigFloat::from_u64(order, prec),
                    prec,
                    RM,
                );
                BigComplex { re: ang.cos(prec, RM, &mut consts), im: ang.sin(prec, RM, &mut consts), prec }
            })
            .collect();
        Embedding { order, prec, roots, consts }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn eval(&mut self, x: &CycElem) -> BigComplex {
        assert_eq!(x.order(), self.order, "embedding order mismatch");
        let mut acc = BigComplex::zero(self.prec);
        for (i, c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cf = rational_to_bigfloat(c, self.prec, &mut self.consts);
            let root = &self.roots[i];
            acc = acc.add(&BigComplex {
                re: root.re.mul(&cf, self.prec, RM),
                im: root.im.mul(&cf, self.prec, RM),
                prec: self.prec,
            });
        }
        acc
    }

    pub fn real_from_f64(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.prec)
    }
}

/// Accumulates a group-ring sum Σ c_e ζ^e over exponents modulo N before a
/// single reduction.
#[derive(Clone, Debug)]
pub struct TermAccumulator {
    order: u64,
    coeffs: Vec<Rational>,
}

impl TermAccumulator {
    pub fn new(order: u64) -> Self {
        TermAccumulator { order, coeffs: vec![Rational::zero(); order as usize] }
    }

    pub fn add(&mut self, e: i64, c: &Rational) {
        self.coeffs[e.rem_euclid(self.order as i64) as usize] += c;
    }

    pub fn finish(&self, field: &Arc<CyclotomicField>) -> CycElem {
        assert_eq!(field.order(), self.order);
        CycElem::from_terms(
            field,
            self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (e as i64, c.clone())),
        )
    }
}

/// Integer group-ring accumulator Σ c_e ζ^e (e mod N) for sums whose
/// coefficients share a known denominator.
#[derive(Clone, Debug)]
pub struct IntAccumulator {
    order: u64,
    coeffs: Vec<i64>,
}

impl IntAccumulator {
    pub fn new(order: u64) -> Self {
        IntAccumulator { order, coeffs: vec![0; order as usize] }
    }

    pub fn add(&mut self, e: i64, c: i64) {
        self.coeffs[e.rem_euclid(self.order as i64) as usize] += c;
    }

    pub fn clear(&mut self) {
        self.coeffs.iter_mut().for_each(|c| *c = 0);
    }

    /// Reduced integer coordinates of the accumulated sum.
    pub fn reduce(&self, field: &CyclotomicField) -> Vec<i64> {
        assert_eq!(field.order(), self.order);
        let deg = field.degree();
        let mut out = vec![0i64; deg];
        match field.small_powers() {
            Some(table) => {
                for (e, &c) in self.coeffs.iter().enumerate() {
                    if c != 0 {
                        for (o, p) in out.iter_mut().zip(&table[e]) {
                            *o += c * p;
                        }
                    }
                }
            }
            None => {
                for (e, &c) in self.coeffs.iter().enumerate() {
                    if c != 0 {
                        for (o, p) in out.iter_mut().zip(field.power(e as i64)) {
                            *o += c * p.to_i64().expect("power table entry fits i64");
                        }
                    }
                }
            }
        }
        out
    }

    /// The accumulated sum divided by `denom`.
    pub fn finish(&self, field: &Arc<CyclotomicField>, denom: i64) -> CycElem {
        let coeffs = self.reduce(field).into_iter().map(|c| rat(c, denom)).collect();
        CycElem { field: field.clone(), coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn cyclotomic_small_orders() {
        assert_eq!(cyclotomic_poly(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_poly(4), ints(&[1, 0, 1]));
        assert_eq!(cyclotomic_poly(6), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(12), ints(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn cyclotomic_degree_is_phi_and_root_vanishes() {
        for n in 1..=60 {
            let p = cyclotomic_poly(n);
            assert_eq!(p.len() as u64 - 1, euler_phi(n), "N = {n}");
            let f = CyclotomicField::new(n);
            let terms = p.iter().enumerate().map(|(i, c)| (i as i64, Rational::from_integer(c.clone())));
            assert!(CycElem::from_terms(&f, terms).is_zero(), "Φ_{n}(ζ_{n}) ≠ 0");
        }
    }

    #[test]
    fn arithmetic_examples() {
        let f4 = CyclotomicField::new(4);
        let i = CycElem::root_of_unity(&f4, 1);
        assert_eq!(i.mul(&i).unwrap(), CycElem::from_rational(&f4, rat_int(-1)));

        let f3 = CyclotomicField::new(3);
        let s = CycElem::one(&f3)
            .add(&CycElem::root_of_unity(&f3, 1))
            .unwrap()
            .add(&CycElem::root_of_unity(&f3, 2))
            .unwrap();
        assert!(s.is_zero());

        for n in [5u64, 7, 12, 30] {
            let f = CyclotomicField::new(n);
            let z = CycElem::root_of_unity(&f, 1);
            let inv = CycElem::one(&f).div(&z).unwrap();
            assert_eq!(inv, CycElem::root_of_unity(&f, n as i64 - 1));
        }
    }

    #[test]
    fn division_by_zero_and_order_mismatch() {
        let f = CyclotomicField::new(5);
        let one = CycElem::one(&f);
        assert_eq!(one.div(&CycElem::zero(&f)), Err(ExactError::DivisionByZero));
        let g = CyclotomicField::new(7);
        assert!(matches!(one.add(&CycElem::one(&g)), Err(ExactError::OrderMismatch(5, 7))));
    }

    #[test]
    fn galois_examples() {
        let f = CyclotomicField::new(12);
        let x = CycElem::root_of_unity(&f, 5).add(&CycElem::root_of_unity(&f, 7)).unwrap();
        assert_eq!(x.galois(1).unwrap(), x);
        let real = CycElem::root_of_unity(&f, 1).add(&CycElem::root_of_unity(&f, -1)).unwrap();
        assert_eq!(real.galois(11).unwrap(), real);
        assert!(matches!(real.galois(4), Err(ExactError::NotCoprime { .. })));

        // σ_ℓ(cos 2πa/N) = cos 2πaℓ/N
        let n = 20i64;
        let f = CyclotomicField::new(n as u64);
        let half = rat(1, 2);
        let cos = |a: i64| CycElem::from_terms(&f, [(a, half.clone()), (-a, half.clone())]);
        for a in 0..n {
            for ell in [1, 3, 7, 9, 11, 13, 17, 19] {
                assert_eq!(cos(a).galois(ell).unwrap(), cos(a * ell));
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let f4 = CyclotomicField::new(4);
        let i = CycElem::root_of_unity(&f4, 1).embed_complex(128).to_c64();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);

        let f8 = CyclotomicField::new(8);
        let r2 = CycElem::root_of_unity(&f8, 1).add(&CycElem::root_of_unity(&f8, -1)).unwrap();
        assert!((r2.embed_complex(128).to_c64().re - 2f64.sqrt()).abs() < 1e-15);

        let z = CycElem::zero(&f8).embed_complex(128);
        assert!(z.re.is_zero() && z.im.is_zero());
    }

    #[test]
    fn high_precision_embedding_beats_double() {
        // 2cos(π/4)^2 - 2 = 0 to far below f64 resolution
        let f8 = CyclotomicField::new(8);
        let r2 = CycElem::root_of_unity(&f8, 1).add(&CycElem::root_of_unity(&f8, -1)).unwrap();
        let v = r2.embed_complex(128);
        let sq = v.mul(&v);
        let two = BigFloat::from_u64(2, v.precision());
        let diff = sq.re.sub(&two, v.precision(), RM);
        assert!(bigfloat_to_f64(&diff).abs() < 1e-35);
    }

    #[test]
    fn lift_matches_embedding() {
        let f6 = CyclotomicField::new(6);
        let f30 = CyclotomicField::new(30);
        let x = CycElem::from_terms(&f6, [(1, rat(3, 2)), (2, rat(-1, 7))]);
        let y = x.lift(&f30).unwrap();
        assert!((x.to_c64() - y.to_c64()).norm() < 1e-14);
        assert!(x.lift(&CyclotomicField::new(9)).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("17").unwrap(), rat_int(17));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn elem(order: u64, terms: &[(i64, i64, i64)]) -> CycElem {
            let f = CyclotomicField::new(order);
            CycElem::from_terms(&f, terms.iter().map(|&(e, n, d)| (e, rat(n, d))))
        }

        fn terms() -> impl Strategy<Value = Vec<(i64, i64, i64)>> {
            proptest::collection::vec((0i64..60, -9i64..10, 1i64..5), 0..6)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn field_axioms(order in prop::sample::select(vec![3u64, 5, 8, 12, 15, 20, 24]), a in terms(), b in terms(), c in terms()) {
                let (x, y, z) = (elem(order, &a), elem(order, &b), elem(order, &c));
                prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
                prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
                prop_assert_eq!(x.mul(&y.add(&z).unwrap()).unwrap(), x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap());
                if !y.is_zero() {
                    prop_assert_eq!(x.mul(&y).unwrap().div(&y).unwrap(), x.clone());
                }
            }

            #[test]
            fn embedding_is_a_homomorphism(order in prop::sample::select(vec![5u64, 8, 12, 20]), a in terms(), b in terms()) {
                let (x, y) = (elem(order, &a), elem(order, &b));
                let lhs = x.mul(&y).unwrap().to_c64();
                let rhs = x.to_c64() * y.to_c64();
                prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
                let s = x.add(&y).unwrap().to_c64();
                prop_assert!((s - x.to_c64() - y.to_c64()).norm() < 1e-12 * (1.0 + s.norm()));
            }

            #[test]
            fn galois_is_a_homomorphism(a in terms(), b in terms(), l in prop::sample::select(vec![1i64, 7, 11, 13, 17, 19, 23])) {
                let (x, y) = (elem(24, &a), elem(24, &b));
                prop_assert_eq!(x.mul(&y).unwrap().galois(l).unwrap(), x.galois(l).unwrap().mul(&y.galois(l).unwrap()).unwrap());
                prop_assert_eq!(x.add(&y).unwrap().galois(l).unwrap(), x.galois(l).unwrap().add(&y.galois(l).unwrap()).unwrap());
            }
        }
    }
}
