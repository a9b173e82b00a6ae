//! Fusion rings from the Verlinde formula, quantum dimensions, and simple
//! currents with their charges.

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{bigfloat_to_f64, rat, rational_to_bigfloat, BigComplex, CycElem, CyclotomicField, Embedding, ExactError, Rational};
use crate::modular_data::ModularData;

pub const DEFAULT_PRECISION_BITS: usize = 128;
/// Maximum distance from an integer accepted when rounding Verlinde sums.
pub const ROUNDING_TOL: f64 = 1e-20;
/// Rounding tolerance for data that only has float entries.
pub const FLOAT_ROUNDING_TOL: f64 = 1e-9;
pub const CURRENT_TOL: f64 = 1e-10;
pub const CHARGE_SNAP_TOL: f64 = 1e-9;

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("N_({0},{1})^{2} is {3:.3e} away from an integer: data is not modular")]
    NotIntegral(usize, usize, usize, f64),
    #[error("N_({0},{1})^{2} = {3} is negative")]
    Negative(usize, usize, usize, i64),
    #[error("S_(0,{0}) vanishes")]
    ZeroVacuumEntry(usize),
    #[error("label {0} out of range 0..={1}")]
    BadLabel(u64, u64),
    #[error("fusion matrix of current {0} is not a permutation")]
    NotPermutation(usize),
    #[error("no rational charge with denominator at most {1} fits phase {0}")]
    ChargeSnap(f64, u64),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionRing {
    pub labels: Vec<String>,
    /// N[λ][μ][ν] flattened.
    entries: Vec<u32>,
    pub qdim: Vec<f64>,
    pub max_rounding_distance: f64,
    pub precision_bits: usize,
}

impl FusionRing {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn n(&self, l: usize, m: usize, v: usize) -> u32 {
        let d = self.dim();
        self.entries[(l * d + m) * d + v]
    }

    /// The fusion matrix (N_λ)_{μν} = N_{λμ}^ν.
    pub fn matrix(&self, l: usize) -> Vec<Vec<u32>> {
        let d = self.dim();
        (0..d).map(|m| (0..d).map(|v| self.n(l, m, v)).collect()).collect()
    }

    /// Nonzero coefficients as (λ, μ, ν, N).
    pub fn sparse(&self) -> Vec<(usize, usize, usize, u32)> {
        let d = self.dim();
        let mut out = Vec::new();
        for l in 0..d {
            for m in 0..d {
                for v in 0..d {
                    let x = self.n(l, m, v);
                    if x != 0 {
                        out.push((l, m, v, x));
                    }
                }
            }
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, l: usize, m: usize, v: usize, x: u32) {
        let d = self.dim();
        self.entries[(l * d + m) * d + v] = x;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionJson {
    pub labels: Vec<String>,
    pub precision_bits: usize,
    pub max_rounding_distance: f64,
    pub float: bool,
    pub entries: Vec<(usize, usize, usize, u32)>,
}

pub fn fusion_json(fr: &FusionRing) -> FusionJson {
    FusionJson {
        labels: fr.labels.clone(),
        precision_bits: fr.precision_bits,
        max_rounding_distance: fr.max_rounding_distance,
        float: true,
        entries: fr.sparse(),
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    bigfloat_to_f64(x)
}

/// Verlinde coefficients N_{λμ}^ν = Σ_κ S_{λκ}S_{μκ}S*_{νκ}/S_{0κ}.
///
/// With exact data the sum is evaluated from Ŝ at `precision_bits` as
/// scale_sq·Σ_κ Ŝ_{λκ}Ŝ_{μκ}Ŝ*_{νκ}/Ŝ_{0κ} and every value must lie within
/// 1e−20 of an integer.  Float-only data is summed in f64 with a 1e−9 margin.
pub fn verlinde(md: &ModularData, precision_bits: usize) -> Result<FusionRing, FusionError> {
    match &md.s_exact {
        Some(s) => verlinde_exact(md, s, precision_bits),
        None => verlinde_float(md),
    }
}

fn round_entry(l: usize, m: usize, v: usize, re: f64, im: f64, tol: f64) -> Result<(u32, f64), FusionError> {
    let r = re.round();
    let dist = (re - r).abs().max(im.abs());
    if dist >= tol {
        return Err(FusionError::NotIntegral(l, m, v, dist));
    }
    if r < 0.0 {
        return Err(FusionError::Negative(l, m, v, r as i64));
    }
    Ok((r as u32, dist))
}

fn verlinde_float(md: &ModularData) -> Result<FusionRing, FusionError> {
    let d = md.dim();
    let s = &md.s_float;
    let mut entries = vec![0u32; d * d * d];
    let mut worst = 0.0f64;
    for k in 0..d {
        if s[0][k].norm() == 0.0 {
            return Err(FusionError::ZeroVacuumEntry(k));
        }
    }
    for l in 0..d {
        for m in 0..d {
            let b: Vec<Complex64> = (0..d).map(|k| s[l][k] * s[m][k] / s[0][k]).collect();
            for v in 0..d {
                let x: Complex64 = (0..d).map(|k| b[k] * s[v][k].conj()).sum();
                let (r, dist) = round_entry(l, m, v, x.re, x.im, FLOAT_ROUNDING_TOL)?;
                worst = worst.max(dist);
                entries[(l * d + m) * d + v] = r;
            }
        }
    }
    let qdim = (0..d).map(|l| (s[l][0] / s[0][0]).re).collect();
    Ok(FusionRing { labels: md.labels.clone(), entries, qdim, max_rounding_distance: worst, precision_bits: 53 })
}

fn verlinde_exact(md: &ModularData, s: &[Vec<CycElem>], bits: usize) -> Result<FusionRing, FusionError> {
    let d = md.dim();
    let order = s[0][0].order();
    let mut emb = Embedding::new(order, bits);
    let prec = emb.precision();
    let mut cc = Consts::new().expect("astro-float constants cache");
    let scale = rational_to_bigfloat(md.scale_sq.as_ref().unwrap_or(&Rational::one()), prec, &mut cc);
    let sh: Vec<Vec<BigComplex>> = s.iter().map(|r| r.iter().map(|x| emb.eval(x)).collect()).collect();
    for (k, x) in s[0].iter().enumerate() {
        if x.is_zero() {
            return Err(FusionError::ZeroVacuumEntry(k));
        }
    }
    let real = md.a1.is_some();
    let mut entries = vec![0u32; d * d * d];
    let mut worst = 0.0f64;
    if real {
        // Ŝ is real for A1, so the imaginary parts are dropped
        let re: Vec<Vec<BigFloat>> = sh.iter().map(|r| r.iter().map(|x| x.re.clone()).collect()).collect();
        let ratio: Vec<Vec<BigFloat>> =
            (0..d).map(|l| (0..d).map(|k| re[l][k].div(&re[0][k], prec, RM).mul(&scale, prec, RM)).collect()).collect();
        for l in 0..d {
            for m in 0..d {
                let b: Vec<BigFloat> = (0..d).map(|k| ratio[l][k].mul(&re[m][k], prec, RM)).collect();
                for v in 0..d {
                    let mut acc = BigFloat::from_u64(0, prec);
                    for k in 0..d {
                        acc = acc.add(&b[k].mul(&re[v][k], prec, RM), prec, RM);
                    }
                    let (r, dist) = round_big(l, m, v, &acc, None, prec)?;
                    worst = worst.max(dist);
                    entries[(l * d + m) * d + v] = r;
                }
            }
        }
    } else {
        let scale_c = BigComplex::from_real(scale, prec);
        let ratio: Vec<Vec<BigComplex>> = (0..d)
            .map(|l| (0..d).map(|k| Ok(sh[l][k].div(&sh[0][k])?.mul(&scale_c))).collect::<Result<Vec<_>, ExactError>>())
            .collect::<Result<_, _>>()?;
        let conj: Vec<Vec<BigComplex>> = sh.iter().map(|r| r.iter().map(|x| x.conj()).collect()).collect();
        for l in 0..d {
            for m in 0..d {
                let b: Vec<BigComplex> = (0..d).map(|k| ratio[l][k].mul(&sh[m][k])).collect();
                for v in 0..d {
                    let mut acc = BigComplex::zero(prec);
                    for k in 0..d {
                        acc = acc.add(&b[k].mul(&conj[v][k]));
                    }
                    let (r, dist) = round_big(l, m, v, &acc.re, Some(&acc.im), prec)?;
                    worst = worst.max(dist);
                    entries[(l * d + m) * d + v] = r;
                }
            }
        }
    }
    let qdim = (0..d).map(|l| to_f64(&sh[l][0].re.div(&sh[0][0].re, prec, RM))).collect();
    Ok(FusionRing { labels: md.labels.clone(), entries, qdim, max_rounding_distance: worst, precision_bits: bits })
}

fn round_big(l: usize, m: usize, v: usize, re: &BigFloat, im: Option<&BigFloat>, prec: usize) -> Result<(u32, f64), FusionError> {
    let r = re.round(0, RM);
    let dist_re = to_f64(&re.sub(&r, prec, RM).abs());
    let dist_im = im.map(|x| to_f64(&x.abs())).unwrap_or(0.0);
    let dist = dist_re.max(dist_im);
    if dist >= ROUNDING_TOL {
        return Err(FusionError::NotIntegral(l, m, v, dist));
    }
    let ri = to_f64(&r).round() as i64;
    if ri < 0 {
        return Err(FusionError::Negative(l, m, v, ri));
    }
    Ok((ri as u32, dist))
}

/// Truncated Clebsch-Gordan rule: 1 iff a+b+c is even and
/// |a−b| ≤ c ≤ min(a+b, 2k−a−b).
pub fn a1_fusion_closed(k: u64, a: u64, b: u64, c: u64) -> Result<u32, FusionError> {
    for x in [a, b, c] {
        if x > k {
            return Err(FusionError::BadLabel(x, k));
        }
    }
    let ok = (a + b + c).is_multiple_of(2) && a.abs_diff(b) <= c && c <= (a + b).min(2 * k - a - b);
    Ok(ok as u32)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantumDim {
    pub label: usize,
    pub value: f64,
    pub at_least_one: bool,
    /// Ŝ_{λ0} = Ŝ_{00} exactly (only decided with exact data).
    pub exactly_one: Option<bool>,
}

pub fn quantum_dim(md: &ModularData, fr: &FusionRing, l: usize) -> QuantumDim {
    let value = fr.qdim[l];
    QuantumDim {
        label: l,
        value,
        at_least_one: value >= 1.0 - 1e-12,
        exactly_one: md.s_exact.as_ref().map(|s| s[l][0] == s[0][0]),
    }
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimpleCurrent {
    pub label: usize,
    /// J as a permutation of labels.
    pub perm: Vec<usize>,
    /// Q_j(μ) ∈ [0, 1).
    #[serde(serialize_with = "ser_rationals")]
    pub charges: Vec<Rational>,
    pub order: usize,
}

fn perm_order(p: &[usize]) -> usize {
    let mut q: Vec<usize> = p.to_vec();
    let id: Vec<usize> = (0..p.len()).collect();
    let mut k = 1;
    while q != id {
        q = q.iter().map(|&i| p[i]).collect();
        k += 1;
    }
    k
}

/// Nearest p/d in [0,1) to x with d ≤ max_den, preferring the smallest d.
fn snap_charge(x: f64, max_den: u64) -> Result<Rational, FusionError> {
    let x = x.rem_euclid(1.0);
    for d in 1..=max_den {
        let p = (x * d as f64).round();
        if (x - p / d as f64).abs() < CHARGE_SNAP_TOL {
            let p = (p as i64).rem_euclid(d as i64);
            return Ok(rat(p, d as i64));
        }
    }
    Err(FusionError::ChargeSnap(x, max_den))
}

/// All simple currents: labels of quantum dimension 1, with J read off the
/// fusion matrix and Q from the phase of S_{jμ}/S_{0μ}.
pub fn simple_currents(md: &ModularData, fr: &FusionRing) -> Result<Vec<SimpleCurrent>, FusionError> {
    let d = md.dim();
    let s = &md.s_float;
    let mut out = Vec::new();
    for j in 0..d {
        let float_one = (fr.qdim[j] - 1.0).abs() < CURRENT_TOL;
        if let Some(e) = &md.s_exact {
            if float_one != (e[j][0] == e[0][0]) {
                return Err(FusionError::Inconsistent(format!("quantum dimension of {j}: float and exact disagree")));
            }
        }
        if !float_one {
            continue;
        }
        let nj = fr.matrix(j);
        let mut perm = vec![0usize; d];
        for (m, row) in nj.iter().enumerate() {
            let ones: Vec<usize> = (0..d).filter(|&v| row[v] == 1).collect();
            if ones.len() != 1 || row.iter().sum::<u32>() != 1 {
                return Err(FusionError::NotPermutation(j));
            }
            perm[m] = ones[0];
        }
        if perm[0] != j {
            return Err(FusionError::Inconsistent(format!("J0 = {} for current {j}", perm[0])));
        }
        let order = perm_order(&perm);
        let charges = (0..d)
            .map(|m| {
                let r = s[j][m] / s[0][m];
                snap_charge(r.arg() / (2.0 * std::f64::consts::PI), 2 * order as u64)
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(SimpleCurrent { label: j, perm, charges, order });
    }
    for a in &out {
        for b in &out {
            let comp: Vec<usize> = (0..d).map(|i| a.perm[b.perm[i]]).collect();
            if !out.iter().any(|c| c.perm == comp) {
                return Err(FusionError::Inconsistent("currents are not closed under composition".into()));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurrentActionReport {
    pub float_max_dev: f64,
    /// Exact Ŝ_{Jλ,μ} = e^{2πiQ(μ)}Ŝ_{λμ} when the phases live in the field.
    pub exact: Option<bool>,
    pub ok: bool,
}

/// Checks S_{Jλ,μ} = e^{2πiQ(μ)} S_{λμ} for one current.
pub fn current_action_check(md: &ModularData, c: &SimpleCurrent) -> CurrentActionReport {
    let d = md.dim();
    let mut dev = 0.0f64;
    for l in 0..d {
        for m in 0..d {
            let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * c.charges[m].to_f64().unwrap());
            dev = dev.max((md.s_float[c.perm[l]][m] - phase * md.s_float[l][m]).norm());
        }
    }
    let exact = md.s_exact.as_ref().and_then(|s| {
        let field: &std::sync::Arc<CyclotomicField> = s[0][0].field();
        let n = field.order() as i64;
        let mut phases = Vec::with_capacity(d);
        for q in &c.charges {
            let e = q * Rational::from_integer(BigInt::from(n));
            if !e.is_integer() {
                return None;
            }
            phases.push(CycElem::root_of_unity(field, e.to_integer().to_i64().unwrap()));
        }
        Some((0..d).all(|l| (0..d).all(|m| s[c.perm[l]][m] == phases[m].mul(&s[l][m]).unwrap())))
    });
    let ok = dev < CURRENT_TOL && exact != Some(false);
    CurrentActionReport { float_max_dev: dev, exact, ok }
}

#[derive(Debug, Clone, Serialize)]
pub struct PfReport {
    /// min over pairs of S_{λ0}S_{0μ} − |S_{λμ}|S_{00}.
    pub min_slack: f64,
    pub inequality_holds: bool,
    /// Rows λ for which the inequality is an equality for every μ.
    pub equality_rows: Vec<usize>,
    /// max_μ |S_{λμ}/S_{0μ}| is attained at μ = 0 for every λ.
    pub max_ratio_at_vacuum: bool,
    pub qdim_at_least_one: bool,
    /// Equality rows re-verified exactly as |Ŝ_{jμ}|² = |Ŝ_{0μ}|².
    pub exact_equalities: Option<bool>,
    pub ok: bool,
}

pub fn pf_checks(md: &ModularData) -> PfReport {
    let d = md.dim();
    let s = &md.s_float;
    let s00 = s[0][0].re;
    let mut min_slack = f64::INFINITY;
    let mut equality_rows = Vec::new();
    let mut max_ratio_at_vacuum = true;
    let mut qdim_ok = true;
    for l in 0..d {
        let mut row_equal = true;
        let q0 = (s[l][0] / s[0][0]).norm();
        for m in 0..d {
            let slack = s[l][0].re * s[0][m].re - s[l][m].norm() * s00;
            min_slack = min_slack.min(slack);
            if slack.abs() > 1e-12 {
                row_equal = false;
            }
            if (s[l][m] / s[0][m]).norm() > q0 + 1e-12 {
                max_ratio_at_vacuum = false;
            }
        }
        if row_equal {
            equality_rows.push(l);
        }
        if s[l][0].re < s00 - 1e-12 {
            qdim_ok = false;
        }
    }
    let exact_equalities = md.s_exact.as_ref().map(|e| {
        let abs2 = |x: &CycElem| x.mul(&x.galois(-1).unwrap()).unwrap();
        equality_rows.iter().all(|&j| (0..d).all(|m| abs2(&e[j][m]) == abs2(&e[0][m])))
    });
    let inequality_holds = min_slack >= -1e-12;
    let ok = inequality_holds && max_ratio_at_vacuum && qdim_ok && exact_equalities != Some(false);
    PfReport { min_slack, inequality_holds, equality_rows, max_ratio_at_vacuum, qdim_at_least_one: qdim_ok, exact_equalities, ok }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub current_symmetry: bool,
    pub conjugation_symmetry: bool,
    pub first_violation: Option<String>,
}

/// N_{Jλ,J′μ}^{JJ′ν} = N_{λμ}^ν for all current pairs and N_{Cλ,Cμ}^{Cν} = N_{λμ}^ν.
pub fn fusion_symmetries_check(fr: &FusionRing, currents: &[SimpleCurrent], c: &[usize]) -> SymmetryReport {
    let d = fr.dim();
    let mut first_violation = None;
    let mut current_symmetry = true;
    'outer: for a in currents {
        for b in currents {
            for l in 0..d {
                for m in 0..d {
                    for v in 0..d {
                        let jjv = a.perm[b.perm[v]];
                        if fr.n(a.perm[l], b.perm[m], jjv) != fr.n(l, m, v) {
                            current_symmetry = false;
                            first_violation = Some(format!("J={} J'={} ({l},{m},{v})", a.label, b.label));
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    let mut conjugation_symmetry = true;
    'c: for l in 0..d {
        for m in 0..d {
            for v in 0..d {
                if fr.n(c[l], c[m], c[v]) != fr.n(l, m, v) {
                    conjugation_symmetry = false;
                    if first_violation.is_none() {
                        first_violation = Some(format!("C at ({l},{m},{v})"));
                    }
                    break 'c;
                }
            }
        }
    }
    SymmetryReport { current_symmetry, conjugation_symmetry, first_violation }
}
