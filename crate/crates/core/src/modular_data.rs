//! Modular data: the Kac-Peterson S and T matrices of affine A1 at level k,
//! imported data in JSON form, the validity suite, and numeric checks of the
//! modular transformations of the affine characters.
//!
//! The exact S matrix is stored rescaled: Ŝ_ab = sin(π(a+1)(b+1)/n) with
//! n = k+2, as an element of Q(ζ_{4n}), and S = √(2/n)·Ŝ.  The square root is
//! never formed exactly.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{
    rat, rational_to_f64, CycElem, CycElemJson, CyclotomicField, ExactError, IntAccumulator, Rational, TermAccumulator,
};

#[derive(Debug, Error)]
pub enum ModularDataError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("missing or out-of-range vacuum index")]
    MissingVacuum,
    #[error("exact entry: {0}")]
    Exact(#[from] ExactError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Im(tau) must be positive, got {0}")]
    BadTau(f64),
    #[error("character denominator {0:.3e} is too close to zero at this sample point")]
    DegeneratePoint(f64),
    #[error("label {0} out of range for level {1}")]
    BadLabel(usize, u64),
}

impl ModularDataError {
    /// Stable numeric code per failure class, used by the CLI.
    pub fn code(&self) -> u32 {
        match self {
            ModularDataError::Schema(_) => 10,
            ModularDataError::Shape(_) => 11,
            ModularDataError::MissingVacuum => 12,
            ModularDataError::Exact(_) => 13,
            ModularDataError::Io(_) => 14,
            ModularDataError::BadTau(_) => 20,
            ModularDataError::DegeneratePoint(_) => 21,
            ModularDataError::BadLabel(..) => 22,
        }
    }
}

/// Level data of A1 at level k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct A1Info {
    pub k: u64,
    /// k + 2
    pub n: u64,
    pub h_dual: u64,
    #[serde(serialize_with = "ser_rational")]
    pub central_charge: Rational,
    pub rho: u64,
}

impl A1Info {
    pub fn new(k: u64) -> Self {
        A1Info { k, n: k + 2, h_dual: 2, central_charge: rat(3 * k as i64, k as i64 + 2), rho: 1 }
    }
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// S and T matrices with optional exact parts.  Label 0 is the vacuum.
#[derive(Debug, Clone)]
pub struct ModularData {
    pub labels: Vec<String>,
    pub a1: Option<A1Info>,
    /// S = √scale_sq · Ŝ; `None` means Ŝ is S itself.
    pub scale_sq: Option<Rational>,
    pub s_exact: Option<Vec<Vec<CycElem>>>,
    pub t_exact: Option<Vec<CycElem>>,
    pub s_float: Vec<Vec<Complex64>>,
    pub t_float: Vec<Complex64>,
}

/// sin(πm/n) = −½(ζ_{4n}^{2m+n} − ζ_{4n}^{n−2m}).
pub fn sine_elem(field: &std::sync::Arc<CyclotomicField>, n: u64, m: i64) -> CycElem {
    debug_assert_eq!(field.order(), 4 * n);
    let n = n as i64;
    CycElem::from_terms(field, [(2 * m + n, rat(-1, 2)), (n - 2 * m, rat(1, 2))])
}

/// 2Ŝ for m = (a+1)(b+1) as integer terms over ζ_{4n}: −ζ^{2m+n} + ζ^{n−2m}.
pub fn a1_two_s_hat_terms(n: u64, m: i64) -> [(i64, i64); 2] {
    let n = n as i64;
    [(2 * m + n, -1), (n - 2 * m, 1)]
}

/// Entries of Ŝ·Ŝ for A1 with n = k+2, as rationals where they are rational.
pub fn a1_s_hat_square(k: u64) -> Vec<Vec<Option<Rational>>> {
    let n = k + 2;
    let dim = (k + 1) as usize;
    let field = CyclotomicField::new(4 * n);
    let mut acc = IntAccumulator::new(4 * n);
    let mut out = vec![vec![None; dim]; dim];
    for a in 0..dim {
        for b in 0..dim {
            acc.clear();
            for c in 0..dim {
                for (e1, c1) in a1_two_s_hat_terms(n, ((a + 1) * (c + 1)) as i64) {
                    for (e2, c2) in a1_two_s_hat_terms(n, ((c + 1) * (b + 1)) as i64) {
                        acc.add(e1 + e2, c1 * c2);
                    }
                }
            }
            let v = acc.reduce(&field);
            if v[1..].iter().all(|&x| x == 0) {
                out[a][b] = Some(rat(v[0], 4));
            }
        }
    }
    out
}

/// Kac-Peterson data of A1 at level k.
pub fn a1_modular_data(k: u64) -> ModularData {
    let n = k + 2;
    let dim = (k + 1) as usize;
    let f4 = CyclotomicField::new(4 * n);
    let f8 = CyclotomicField::new(8 * n);
    let s_exact: Vec<Vec<CycElem>> = (0..dim)
        .map(|a| (0..dim).map(|b| sine_elem(&f4, n, ((a + 1) * (b + 1)) as i64)).collect())
        .collect();
    let t_exact: Vec<CycElem> =
        (0..dim).map(|a| CycElem::root_of_unity(&f8, 2 * ((a + 1) * (a + 1)) as i64 - n as i64)).collect();
    let scale = (2.0 / n as f64).sqrt();
    let s_float = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| Complex64::new(scale * (PI * ((a + 1) * (b + 1)) as f64 / n as f64).sin(), 0.0))
                .collect()
        })
        .collect();
    let t_float = (0..dim)
        .map(|a| {
            let phase = PI * ((a + 1) * (a + 1)) as f64 / (2.0 * n as f64) - PI / 4.0;
            Complex64::from_polar(1.0, phase)
        })
        .collect();
    ModularData {
        labels: (0..dim).map(|a| a.to_string()).collect(),
        a1: Some(A1Info::new(k)),
        scale_sq: Some(rat(2, n as i64)),
        s_exact: Some(s_exact),
        t_exact: Some(t_exact),
        s_float,
        t_float,
    }
}

impl ModularData {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Builds data from an exact rescaled S, its scale and exact T; float
    /// mirrors are derived.
    pub fn from_exact(
        labels: Vec<String>,
        s_hat: Vec<Vec<CycElem>>,
        scale_sq: Option<Rational>,
        t: Vec<CycElem>,
    ) -> Result<Self, ModularDataError> {
        let dim = labels.len();
        if s_hat.len() != dim || s_hat.iter().any(|r| r.len() != dim) || t.len() != dim {
            return Err(ModularDataError::Shape(format!("expected {dim}x{dim} S and {dim} T entries")));
        }
        let scale = scale_sq.as_ref().map(|s| rational_to_f64(s).sqrt()).unwrap_or(1.0);
        let s_float = s_hat.iter().map(|r| r.iter().map(|x| x.to_c64() * scale).collect()).collect();
        let t_float = t.iter().map(|x| x.to_c64()).collect();
        Ok(ModularData { labels, a1: None, scale_sq, s_exact: Some(s_hat), t_exact: Some(t), s_float, t_float })
    }

    pub fn from_float(labels: Vec<String>, s: Vec<Vec<Complex64>>, t: Vec<Complex64>) -> Result<Self, ModularDataError> {
        let dim = labels.len();
        if s.len() != dim || s.iter().any(|r| r.len() != dim) || t.len() != dim {
            return Err(ModularDataError::Shape(format!("expected {dim}x{dim} S and {dim} T entries")));
        }
        Ok(ModularData { labels, a1: None, scale_sq: None, s_exact: None, t_exact: None, s_float: s, t_float: t })
    }

    /// Float S_{0μ}·S_{0ν} weights (real parts).
    pub fn vacuum_row(&self) -> Vec<f64> {
        self.s_float[0].iter().map(|x| x.re).collect()
    }

    /// C = S² as a permutation, computed exactly when Ŝ and its scale are
    /// available, otherwise from floats.
    pub fn charge_conjugation(&self) -> Option<Vec<usize>> {
        if let (Some(a1), Some(_)) = (&self.a1, &self.s_exact) {
            let sq = a1_s_hat_square(a1.k);
            return permutation_from_square(|a, b| sq[a][b].clone(), self.dim(), self.scale_sq.as_ref());
        }
        match (&self.s_exact, &self.scale_sq) {
            (Some(s), scale) => exact_square_permutation(s, scale.as_ref()),
            _ => float_square_permutation(&self.s_float),
        }
    }

    /// Data equality, comparing exact entries after lifting to a common order.
    pub fn same_data(&self, other: &ModularData) -> bool {
        fn elems_eq(a: &CycElem, b: &CycElem) -> bool {
            let (x, y) = CycElem::lift_pair(a, b);
            x == y
        }
        let s_eq = match (&self.s_exact, &other.s_exact) {
            (Some(a), Some(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(r, q)| r.len() == q.len() && r.iter().zip(q).all(|(x, y)| elems_eq(x, y)))
            }
            (None, None) => true,
            _ => false,
        };
        let t_eq = match (&self.t_exact, &other.t_exact) {
            (Some(a), Some(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| elems_eq(x, y)),
            (None, None) => true,
            _ => false,
        };
        s_eq && t_eq
            && self.labels == other.labels
            && self.a1 == other.a1
            && self.scale_sq == other.scale_sq
            && self.s_float == other.s_float
            && self.t_float == other.t_float
    }
}

fn exact_square_permutation(s: &[Vec<CycElem>], scale_sq: Option<&Rational>) -> Option<Vec<usize>> {
    let dim = s.len();
    let entry = |a: usize, b: usize| {
        let mut acc = CycElem::zero(s[a][0].field());
        for c in 0..dim {
            acc = acc.add(&s[a][c].mul(&s[c][b]).ok()?).ok()?;
        }
        acc.as_rational()
    };
    permutation_from_square(entry, dim, scale_sq)
}

/// Reads a permutation off the entries of Ŝ² scaled by `scale_sq`.
fn permutation_from_square<F>(entry: F, dim: usize, scale_sq: Option<&Rational>) -> Option<Vec<usize>>
where
    F: Fn(usize, usize) -> Option<Rational>,
{
    let scale = scale_sq.cloned().unwrap_or_else(Rational::one);
    let mut perm = vec![usize::MAX; dim];
    for a in 0..dim {
        for b in 0..dim {
            let v = entry(a, b)? * &scale;
            if v.is_one() {
                if perm[a] != usize::MAX {
                    return None;
                }
                perm[a] = b;
            } else if !v.is_zero() {
                return None;
            }
        }
    }
    perm.iter().all(|&p| p != usize::MAX).then_some(perm)
}

fn float_square_permutation(s: &[Vec<Complex64>]) -> Option<Vec<usize>> {
    let dim = s.len();
    let mut perm = vec![usize::MAX; dim];
    for a in 0..dim {
        for b in 0..dim {
            let v: Complex64 = (0..dim).map(|c| s[a][c] * s[c][b]).sum();
            if (v - 1.0).norm() < 1e-9 {
                if perm[a] != usize::MAX {
                    return None;
                }
                perm[a] = b;
            } else if v.norm() > 1e-9 {
                return None;
            }
        }
    }
    perm.iter().all(|&p| p != usize::MAX).then_some(perm)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub checks: Vec<Check>,
    pub charge_conjugation: Option<Vec<usize>>,
    pub ok: bool,
}

impl ValidityReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const UNITARITY_TOL: f64 = 1e-12;

/// Runs the validity suite; failures are reported, never raised.
pub fn validate(md: &ModularData) -> ValidityReport {
    let dim = md.dim();
    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String| checks.push(Check { name, passed, detail });

    let square = md.s_float.len() == dim && md.s_float.iter().all(|r| r.len() == dim) && md.t_float.len() == dim;
    push("shape", square, format!("{dim} labels"));
    if !square || dim == 0 {
        return ValidityReport { ok: false, checks, charge_conjugation: None };
    }
    let s = &md.s_float;

    let symmetric = match &md.s_exact {
        Some(e) => (0..dim).all(|a| (0..a).all(|b| e[a][b] == e[b][a])),
        None => (0..dim).all(|a| (0..a).all(|b| (s[a][b] - s[b][a]).norm() < UNITARITY_TOL)),
    };
    push("symmetric", symmetric, if md.s_exact.is_some() { "exact".into() } else { "float".into() });

    let mut unit_dev = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            let v: Complex64 = (0..dim).map(|c| s[a][c] * s[b][c].conj()).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            unit_dev = unit_dev.max((v - want).norm());
        }
    }
    push("unitary", unit_dev < UNITARITY_TOL, format!("max |SS†−I| = {unit_dev:.3e}"));

    if let (Some(e), Some(_)) = (&md.s_exact, &md.scale_sq) {
        let scale = rational_to_f64(md.scale_sq.as_ref().unwrap()).sqrt();
        let dev = (0..dim)
            .flat_map(|a| (0..dim).map(move |b| (a, b)))
            .map(|(a, b)| (e[a][b].to_c64() * scale - s[a][b]).norm())
            .fold(0.0, f64::max);
        push("exact_float_coherence", dev < UNITARITY_TOL, format!("max deviation {dev:.3e}"));
    }

    let vac_ok = s[0].iter().all(|x| x.re > 0.0 && x.im.abs() < UNITARITY_TOL);
    push("vacuum_row_positive", vac_ok, String::new());

    let t_dev = md.t_float.iter().map(|t| (t.norm() - 1.0).abs()).fold(0.0, f64::max);
    push("t_diagonal_unitary", t_dev < UNITARITY_TOL, format!("max ||T|−1| = {t_dev:.3e}"));

    let c = md.charge_conjugation();
    push("c_permutation", c.is_some(), if md.s_exact.is_some() { "exact on Ŝ".into() } else { "float".into() });
    if let Some(perm) = &c {
        push("c_involution", (0..dim).all(|a| perm[perm[a]] == a), String::new());
        let commutes = match &md.t_exact {
            Some(t) => (0..dim).all(|a| t[perm[a]] == t[a]),
            None => (0..dim).all(|a| (md.t_float[perm[a]] - md.t_float[a]).norm() < 1e-9),
        };
        push("c_commutes_t", commutes, String::new());
        push("c_fixes_vacuum", perm[0] == 0, String::new());
    }

    let s00 = s[0][0].re;
    let min_qdim = (0..dim).map(|a| s[a][0].re / s00).fold(f64::INFINITY, f64::min);
    push("qdim_at_least_one", min_qdim >= 1.0 - 1e-12, format!("min qdim {min_qdim:.15}"));

    let mut worst = f64::INFINITY;
    for a in 0..dim {
        for b in 0..dim {
            worst = worst.min(s[a][0].re * s[0][b].re - s[a][b].norm() * s00);
        }
    }
    push("pf_inequality", worst >= -1e-12, format!("min slack {worst:.3e}"));

    let ok = checks.iter().all(|c| c.passed);
    ValidityReport { checks, charge_conjugation: c, ok }
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModularDataJson {
    pub labels: Vec<String>,
    pub vacuum: Option<usize>,
    #[serde(default)]
    pub level: Option<u64>,
    pub order: Option<u64>,
    pub scale_sq: Option<String>,
    #[serde(rename = "S_exact")]
    pub s_exact: Option<Vec<Vec<Vec<String>>>>,
    #[serde(rename = "S_float")]
    pub s_float: Option<Vec<Vec<ComplexJson>>>,
    #[serde(rename = "T_exact")]
    pub t_exact: Option<Vec<Vec<String>>>,
    #[serde(rename = "T_float")]
    pub t_float: Option<Vec<ComplexJson>>,
}

pub fn to_json(md: &ModularData) -> ModularDataJson {
    let mut order = 1u64;
    for x in md.s_exact.iter().flatten().flatten().chain(md.t_exact.iter().flatten()) {
        order = order.lcm(&x.order());
    }
    let field = CyclotomicField::new(order);
    let enc = |x: &CycElem| CycElemJson::from(&x.lift(&field).expect("lift to common order")).coeffs;
    ModularDataJson {
        labels: md.labels.clone(),
        vacuum: Some(0),
        level: md.a1.as_ref().map(|a| a.k),
        order: (md.s_exact.is_some() || md.t_exact.is_some()).then_some(order),
        scale_sq: md.scale_sq.as_ref().map(|s| s.to_string()),
        s_exact: md.s_exact.as_ref().map(|s| s.iter().map(|r| r.iter().map(enc).collect()).collect()),
        s_float: Some(md.s_float.iter().map(|r| r.iter().map(|&z| z.into()).collect()).collect()),
        t_exact: md.t_exact.as_ref().map(|t| t.iter().map(enc).collect()),
        t_float: Some(md.t_float.iter().map(|&z| z.into()).collect()),
    }
}

pub fn from_json(j: &ModularDataJson) -> Result<ModularData, ModularDataError> {
    let dim = j.labels.len();
    let vac = j.vacuum.ok_or(ModularDataError::MissingVacuum)?;
    if vac >= dim {
        return Err(ModularDataError::MissingVacuum);
    }
    // reorder so that the vacuum is label 0
    let mut order_idx: Vec<usize> = vec![vac];
    order_idx.extend((0..dim).filter(|&i| i != vac));
    let shape_err = |what: &str| ModularDataError::Shape(format!("{what} does not match {dim} labels"));
    let check_square = |rows: usize, cols: Vec<usize>, what: &str| {
        if rows != dim || cols.iter().any(|&c| c != dim) {
            Err(shape_err(what))
        } else {
            Ok(())
        }
    };
    let scale_sq = j.scale_sq.as_deref().map(crate::exactnum::parse_rational).transpose()?;
    let field = match (j.order, &j.s_exact, &j.t_exact) {
        (Some(o), _, _) if o >= 1 => Some(CyclotomicField::new(o)),
        (_, None, None) => None,
        _ => return Err(ModularDataError::Schema("exact entries need a positive 'order'".into())),
    };
    let dec = |coeffs: &Vec<String>| -> Result<CycElem, ModularDataError> {
        let f = field.as_ref().unwrap();
        Ok(CycElemJson { order: f.order(), coeffs: coeffs.clone() }.to_elem(f)?)
    };
    let s_exact = match &j.s_exact {
        Some(s) => {
            check_square(s.len(), s.iter().map(|r| r.len()).collect(), "S_exact")?;
            let rows = order_idx
                .iter()
                .map(|&a| order_idx.iter().map(|&b| dec(&s[a][b])).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            Some(rows)
        }
        None => None,
    };
    let t_exact = match &j.t_exact {
        Some(t) => {
            if t.len() != dim {
                return Err(shape_err("T_exact"));
            }
            Some(order_idx.iter().map(|&a| dec(&t[a])).collect::<Result<Vec<_>, _>>()?)
        }
        None => None,
    };
    let s_float: Vec<Vec<Complex64>> = match (&j.s_float, &s_exact) {
        (Some(s), _) => {
            check_square(s.len(), s.iter().map(|r| r.len()).collect(), "S_float")?;
            order_idx
                .iter()
                .map(|&a| order_idx.iter().map(|&b| Complex64::new(s[a][b].re, s[a][b].im)).collect())
                .collect()
        }
        (None, Some(e)) => {
            let scale = scale_sq.as_ref().map(|s| rational_to_f64(s).sqrt()).unwrap_or(1.0);
            e.iter().map(|r| r.iter().map(|x| x.to_c64() * scale).collect()).collect()
        }
        (None, None) => return Err(ModularDataError::Schema("no S entries".into())),
    };
    let t_float: Vec<Complex64> = match (&j.t_float, &t_exact) {
        (Some(t), _) => {
            if t.len() != dim {
                return Err(shape_err("T_float"));
            }
            order_idx.iter().map(|&a| Complex64::new(t[a].re, t[a].im)).collect()
        }
        (None, Some(e)) => e.iter().map(|x| x.to_c64()).collect(),
        (None, None) => return Err(ModularDataError::Schema("no T entries".into())),
    };
    Ok(ModularData {
        labels: order_idx.iter().map(|&i| j.labels[i].clone()).collect(),
        a1: j.level.map(A1Info::new),
        scale_sq,
        s_exact,
        t_exact,
        s_float,
        t_float,
    })
}

pub fn save_modular_data(md: &ModularData, path: &Path) -> Result<(), ModularDataError> {
    let text = serde_json::to_string_pretty(&to_json(md)).map_err(|e| ModularDataError::Schema(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn parse_modular_data(text: &str) -> Result<ModularData, ModularDataError> {
    let j: ModularDataJson = serde_json::from_str(text).map_err(|e| ModularDataError::Schema(e.to_string()))?;
    from_json(&j)
}

pub fn load_modular_data(path: &Path) -> Result<ModularData, ModularDataError> {
    parse_modular_data(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Characters

/// Σ_{i=0}^{n} e^{(n−2i)z}.
pub fn finite_char_a1(n: u64, z: Complex64) -> Complex64 {
    (0..=n).map(|i| ((n as f64 - 2.0 * i as f64) * z).exp()).sum()
}

/// The same character as a Laurent polynomial in x = e^z: exponent → multiplicity.
pub fn finite_char_a1_formal(n: u64) -> std::collections::BTreeMap<i64, i64> {
    (0..=n as i64).map(|i| (n as i64 - 2 * i, 1)).collect()
}

/// m ⊗ n = (m+n) ⊕ (m+n−2) ⊕ … ⊕ |m−n|, confirmed against the product of
/// formal characters.
pub fn tensor_decompose_a1(m: u64, n: u64) -> Vec<u64> {
    let lo = m.abs_diff(n);
    let out: Vec<u64> = (0..=m.min(n)).map(|i| m + n - 2 * i).collect();
    debug_assert_eq!(*out.last().unwrap(), lo);
    let mut prod = std::collections::BTreeMap::new();
    for (ea, ca) in finite_char_a1_formal(m) {
        for (eb, cb) in finite_char_a1_formal(n) {
            *prod.entry(ea + eb).or_insert(0i64) += ca * cb;
        }
    }
    let mut sum = std::collections::BTreeMap::new();
    for &c in &out {
        for (e, x) in finite_char_a1_formal(c) {
            *sum.entry(e).or_insert(0i64) += x;
        }
    }
    assert_eq!(prod, sum, "tensor product rule failed for {m} ⊗ {n}");
    out
}

/// Θ^{(n)}_m(z, τ, u) = e^{−2πinu} Σ_{ℓ ∈ Z + m/2n} exp[2πi nτℓ² − 2√2 πi nℓz].
///
/// Terms are summed over |ℓ| ≤ L where every omitted term has modulus below
/// tol·e^{-5} and the omitted terms decay geometrically, so the truncation
/// error is below tol.
pub fn theta_eval(n: u64, m: i64, z: Complex64, tau: Complex64, u: Complex64, tol: f64) -> Result<Complex64, ModularDataError> {
    if tau.im <= 0.0 {
        return Err(ModularDataError::BadTau(tau.im));
    }
    let nf = n as f64;
    let i = Complex64::i();
    // log|term| = −a ℓ² + b|ℓ| with a = 2πn Im τ, b = 2√2 πn |Im z|
    let a = 2.0 * PI * nf * tau.im;
    let b = 2.0 * 2f64.sqrt() * PI * nf * z.im.abs();
    let c = -tol.ln() + 5.0;
    let l_max = (b + (b * b + 4.0 * a * c).sqrt()) / (2.0 * a) + 1.0;
    let shift = m as f64 / (2.0 * nf);
    let j_lo = (-l_max - shift).floor() as i64;
    let j_hi = (l_max - shift).ceil() as i64;
    let mut sum = Complex64::zero();
    for j in j_lo..=j_hi {
        let l = j as f64 + shift;
        let arg = 2.0 * PI * i * nf * tau * l * l - 2.0 * 2f64.sqrt() * PI * i * nf * l * z;
        sum += arg.exp();
    }
    Ok((-2.0 * PI * i * nf * u).exp() * sum)
}

/// χ_a = (Θ^{(n)}_{a+1} − Θ^{(n)}_{−a−1}) / (Θ^{(2)}_1 − Θ^{(2)}_{−1}).
pub fn affine_char_a1(k: u64, a: usize, z: Complex64, tau: Complex64, u: Complex64, tol: f64) -> Result<Complex64, ModularDataError> {
    if a as u64 > k {
        return Err(ModularDataError::BadLabel(a, k));
    }
    let n = k + 2;
    let m = a as i64 + 1;
    let num = theta_eval(n, m, z, tau, u, tol)? - theta_eval(n, -m, z, tau, u, tol)?;
    let den = theta_eval(2, 1, z, tau, u, tol)? - theta_eval(2, -1, z, tau, u, tol)?;
    if den.norm() < 1e3 * tol {
        return Err(ModularDataError::DegeneratePoint(den.norm()));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSample {
    pub z: Complex64,
    pub tau: Complex64,
}

/// τ ∈ {2i, 1+i} × z ∈ {0.1, 0.2}.
pub fn default_samples() -> Vec<TransformSample> {
    let mut out = Vec::new();
    for tau in [Complex64::new(0.0, 2.0), Complex64::new(1.0, 1.0)] {
        for z in [0.1, 0.2] {
            out.push(TransformSample { z: Complex64::new(z, 0.0), tau });
        }
    }
    out
}

pub const THETA_TOL: f64 = 1e-14;

/// max over λ and samples of |χ_λ(z/τ, −1/τ, z²/2τ) − Σ_μ S_{λμ} χ_μ(z, τ, 0)|.
///
/// The u-argument on the left carries +z²/2τ: with the e^{−2πinu} prefactor
/// this is the sign for which the transformation holds.
pub fn check_s_transform_with(k: u64, samples: &[TransformSample], s: &[Vec<Complex64>]) -> Result<f64, ModularDataError> {
    let dim = (k + 1) as usize;
    let zero = Complex64::zero();
    let mut worst = 0.0f64;
    for p in samples {
        let rhs_chars: Vec<Complex64> =
            (0..dim).map(|b| affine_char_a1(k, b, p.z, p.tau, zero, THETA_TOL)).collect::<Result<_, _>>()?;
        let z2 = p.z / p.tau;
        let tau2 = -1.0 / p.tau;
        let u2 = p.z * p.z / (2.0 * p.tau);
        for (a, row) in s.iter().enumerate().take(dim) {
            let lhs = affine_char_a1(k, a, z2, tau2, u2, THETA_TOL)?;
            let rhs: Complex64 = row.iter().zip(&rhs_chars).map(|(x, c)| x * c).sum();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

pub fn check_s_transform(k: u64, samples: &[TransformSample]) -> Result<f64, ModularDataError> {
    check_s_transform_with(k, samples, &a1_modular_data(k).s_float)
}

/// max over λ and samples of |χ_λ(z, τ+1, 0) − T_λλ χ_λ(z, τ, 0)|.
pub fn check_t_transform(k: u64, samples: &[TransformSample]) -> Result<f64, ModularDataError> {
    let md = a1_modular_data(k);
    let zero = Complex64::zero();
    let mut worst = 0.0f64;
    for p in samples {
        for a in 0..=k as usize {
            let lhs = affine_char_a1(k, a, p.z, p.tau + 1.0, zero, THETA_TOL)?;
            let rhs = md.t_float[a] * affine_char_a1(k, a, p.z, p.tau, zero, THETA_TOL)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub k: u64,
    pub pairs_checked: usize,
    pub all_equal: bool,
    pub first_failure: Option<(usize, usize)>,
}

/// Checks Ŝ_{λμ} = ch_λ · Ŝ_{0μ} exactly, where ch_λ is the finite character
/// evaluated at the real angle π(μ+1)/n:
/// ch_λ = Σ_{j=0}^{λ} ζ_{2n}^{(μ+1)(λ−2j)} = sin((λ+1)x)/sin(x).
pub fn ratio_identity_check(k: u64) -> RatioReport {
    let md = a1_modular_data(k);
    let s = md.s_exact.as_ref().unwrap();
    let n = k + 2;
    let field = s[0][0].field().clone();
    let dim = (k + 1) as usize;
    let mut first_failure = None;
    let mut pairs = 0;
    for lam in 0..dim {
        for mu in 0..dim {
            let mut acc = TermAccumulator::new(4 * n);
            for j in 0..=lam as i64 {
                // ζ_{2n}^e = ζ_{4n}^{2e}
                acc.add(2 * (mu as i64 + 1) * (lam as i64 - 2 * j), &Rational::one());
            }
            let ch = acc.finish(&field);
            pairs += 1;
            if ch.mul(&s[0][mu]).unwrap() != s[lam][mu] && first_failure.is_none() {
                first_failure = Some((lam, mu));
            }
        }
    }
    RatioReport { k, pairs_checked: pairs, all_equal: first_failure.is_none(), first_failure }
}

/// True when T_aa depends only on (a+1)² mod 4n, checked on exact entries.
pub fn t_periodicity_holds(md: &ModularData) -> bool {
    let (Some(a1), Some(t)) = (&md.a1, &md.t_exact) else { return false };
    let n = a1.n;
    let dim = t.len();
    (0..dim).all(|a| {
        (0..dim).all(|b| {
            let same = ((a + 1) * (a + 1)) as u64 % (4 * n) == ((b + 1) * (b + 1)) as u64 % (4 * n);
            same == (t[a] == t[b])
        })
    })
}

/// Ŝ·Ŝ = (n/2)·I exactly.
pub fn s_hat_square_is_scalar(md: &ModularData) -> bool {
    let (Some(a1), Some(scale)) = (&md.a1, &md.scale_sq) else { return false };
    let inv = scale.recip();
    let sq = a1_s_hat_square(a1.k);
    sq.iter().enumerate().all(|(a, row)| {
        row.iter().enumerate().all(|(b, v)| *v == Some(if a == b { inv.clone() } else { Rational::zero() }))
    })
}

/// Toy data on Z/3: Ŝ_ab = ζ₃^{ab}, scale 1/3, T = 1.
pub fn dft3_modular_data() -> ModularData {
    let f = CyclotomicField::new(3);
    let s = (0..3).map(|a| (0..3).map(|b| CycElem::root_of_unity(&f, a * b)).collect()).collect();
    let t = (0..3).map(|_| CycElem::one(&f)).collect();
    ModularData::from_exact(vec!["0".into(), "1".into(), "2".into()], s, Some(rat(1, 3)), t).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat_int;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn level_one_matrices() {
        let md = a1_modular_data(1);
        let r = 1.0 / 2f64.sqrt();
        let want = [[r, r], [r, -r]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((md.s_float[a][b] - want[a][b]).norm() < 1e-15);
            }
        }
        assert!((md.t_float[0] - Complex64::from_polar(1.0, -PI / 12.0)).norm() < 1e-15);
        assert!((md.t_float[1] - Complex64::from_polar(1.0, 5.0 * PI / 12.0)).norm() < 1e-15);
        assert!((md.t_exact.as_ref().unwrap()[0].to_c64() - md.t_float[0]).norm() < 1e-14);
        assert_eq!(md.a1.as_ref().unwrap().central_charge, rat(1, 1));
    }

    #[test]
    fn level_two_vacuum_row() {
        let md = a1_modular_data(2);
        assert!((md.s_float[0][1].re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(md.s_float[0].iter().all(|x| x.re > 0.0));
    }

    #[test]
    fn validity_for_levels() {
        for k in 1..=40 {
            let md = a1_modular_data(k);
            let rep = validate(&md);
            assert!(rep.ok, "k={k}: {:?}", rep.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
            assert_eq!(rep.charge_conjugation, Some((0..=k as usize).collect()));
            assert!(s_hat_square_is_scalar(&md));
            assert!(t_periodicity_holds(&md));
        }
    }

    #[test]
    fn level_zero_is_degenerate_but_valid() {
        let md = a1_modular_data(0);
        assert_eq!(md.dim(), 1);
        assert!(validate(&md).ok);
    }

    #[test]
    fn dft_charge_conjugation() {
        let rep = validate(&dft3_modular_data());
        assert_eq!(rep.charge_conjugation, Some(vec![0, 2, 1]));
        assert!(rep.check("c_permutation").unwrap().passed);
    }

    #[test]
    fn negated_vacuum_entry_fails_positivity() {
        let mut md = a1_modular_data(3);
        md.s_float[0][2] = -md.s_float[0][2];
        md.s_float[2][0] = -md.s_float[2][0];
        md.s_exact = None;
        let rep = validate(&md);
        assert!(!rep.check("vacuum_row_positive").unwrap().passed);
        assert!(!rep.ok);
    }

    #[test]
    fn json_round_trip() {
        let md = a1_modular_data(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("md.json");
        save_modular_data(&md, &path).unwrap();
        let back = load_modular_data(&path).unwrap();
        assert!(back.same_data(&md));
        assert!(validate(&back).ok);
    }

    #[test]
    fn json_errors() {
        let bad_shape = r#"{"labels":["0","1"],"vacuum":0,"order":null,"scale_sq":null,"S_exact":null,
            "S_float":[[{"re":1,"im":0},{"re":1,"im":0},{"re":0,"im":0}],[{"re":1,"im":0},{"re":1,"im":0},{"re":0,"im":0}]],
            "T_exact":null,"T_float":[{"re":1,"im":0},{"re":1,"im":0}]}"#;
        let e = parse_modular_data(bad_shape).unwrap_err();
        assert!(matches!(e, ModularDataError::Shape(_)), "{e}");
        let no_vac = r#"{"labels":["0"],"vacuum":null,"order":null,"scale_sq":null,"S_exact":null,
            "S_float":[[{"re":1,"im":0}]],"T_exact":null,"T_float":[{"re":1,"im":0}]}"#;
        assert_eq!(parse_modular_data(no_vac).unwrap_err().code(), 12);
        assert_eq!(parse_modular_data("{\"labels\": 3}").unwrap_err().code(), 10);
    }

    #[test]
    fn float_only_file_validates() {
        let mut j = to_json(&a1_modular_data(3));
        j.s_exact = None;
        j.t_exact = None;
        j.order = None;
        let md = from_json(&j).unwrap();
        assert!(md.s_exact.is_none());
        let rep = validate(&md);
        assert!(rep.ok);
        assert_eq!(rep.check("symmetric").unwrap().detail, "float");
    }

    #[test]
    fn vacuum_reordering() {
        let mut j = to_json(&dft3_modular_data());
        j.labels.rotate_left(1);
        let s = j.s_exact.as_mut().unwrap();
        s.rotate_left(1);
        s.iter_mut().for_each(|r| r.rotate_left(1));
        let sf = j.s_float.as_mut().unwrap();
        sf.rotate_left(1);
        sf.iter_mut().for_each(|r| r.rotate_left(1));
        j.t_exact.as_mut().unwrap().rotate_left(1);
        j.t_float.as_mut().unwrap().rotate_left(1);
        j.vacuum = Some(2);
        let md = from_json(&j).unwrap();
        assert_eq!(md.labels, vec!["0", "1", "2"]);
        assert!(md.same_data(&dft3_modular_data()));
    }

    #[test]
    fn finite_characters() {
        assert_eq!(finite_char_a1(0, c(0.7, 0.3)), c(1.0, 0.0));
        let z = c(0.4, 0.0);
        assert!((finite_char_a1(1, z) - 2.0 * z.cosh()).norm() < 1e-15);
        assert!((finite_char_a1(3, c(0.0, 0.0)) - 4.0).norm() < 1e-15);
        // sin((n+1)x)/sin(x) at z = ix
        let x = 0.37f64;
        let want = (4.0 * x).sin() / x.sin();
        assert!((finite_char_a1(3, c(0.0, x)) - want).norm() < 1e-13);
    }

    #[test]
    fn tensor_products() {
        assert_eq!(tensor_decompose_a1(1, 1), vec![2, 0]);
        assert_eq!(tensor_decompose_a1(5, 0), vec![5]);
        assert_eq!(tensor_decompose_a1(2, 3), vec![5, 3, 1]);
    }

    #[test]
    fn theta_symmetries() {
        let (z, tau, u) = (c(0.1, 0.0), c(0.0, 2.0), Complex64::zero());
        for n in 1..=4u64 {
            for m in -3..=3i64 {
                let a = theta_eval(n, m, z, tau, u, 1e-15).unwrap();
                let b = theta_eval(n, m + 2 * n as i64, z, tau, u, 1e-15).unwrap();
                assert!((a - b).norm() < 1e-13);
                let c_ = theta_eval(n, -m, z, tau, u, 1e-15).unwrap();
                let d = theta_eval(n, m, -z, tau, u, 1e-15).unwrap();
                assert!((c_ - d).norm() < 1e-13);
            }
        }
        let u0 = c(0.3, 0.1);
        let a = theta_eval(3, 1, z, tau, Complex64::zero(), 1e-15).unwrap();
        let b = theta_eval(3, 1, z, tau, u0, 1e-15).unwrap();
        let factor = (-2.0 * PI * Complex64::i() * 3.0 * u0).exp();
        assert!((b - a * factor).norm() < 1e-13);
        assert!(matches!(theta_eval(1, 0, z, c(1.0, 0.0), u, 1e-10), Err(ModularDataError::BadTau(_))));
    }

    #[test]
    fn affine_character_examples() {
        for p in default_samples() {
            let v = affine_char_a1(0, 0, p.z, p.tau, Complex64::zero(), 1e-14).unwrap();
            assert!((v - 1.0).norm() < 1e-12);
        }
        let (z, tau) = (c(0.15, 0.0), c(0.2, 1.3));
        for k in 1..=4u64 {
            for a in 0..=k as usize {
                // Weyl reflection z ↦ −z fixes every character; a ↦ k−a does not
                let x = affine_char_a1(k, a, z, tau, Complex64::zero(), 1e-14).unwrap();
                let y = affine_char_a1(k, a, -z, tau, Complex64::zero(), 1e-14).unwrap();
                assert!((x - y).norm() < 1e-10);
                if 2 * a != k as usize {
                    let w = affine_char_a1(k, k as usize - a, -z, tau, Complex64::zero(), 1e-14).unwrap();
                    assert!((x.norm() - w.norm()).abs() > 1e-3);
                }
            }
        }
        assert!(matches!(
            affine_char_a1(1, 0, Complex64::zero(), c(0.0, 2.0), Complex64::zero(), 1e-14),
            Err(ModularDataError::DegeneratePoint(_))
        ));
    }

    #[test]
    fn modular_transforms() {
        for k in 1..=2 {
            let ds = check_s_transform(k, &default_samples()).unwrap();
            let dt = check_t_transform(k, &default_samples()).unwrap();
            assert!(ds < 1e-8, "k={k} S deviation {ds}");
            assert!(dt < 1e-10, "k={k} T deviation {dt}");
        }
        let extra = [TransformSample { z: c(0.2, 0.0), tau: c(0.3, 1.0) }];
        assert!(check_t_transform(2, &extra).unwrap() < 1e-10);
    }

    #[test]
    fn identity_s_is_rejected() {
        for k in 1..=3u64 {
            let d = (k + 1) as usize;
            let id: Vec<Vec<Complex64>> =
                (0..d).map(|a| (0..d).map(|b| if a == b { c(1.0, 0.0) } else { Complex64::zero() }).collect()).collect();
            assert!(check_s_transform_with(k, &default_samples(), &id).unwrap() > 1e-3);
        }
    }

    #[test]
    fn ratio_identity() {
        for k in 1..=20 {
            let r = ratio_identity_check(k);
            assert!(r.all_equal, "{r:?}");
        }
        let md = a1_modular_data(2);
        let s = md.s_exact.unwrap();
        // λ = k simple current at μ = 1: ratio −1; λ = 1, μ = 1: ratio 0
        assert_eq!(s[2][1], s[0][1].neg());
        assert!(s[1][1].is_zero());
    }

    proptest! {
        #[test]
        fn commutation_matches_float(k in 1u64..8, entries in prop::collection::vec(0i64..3, 81), scalar in any::<bool>()) {
            let md = a1_modular_data(k);
            let d = (k + 1) as usize;
            let m: Vec<Vec<i64>> = (0..d)
                .map(|a| (0..d).map(|b| if scalar { entries[0] * (a == b) as i64 } else { entries[a * 9 + b] }).collect())
                .collect();
            let s = md.s_exact.as_ref().unwrap();
            let exact = (0..d).all(|a| (0..d).all(|b| {
                let mut l = CycElem::zero(s[0][0].field());
                let mut r = l.clone();
                for c in 0..d {
                    l = l.add(&s[c][b].scale(&rat_int(m[a][c]))).unwrap();
                    r = r.add(&s[a][c].scale(&rat_int(m[c][b]))).unwrap();
                }
                l == r
            }));
            let float = (0..d).all(|a| (0..d).all(|b| {
                let l: f64 = (0..d).map(|c| m[a][c] as f64 * md.s_float[c][b].re).sum();
                let r: f64 = (0..d).map(|c| md.s_float[a][c].re * m[c][b] as f64).sum();
                (l - r).abs() < 1e-9
            }));
            prop_assert_eq!(exact, float);
        }
    }
}
