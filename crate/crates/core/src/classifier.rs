//! Physical invariants of A1 at level k: nonnegative integer matrices with
//! M₀₀ = 1 commuting with S and T.
//!
//! Stage 1 computes the exact rational commutant restricted to the cells
//! allowed by the T and Galois selection rules.  Stage 2 enumerates the
//! nonnegative integer points of that space using the bound
//! Σ S₀λ M_λμ S₀μ = 1.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ade::rational_kernel;
use crate::exactnum::{CyclotomicField, IntAccumulator, Rational};
use crate::galois::sign_vector_partition;
use crate::modular_data::a1_two_s_hat_terms;

/// Largest level accepted without `allow_large`.
pub const DEFAULT_LEVEL_CAP: u64 = 32;
const PRIME: u64 = (1 << 61) - 1;
const SVD_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("level must be at least 1")]
    LevelZero,
    #[error("the D series needs an even level, got {0}")]
    OddLevel(u64),
    #[error("matrix has shape {0}x{1}, expected {2}x{2}")]
    Shape(usize, usize, usize),
    #[error("matrix is not a physical invariant: {0}")]
    NotInvariant(String),
    #[error("exact commutant has dimension {exact} but the float system has nullity {float}")]
    FloatExactMismatch { exact: usize, float: usize },
    #[error("search space too large: {0}")]
    SearchTooLarge(String),
    #[error("permutation theorem violated: {0}")]
    TheoremViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tag {
    A(u64),
    D(u64),
    E6,
    E7,
    E8,
    Unknown,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::A(r) => write!(f, "A{r}"),
            Tag::D(r) => write!(f, "D{r}"),
            Tag::E6 => write!(f, "E6"),
            Tag::E7 => write!(f, "E7"),
            Tag::E8 => write!(f, "E8"),
            Tag::Unknown => write!(f, "unknown"),
        }
    }
}

impl Tag {
    /// Diagram name used by the exponent catalogue.
    pub fn diagram(&self) -> Option<String> {
        match self {
            Tag::Unknown => None,
            t => Some(t.to_string()),
        }
    }
}

pub type Matrix = Vec<Vec<u32>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantMatrix {
    pub k: u64,
    pub m: Matrix,
    #[serde(serialize_with = "ser_tag")]
    pub tag: Tag,
    pub exceptional: bool,
}

fn ser_tag<S: serde::Serializer>(t: &Tag, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_string())
}

/// Exact A1 data in the integer coordinates used throughout: 2Ŝ_ab reduced
/// to the power basis of Q(ζ_{4n}), indexed by (a+1)(b+1) mod 2n.
pub struct A1Tables {
    pub k: u64,
    pub n: u64,
    pub dim: usize,
    two_s: Vec<Vec<i64>>,
    s0: Vec<f64>,
}

impl A1Tables {
    pub fn new(k: u64) -> Result<Self, ClassifierError> {
        if k == 0 {
            return Err(ClassifierError::LevelZero);
        }
        let n = k + 2;
        let field = CyclotomicField::new(4 * n);
        let mut acc = IntAccumulator::new(4 * n);
        let two_s = (0..2 * n)
            .map(|m| {
                acc.clear();
                for (e, c) in a1_two_s_hat_terms(n, m as i64) {
                    acc.add(e, c);
                }
                acc.reduce(&field)
            })
            .collect();
        let scale = (2.0 / n as f64).sqrt();
        let s0 = (0..=k).map(|a| scale * (std::f64::consts::PI * (a + 1) as f64 / n as f64).sin()).collect();
        Ok(A1Tables { k, n, dim: (k + 1) as usize, two_s, s0 })
    }

    fn s(&self, a: usize, b: usize) -> &[i64] {
        &self.two_s[((a + 1) * (b + 1)) % (2 * self.n as usize)]
    }

    fn t_equal(&self, a: usize, b: usize) -> bool {
        ((a + 1) * (a + 1)) % (4 * self.n as usize) == ((b + 1) * (b + 1)) % (4 * self.n as usize)
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.s0[a] * self.s0[b]
    }

    /// (M·2Ŝ)_ab − (2Ŝ·M)_ab in power-basis coordinates.
    fn commutator_entry(&self, m: &Matrix, a: usize, b: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.two_s[0].len()];
        for c in 0..self.dim {
            if m[a][c] != 0 {
                for (o, x) in out.iter_mut().zip(self.s(c, b)) {
                    *o += m[a][c] as i64 * x;
                }
            }
            if m[c][b] != 0 {
                for (o, x) in out.iter_mut().zip(self.s(a, c)) {
                    *o -= m[c][b] as i64 * x;
                }
            }
        }
        out
    }

    /// Exact check of MŜ = ŜM, MT = TM and M₀₀ = 1.
    pub fn verify(&self, m: &Matrix) -> Result<(), ClassifierError> {
        if m.len() != self.dim || m.iter().any(|r| r.len() != self.dim) {
            let cols = m.first().map_or(0, Vec::len);
            return Err(ClassifierError::Shape(m.len(), cols, self.dim));
        }
        if m[0][0] != 1 {
            return Err(ClassifierError::NotInvariant(format!("M00 = {}", m[0][0])));
        }
        for a in 0..self.dim {
            for b in 0..self.dim {
                if m[a][b] != 0 && !self.t_equal(a, b) {
                    return Err(ClassifierError::NotInvariant(format!("MT != TM at ({a},{b})")));
                }
            }
        }
        for a in 0..self.dim {
            for b in 0..self.dim {
                if self.commutator_entry(m, a, b).iter().any(|&x| x != 0) {
                    return Err(ClassifierError::NotInvariant(format!("MS != SM at ({a},{b})")));
                }
            }
        }
        Ok(())
    }
}

/// Pairs with (a+1)² ≡ (b+1)² mod 4n.
pub fn t_selection(k: u64) -> Vec<(usize, usize)> {
    let q = 4 * (k as usize + 2);
    let d = k as usize + 1;
    (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).filter(|&(a, b)| ((a + 1) * (a + 1)) % q == ((b + 1) * (b + 1)) % q).collect()
}

/// Pairs inside one Galois sign class.
pub fn galois_selection(k: u64) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> =
        sign_vector_partition(k).iter().flat_map(|c| c.iter().flat_map(move |&a| c.iter().map(move |&b| (a, b)))).collect();
    out.sort();
    out
}

/// Cells allowed by both selection rules, sorted.
pub fn allowed_cells(k: u64) -> Vec<(usize, usize)> {
    let g: BTreeSet<(usize, usize)> = galois_selection(k).into_iter().collect();
    t_selection(k).into_iter().filter(|c| g.contains(c)).collect()
}

/// floor(1/(S₀λS₀μ)), rounded up slightly so no admissible value is cut.
pub fn entry_bounds(k: u64) -> Result<Vec<Vec<u64>>, ClassifierError> {
    let t = A1Tables::new(k)?;
    Ok((0..t.dim).map(|a| (0..t.dim).map(|b| bound_of(t.weight(a, b))).collect()).collect())
}

fn bound_of(w: f64) -> u64 {
    (1.0 / w + 1e-9).floor() as u64
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn to_mod(x: i64) -> u64 {
    x.rem_euclid(PRIME as i64) as u64
}

/// Incremental row echelon form mod p; `push` reports whether the rank grew.
struct ModPEchelon {
    pivots: Vec<(usize, Vec<u64>)>,
}

impl ModPEchelon {
    fn push(&mut self, row: &[i64]) -> bool {
        let mut r: Vec<u64> = row.iter().map(|&x| to_mod(x)).collect();
        for (pc, p) in &self.pivots {
            let f = r[*pc];
            if f != 0 {
                for (x, y) in r.iter_mut().zip(p) {
                    *x = (*x + PRIME - mulmod(f, *y)) % PRIME;
                }
            }
        }
        let Some(pc) = r.iter().position(|&x| x != 0) else { return false };
        let inv = powmod(r[pc], PRIME - 2);
        r.iter_mut().for_each(|x| *x = mulmod(*x, inv));
        self.pivots.push((pc, r));
        true
    }
}

#[derive(Debug, Clone)]
pub struct Commutant {
    pub cells: Vec<(usize, usize)>,
    /// Basis vectors indexed like `cells`.
    pub basis: Vec<Vec<Rational>>,
    pub float_nullity: usize,
    pub equations_used: usize,
}

/// Equation rows: for each (a,b) and each power-basis coordinate j, the
/// coefficient of every unknown cell in coordinate j of (MŜ − ŜM)_ab.
fn equation_rows(t: &A1Tables, cells: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let phi = t.two_s[0].len();
    let mut rows = Vec::new();
    for a in 0..t.dim {
        for b in 0..t.dim {
            let involved: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].0 == a || cells[i].1 == b).collect();
            if involved.is_empty() {
                continue;
            }
            let mut block = vec![vec![0i64; cells.len()]; phi];
            for &i in &involved {
                let (x, y) = cells[i];
                if x == a {
                    for j in 0..phi {
                        block[j][i] += t.s(y, b)[j];
                    }
                }
                if y == b {
                    for j in 0..phi {
                        block[j][i] -= t.s(a, x)[j];
                    }
                }
            }
            rows.extend(block.into_iter().filter(|r| r.iter().any(|&x| x != 0)));
        }
    }
    rows
}

fn float_nullity(t: &A1Tables, cells: &[(usize, usize)]) -> usize {
    let s = |a: usize, b: usize| {
        let m = ((a + 1) * (b + 1)) as f64;
        (std::f64::consts::PI * m / t.n as f64).sin()
    };
    let nrows = t.dim * t.dim;
    let mut mat = DMatrix::<f64>::zeros(nrows.max(cells.len()), cells.len());
    for a in 0..t.dim {
        for b in 0..t.dim {
            for (i, &(x, y)) in cells.iter().enumerate() {
                let mut v = 0.0;
                if x == a {
                    v += s(y, b);
                }
                if y == b {
                    v -= s(a, x);
                }
                mat[(a * t.dim + b, i)] = v;
            }
        }
    }
    let sv = mat.svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max).max(1.0);
    sv.iter().filter(|&&x| x < SVD_TOL * max).count()
}

fn satisfies(row: &[i64], v: &[Rational]) -> bool {
    let mut acc = Rational::zero();
    for (c, x) in row.iter().zip(v) {
        if *c != 0 && !x.is_zero() {
            acc += x * Rational::from_integer((*c).into());
        }
    }
    acc.is_zero()
}

/// Exact commutant of Ŝ and T supported on the allowed cells.
pub fn commutant(k: u64) -> Result<Commutant, ClassifierError> {
    let t = A1Tables::new(k)?;
    let cells = allowed_cells(k);
    let rows = equation_rows(&t, &cells);
    // rows independent mod p give the candidate system; the exact kernel is
    // then checked against every equation and refined if a row was missed
    let mut ech = ModPEchelon { pivots: Vec::new() };
    let mut chosen: Vec<usize> = (0..rows.len()).filter(|&i| ech.push(&rows[i])).collect();
    let basis = loop {
        let sel: Vec<Vec<i64>> = chosen.iter().map(|&i| rows[i].clone()).collect();
        let basis = rational_kernel(&sel, cells.len());
        let bad: Vec<usize> =
            (0..rows.len()).filter(|&i| !chosen.contains(&i) && basis.iter().any(|v| !satisfies(&rows[i], v))).collect();
        if bad.is_empty() {
            break basis;
        }
        chosen.extend(bad);
    };
    let float = float_nullity(&t, &cells);
    if float != basis.len() {
        return Err(ClassifierError::FloatExactMismatch { exact: basis.len(), float });
    }
    Ok(Commutant { cells, basis, float_nullity: float, equations_used: chosen.len() })
}

/// Inverse of a small square rational matrix, None when singular.
fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let d = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..d).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..d {
        let p = (c..d).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        a[c].iter_mut().for_each(|x| *x *= &inv);
        for i in 0..d {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * d {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[d..].to_vec()).collect())
}

/// Enumerates every physical invariant at level k, sorted and deduplicated.
pub fn enumerate_invariants(k: u64) -> Result<Vec<InvariantMatrix>, ClassifierError> {
    let t = A1Tables::new(k)?;
    let com = commutant(k)?;
    let cells = &com.cells;
    let dimk = com.basis.len();

    // coordinates: the heaviest cells whose basis columns are independent
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&i, &j| t.weight(cells[j].0, cells[j].1).total_cmp(&t.weight(cells[i].0, cells[i].1)).then(i.cmp(&j)));
    let mut chosen: Vec<usize> = Vec::new();
    for &c in &order {
        if chosen.len() == dimk {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(c);
        let cols: Vec<Vec<Rational>> = trial.iter().map(|&i| com.basis.iter().map(|v| v[i].clone()).collect()).collect();
        if rank(cols) == trial.len() {
            chosen = trial;
        }
    }
    let sub: Vec<Vec<Rational>> = (0..dimk).map(|i| chosen.iter().map(|&c| com.basis[i][c].clone()).collect()).collect();
    // u_j = Σ_i inv[j][i]·basis_i has u_j(chosen_l) = δ_jl when inv = sub⁻¹
    let inv = invert(&sub).expect("coordinate cells chosen independent");
    let dual: Vec<Vec<Rational>> = (0..dimk)
        .map(|j| {
            (0..cells.len())
                .map(|c| (0..dimk).fold(Rational::zero(), |acc, i| acc + &inv[j][i] * &com.basis[i][c]))
                .collect()
        })
        .collect();
    let weights: Vec<f64> = chosen.iter().map(|&c| t.weight(cells[c].0, cells[c].1)).collect();
    let bounds: Vec<u64> = weights.iter().map(|&w| bound_of(w)).collect();
    let volume: f64 = bounds.iter().map(|&b| (b + 1) as f64).product();
    if volume > 1e8 {
        return Err(ClassifierError::SearchTooLarge(format!("{dimk} coordinates with bounds {bounds:?}")));
    }

    let origin = cells.iter().position(|&c| c == (0, 0)).expect("(0,0) is always allowed");
    let mut found: BTreeSet<Matrix> = BTreeSet::new();
    let mut x = vec![0u64; dimk];
    search(0, 0.0, &mut x, &bounds, &weights, &mut |x: &[u64]| {
        let mut m = vec![vec![0u32; t.dim]; t.dim];
        for (c, &(a, b)) in cells.iter().enumerate() {
            let v = (0..dimk).fold(Rational::zero(), |acc, j| acc + &dual[j][c] * Rational::from_integer(x[j].into()));
            if !v.is_integer() || v.is_negative() {
                return;
            }
            if c == origin && !v.is_one() {
                return;
            }
            m[a][b] = v.to_integer().to_u32().expect("entry below the weight bound");
        }
        found.insert(m);
    });
    let mut out = Vec::with_capacity(found.len());
    for m in found {
        t.verify(&m)?;
        let (tag, exceptional) = tag_of(&t, &m)?;
        out.push(InvariantMatrix { k, m, tag, exceptional });
    }
    Ok(out)
}

fn search(i: usize, used: f64, x: &mut Vec<u64>, bounds: &[u64], w: &[f64], emit: &mut dyn FnMut(&[u64])) {
    if i == x.len() {
        emit(x);
        return;
    }
    for v in 0..=bounds[i] {
        let u = used + w[i] * v as f64;
        if u > 1.0 + 1e-9 {
            break;
        }
        x[i] = v;
        search(i + 1, u, x, bounds, w, emit);
    }
    x[i] = 0;
}

fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[r][c];
                for j in c..cols {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}



fn from_blocks(k: u64, blocks: &[(&[usize], &[usize], u32)]) -> Matrix {
    let d = k as usize + 1;
    let mut m = vec![vec![0u32; d]; d];
    for (rows, cols, c) in blocks {
        for &a in *rows {
            for &b in *cols {
                m[a][b] += c;
            }
        }
    }
    m
}

pub fn identity(k: u64) -> Matrix {
    let d = k as usize + 1;
    (0..d).map(|a| (0..d).map(|b| (a == b) as u32).collect()).collect()
}

/// Σ χ_a χ*_{J^a a} for k/2 odd; Σ_{a even < k/2} |χ_a + χ_{k−a}|² + 2|χ_{k/2}|² for k/2 even.
pub fn d_series_builder(k: u64) -> Result<Matrix, ClassifierError> {
    if k % 2 == 1 || k == 0 {
        return Err(ClassifierError::OddLevel(k));
    }
    let d = k as usize + 1;
    let ku = k as usize;
    let mut m = vec![vec![0u32; d]; d];
    if (k / 2) % 2 == 1 {
        for a in 0..d {
            let b = if a % 2 == 0 { a } else { ku - a };
            m[a][b] = 1;
        }
    } else {
        for a in (0..ku / 2).step_by(2) {
            for x in [a, ku - a] {
                for y in [a, ku - a] {
                    m[x][y] = 1;
                }
            }
        }
        m[ku / 2][ku / 2] = 2;
    }
    Ok(m)
}

/// The exceptional matrix at k = 10, 16 or 28.
pub fn exceptional_matrix(k: u64) -> Option<(Tag, Matrix)> {
    match k {
        10 => Some((Tag::E6, from_blocks(10, &[(&[0, 6], &[0, 6], 1), (&[3, 7], &[3, 7], 1), (&[4, 10], &[4, 10], 1)]))),
        16 => Some((
            Tag::E7,
            from_blocks(
                16,
                &[
                    (&[0, 16], &[0, 16], 1),
                    (&[4, 12], &[4, 12], 1),
                    (&[6, 10], &[6, 10], 1),
                    (&[8], &[2, 14], 1),
                    (&[2, 14], &[8], 1),
                    (&[8], &[8], 1),
                ],
            ),
        )),
        28 => Some((Tag::E8, from_blocks(28, &[(&[0, 10, 18, 28], &[0, 10, 18, 28], 1), (&[6, 12, 16, 22], &[6, 12, 16, 22], 1)]))),
        _ => None,
    }
}

fn tag_of(t: &A1Tables, m: &Matrix) -> Result<(Tag, bool), ClassifierError> {
    let k = t.k;
    if *m == identity(k) {
        return Ok((Tag::A(k + 1), false));
    }
    if k.is_multiple_of(2) && *m == d_series_builder(k)? {
        return Ok((Tag::D(k / 2 + 2), false));
    }
    if let Some((tag, e)) = exceptional_matrix(k) {
        if *m == e {
            return Ok((tag, true));
        }
    }
    Ok((Tag::Unknown, true))
}

/// Tag and exceptional flag of a matrix, which must be a verified invariant.
pub fn classify_invariant(m: &Matrix, k: u64) -> Result<(Tag, bool), ClassifierError> {
    let t = A1Tables::new(k)?;
    t.verify(m)?;
    tag_of(&t, m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermutationReport {
    /// False when M_{λ0} ≠ δ_{λ0}, in which case nothing else is checked.
    pub applies: bool,
    pub perm: Option<Vec<usize>>,
    pub s_preserved: Option<bool>,
}

/// For M with trivial 0-column: M is a permutation π with Ŝ_{πλ,πμ} = Ŝ_{λμ}.
pub fn permutation_case_check(m: &Matrix, k: u64) -> Result<PermutationReport, ClassifierError> {
    let t = A1Tables::new(k)?;
    t.verify(m)?;
    if (0..t.dim).any(|l| m[l][0] != (l == 0) as u32) {
        return Ok(PermutationReport { applies: false, perm: None, s_preserved: None });
    }
    let mut perm = vec![0usize; t.dim];
    for (l, row) in m.iter().enumerate() {
        let nz: Vec<usize> = (0..t.dim).filter(|&b| row[b] != 0).collect();
        if nz.len() != 1 || row[nz[0]] != 1 {
            return Err(ClassifierError::TheoremViolation(format!("row {l} of M is not a permutation row")));
        }
        perm[l] = nz[0];
    }
    let preserved = (0..t.dim).all(|a| (0..t.dim).all(|b| t.s(perm[a], perm[b]) == t.s(a, b)));
    if !preserved {
        return Err(ClassifierError::TheoremViolation("permutation does not preserve S".into()));
    }
    Ok(PermutationReport { applies: true, perm: Some(perm), s_preserved: Some(true) })
}

/// Labels a with M_aa ≠ 0.
pub fn exponents_diagonal(m: &Matrix) -> Vec<usize> {
    (0..m.len()).filter(|&a| m[a][a] != 0).collect()
}

/// Σ_μ M_{0μ}Ŝ_{μλ} ≥ 0 for every λ, vanishing exactly on the zero columns of M.
pub fn null_columns_check(m: &Matrix, k: u64) -> Result<bool, ClassifierError> {
    let t = A1Tables::new(k)?;
    for l in 0..t.dim {
        let v: f64 = (0..t.dim)
            .map(|mu| m[0][mu] as f64 * (std::f64::consts::PI * ((mu + 1) * (l + 1)) as f64 / t.n as f64).sin())
            .sum();
        if v < -1e-9 {
            return Ok(false);
        }
        let zero_col = (0..t.dim).all(|a| m[a][l] == 0);
        if v.abs() < 1e-9 {
            let mut acc = vec![0i64; t.two_s[0].len()];
            for mu in 0..t.dim {
                for (o, x) in acc.iter_mut().zip(t.s(mu, l)) {
                    *o += m[0][mu] as i64 * x;
                }
            }
            if acc.iter().any(|&x| x != 0) || !zero_col {
                return Ok(false);
            }
        } else if zero_col {
            return Ok(false);
        }
    }
    Ok(true)
}

/// M_{Jλ,Jμ} = M_{λμ} with J(a) = k − a, and the full M_{J^iλ,J^jμ} = M_{λμ}
/// when M_{J0,0} ≠ 0.
pub fn current_symmetry(m: &Matrix) -> bool {
    let d = m.len();
    let j = |a: usize| d - 1 - a;
    let joint = (0..d).all(|a| (0..d).all(|b| m[j(a)][j(b)] == m[a][b]));
    let full = m[d - 1][0] == 0 || (0..d).all(|a| (0..d).all(|b| m[j(a)][b] == m[a][b] && m[a][j(b)] == m[a][b]));
    joint && full
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| (0..d).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
}

/// Whether Ŝ and T commute with M, without the M₀₀ = 1 requirement.
pub fn commutes(m: &Matrix, k: u64) -> Result<bool, ClassifierError> {
    let t = A1Tables::new(k)?;
    let t_ok = (0..t.dim).all(|a| (0..t.dim).all(|b| m[a][b] == 0 || t.t_equal(a, b)));
    Ok(t_ok && (0..t.dim).all(|a| (0..t.dim).all(|b| t.commutator_entry(m, a, b).iter().all(|&x| x == 0))))
}

fn chi_sum(labels: &[usize]) -> String {
    let terms: Vec<String> = labels.iter().map(|a| format!("χ{a}")).collect();
    if terms.len() == 1 {
        terms[0].clone()
    } else {
        format!("({})", terms.join("+"))
    }
}

/// The partition function Σ M_λμ χ_λ χ*_μ grouped into blocks of identical
/// rows and columns.
pub fn pretty(m: &Matrix) -> String {
    let d = m.len();
    let rows = crate::galois::partition_by(&(0..d).map(|a| m[a].clone()).collect::<Vec<_>>());
    let cols = crate::galois::partition_by(&(0..d).map(|b| (0..d).map(|a| m[a][b]).collect::<Vec<_>>()).collect::<Vec<_>>());
    let mut terms = Vec::new();
    for r in &rows {
        for c in &cols {
            let v = m[r[0]][c[0]];
            if v == 0 {
                continue;
            }
            let coef = if v == 1 { String::new() } else { v.to_string() };
            if r == c {
                let inner: Vec<String> = r.iter().map(|a| format!("χ{a}")).collect();
                terms.push(format!("{coef}|{}|²", inner.join("+")));
            } else {
                terms.push(format!("{coef}{}{}*", chi_sum(r), chi_sum(c)));
            }
        }
    }
    terms.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ade::exponents_of;

    #[test]
    fn selection_examples() {
        assert_eq!(t_selection(1), vec![(0, 0), (1, 1)]);
        assert!(t_selection(16).contains(&(2, 14)));
        let g = galois_selection(10);
        assert!(g.contains(&(0, 6)) && !g.contains(&(0, 1)));
        let g = galois_selection(28);
        for a in [0, 10, 18, 28] {
            for b in [0, 10, 18, 28] {
                assert!(g.contains(&(a, b)));
            }
        }
        for k in 1..=12 {
            assert!(allowed_cells(k).contains(&(0, 0)));
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(entry_bounds(1).unwrap(), vec![vec![2, 2], vec![2, 2]]);
        for k in 1..=20 {
            assert!(entry_bounds(k).unwrap()[0][0] >= 1);
        }
    }

    #[test]
    fn d_builder() {
        let m = d_series_builder(6).unwrap();
        for a in 0..7 {
            let b = if a % 2 == 0 { a } else { 6 - a };
            assert_eq!(m[a][b], 1);
            assert_eq!(m[a].iter().sum::<u32>(), 1);
        }
        assert_eq!(pretty(&d_series_builder(4).unwrap()), "|χ0+χ4|² + 2|χ2|²");
        assert_eq!(d_series_builder(2).unwrap(), identity(2));
        assert!(matches!(d_series_builder(5), Err(ClassifierError::OddLevel(5))));
    }

    #[test]
    fn small_levels() {
        let l1 = enumerate_invariants(1).unwrap();
        assert_eq!(l1.len(), 1);
        assert_eq!(l1[0].m, identity(1));
        assert_eq!(l1[0].tag, Tag::A(2));
        let l10 = enumerate_invariants(10).unwrap();
        let tags: Vec<Tag> = l10.iter().map(|i| i.tag).collect();
        assert_eq!(tags.len(), 3);
        for t in [Tag::A(11), Tag::D(7), Tag::E6] {
            assert!(tags.contains(&t));
        }
        let e6 = l10.iter().find(|i| i.tag == Tag::E6).unwrap();
        assert!(e6.exceptional);
        assert_eq!(pretty(&e6.m), "|χ0+χ6|² + |χ3+χ7|² + |χ4+χ10|²");
        assert_eq!(exponents_diagonal(&e6.m), vec![0, 3, 4, 6, 7, 10]);
    }

    #[test]
    fn exceptionals_verify() {
        for k in [10, 16, 28] {
            let (tag, m) = exceptional_matrix(k).unwrap();
            assert_eq!(classify_invariant(&m, k).unwrap(), (tag, true));
            let shifted: Vec<u64> = exponents_diagonal(&m).iter().map(|&a| a as u64 + 1).collect();
            assert_eq!(shifted, exponents_of(&tag.to_string()).unwrap());
        }
        let (_, e7) = exceptional_matrix(16).unwrap();
        let p = pretty(&e7);
        for part in ["|χ0+χ16|²", "|χ4+χ12|²", "|χ6+χ10|²", "χ8(χ2+χ14)*", "(χ2+χ14)χ8*", "|χ8|²"] {
            assert!(p.contains(part), "{p}");
        }
    }

    #[test]
    fn rejects_non_invariants() {
        let mut m = identity(4);
        m[1][3] = 1;
        assert!(matches!(classify_invariant(&m, 4), Err(ClassifierError::NotInvariant(_))));
        let mut m = identity(4);
        m[0][0] = 2;
        assert!(classify_invariant(&m, 4).is_err());
        assert!(matches!(classify_invariant(&identity(3), 4), Err(ClassifierError::Shape(..))));
    }

    #[test]
    fn permutation_case() {
        let r = permutation_case_check(&identity(5), 5).unwrap();
        assert_eq!(r.perm, Some((0..6).collect()));
        let r = permutation_case_check(&d_series_builder(6).unwrap(), 6).unwrap();
        assert!(r.applies && r.s_preserved == Some(true));
        let (_, e6) = exceptional_matrix(10).unwrap();
        assert!(!permutation_case_check(&e6, 10).unwrap().applies);
    }

    #[test]
    fn d_exponents() {
        // D_r exponents are the odd numbers below 2r−2 together with r−1
        for k in [4u64, 6, 8, 12] {
            let m = d_series_builder(k).unwrap();
            let r = k / 2 + 2;
            let mut want: Vec<u64> = (1..2 * r - 2).step_by(2).collect();
            want.push(r - 1);
            want.sort();
            let got: Vec<u64> = exponents_diagonal(&m).iter().map(|&a| a as u64 + 1).collect();
            let mut got_m = got.clone();
            got_m.sort();
            // M_aa counts the multiplicity of an exponent
            let with_mult: Vec<u64> =
                got.iter().flat_map(|&e| std::iter::repeat_n(e, m[e as usize - 1][e as usize - 1] as usize)).collect();
            assert_eq!(with_mult, want, "k={k}");
        }
    }
}
