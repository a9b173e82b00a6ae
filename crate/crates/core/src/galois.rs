//! Galois action σ_ℓ on the rescaled S matrix: a permutation of labels
//! together with signs, and the sign classes used by the selection rule.
//!
//! Signs for A1 data are reported in the sine-difference convention: with
//! Ŝ_ab = (ζ^m − ζ^{−m})/(2i), ζ = ζ_{2n}, the sign ε(a) is the one picked
//! up by ζ^m − ζ^{−m}.  The factor σ(i)/i is the same for every entry and
//! is reported separately as `global_sign`, so σ(Ŝ_ab) equals
//! global_sign·ε(a)·Ŝ_{a^σ,b}.

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{CycElem, ExactError};
use crate::modular_data::ModularData;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaloisError {
    #[error("ell = {0} is even; A1 data needs an odd residue mod {1}")]
    EvenEll(i64, u64),
    #[error("ell = {0} is not coprime to {1}")]
    NotCoprime(i64, u64),
    #[error("the Galois action needs exact S entries")]
    NoExact,
    #[error("row {0} has no Galois image among the rows of S: data is not Galois stable")]
    NotStable(usize),
    #[error("row and column forms of the action disagree at label {0}")]
    RowColumnMismatch(usize),
    #[error("label {0} out of range 0..={1}")]
    BadLabel(u64, u64),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaloisAction {
    /// Canonical residue: mod 2n for A1 data, mod the field order otherwise.
    pub ell: i64,
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
    /// σ(i)/i for A1 data; 1 otherwise.
    pub global_sign: i8,
}

impl GaloisAction {
    /// Disjoint cycles of length > 1.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.perm.len()];
        let mut out = Vec::new();
        for s in 0..self.perm.len() {
            if seen[s] || self.perm[s] == s {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.perm[s];
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.perm[x];
            }
            out.push(c);
        }
        out
    }

    /// σ_ℓ∘σ_m given self = σ_ℓ and other = σ_m: permutation a ↦ (a^{σ_m})^{σ_ℓ},
    /// signs ε_ℓ(a^{σ_m})·ε_m(a).
    pub fn compose(&self, other: &GaloisAction, modulus: i64) -> GaloisAction {
        let perm = other.perm.iter().map(|&x| self.perm[x]).collect();
        let signs = (0..self.perm.len()).map(|a| self.signs[other.perm[a]] * other.signs[a]).collect();
        GaloisAction {
            ell: (self.ell * other.ell).rem_euclid(modulus),
            perm,
            signs,
            global_sign: self.global_sign * other.global_sign,
        }
    }
}

/// Canonical residue of ℓ for A1 data at level k (modulus 2n).
pub fn canonical_ell_a1(k: u64, ell: i64) -> Result<i64, GaloisError> {
    let m = 2 * (k + 2);
    let r = ell.rem_euclid(m as i64);
    if r % 2 == 0 {
        return Err(GaloisError::EvenEll(ell, m));
    }
    if (r as u64).gcd(&m) != 1 {
        return Err(GaloisError::NotCoprime(ell, m));
    }
    Ok(r)
}

/// Residues ℓ ∈ [1, 2n) coprime to 2n.
pub fn units_a1(k: u64) -> Vec<i64> {
    let m = 2 * (k + 2);
    (1..m).filter(|l| l.gcd(&m) == 1).map(|l| l as i64).collect()
}

/// Closed form: with x = ℓ(a+1) mod 2n, (x−1, +1) if x < n and (2n−x−1, −1) if x > n.
pub fn a1_galois_closed(k: u64, ell: i64, a: u64) -> Result<(usize, i8), GaloisError> {
    if a > k {
        return Err(GaloisError::BadLabel(a, k));
    }
    let ell = canonical_ell_a1(k, ell)?;
    let n = (k + 2) as i64;
    let x = (ell * (a as i64 + 1)).rem_euclid(2 * n);
    assert!(x % n != 0, "ℓ(a+1) ≡ 0 mod n with ℓ a unit");
    Ok(if x < n { ((x - 1) as usize, 1) } else { ((2 * n - x - 1) as usize, -1) })
}

pub fn a1_galois_action(k: u64, ell: i64) -> Result<GaloisAction, GaloisError> {
    let ell = canonical_ell_a1(k, ell)?;
    let (perm, signs) = (0..=k).map(|a| a1_galois_closed(k, ell, a).unwrap()).unzip();
    Ok(GaloisAction { ell, perm, signs, global_sign: i_sign(ell) })
}

/// σ_ℓ(i)/i = i^{ℓ−1} for odd ℓ.
fn i_sign(ell: i64) -> i8 {
    if (ell - 1).rem_euclid(4) == 0 {
        1
    } else {
        -1
    }
}

/// Applies σ_ℓ to every entry of the exact Ŝ and matches rows and columns.
pub fn galois_orbit(md: &ModularData, ell: i64) -> Result<GaloisAction, GaloisError> {
    let s = md.s_exact.as_ref().ok_or(GaloisError::NoExact)?;
    let order = s[0][0].order();
    let (ell, lift, global_sign) = match &md.a1 {
        Some(info) => {
            let e = canonical_ell_a1(info.k, ell)?;
            (e, e, i_sign(e))
        }
        None => {
            let r = ell.rem_euclid(order as i64);
            if (r as u64).gcd(&order) != 1 {
                return Err(GaloisError::NotCoprime(ell, order));
            }
            (r, r, 1)
        }
    };
    let d = md.dim();
    let sig: Vec<Vec<CycElem>> =
        s.iter().map(|row| row.iter().map(|x| x.galois(lift)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;

    let mut rows: HashMap<&[CycElem], usize> = HashMap::new();
    for (a, r) in s.iter().enumerate() {
        rows.insert(r.as_slice(), a);
    }
    let mut perm = vec![0usize; d];
    let mut raw = vec![0i8; d];
    for a in 0..d {
        if let Some(&b) = rows.get(sig[a].as_slice()) {
            perm[a] = b;
            raw[a] = 1;
        } else {
            let neg: Vec<CycElem> = sig[a].iter().map(|x| x.neg()).collect();
            let &b = rows.get(neg.as_slice()).ok_or(GaloisError::NotStable(a))?;
            perm[a] = b;
            raw[a] = -1;
        }
    }
    // column form: σ(Ŝ_ab) = ε(b) Ŝ_{a,b^σ}
    for b in 0..d {
        let col: Vec<&CycElem> = (0..d).map(|a| &sig[a][b]).collect();
        let target = perm[b];
        let matches = |sgn: i8| {
            (0..d).all(|a| if sgn > 0 { *col[a] == s[a][target] } else { *col[a] == s[a][target].neg() })
        };
        if !matches(raw[b]) {
            return Err(GaloisError::RowColumnMismatch(b));
        }
    }
    let signs = raw.iter().map(|&x| x * global_sign).collect();
    Ok(GaloisAction { ell, perm, signs, global_sign })
}

/// Sign vectors (ε_ℓ(a))_ℓ for every unit ℓ, from the closed form.
pub fn sign_vectors(k: u64) -> Vec<Vec<i8>> {
    let units = units_a1(k);
    (0..=k).map(|a| units.iter().map(|&l| a1_galois_closed(k, l, a).unwrap().1).collect()).collect()
}

/// Labels grouped by their full sign vector; classes are sorted by least element.
pub fn sign_vector_partition(k: u64) -> Vec<Vec<usize>> {
    partition_by(&sign_vectors(k))
}

pub(crate) fn partition_by<K: Ord + Clone>(keys: &[K]) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (a, key) in keys.iter().enumerate() {
        groups.entry(key.clone()).or_default().push(a);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular_data::{a1_modular_data, dft3_modular_data};

    #[test]
    fn level_ten_ell_five() {
        let g = galois_orbit(&a1_modular_data(10), 5).unwrap();
        assert_eq!(g.perm, vec![4, 9, 8, 3, 0, 5, 10, 7, 2, 1, 6]);
        assert_eq!(g.cycles(), vec![vec![0, 4], vec![1, 9], vec![2, 8], vec![6, 10]]);
        assert_eq!(a1_galois_closed(10, 5, 0).unwrap(), (4, 1));
        assert_eq!(a1_galois_closed(10, 5, 1).unwrap(), (9, 1));
    }

    #[test]
    fn trivial_and_conjugation() {
        for k in 1..=12u64 {
            let md = a1_modular_data(k);
            let g = galois_orbit(&md, 1).unwrap();
            assert_eq!(g.perm, (0..=k as usize).collect::<Vec<_>>());
            assert!(g.signs.iter().all(|&e| e == 1));
            let n = (k + 2) as i64;
            let c = galois_orbit(&md, 2 * n - 1).unwrap();
            assert_eq!(c.perm, g.perm);
            assert!(c.signs.iter().all(|&e| e == -1));
        }
    }

    #[test]
    fn rejects_bad_ell() {
        let md = a1_modular_data(4);
        assert!(matches!(galois_orbit(&md, 2), Err(GaloisError::EvenEll(..))));
        assert!(matches!(galois_orbit(&md, 3), Err(GaloisError::NotCoprime(..))));
        assert_eq!(galois_orbit(&md, -1).unwrap().ell, 11);
        let mut md = md;
        md.s_exact = None;
        assert_eq!(galois_orbit(&md, 1), Err(GaloisError::NoExact));
    }

    #[test]
    fn corrupted_row_is_not_stable() {
        let mut md = a1_modular_data(3);
        let s = md.s_exact.as_mut().unwrap();
        let f = s[0][0].field().clone();
        s[2][1] = CycElem::one(&f);
        s[1][2] = CycElem::one(&f);
        assert!(galois_orbit(&md, 3).is_err());
    }

    #[test]
    fn closed_form_matches_orbit() {
        for k in 1..=40u64 {
            let md = a1_modular_data(k);
            for l in units_a1(k) {
                assert_eq!(galois_orbit(&md, l).unwrap(), a1_galois_action(k, l).unwrap(), "k={k} l={l}");
            }
        }
    }

    #[test]
    fn composition() {
        for k in 1..=20u64 {
            let m = 2 * (k as i64 + 2);
            let acts: Vec<GaloisAction> = units_a1(k).iter().map(|&l| a1_galois_action(k, l).unwrap()).collect();
            for x in &acts {
                for y in &acts {
                    let c = x.compose(y, m);
                    let direct = a1_galois_action(k, c.ell).unwrap();
                    assert_eq!((c.perm, c.signs), (direct.perm, direct.signs), "k={k}");
                }
            }
        }
    }

    #[test]
    fn partitions() {
        assert!(sign_vector_partition(10).contains(&vec![0, 4, 6, 10]));
        // ℓ = 5 negates both labels, so the signs alone do not separate them at k = 1
        assert_eq!(sign_vector_partition(1), vec![vec![0, 1]]);
        for k in 1..=16 {
            let p = sign_vector_partition(k);
            assert_eq!(p.iter().map(Vec::len).sum::<usize>(), k as usize + 1);
        }
    }

    #[test]
    fn products_independent_of_global_sign() {
        // partitions from the raw Ŝ signs equal those from the reported signs
        for k in 1..=12u64 {
            let md = a1_modular_data(k);
            let raw: Vec<Vec<i8>> = (0..=k as usize)
                .map(|a| {
                    units_a1(k)
                        .iter()
                        .map(|&l| {
                            let g = galois_orbit(&md, l).unwrap();
                            g.signs[a] * g.global_sign
                        })
                        .collect()
                })
                .collect();
            let sv = sign_vectors(k);
            assert_eq!(partition_by(&raw), partition_by(&sv));
            for x in 0..raw.len() {
                for y in 0..raw.len() {
                    let p1: Vec<i8> = raw[x].iter().zip(&raw[y]).map(|(s, t)| s * t).collect();
                    let p2: Vec<i8> = sv[x].iter().zip(&sv[y]).map(|(s, t)| s * t).collect();
                    assert_eq!(p1, p2);
                }
            }
        }
    }

    #[test]
    fn generic_data() {
        let md = dft3_modular_data();
        let g = galois_orbit(&md, 2).unwrap();
        assert_eq!(g.perm, vec![0, 2, 1]);
        assert_eq!(g.signs, vec![1, 1, 1]);
    }
}
