//! Graphs with additive assignments, the extended simply-laced Dynkin
//! catalogue, McKay graphs of cyclic subgroups of SU(2), and integral lattices
//! given by Gram matrices.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{rat_int, CycElem, CyclotomicField, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdeError {
    #[error("adjacency matrix is not square")]
    NotSquare,
    #[error("adjacency matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("node {0} has a self-loop")]
    SelfLoop(usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("cyclic group order must be at least 2, got {0}")]
    CyclicTooSmall(u64),
    #[error("gram matrix is not positive definite")]
    Indefinite,
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    BadEdge(usize, usize, usize),
    #[error("graph json: {0}")]
    Json(String),
}

/// Undirected multigraph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
}

/// Accepted JSON shapes for a graph: a full adjacency matrix, or a node count
/// with an edge list (repeated edges add multiplicity).
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GraphJson {
    Matrix { adjacency: Vec<Vec<u32>> },
    Edges { nodes: usize, edges: Vec<(usize, usize)> },
}

impl Graph {
    pub fn new(adj: Vec<Vec<u32>>) -> Result<Self, AdeError> {
        let n = adj.len();
        if adj.iter().any(|r| r.len() != n) {
            return Err(AdeError::NotSquare);
        }
        for i in 0..n {
            if adj[i][i] != 0 {
                return Err(AdeError::SelfLoop(i));
            }
            for j in 0..i {
                if adj[i][j] != adj[j][i] {
                    return Err(AdeError::NotSymmetric(i, j));
                }
            }
        }
        Ok(Graph { adj })
    }

    pub fn from_edges(nodes: usize, edges: &[(usize, usize)]) -> Result<Self, AdeError> {
        let mut adj = vec![vec![0u32; nodes]; nodes];
        for &(a, b) in edges {
            if a >= nodes || b >= nodes {
                return Err(AdeError::BadEdge(a, b, nodes));
            }
            if a == b {
                return Err(AdeError::SelfLoop(a));
            }
            adj[a][b] += 1;
            adj[b][a] += 1;
        }
        Ok(Graph { adj })
    }

    pub fn from_json(text: &str) -> Result<Self, AdeError> {
        match serde_json::from_str::<GraphJson>(text).map_err(|e| AdeError::Json(e.to_string()))? {
            GraphJson::Matrix { adjacency } => Graph::new(adjacency),
            GraphJson::Edges { nodes, edges } => Graph::from_edges(nodes, &edges),
        }
    }

    /// Cycle on `n` nodes; two nodes give a double edge.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 2);
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adj
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if self.adj[i][j] > 0 && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Graph with `drop` removed.
    pub fn without_node(&self, drop: usize) -> Graph {
        let adj = self
            .adj
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != drop).map(|(_, &x)| x).collect())
            .collect();
        Graph { adj }
    }

    /// 2I − A.
    pub fn cartan(&self) -> Vec<Vec<i64>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 2 } else { -(self.adj[i][j] as i64) }).collect())
            .collect()
    }
}

/// Kernel of an integer matrix over Q, as a list of basis vectors.
pub(crate) fn rational_kernel(m: &[Vec<i64>], cols: usize) -> Vec<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..cols {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -rows[i][f].clone();
            }
            v
        })
        .collect()
}

/// Strictly positive solution of 2a_i = Σ_{j~i} a_j, normalized to minimum 1.
pub fn additive_assignment(g: &Graph) -> Result<Option<Vec<Rational>>, AdeError> {
    if !g.is_connected() {
        return Err(AdeError::Disconnected);
    }
    let kernel = rational_kernel(&g.cartan(), g.len());
    // a positive eigenvector of a connected graph is the Perron vector, so
    // its eigenspace is one-dimensional
    if kernel.len() != 1 {
        return Ok(None);
    }
    let mut v = kernel.into_iter().next().unwrap();
    if v[0].is_negative() {
        v.iter_mut().for_each(|x| *x = -x.clone());
    }
    if v.iter().any(|x| !x.is_positive()) {
        return Ok(None);
    }
    let min = v.iter().min().unwrap().clone();
    Ok(Some(v.into_iter().map(|x| x / &min).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiagramFamily {
    A,
    D,
    E6,
    E7,
    E8,
}

/// An extended simply-laced Dynkin diagram with its marks.  Node 0 is always
/// the extending node (mark 1); deleting it leaves the finite diagram.
#[derive(Debug, Clone, Serialize)]
pub struct DynkinEntry {
    pub name: String,
    pub family: DiagramFamily,
    pub rank: usize,
    pub graph: Graph,
    pub marks: Vec<u64>,
    pub coxeter: u64,
    pub exponents: Vec<u64>,
}

impl DynkinEntry {
    pub fn finite_graph(&self) -> Graph {
        self.graph.without_node(0)
    }
}

/// Â_n: a cycle on n+1 nodes.
pub fn affine_a(n: usize) -> DynkinEntry {
    assert!(n >= 1);
    DynkinEntry {
        name: format!("A{n}^"),
        family: DiagramFamily::A,
        rank: n,
        graph: Graph::cycle(n + 1),
        marks: vec![1; n + 1],
        coxeter: n as u64 + 1,
        exponents: (1..=n as u64).collect(),
    }
}

/// D̂_n: nodes 0, 1 hang off node 2, a chain 2..n−2, nodes n−1, n hang off n−2.
pub fn affine_d(n: usize) -> DynkinEntry {
    assert!(n >= 4);
    let mut edges = vec![(0, 2), (1, 2), (n - 2, n - 1), (n - 2, n)];
    edges.extend((2..n - 2).map(|i| (i, i + 1)));
    let mut marks = vec![2u64; n + 1];
    for i in [0, 1, n - 1, n] {
        marks[i] = 1;
    }
    let mut exponents: Vec<u64> = (1..n as u64).map(|i| 2 * i - 1).collect();
    exponents.push(n as u64 - 1);
    exponents.sort_unstable();
    DynkinEntry {
        name: format!("D{n}^"),
        family: DiagramFamily::D,
        rank: n,
        graph: Graph::from_edges(n + 1, &edges).unwrap(),
        marks,
        coxeter: 2 * n as u64 - 2,
        exponents,
    }
}

/// Ê₆: three arms of length two around a central node.
pub fn affine_e6() -> DynkinEntry {
    DynkinEntry {
        name: "E6^".into(),
        family: DiagramFamily::E6,
        rank: 6,
        graph: Graph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6)]).unwrap(),
        marks: vec![1, 2, 3, 2, 1, 2, 1],
        coxeter: 12,
        exponents: vec![1, 4, 5, 7, 8, 11],
    }
}

/// Ê₇: a chain of seven nodes with one node attached to the middle.
pub fn affine_e7() -> DynkinEntry {
    DynkinEntry {
        name: "E7^".into(),
        family: DiagramFamily::E7,
        rank: 7,
        graph: Graph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (3, 7)]).unwrap(),
        marks: vec![1, 2, 3, 4, 3, 2, 1, 2],
        coxeter: 18,
        exponents: vec![1, 5, 7, 9, 11, 13, 17],
    }
}

/// Ê₈: a chain of eight nodes with node 8 attached to node 5, so the marks
/// read 1,2,3,4,5,6,4,2,3 in node order.
pub fn affine_e8() -> DynkinEntry {
    let mut edges: Vec<_> = (0..7).map(|i| (i, i + 1)).collect();
    edges.push((5, 8));
    DynkinEntry {
        name: "E8^".into(),
        family: DiagramFamily::E8,
        rank: 8,
        graph: Graph::from_edges(9, &edges).unwrap(),
        marks: vec![1, 2, 3, 4, 5, 6, 4, 2, 3],
        coxeter: 30,
        exponents: vec![1, 7, 11, 13, 17, 19, 23, 29],
    }
}

/// Â_1…Â_8, D̂_4…D̂_8, Ê₆, Ê₇, Ê₈.
pub fn catalogue() -> Vec<DynkinEntry> {
    let mut out: Vec<DynkinEntry> = (1..=8).map(affine_a).collect();
    out.extend((4..=8).map(affine_d));
    out.extend([affine_e6(), affine_e7(), affine_e8()]);
    out
}

/// Exponents of the finite diagram X_r by name ("E6", "D5", "A3", ...).
pub fn exponents_of(name: &str) -> Option<Vec<u64>> {
    let (fam, rank) = name.split_at(1);
    let r: usize = rank.parse().ok()?;
    match (fam, r) {
        ("A", r) if r >= 1 => Some(affine_a(r).exponents),
        ("D", r) if r >= 4 => Some(affine_d(r).exponents),
        ("E", 6) => Some(affine_e6().exponents),
        ("E", 7) => Some(affine_e7().exponents),
        ("E", 8) => Some(affine_e8().exponents),
        _ => None,
    }
}

/// McKay graph of Z/n ⊂ SU(2) acting through diag(ζ_n, ζ_n⁻¹), computed from
/// character inner products.
pub fn mckay_graph_cyclic(n: u64) -> Result<Graph, AdeError> {
    if n < 2 {
        return Err(AdeError::CyclicTooSmall(n));
    }
    let field = CyclotomicField::new(n);
    let z = |e: i64| CycElem::root_of_unity(&field, e);
    let nn = n as usize;
    let mut adj = vec![vec![0u32; nn]; nn];
    for i in 0..nn {
        for j in 0..nn {
            // m_ij = (1/n) Σ_t χ_2(t) χ_i(t) conj(χ_j(t))
            let mut acc = CycElem::zero(&field);
            for t in 0..n as i64 {
                let chi2 = z(t).add(&z(-t)).unwrap();
                let phase = z(t * (i as i64 - j as i64));
                acc = acc.add(&chi2.mul(&phase).unwrap()).unwrap();
            }
            let m = acc.as_rational().expect("character inner product is rational") / rat_int(n as i64);
            assert!(m.is_integer() && !m.is_negative(), "multiplicity {m} at ({i},{j})");
            adj[i][j] = m.to_integer().to_u32().unwrap();
        }
    }
    let g = Graph::new(adj)?;
    assert_eq!(g, Graph::cycle(nn), "McKay graph of Z/{n} is not the cycle");
    Ok(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramCheck {
    pub name: String,
    pub coxeter: u64,
    pub marks_sum: u64,
    pub assignment_matches_marks: bool,
    pub exponent_count_ok: bool,
    /// Largest |λ − 4sin²(πm/2h)| over sorted finite Cartan eigenvalues.
    pub eigen_max_dev: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoxeterReport {
    pub e8_marks_sum: u64,
    pub e8_marks_square_sum: u64,
    pub diagrams: Vec<DiagramCheck>,
    pub ok: bool,
}

pub fn cartan_eigenvalues(g: &Graph) -> Vec<f64> {
    let n = g.len();
    let c = g.cartan();
    let m = DMatrix::from_fn(n, n, |i, j| c[i][j] as f64);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn check_diagram(d: &DynkinEntry) -> DiagramCheck {
    let marks: Vec<Rational> = d.marks.iter().map(|&m| rat_int(m as i64)).collect();
    let assignment_matches_marks = additive_assignment(&d.graph).ok().flatten().as_deref() == Some(&marks[..]);
    let marks_sum: u64 = d.marks.iter().sum();
    let mut want: Vec<f64> = d
        .exponents
        .iter()
        .map(|&m| 4.0 * (PI * m as f64 / (2.0 * d.coxeter as f64)).sin().powi(2))
        .collect();
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let got = cartan_eigenvalues(&d.finite_graph());
    let eigen_max_dev = if got.len() == want.len() {
        got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let exponent_count_ok = d.exponents.len() == d.rank;
    DiagramCheck {
        name: d.name.clone(),
        coxeter: d.coxeter,
        marks_sum,
        assignment_matches_marks,
        exponent_count_ok,
        eigen_max_dev,
        ok: assignment_matches_marks && exponent_count_ok && marks_sum == d.coxeter && eigen_max_dev < 1e-9,
    }
}

pub fn coxeter_checks() -> CoxeterReport {
    let e8 = affine_e8();
    let e8_marks_sum = e8.marks.iter().sum();
    let e8_marks_square_sum = e8.marks.iter().map(|m| m * m).sum();
    let diagrams: Vec<DiagramCheck> = catalogue().iter().map(check_diagram).collect();
    let ok = e8_marks_sum == 30 && e8_marks_square_sum == 120 && diagrams.iter().all(|d| d.ok);
    CoxeterReport { e8_marks_sum, e8_marks_square_sum, diagrams, ok }
}

/// gcd(x, n) = 1 exactly when x² ≡ 1 (mod n), for every residue x.
pub fn twentyfour_property(n: u64) -> bool {
    assert!(n >= 1);
    (0..n).all(|x| (x.gcd(&n) == 1) == ((x * x) % n == 1 % n))
}

/// Integral bilinear form given by its Gram matrix in some basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GramLattice {
    gram: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl GramLattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Self {
        GramLattice { gram }
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        self.gram.iter().all(|r| r.len() == n) && (0..n).all(|i| (0..i).all(|j| self.gram[i][j] == self.gram[j][i]))
    }

    pub fn is_even(&self) -> bool {
        self.gram.iter().enumerate().all(|(i, r)| r[i] % 2 == 0)
    }

    pub fn inner(&self, a: &[i64], b: &[i64]) -> i64 {
        let mut s = 0;
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                s += ai * self.gram[i][j] * bj;
            }
        }
        s
    }

    pub fn norm(&self, v: &[i64]) -> i64 {
        self.inner(v, v)
    }

    /// Pivots of symmetric elimination without pivoting; `None` when a zero
    /// pivot appears.
    fn ldl(&self) -> Option<(Vec<Rational>, Vec<Vec<Rational>>)> {
        let n = self.dim();
        let mut a: Vec<Vec<Rational>> = self.gram.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect();
        let mut d = Vec::with_capacity(n);
        let mut l = vec![vec![Rational::zero(); n]; n];
        for k in 0..n {
            let p = a[k][k].clone();
            if p.is_zero() {
                return None;
            }
            l[k][k] = Rational::one();
            for i in k + 1..n {
                l[i][k] = &a[i][k] / &p;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = &l[i][k] * &a[k][j];
                    a[i][j] -= t;
                }
            }
            d.push(p);
        }
        Some((d, l))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric() && self.ldl().is_some_and(|(d, _)| d.iter().all(|x| x.is_positive()))
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.dim();
        let mut a: Vec<Vec<BigInt>> = self.gram.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        if n == 0 {
            return BigInt::one();
        }
        sign * &a[n - 1][n - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    pub fn signature(&self) -> Signature {
        let n = self.dim();
        let m = DMatrix::from_fn(n, n, |i, j| self.gram[i][j] as f64);
        let mut s = Signature { positive: 0, negative: 0, zero: 0 };
        for &e in m.symmetric_eigen().eigenvalues.iter() {
            if e > 1e-9 {
                s.positive += 1;
            } else if e < -1e-9 {
                s.negative += 1;
            } else {
                s.zero += 1;
            }
        }
        s
    }

    pub fn direct_sum(&self, other: &GramLattice) -> GramLattice {
        let (n, m) = (self.dim(), other.dim());
        let mut g = vec![vec![0i64; n + m]; n + m];
        for i in 0..n {
            g[i][..n].copy_from_slice(&self.gram[i]);
        }
        for i in 0..m {
            g[n + i][n..].copy_from_slice(&other.gram[i]);
        }
        GramLattice { gram: g }
    }

    /// Calls `visit` on every v with v·G·v ≤ bound (Fincke–Pohst enumeration;
    /// the float search is padded and every hit is confirmed exactly).
    pub fn for_each_short_vector<F: FnMut(&[i64], i64)>(&self, bound: i64, mut visit: F) -> Result<(), AdeError> {
        if !self.is_positive_definite() {
            return Err(AdeError::Indefinite);
        }
        let (d, l) = self.ldl().unwrap();
        let n = self.dim();
        let d: Vec<f64> = d.iter().map(|x| x.to_f64().unwrap()).collect();
        let l: Vec<Vec<f64>> = l.iter().map(|r| r.iter().map(|x| x.to_f64().unwrap()).collect()).collect();
        let slack = 1e-7 * (1.0 + bound as f64);
        let mut v = vec![0i64; n];
        fn rec<F: FnMut(&[i64], i64)>(
            lat: &GramLattice,
            i: usize,
            rem: f64,
            v: &mut Vec<i64>,
            d: &[f64],
            l: &[Vec<f64>],
            bound: i64,
            slack: f64,
            visit: &mut F,
        ) {
            let n = v.len();
            // Q(v) = Σ_i d_i (v_i + Σ_{j>i} l_{ji} v_j)²
            let c: f64 = (i + 1..n).map(|j| l[j][i] * v[j] as f64).sum();
            let r = ((rem + slack).max(0.0) / d[i]).sqrt();
            let lo = (-c - r).ceil() as i64;
            let hi = (-c + r).floor() as i64;
            for x in lo..=hi {
                v[i] = x;
                let t = x as f64 + c;
                let left = rem - d[i] * t * t;
                if left < -slack {
                    continue;
                }
                if i == 0 {
                    let q = lat.norm(v);
                    if q <= bound {
                        visit(v, q);
                    }
                } else {
                    rec(lat, i - 1, left, v, d, l, bound, slack, visit);
                }
            }
            v[i] = 0;
        }
        if n > 0 {
            rec(self, n - 1, bound as f64, &mut v, &d, &l, bound, slack, &mut visit);
        } else if bound >= 0 {
            visit(&v, 0);
        }
        Ok(())
    }

    /// Number of vectors of each norm ≤ bound; `None` if not positive definite.
    pub fn norm_counts(&self, bound: i64) -> Option<BTreeMap<i64, u64>> {
        let mut counts = BTreeMap::new();
        self.for_each_short_vector(bound, |_, q| *counts.entry(q).or_insert(0) += 1).ok()?;
        Some(counts)
    }

    pub fn vectors_of_norm(&self, norm: i64) -> Result<Vec<Vec<i64>>, AdeError> {
        let mut out = Vec::new();
        self.for_each_short_vector(norm, |v, q| {
            if q == norm {
                out.push(v.to_vec());
            }
        })?;
        Ok(out)
    }

    /// Norm-2 vectors.
    pub fn roots(&self) -> Result<Vec<Vec<i64>>, AdeError> {
        self.vectors_of_norm(2)
    }

    /// Reflection v ↦ v − (v·α)α in coordinates (columns are images of basis vectors).
    pub fn reflection(&self, alpha: &[i64]) -> Vec<Vec<i64>> {
        let n = self.dim();
        let ga: Vec<i64> = (0..n).map(|i| (0..n).map(|j| self.gram[i][j] * alpha[j]).sum()).collect();
        (0..n).map(|i| (0..n).map(|j| (i == j) as i64 - alpha[i] * ga[j]).collect()).collect()
    }

    /// True when R^T G R = G.
    pub fn preserves_form(&self, r: &[Vec<i64>]) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let col_i: Vec<i64> = (0..n).map(|k| r[k][i]).collect();
                let col_j: Vec<i64> = (0..n).map(|k| r[k][j]).collect();
                self.inner(&col_i, &col_j) == self.gram[i][j]
            })
        })
    }
}

/// Cartan matrix of E8 (finite Ê₈ with the extending node removed).
pub fn e8_gram() -> GramLattice {
    GramLattice::new(affine_e8().finite_graph().cartan())
}

pub fn a2_gram() -> GramLattice {
    GramLattice::new(vec![vec![2, -1], vec![-1, 2]])
}

/// II_{1,1}: (a,b)·(c,d) = ad + bc.
pub fn hyperbolic_plane() -> GramLattice {
    GramLattice::new(vec![vec![0, 1], vec![1, 0]])
}

#[derive(Debug, Clone, Serialize)]
pub struct GramReport {
    pub dim: usize,
    pub integral: bool,
    pub even: bool,
    pub unimodular: bool,
    pub positive_definite: bool,
    pub signature: Signature,
    pub determinant: String,
    /// Only counted for positive-definite forms.
    pub root_count: Option<usize>,
}

pub fn gram_checks(l: &GramLattice) -> GramReport {
    let positive_definite = l.is_positive_definite();
    GramReport {
        dim: l.dim(),
        integral: l.is_symmetric(),
        even: l.is_symmetric() && l.is_even(),
        unimodular: l.is_unimodular(),
        positive_definite,
        signature: l.signature(),
        determinant: l.determinant().to_string(),
        root_count: if positive_definite { l.roots().ok().map(|r| r.len()) } else { None },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Mod8Entry {
    pub name: String,
    pub dim: usize,
    pub even_unimodular_definite: bool,
    pub dim_mod8: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Mod8Report {
    pub entries: Vec<Mod8Entry>,
    /// The A2 control is even but has determinant 3, so it is not in the catalogue.
    pub a2_control_excluded: bool,
    pub ok: bool,
}

pub fn dimension_mod8_check() -> Mod8Report {
    let e8 = e8_gram();
    let lattices = [("E8", e8.clone()), ("E8+E8", e8.direct_sum(&e8))];
    let entries: Vec<Mod8Entry> = lattices
        .iter()
        .map(|(name, l)| Mod8Entry {
            name: name.to_string(),
            dim: l.dim(),
            even_unimodular_definite: l.is_even() && l.is_unimodular() && l.is_positive_definite(),
            dim_mod8: l.dim() % 8,
        })
        .collect();
    let a2 = a2_gram();
    let a2_control_excluded = a2.is_even() && !a2.is_unimodular();
    let ok = a2_control_excluded && entries.iter().all(|e| e.even_unimodular_definite && e.dim_mod8 == 0);
    Mod8Report { entries, a2_control_excluded, ok }
}

/// Every root reflection of a definite even lattice is an integral isometry.
pub fn root_reflections_check(l: &GramLattice) -> Result<bool, AdeError> {
    Ok(l.roots()?.iter().all(|a| l.preserves_form(&l.reflection(a))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn ints(v: &[Rational]) -> Vec<i64> {
        v.iter().map(|x| x.to_integer().to_i64().unwrap()).collect()
    }

    #[test]
    fn additive_assignment_examples() {
        for n in 1..=8 {
            let a = additive_assignment(&Graph::cycle(n + 1)).unwrap().unwrap();
            assert_eq!(ints(&a), vec![1; n + 1]);
        }
        let e8 = additive_assignment(&affine_e8().graph).unwrap().unwrap();
        assert_eq!(ints(&e8), vec![1, 2, 3, 4, 5, 6, 4, 2, 3]);
        assert_eq!(additive_assignment(&Graph::path(2)).unwrap(), None);
    }

    #[test]
    fn disconnected_graph_is_error() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(additive_assignment(&g), Err(AdeError::Disconnected));
    }

    #[test]
    fn graph_validation() {
        assert_eq!(Graph::new(vec![vec![0, 1], vec![0, 0]]), Err(AdeError::NotSymmetric(1, 0)));
        assert_eq!(Graph::new(vec![vec![1]]), Err(AdeError::SelfLoop(0)));
        let g = Graph::from_json(r#"{"nodes": 3, "edges": [[0,1],[1,2],[2,0]]}"#).unwrap();
        assert_eq!(g, Graph::cycle(3));
        let h = Graph::from_json(r#"{"adjacency": [[0,2],[2,0]]}"#).unwrap();
        assert_eq!(h, Graph::cycle(2));
    }

    #[test]
    fn catalogue_is_consistent() {
        let rep = coxeter_checks();
        assert_eq!(rep.e8_marks_sum, 30);
        assert_eq!(rep.e8_marks_square_sum, 120);
        for d in &rep.diagrams {
            assert!(d.ok, "{d:?}");
        }
    }

    #[test]
    fn path_cartan_eigenvalues() {
        // A_n eigenvalues 2 − 2cos(πj/(n+1)) = 4sin²(πj/2(n+1))
        for n in 1..=7 {
            let ev = cartan_eigenvalues(&Graph::path(n));
            for (j, e) in ev.iter().enumerate() {
                let want = 2.0 - 2.0 * (PI * (j + 1) as f64 / (n + 1) as f64).cos();
                assert!((e - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn finite_diagrams_have_no_assignment() {
        for d in catalogue() {
            let f = d.finite_graph();
            assert_eq!(additive_assignment(&f).unwrap(), None, "{}", d.name);
        }
    }

    #[test]
    fn mckay_cyclic_examples() {
        assert_eq!(mckay_graph_cyclic(3).unwrap(), Graph::cycle(3));
        assert_eq!(mckay_graph_cyclic(5).unwrap(), Graph::cycle(5));
        assert_eq!(mckay_graph_cyclic(2).unwrap().adjacency(), &[vec![0, 2], vec![2, 0]]);
        assert_eq!(mckay_graph_cyclic(1), Err(AdeError::CyclicTooSmall(1)));
        for n in 2..=12 {
            let a = additive_assignment(&mckay_graph_cyclic(n).unwrap()).unwrap().unwrap();
            assert!(a.iter().all(|x| *x == rat(1, 1)));
        }
    }

    #[test]
    fn twentyfour_property_examples() {
        assert!(twentyfour_property(24));
        assert!(twentyfour_property(8));
        assert!(!twentyfour_property(5));
        let hits: Vec<u64> = (1..=200).filter(|&n| twentyfour_property(n)).collect();
        assert_eq!(hits, vec![1, 2, 3, 4, 6, 8, 12, 24]);
    }

    #[test]
    fn gram_examples() {
        let e8 = gram_checks(&e8_gram());
        assert!(e8.even && e8.unimodular && e8.positive_definite);
        assert_eq!(e8.root_count, Some(240));

        let h = gram_checks(&hyperbolic_plane());
        assert!(h.even && h.unimodular && !h.positive_definite);
        assert_eq!(h.signature, Signature { positive: 1, negative: 1, zero: 0 });
        assert_eq!(h.root_count, None);
        assert_eq!(hyperbolic_plane().roots(), Err(AdeError::Indefinite));

        let z2 = gram_checks(&GramLattice::new(vec![vec![1, 0], vec![0, 1]]));
        assert!(z2.integral && !z2.even && z2.unimodular);

        assert_eq!(a2_gram().determinant(), BigInt::from(3));
        assert_eq!(a2_gram().roots().unwrap().len(), 6);
    }

    #[test]
    fn root_system_sizes() {
        // |Φ| for D_n is 2n(n−1), for E6/E7 72/126
        for n in 4..=7 {
            let g = GramLattice::new(affine_d(n).finite_graph().cartan());
            assert_eq!(g.roots().unwrap().len(), 2 * n * (n - 1));
        }
        assert_eq!(GramLattice::new(affine_e6().finite_graph().cartan()).roots().unwrap().len(), 72);
        assert_eq!(GramLattice::new(affine_e7().finite_graph().cartan()).roots().unwrap().len(), 126);
    }

    #[test]
    fn dimension_mod8() {
        let r = dimension_mod8_check();
        assert!(r.ok, "{r:?}");
        assert_eq!(r.entries[1].dim, 16);
    }

    #[test]
    fn reflections_are_isometries() {
        assert!(root_reflections_check(&e8_gram()).unwrap());
        assert!(root_reflections_check(&a2_gram()).unwrap());
    }

    #[test]
    fn exponent_lookup() {
        assert_eq!(exponents_of("E6"), Some(vec![1, 4, 5, 7, 8, 11]));
        assert_eq!(exponents_of("D5"), Some(vec![1, 3, 4, 5, 7]));
        assert_eq!(exponents_of("E9"), None);
    }
}
