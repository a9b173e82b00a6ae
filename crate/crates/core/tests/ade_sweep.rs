use hauptwerk::ade::{additive_assignment, catalogue, DynkinEntry, Graph};
use hauptwerk::exactnum::rat_int;
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn relabel(g: &Graph, p: &[usize]) -> Graph {
    let a = g.adjacency();
    let n = a.len();
    let mut b = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            b[p[i]][p[j]] = a[i][j];
        }
    }
    Graph::new(b).unwrap()
}

fn isomorphic(g: &Graph, h: &Graph, perms: &[Vec<usize>]) -> bool {
    g.len() == h.len() && perms.iter().any(|p| &relabel(g, p) == h)
}

#[test]
fn assignment_exists_exactly_for_affine_diagrams() {
    let small: Vec<DynkinEntry> = catalogue().into_iter().filter(|e| e.graph.len() <= 5).collect();
    for n in 2..=5usize {
        let perms = permutations(n);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut hits = 0;
        for code in 0..3usize.pow(pairs.len() as u32) {
            let mut adj = vec![vec![0u32; n]; n];
            let mut c = code;
            for &(i, j) in &pairs {
                adj[i][j] = (c % 3) as u32;
                adj[j][i] = adj[i][j];
                c /= 3;
            }
            let g = Graph::new(adj).unwrap();
            if !g.is_connected() {
                continue;
            }
            let found = additive_assignment(&g).unwrap();
            let matched = small.iter().find(|e| isomorphic(&e.graph, &g, &perms));
            assert_eq!(found.is_some(), matched.is_some(), "{:?}", g.adjacency());
            if let (Some(v), Some(e)) = (found, matched) {
                let mut got = v.clone();
                let mut want: Vec<_> = e.marks.iter().map(|&m| rat_int(m as i64)).collect();
                got.sort();
                want.sort();
                assert_eq!(got, want);
                hits += 1;
            }
        }
        assert!(hits > 0, "no affine diagram on {n} nodes");
    }
}

#[test]
fn finite_diagrams_have_no_assignment() {
    for e in catalogue() {
        assert_eq!(additive_assignment(&e.finite_graph()).unwrap(), None, "{}", e.name);
    }
}

#[test]
fn catalogue_marks_are_the_assignment() {
    for e in catalogue() {
        let want: Vec<_> = e.marks.iter().map(|&m| rat_int(m as i64)).collect();
        assert_eq!(additive_assignment(&e.graph).unwrap(), Some(want), "{}", e.name);
    }
}

proptest! {
    #[test]
    fn relabeling_permutes_the_marks(idx in 0usize..16, seed in any::<u64>()) {
        let e = &catalogue()[idx];
        let n = e.graph.len();
        let mut p: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            p.swap(i, (s >> 33) as usize % (i + 1));
        }
        let v = additive_assignment(&relabel(&e.graph, &p)).unwrap().unwrap();
        for i in 0..n {
            prop_assert_eq!(&v[p[i]], &rat_int(e.marks[i] as i64));
        }
    }
}
