//! Clique-grid structure: expansion of the `q = 1` grid and reduction of larger ones.

mod common;

use nalgebra::DMatrix;
use sqw::graph::{build_clique_grid, grid_index, Graph, TessellationCover};
use sqw::search::{clique_grid_search, run_search};
use sqw::transform::{expand_walk, reduce_all, ExpansionSpec, ReduceOptions};
use sqw::{Walk, C64};

use common::{dense, max_abs};

/// Backtracking search for a bijection `f` with `a ~ b ⇔ f(a) ~ f(b)` that also maps
/// the polygons of each tessellation onto polygons of the same tessellation.
fn isomorphism(
    ga: &Graph,
    ca: &TessellationCover,
    gb: &Graph,
    cb: &TessellationCover,
) -> Option<Vec<usize>> {
    let n = ga.n();
    if n != gb.n() || ga.num_edges() != gb.num_edges() || ca.len() != cb.len() {
        return None;
    }
    let label = |c: &TessellationCover, v: usize| -> Vec<usize> {
        c.tessellations()
            .iter()
            .map(|t| t.polygon_of(v).unwrap())
            .collect()
    };
    let la: Vec<Vec<usize>> = (0..n).map(|v| label(ca, v)).collect();
    let lb: Vec<Vec<usize>> = (0..n).map(|v| label(cb, v)).collect();
    let deg_a: Vec<usize> = (0..n).map(|v| ga.neighbors(v).len()).collect();
    let deg_b: Vec<usize> = (0..n).map(|v| gb.neighbors(v).len()).collect();

    // visit A in BFS order so each new vertex has assigned neighbours
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        order.push(root);
        let mut i = order.len() - 1;
        while i < order.len() {
            for w in ga.neighbors(order[i]) {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
            i += 1;
        }
    }

    type Consistent<'a> = dyn Fn(usize, usize, &[Option<usize>]) -> bool + 'a;

    fn extend(
        depth: usize,
        order: &[usize],
        f: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        ok: &Consistent,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let a = order[depth];
        for b in 0..used.len() {
            if used[b] || !ok(a, b, f) {
                continue;
            }
            f[a] = Some(b);
            used[b] = true;
            if extend(depth + 1, order, f, used, ok) {
                return true;
            }
            f[a] = None;
            used[b] = false;
        }
        false
    }

    let ok = |a: usize, b: usize, f: &[Option<usize>]| {
        if deg_a[a] != deg_b[b] {
            return false;
        }
        f.iter().enumerate().all(|(x, fx)| match fx {
            None => true,
            Some(y) => {
                ga.has_edge(a, x) == gb.has_edge(b, *y)
                    && la[a]
                        .iter()
                        .zip(&la[x])
                        .map(|(p, q)| p == q)
                        .eq(lb[b].iter().zip(&lb[*y]).map(|(p, q)| p == q))
            }
        })
    };
    let mut f = vec![None; n];
    let mut used = vec![false; n];
    extend(0, &order, &mut f, &mut used, &ok).then(|| f.into_iter().map(Option::unwrap).collect())
}

fn permuted(m: &DMatrix<C64>, f: &[usize]) -> DMatrix<C64> {
    // (P M P^T)[f(i), f(j)] = M[i, j]
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(f[i], f[j])] = m[(i, j)];
        }
    }
    out
}

#[test]
fn expanding_every_vertex_of_the_unit_grid() {
    let (n, q) = (2, 2);
    let (g1, c1) = build_clique_grid(n, 1).unwrap();
    let mut w = Walk::uniform(g1, c1).unwrap();
    for v in 0..4 * n * n {
        w = expand_walk(&w, &ExpansionSpec::uniform(v, q).unwrap())
            .unwrap()
            .walk;
    }
    let (gq, cq) = build_clique_grid(n, q).unwrap();
    let target = Walk::uniform(gq.clone(), cq.clone()).unwrap();
    let f = isomorphism(w.graph(), w.cover(), &gq, &cq).expect("isomorphic to the q-grid");
    for (a, b) in w.graph().edges() {
        assert!(gq.has_edge(f[a], f[b]));
    }
    // uniform clique states make the walks identical under the relabeling
    let dev = max_abs(&(permuted(&dense(w.operator()), &f) - dense(target.operator())));
    assert!(dev < 1e-12, "{dev}");
}

#[test]
fn isomorphism_oracle_rejects_different_covers() {
    let (g, c) = build_clique_grid(2, 1).unwrap();
    let mut lists: Vec<Vec<Vec<usize>>> = c
        .tessellations()
        .iter()
        .map(|t| t.polygons().iter().map(|p| p.vertices().to_vec()).collect())
        .collect();
    lists.swap(0, 1);
    let swapped = TessellationCover::new(
        lists
            .into_iter()
            .map(|l| sqw::Tessellation::from_lists(l).unwrap())
            .collect(),
    );
    assert!(isomorphism(&g, &c, &g, &swapped).is_none());
    assert!(isomorphism(&g, &c, &g, &c).is_some());
}

#[test]
fn reducing_every_intersection_gives_the_unit_grid() {
    for (n, q) in [(2, 2), (2, 3), (3, 2), (4, 3)] {
        let (g, c) = build_clique_grid(n, q).unwrap();
        let full = reduce_all(&Walk::uniform(g, c).unwrap(), &ReduceOptions::default()).unwrap();
        let (g1, c1) = build_clique_grid(n, 1).unwrap();
        let unit = Walk::uniform(g1, c1).unwrap();
        assert_eq!(full.walk.graph(), unit.graph());
        assert_eq!(full.walk.cover(), unit.cover());
        assert_eq!(full.certificates.len(), 4 * n * n);
        assert!(max_abs(&(dense(full.walk.operator()) - dense(unit.operator()))) < 1e-12);
        for x in 0..n {
            for y in 0..n {
                for k in 0..4 * q {
                    let image = full.collapse.image(grid_index(n, q, x, y, k));
                    assert_eq!(image, &[grid_index(n, 1, x, y, k / q)]);
                }
            }
        }
    }
}

#[test]
fn search_probability_matches_the_reduced_walk() {
    // marked q-grid clique vs marked unit-grid clique, step by step, at another position
    let (n, t_max) = (5, 40);
    let small = run_search(&clique_grid_search(n, 1, 2, 3).unwrap(), t_max).unwrap();
    for q in [2, 4] {
        let big = run_search(&clique_grid_search(n, q, 2, 3).unwrap(), t_max).unwrap();
        for (a, b) in small.series.iter().zip(&big.series) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
