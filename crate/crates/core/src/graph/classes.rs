//! Graph parameters, structural classes and Markov equivalence.

use serde::{Deserialize, Serialize};

use super::{MixedGraph, UndirectedGraph};
use crate::error::{Error, Result};
use crate::set::VertexSet;

/// A collider `parent1 *-> child <-* parent2` with non-adjacent parents;
/// `parent1 < parent2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VStructure {
    pub parent1: usize,
    pub child: usize,
    pub parent2: usize,
}

impl VStructure {
    pub fn new(a: usize, child: usize, b: usize) -> Self {
        Self {
            parent1: a.min(b),
            child,
            parent2: a.max(b),
        }
    }
}

/// Unshielded colliders, sorted. For a DAG these are its v-structures.
pub fn unshielded_colliders(g: &MixedGraph) -> Vec<VStructure> {
    let mut out = Vec::new();
    for c in 0..g.n() {
        let into: Vec<usize> = g.parents(c).union(g.spouses(c)).to_vec();
        for (i, &a) in into.iter().enumerate() {
            for &b in &into[i + 1..] {
                if !g.adjacent(a, b) {
                    out.push(VStructure::new(a, c, b));
                }
            }
        }
    }
    out.sort();
    out
}

pub fn v_structures(g: &MixedGraph) -> Result<Vec<VStructure>> {
    g.require_dag()?;
    Ok(unshielded_colliders(g))
}

/// Vertices joined to `x` by a collider path: its Markov boundary in any
/// distribution faithful to `g`.
pub fn markov_boundary(g: &MixedGraph, x: usize) -> VertexSet {
    // States are (vertex, arrived with an arrowhead). A vertex reached with an
    // arrowhead may be passed as a collider along another edge into it.
    let mut mb = VertexSet::new();
    let mut seen = vec![false; g.n()];
    let mut stack = Vec::new();
    for u in g.neighbors(x).iter() {
        mb.insert(u);
        if g.arrowhead_at(x, u) {
            stack.push(u);
        }
    }
    while let Some(v) = stack.pop() {
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        for u in g.parents(v).union(g.spouses(v)).iter() {
            if u == x {
                continue;
            }
            mb.insert(u);
            if g.has_bidirected(u, v) {
                stack.push(u);
            }
        }
    }
    mb
}

/// Largest Markov boundary over all vertices.
pub fn max_markov_boundary(g: &MixedGraph) -> usize {
    (0..g.n())
        .map(|v| markov_boundary(g, v).len())
        .max()
        .unwrap_or(0)
}

pub fn max_in_degree(g: &MixedGraph) -> usize {
    (0..g.n()).map(|v| g.parents(v).len()).max().unwrap_or(0)
}

/// Largest `|Pa ∪ Dis ∪ Pa(Dis)|` over all vertices; equals the maximum
/// in-degree on DAGs.
pub fn max_pap_size(g: &MixedGraph) -> usize {
    (0..g.n()).map(|v| g.pap(v).len()).max().unwrap_or(0)
}

/// Size of the largest clique (Bron-Kerbosch with pivoting).
pub fn clique_number(u: &UndirectedGraph) -> usize {
    fn bk(u: &UndirectedGraph, r: usize, mut p: VertexSet, mut x: VertexSet, best: &mut usize) {
        if p.is_empty() {
            if x.is_empty() {
                *best = (*best).max(r);
            }
            return;
        }
        if r + p.len() <= *best {
            return;
        }
        let pivot = p
            .union(&x)
            .iter()
            .max_by_key(|&v| u.neighbors(v).intersection(&p).len())
            .unwrap();
        for v in p.difference(u.neighbors(pivot)).to_vec() {
            let nv = u.neighbors(v);
            bk(u, r + 1, p.intersection(nv), x.intersection(nv), best);
            p.remove(v);
            x.insert(v);
        }
    }
    let mut best = 0;
    bk(u, 0, VertexSet::full(u.n()), VertexSet::new(), &mut best);
    best
}

/// A DAG is diamond-free if no vertex `d` has three parents `a, b, c` with
/// `a` adjacent to both `b` and `c`, and `b, c` non-adjacent.
pub fn is_diamond_free(g: &MixedGraph) -> Result<bool> {
    g.require_dag()?;
    for d in 0..g.n() {
        let pa = g.parents(d).to_vec();
        for &a in &pa {
            for (i, &b) in pa.iter().enumerate() {
                for &c in &pa[i + 1..] {
                    if a != b && a != c && !g.adjacent(b, c) && g.adjacent(a, b) && g.adjacent(a, c)
                    {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Markov equivalence: same skeleton and unshielded colliders, and, unless
/// both are DAGs, agreement on the collider status of every vertex a path
/// discriminates in both graphs. A DAG may be compared with a MAG.
pub fn mec_equal(g1: &MixedGraph, g2: &MixedGraph) -> Result<bool> {
    if g1.n() != g2.n() {
        return Err(Error::arg("graphs have different vertex counts"));
    }
    let both_dags = g1.is_dag() && g2.is_dag();
    if !both_dags {
        g1.require_mag()?;
        g2.require_mag()?;
    }
    if g1.skeleton() != g2.skeleton() || unshielded_colliders(g1) != unshielded_colliders(g2) {
        return Ok(false);
    }
    if both_dags {
        return Ok(true);
    }
    for path in discriminating_paths(g1) {
        if is_discriminating(g2, &path) && collider_at_end(g1, &path) != collider_at_end(g2, &path)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_collider(g: &MixedGraph, a: usize, v: usize, b: usize) -> bool {
    g.arrowhead_at(a, v) && g.arrowhead_at(b, v)
}

/// Whether `path = (x, v1, .., vk, y)` (k >= 2) discriminates `vk`: `x` and
/// `y` are non-adjacent and each of `v1..v(k-1)` is a collider on the path and
/// a parent of `y`.
fn is_discriminating(g: &MixedGraph, path: &[usize]) -> bool {
    let m = path.len();
    if m < 4 {
        return false;
    }
    let (x, y) = (path[0], path[m - 1]);
    if g.adjacent(x, y) || path.windows(2).any(|w| !g.adjacent(w[0], w[1])) {
        return false;
    }
    (1..m - 2)
        .all(|i| is_collider(g, path[i - 1], path[i], path[i + 1]) && g.has_directed(path[i], y))
}

fn collider_at_end(g: &MixedGraph, path: &[usize]) -> bool {
    let m = path.len();
    is_collider(g, path[m - 3], path[m - 2], path[m - 1])
}

/// All discriminating paths with at least three edges, as `(x, .., vk, y)`.
fn discriminating_paths(g: &MixedGraph) -> Vec<Vec<usize>> {
    // Grow backwards from y: rev = [y, vk, v(k-1), ..].
    fn go(g: &MixedGraph, rev: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let y = rev[0];
        let first = *rev.last().unwrap();
        for u in g.neighbors(first).iter() {
            if rev.contains(&u) {
                continue;
            }
            // `first` sits between u and its successor on the path.
            if rev.len() >= 3 {
                let next = rev[rev.len() - 2];
                if !is_collider(g, u, first, next) {
                    continue;
                }
            }
            if !g.adjacent(u, y) {
                if rev.len() >= 3 {
                    let mut p: Vec<usize> = rev.iter().rev().copied().collect();
                    p.insert(0, u);
                    out.push(p);
                }
            } else if g.has_directed(u, y) {
                rev.push(u);
                go(g, rev, out);
                rev.pop();
            }
        }
    }
    let mut out = Vec::new();
    for y in 0..g.n() {
        for v in g.neighbors(y).iter() {
            go(g, &mut vec![y, v], &mut out);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::m_separated_unchecked;
    use crate::testutil::{all_dags, random_mags};

    fn diamond(kind: usize) -> MixedGraph {
        // a=0, b=1, c=2, d=3
        let ab = match kind {
            0 | 1 => (0, 1),
            _ => (1, 0),
        };
        let ac = match kind {
            0 => (0, 2),
            _ => (2, 0),
        };
        MixedGraph::from_directed(4, &[ab, ac, (0, 3), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn diamonds_detected() {
        for k in 0..3 {
            assert!(!is_diamond_free(&diamond(k)).unwrap());
        }
        let mut g = diamond(0);
        g.remove_edge(0, 3);
        assert!(is_diamond_free(&g).unwrap());
    }

    #[test]
    fn clique_numbers() {
        let tri = UndirectedGraph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert_eq!(clique_number(&tri), 3);
        assert_eq!(clique_number(&UndirectedGraph::new(3)), 1);
        assert_eq!(clique_number(&UndirectedGraph::new(0)), 0);
    }

    #[test]
    fn dag_markov_boundary_is_parents_children_coparents() {
        for g in all_dags(4) {
            for x in 0..4 {
                let mut expect = g.parents(x).union(g.children(x));
                for c in g.children(x).iter() {
                    expect.union_with(g.parents(c));
                }
                expect.remove(x);
                assert_eq!(markov_boundary(&g, x), expect);
            }
        }
    }

    #[test]
    fn markov_boundary_matches_total_conditioning() {
        for g in random_mags(6, 60, 4) {
            for x in 0..6 {
                let expect: VertexSet = (0..6)
                    .filter(|&y| {
                        y != x
                            && !g.is_isolated(x)
                            && !m_separated_unchecked(
                                &g,
                                x,
                                y,
                                &VertexSet::full(6).without(&[x, y]),
                            )
                    })
                    .collect();
                assert_eq!(markov_boundary(&g, x), expect, "{g:?} x={x}");
            }
        }
    }

    fn seps(g: &MixedGraph) -> Vec<bool> {
        let n = g.n();
        let mut out = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                for z in VertexSet::full(n).without(&[x, y]).subsets() {
                    out.push(m_separated_unchecked(g, x, y, &z));
                }
            }
        }
        out
    }

    #[test]
    fn mec_matches_separation_statements_for_dags() {
        let dags = all_dags(4);
        let sigs: Vec<Vec<bool>> = dags.iter().map(seps).collect();
        for i in 0..dags.len() {
            for j in (i..dags.len()).step_by(7) {
                assert_eq!(mec_equal(&dags[i], &dags[j]).unwrap(), sigs[i] == sigs[j]);
            }
        }
    }

    #[test]
    fn mec_matches_separation_statements_for_mags() {
        // DAGs included, so DAG-versus-MAG pairs are compared too.
        let mags: Vec<MixedGraph> = random_mags(5, 400, 21);
        let sigs: Vec<Vec<bool>> = mags.iter().map(seps).collect();
        let mut equal_pairs = 0;
        for i in 0..mags.len() {
            for j in i..mags.len() {
                let same = sigs[i] == sigs[j];
                equal_pairs += same as usize;
                assert_eq!(
                    mec_equal(&mags[i], &mags[j]).unwrap(),
                    same,
                    "{:?} {:?}",
                    mags[i],
                    mags[j]
                );
            }
        }
        assert!(equal_pairs > mags.len());
    }

    #[test]
    fn discriminating_path_example() {
        // x=0 -> v1=1 <-> v2=2 <-> y=3, v1 -> y; v2 is discriminated.
        let g = MixedGraph::from_edges(4, &[(0, 1), (1, 3)], &[(1, 2), (2, 3)]).unwrap();
        assert!(g.is_mag());
        assert_eq!(discriminating_paths(&g), vec![vec![0, 1, 2, 3]]);
        let mut h = MixedGraph::from_edges(4, &[(0, 1), (1, 3), (2, 3)], &[(1, 2)]).unwrap();
        assert!(h.is_mag());
        assert!(!mec_equal(&g, &h).unwrap());
        h.remove_edge(2, 3);
        assert!(mec_equal(&g, &h).is_ok());
        let mut bad = g.clone();
        bad.add_directed(3, 0).unwrap();
        assert!(mec_equal(&g, &bad).is_err());
    }
}
