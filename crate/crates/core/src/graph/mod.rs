//! Mixed graphs (directed + bidirected edges) and undirected skeletons.
//!
//! Vertices are dense ids `0..n`. Removing a vertex is modelled by dropping
//! its edges, which keeps ids stable across the recursion.

mod classes;
pub mod edgelist;
mod msep;
mod orders;
mod project;
mod removable;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::VertexSet;

pub use classes::{
    clique_number, is_diamond_free, markov_boundary, max_in_degree, max_markov_boundary,
    max_pap_size, mec_equal, unshielded_colliders, v_structures, VStructure,
};
pub use msep::m_separated;
pub use orders::{enumerate_c_orders, enumerate_r_orders, is_c_order, is_r_order};
pub use project::latent_project;
pub use removable::{removable, removable_bruteforce, removable_dag, removable_mag};

pub(crate) use msep::m_separated_unchecked;

/// A graph with directed (`a -> b`) and bidirected (`a <-> b`) edges.
///
/// At most one edge joins any pair of vertices. DAGs are the special case
/// without bidirected edges.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MixedGraph {
    n: usize,
    children: Vec<VertexSet>,
    parents: Vec<VertexSet>,
    spouses: Vec<VertexSet>,
}

impl MixedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            children: vec![VertexSet::new(); n],
            parents: vec![VertexSet::new(); n],
            spouses: vec![VertexSet::new(); n],
        }
    }

    /// Builds a DAG from a list of directed edges.
    pub fn from_directed(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            g.add_directed(a, b)?;
        }
        Ok(g)
    }

    pub fn from_edges(
        n: usize,
        directed: &[(usize, usize)],
        bidirected: &[(usize, usize)],
    ) -> Result<Self> {
        let mut g = Self::from_directed(n, directed)?;
        for &(a, b) in bidirected {
            g.add_bidirected(a, b)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(Error::arg(format!(
                "edge ({a}, {b}) out of range for {} vertices",
                self.n
            )));
        }
        if a == b {
            return Err(Error::arg(format!("self-loop on vertex {a}")));
        }
        if self.adjacent(a, b) {
            return Err(Error::arg(format!("vertices {a} and {b} already adjacent")));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.children[a].insert(b);
        self.parents[b].insert(a);
        Ok(())
    }

    pub fn add_bidirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.spouses[a].insert(b);
        self.spouses[b].insert(a);
        Ok(())
    }

    /// Removes whatever edge joins `a` and `b`.
    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.children[a].remove(b);
        self.children[b].remove(a);
        self.parents[a].remove(b);
        self.parents[b].remove(a);
        self.spouses[a].remove(b);
        self.spouses[b].remove(a);
    }

    pub fn parents(&self, v: usize) -> &VertexSet {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &VertexSet {
        &self.children[v]
    }

    pub fn spouses(&self, v: usize) -> &VertexSet {
        &self.spouses[v]
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        let mut s = self.parents[v].union(&self.children[v]);
        s.union_with(&self.spouses[v]);
        s
    }

    pub fn degree(&self, v: usize) -> usize {
        self.parents[v].len() + self.children[v].len() + self.spouses[v].len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.children[a].contains(b) || self.parents[a].contains(b) || self.spouses[a].contains(b)
    }

    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.children[a].contains(b)
    }

    pub fn has_bidirected(&self, a: usize, b: usize) -> bool {
        self.spouses[a].contains(b)
    }

    /// Whether the edge between `a` and `b` has an arrowhead at `b`.
    pub fn arrowhead_at(&self, a: usize, b: usize) -> bool {
        self.children[a].contains(b) || self.spouses[a].contains(b)
    }

    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| self.children[a].iter().map(move |b| (a, b)))
            .collect()
    }

    /// Bidirected edges as `(a, b)` with `a < b`.
    pub fn bidirected_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| {
                self.spouses[a]
                    .iter()
                    .filter(move |&b| a < b)
                    .map(move |b| (a, b))
            })
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.directed_edges().len() + self.bidirected_edges().len()
    }

    pub fn has_bidirected_edges(&self) -> bool {
        self.spouses.iter().any(|s| !s.is_empty())
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.degree(v) == 0
    }

    /// Ancestors of `set`, including `set` itself.
    pub fn ancestors(&self, set: &VertexSet) -> VertexSet {
        let mut seen = set.clone();
        let mut queue: VecDeque<usize> = set.iter().collect();
        while let Some(v) = queue.pop_front() {
            for p in self.parents[v].iter() {
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    pub fn ancestors_of(&self, v: usize) -> VertexSet {
        self.ancestors(&VertexSet::singleton(v))
    }

    /// Descendants of `v`, including `v`.
    pub fn descendants_of(&self, v: usize) -> VertexSet {
        let mut seen = VertexSet::singleton(v);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for c in self.children[u].iter() {
                if seen.insert(c) {
                    queue.push_back(c);
                }
            }
        }
        seen
    }

    /// Vertices reachable from `v` over bidirected edges, including `v`.
    pub fn district(&self, v: usize) -> VertexSet {
        let mut seen = VertexSet::singleton(v);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for s in self.spouses[u].iter() {
                if seen.insert(s) {
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    /// Parents, district and parents of the district, without `v` itself.
    pub fn pap(&self, v: usize) -> VertexSet {
        let dis = self.district(v);
        let mut out = dis.clone();
        for d in dis.iter() {
            out.union_with(&self.parents[d]);
        }
        out.remove(v);
        out
    }

    /// Topological order of the directed part, or `None` on a directed cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut queue: VecDeque<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for c in self.children[v].iter() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    pub fn is_dag(&self) -> bool {
        !self.has_bidirected_edges() && self.is_acyclic()
    }

    /// No directed cycle and no bidirected edge between a vertex and one of
    /// its ancestors.
    pub fn is_ancestral(&self) -> bool {
        if !self.is_acyclic() {
            return false;
        }
        self.bidirected_edges()
            .into_iter()
            .all(|(a, b)| !self.ancestors_of(a).contains(b) && !self.ancestors_of(b).contains(a))
    }

    /// Every non-adjacent pair is m-separated by some set.
    ///
    /// Uses the fact that in an ancestral graph a non-adjacent pair is
    /// separable iff it is separated by its ancestors.
    pub fn is_maximal(&self) -> bool {
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.adjacent(a, b) {
                    continue;
                }
                let z = self
                    .ancestors(&VertexSet::from_iter([a, b]))
                    .without(&[a, b]);
                if !m_separated_unchecked(self, a, b, &z) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_mag(&self) -> bool {
        self.is_ancestral() && self.is_maximal()
    }

    pub(crate) fn require_ancestral(&self) -> Result<()> {
        if self.is_ancestral() {
            Ok(())
        } else {
            Err(Error::pre("graph is not ancestral"))
        }
    }

    pub(crate) fn require_mag(&self) -> Result<()> {
        self.require_ancestral()?;
        if self.is_maximal() {
            Ok(())
        } else {
            Err(Error::pre("graph is ancestral but not maximal"))
        }
    }

    pub(crate) fn require_dag(&self) -> Result<()> {
        if self.is_dag() {
            Ok(())
        } else {
            Err(Error::pre("graph is not a DAG"))
        }
    }

    /// Subgraph induced by `keep`, in the same id space; the other vertices
    /// become isolated.
    pub fn induced(&self, keep: &VertexSet) -> MixedGraph {
        let mut g = self.clone();
        for v in 0..self.n {
            if !keep.contains(v) {
                g.isolate(v);
            }
        }
        g
    }

    /// Drops every edge at `v`.
    pub fn isolate(&mut self, v: usize) {
        for u in self.neighbors(v).iter() {
            self.remove_edge(v, u);
        }
    }

    /// Restriction to `keep` renumbered to `0..keep.len()`. Returns the new
    /// graph and, for each new id, its old id.
    pub fn compact(&self, keep: &VertexSet) -> (MixedGraph, Vec<usize>) {
        let old: Vec<usize> = keep.to_vec();
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &o) in old.iter().enumerate() {
            new_id[o] = i;
        }
        let mut g = MixedGraph::new(old.len());
        for (a, b) in self.directed_edges() {
            if keep.contains(a) && keep.contains(b) {
                g.children[new_id[a]].insert(new_id[b]);
                g.parents[new_id[b]].insert(new_id[a]);
            }
        }
        for (a, b) in self.bidirected_edges() {
            if keep.contains(a) && keep.contains(b) {
                g.spouses[new_id[a]].insert(new_id[b]);
                g.spouses[new_id[b]].insert(new_id[a]);
            }
        }
        (g, old)
    }

    /// Applies `perm` (old id -> new id).
    pub fn relabel(&self, perm: &[usize]) -> Result<MixedGraph> {
        check_permutation(perm, self.n)?;
        let mut g = MixedGraph::new(self.n);
        for (a, b) in self.directed_edges() {
            g.add_directed(perm[a], perm[b])?;
        }
        for (a, b) in self.bidirected_edges() {
            g.add_bidirected(perm[a], perm[b])?;
        }
        Ok(g)
    }

    pub fn skeleton(&self) -> UndirectedGraph {
        let mut u = UndirectedGraph::new(self.n);
        for v in 0..self.n {
            u.adj[v] = self.neighbors(v);
        }
        u
    }
}

pub(crate) fn check_permutation(pi: &[usize], n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(Error::arg(format!(
            "order has {} entries, expected {n}",
            pi.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in pi {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::arg(format!("{pi:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// A simple undirected graph; used for learned skeletons.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct UndirectedGraph {
    n: usize,
    adj: Vec<VertexSet>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![VertexSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::arg(format!("bad undirected edge ({a}, {b})")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b);
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adj[a].remove(b);
        self.adj[b].remove(a);
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| {
                self.adj[a]
                    .iter()
                    .filter(move |&b| a < b)
                    .map(move |b| (a, b))
            })
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Number of vertex pairs whose adjacency differs.
    pub fn shd(&self, other: &UndirectedGraph) -> usize {
        let mut d = 0;
        for a in 0..self.n.max(other.n) {
            let mine = self.adj.get(a).cloned().unwrap_or_default();
            let theirs = other.adj.get(a).cloned().unwrap_or_default();
            d += mine
                .difference(&theirs)
                .union(&theirs.difference(&mine))
                .iter()
                .filter(|&b| a < b)
                .count();
        }
        d
    }

    /// Edge-level precision, recall and F1 of `self` against `truth`.
    /// Empty-vs-empty scores 1.
    pub fn precision_recall_f1(&self, truth: &UndirectedGraph) -> (f64, f64, f64) {
        let learned = self.edges();
        let true_edges = truth.edges();
        let tp = learned
            .iter()
            .filter(|&&(a, b)| truth.adjacent(a, b))
            .count() as f64;
        let precision = if learned.is_empty() {
            1.0
        } else {
            tp / learned.len() as f64
        };
        let recall = if true_edges.is_empty() {
            1.0
        } else {
            tp / true_edges.len() as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        (precision, recall, f1)
    }

    pub fn restrict(&self, keep: &VertexSet) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.n);
        for v in keep.iter() {
            g.adj[v] = self.adj[v].intersection(keep);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn confounded() -> MixedGraph {
        // x=0, y=1, z=2, w=3
        MixedGraph::from_edges(4, &[(1, 2), (1, 3), (2, 3)], &[(0, 1)]).unwrap()
    }

    #[test]
    fn relations() {
        let g = confounded();
        assert_eq!(g.parents(3).to_vec(), vec![1, 2]);
        assert_eq!(g.ancestors_of(3).to_vec(), vec![1, 2, 3]);
        assert_eq!(g.district(0).to_vec(), vec![0, 1]);
        assert_eq!(g.pap(0).to_vec(), vec![1]);
        assert_eq!(g.pap(3).to_vec(), vec![1, 2]);
        assert!(g.arrowhead_at(0, 1) && g.arrowhead_at(1, 0));
        assert!(!g.arrowhead_at(2, 1));
        assert!(g.is_ancestral());
        assert!(g.is_mag());
        assert!(!g.is_dag());
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = MixedGraph::new(3);
        assert!(g.add_directed(0, 0).is_err());
        assert!(g.add_directed(0, 5).is_err());
        g.add_directed(0, 1).unwrap();
        assert!(g.add_bidirected(1, 0).is_err());
    }

    #[test]
    fn non_ancestral_detected() {
        // 0 -> 1 -> 2 with 0 <-> 2
        let g = MixedGraph::from_edges(3, &[(0, 1), (1, 2)], &[(0, 2)]).unwrap();
        assert!(!g.is_ancestral());
        assert!(m_separated(&g, 0, 1, &VertexSet::new()).is_err());
    }

    #[test]
    fn compact_and_relabel() {
        let g = confounded();
        let (c, old) = g.compact(&VertexSet::from_iter([1, 2, 3]));
        assert_eq!(old, vec![1, 2, 3]);
        assert_eq!(c.directed_edges(), vec![(0, 1), (0, 2), (1, 2)]);
        let r = g.relabel(&[3, 2, 1, 0]).unwrap();
        assert!(r.has_bidirected(3, 2));
        assert!(r.has_directed(1, 0));
        assert!(g.relabel(&[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn undirected_metrics() {
        let a = UndirectedGraph::from_edges(4, &[(0, 1), (1, 2)]).unwrap();
        let b = UndirectedGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(a.shd(&b), 2);
        let (p, r, f) = a.precision_recall_f1(&b);
        assert_eq!((p, r, f), (0.5, 0.5, 0.5));
        let e = UndirectedGraph::new(4);
        assert_eq!(e.precision_recall_f1(&e).2, 1.0);
    }

    #[test]
    fn non_maximal_detected() {
        // 0 <-> 1 <-> 2 <-> 3 with 1 -> 3 and 2 -> 0: ancestral, but 0 and 3
        // are joined by an inducing path.
        let g = MixedGraph::from_edges(4, &[(1, 3), (2, 0)], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(g.is_ancestral());
        assert!(!g.is_maximal());
    }
}
