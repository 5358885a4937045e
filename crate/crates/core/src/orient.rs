//! Orientation of learned DAG skeletons: v-structures from separating sets,
//! then Meek's rules to a CPDAG.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ci::CiTester;
use crate::error::{Error, Result};
use crate::graph::edgelist::{check_names, declaration_line};
use crate::graph::{UndirectedGraph, VStructure};
use crate::recursion::SkeletonResult;
use crate::set::VertexSet;

/// A partially directed graph. Each adjacent pair is either directed or
/// undirected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cpdag {
    n: usize,
    /// `children[a]` holds `b` for every `a -> b`.
    children: Vec<VertexSet>,
    undirected: Vec<VertexSet>,
}

impl Cpdag {
    /// All edges of `skeleton`, undirected.
    pub fn from_skeleton(skeleton: &UndirectedGraph) -> Self {
        let n = skeleton.n();
        Self {
            n,
            children: vec![VertexSet::new(); n],
            undirected: (0..n).map(|v| skeleton.neighbors(v).clone()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_directed(&self, a: usize, b: usize) -> bool {
        self.children[a].contains(b)
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected[a].contains(b)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_undirected(a, b) || self.has_directed(a, b) || self.has_directed(b, a)
    }

    /// Sorted `(from, to)` pairs.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| self.children[a].iter().map(move |b| (a, b)))
            .collect()
    }

    /// Sorted `(a, b)` pairs with `a < b`.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| {
                self.undirected[a]
                    .iter()
                    .filter(move |&b| a < b)
                    .map(move |b| (a, b))
            })
            .collect()
    }

    pub fn skeleton(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.n);
        for (a, b) in self
            .directed_edges()
            .into_iter()
            .chain(self.undirected_edges())
        {
            g.add_edge(a, b);
        }
        g
    }

    /// Colliders `a -> c <- b` with `a`, `b` non-adjacent.
    pub fn unshielded_colliders(&self) -> BTreeSet<VStructure> {
        let mut out = BTreeSet::new();
        for c in 0..self.n {
            let pa: Vec<usize> = (0..self.n).filter(|&a| self.has_directed(a, c)).collect();
            for (i, &a) in pa.iter().enumerate() {
                for &b in &pa[i + 1..] {
                    if !self.adjacent(a, b) {
                        out.insert(VStructure::new(a, c, b));
                    }
                }
            }
        }
        out
    }

    fn orient(&mut self, a: usize, b: usize) -> Result<bool> {
        if self.has_directed(a, b) {
            return Ok(false);
        }
        if self.has_directed(b, a) {
            return Err(Error::consistency(format!(
                "orientation conflict on edge {a} -- {b}"
            )));
        }
        if !self.has_undirected(a, b) {
            return Err(Error::consistency(format!(
                "cannot orient missing edge {a} -- {b}"
            )));
        }
        self.undirected[a].remove(b);
        self.undirected[b].remove(a);
        self.children[a].insert(b);
        Ok(true)
    }

    fn directed_acyclic(&self) -> bool {
        let mut indeg: Vec<usize> = (0..self.n)
            .map(|v| (0..self.n).filter(|&a| self.has_directed(a, v)).count())
            .collect();
        let mut stack: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for c in self.children[v].iter() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    stack.push(c);
                }
            }
        }
        seen == self.n
    }

    /// One pass of Meek's rules; returns whether anything changed.
    fn apply_rules(&mut self) -> Result<bool> {
        let mut changed = false;
        for (a, b) in self.undirected_edges() {
            for (x, y) in [(a, b), (b, a)] {
                if self.has_undirected(x, y) && self.rule_fires(x, y) {
                    changed |= self.orient(x, y)?;
                }
            }
        }
        Ok(changed)
    }

    /// Whether some rule orients the undirected edge `x -- y` as `x -> y`.
    fn rule_fires(&self, x: usize, y: usize) -> bool {
        let n = self.n;
        // R1: w -> x -- y, w and y non-adjacent.
        if (0..n).any(|w| self.has_directed(w, x) && !self.adjacent(w, y)) {
            return true;
        }
        // R2: x -> w -> y.
        if self.children[x].iter().any(|w| self.has_directed(w, y)) {
            return true;
        }
        // R3: x -- c -> y, x -- d -> y, c and d non-adjacent.
        let mids: Vec<usize> = self.undirected[x]
            .iter()
            .filter(|&c| self.has_directed(c, y))
            .collect();
        for (i, &c) in mids.iter().enumerate() {
            if mids[i + 1..].iter().any(|&d| !self.adjacent(c, d)) {
                return true;
            }
        }
        // R4: x -- c -> d -> y, c and y non-adjacent, x adjacent to d.
        for c in self.undirected[x].iter() {
            if self.adjacent(c, y) {
                continue;
            }
            if self.children[c]
                .iter()
                .any(|d| self.has_directed(d, y) && self.adjacent(x, d))
            {
                return true;
            }
        }
        false
    }

    /// Applies Meek's rules to a fixpoint.
    pub fn close(mut self) -> Result<Self> {
        while self.apply_rules()? {}
        if !self.directed_acyclic() {
            return Err(Error::consistency("orientation produced a directed cycle"));
        }
        Ok(self)
    }

    /// Edge list: `A -> B` and `A -- B`.
    pub fn write(&self, names: &[String]) -> Result<String> {
        check_names(names, self.n)?;
        let mut s = if names.is_empty() {
            String::new()
        } else {
            declaration_line(names)
        };
        for (a, b) in self.directed_edges() {
            s += &format!("{} -> {}\n", names[a], names[b]);
        }
        for (a, b) in self.undirected_edges() {
            s += &format!("{} -- {}\n", names[a], names[b]);
        }
        Ok(s)
    }
}

/// Orients the v-structures on `skeleton`, then closes under Meek's rules.
pub fn meek_close(skeleton: &UndirectedGraph, vstructures: &BTreeSet<VStructure>) -> Result<Cpdag> {
    let mut g = Cpdag::from_skeleton(skeleton);
    for v in vstructures {
        if skeleton.adjacent(v.parent1, v.parent2) {
            return Err(Error::consistency(format!(
                "v-structure {v:?} has adjacent parents"
            )));
        }
        g.orient(v.parent1, v.child)?;
        g.orient(v.parent2, v.child)?;
    }
    g.close()
}

/// Unshielded colliders implied by separating sets: `a -> c <- b` for every
/// non-adjacent pair with a separating set and every common neighbour `c`
/// outside that set.
pub fn vstructures_from_sepsets(
    skeleton: &UndirectedGraph,
    sepsets: &BTreeMap<(usize, usize), VertexSet>,
) -> BTreeSet<VStructure> {
    let mut out = BTreeSet::new();
    for (&(a, b), s) in sepsets {
        if skeleton.adjacent(a, b) {
            continue;
        }
        for c in skeleton
            .neighbors(a)
            .intersection(skeleton.neighbors(b))
            .iter()
        {
            if !s.contains(c) {
                out.insert(VStructure::new(a, c, b));
            }
        }
    }
    out
}

/// V-structures of a learner's result: those it recorded directly plus
/// those implied by its separating sets.
pub fn assemble_vstructures(result: &SkeletonResult) -> Result<BTreeSet<VStructure>> {
    if let Some(&(a, b)) = result
        .coparents
        .iter()
        .find(|k| !result.sepsets.contains_key(k))
    {
        return Err(Error::consistency(format!(
            "co-parents {a} and {b} have no separating set"
        )));
    }
    let mut out = vstructures_from_sepsets(&result.skeleton, &result.sepsets);
    out.extend(result.vstructures.iter().copied());
    Ok(out)
}

/// Finds separating sets for non-adjacent pairs that share a neighbour but
/// have none recorded, searching subsets of either endpoint's neighbours.
/// Returns the number of pairs still without one.
pub fn complete_sepsets(
    tester: &dyn CiTester,
    skeleton: &UndirectedGraph,
    sepsets: &mut BTreeMap<(usize, usize), VertexSet>,
) -> Result<usize> {
    let mut missing = 0;
    for a in 0..skeleton.n() {
        for b in a + 1..skeleton.n() {
            if skeleton.adjacent(a, b)
                || sepsets.contains_key(&(a, b))
                || skeleton.neighbors(a).is_disjoint(skeleton.neighbors(b))
            {
                continue;
            }
            let pools = [
                skeleton.neighbors(a).without(&[b]),
                skeleton.neighbors(b).without(&[a]),
            ];
            let mut found = None;
            'search: for pool in &pools {
                for s in pool.subsets() {
                    if tester.independent(a, b, &s)? {
                        found = Some(s);
                        break 'search;
                    }
                }
            }
            match found {
                Some(s) => {
                    sepsets.insert((a, b), s);
                }
                None => missing += 1,
            }
        }
    }
    Ok(missing)
}
