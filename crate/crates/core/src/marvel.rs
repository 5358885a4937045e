//! MARVEL: recursive skeleton learning for DAGs.
//!
//! A vertex `x` is removable iff (1) every pair of its neighbours stays
//! dependent given `x` plus any part of its boundary, and (2) the same holds
//! for a co-parent `y` and a neighbour `z` whenever the conditioning set
//! includes a common child of `x` and `y`. Both are checked from tests inside
//! `Mb(x) ∪ {x}`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet};

use crate::ci::CiTester;
use crate::error::{Error, Result};
use crate::graph::VStructure;
use crate::recursion::{run, search_sepset, Ctx, LearnConfig, SkeletonResult, Strategy};
use crate::set::VertexSet;

pub use crate::recursion::find_neighbors;

pub type Triple = (usize, usize, usize);

/// Common children of `x` with each co-parent, as `(child, coparent)` pairs.
///
/// `z` is a common child of `x` and `y` iff `z` is outside their separating
/// set and `y, z` are dependent given every subset of `Mb(x) ∪ {x} ∖ {y, z}`.
pub fn find_vstructures(
    tester: &dyn CiTester,
    x: usize,
    neighbors: &VertexSet,
    coparents: &VertexSet,
    mb: &VertexSet,
    sepsets: &BTreeMap<usize, VertexSet>,
) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let pool = mb.with(&[x]);
    for y in coparents.iter() {
        let s_xy = sepsets.get(&y).ok_or_else(|| {
            Error::consistency(format!(
                "no separating set recorded for co-parents {x}, {y}"
            ))
        })?;
        for z in neighbors.iter() {
            if s_xy.contains(z) {
                continue;
            }
            let mut always_dependent = true;
            for s in pool.without(&[y, z]).subsets() {
                if tester.independent(y, z, &s)? {
                    always_dependent = false;
                    break;
                }
            }
            if always_dependent {
                out.push((z, y));
            }
        }
    }
    Ok(out)
}

/// Condition 1: no two neighbours of `x` are separated by `x` plus a subset
/// of the rest of its boundary.
pub fn condition1(
    tester: &dyn CiTester,
    x: usize,
    neighbors: &VertexSet,
    mb: &VertexSet,
    mut skip: Option<&mut HashSet<Triple>>,
) -> Result<bool> {
    let ne = neighbors.to_vec();
    for (i, &y) in ne.iter().enumerate() {
        for &z in &ne[i + 1..] {
            if skip.as_deref().is_some_and(|s| s.contains(&(x, y, z))) {
                continue;
            }
            for s in mb.without(&[y, z]).subsets() {
                if tester.independent(y, z, &s.with(&[x]))? {
                    return Ok(false);
                }
            }
            if let Some(s) = skip.as_deref_mut() {
                s.insert((x, y, z));
            }
        }
    }
    Ok(true)
}

/// Condition 2, assuming condition 1 holds: a co-parent `y` and a neighbour
/// `z` are never separated by `x` plus a boundary subset containing one of
/// the common children of `x` and `y` other than `z`.
pub fn condition2(
    tester: &dyn CiTester,
    x: usize,
    neighbors: &VertexSet,
    coparents: &VertexSet,
    mb: &VertexSet,
    vstructures: &[(usize, usize)],
    mut skip: Option<&mut HashSet<Triple>>,
) -> Result<bool> {
    for y in coparents.iter() {
        for z in neighbors.iter() {
            if skip.as_deref().is_some_and(|s| s.contains(&(x, y, z))) {
                continue;
            }
            let gamma: VertexSet = vstructures
                .iter()
                .filter(|&&(v, cp)| cp == y && v != z)
                .map(|&(v, _)| v)
                .collect();
            if !gamma.is_empty() {
                for s in mb.without(&[y, z]).subsets() {
                    if s.is_disjoint(&gamma) {
                        continue;
                    }
                    if tester.independent(y, z, &s.with(&[x]))? {
                        return Ok(false);
                    }
                }
            }
            if let Some(s) = skip.as_deref_mut() {
                s.insert((x, y, z));
            }
        }
    }
    Ok(true)
}

#[derive(Default)]
struct Marvel {
    /// Co-parent separating sets from each vertex's first neighbour search.
    own_sepsets: BTreeMap<usize, BTreeMap<usize, VertexSet>>,
    vstructures: BTreeMap<usize, Vec<(usize, usize)>>,
    skip1: HashSet<Triple>,
    skip2: HashSet<Triple>,
}

impl Marvel {
    fn neighbors(&mut self, x: usize, ctx: &mut Ctx) -> Result<(VertexSet, VertexSet)> {
        let mb = ctx.state.mb[x].clone();
        if let Entry::Vacant(slot) = self.own_sepsets.entry(x) {
            let (ne, seps) = find_neighbors(ctx.tester, x, &mb)?;
            for y in ne.iter() {
                ctx.ghat.add_edge(x, y);
            }
            for (&y, s) in &seps {
                ctx.note_coparent(x, y, s.clone());
            }
            slot.insert(seps);
            let cp = mb.difference(&ne);
            return Ok((ne, cp));
        }
        let ne = ctx.ghat.neighbors(x).intersection(&ctx.state.remaining);
        let mut cp = mb.difference(&ne);
        // Under a consistent test every co-parent already has a separating
        // set; otherwise look for one now, and drop `y` if none exists.
        for y in cp.to_vec() {
            if self.own_sepsets[&x].contains_key(&y) {
                continue;
            }
            let known = ctx.state.sepset(x, y).cloned();
            let found = match known {
                Some(s) => Some(s),
                None => search_sepset(ctx.tester, x, y, &mb)?,
            };
            match found {
                Some(s) => {
                    self.own_sepsets.get_mut(&x).unwrap().insert(y, s);
                }
                None => {
                    cp.remove(y);
                }
            }
        }
        Ok((ne, cp))
    }
}

impl Strategy for Marvel {
    fn probe(&mut self, x: usize, ctx: &mut Ctx) -> Result<Option<VertexSet>> {
        let (ne, cp) = self.neighbors(x, ctx)?;
        let mb = ctx.state.mb[x].clone();
        let use_skip = ctx.config.skip_checks;
        if !condition1(ctx.tester, x, &ne, &mb, use_skip.then_some(&mut self.skip1))? {
            return Ok(None);
        }
        let vs = match self.vstructures.get(&x) {
            None => {
                let vs = find_vstructures(ctx.tester, x, &ne, &cp, &mb, &self.own_sepsets[&x])?;
                self.vstructures.insert(x, vs.clone());
                vs
            }
            Some(vs) => vs
                .iter()
                .copied()
                .filter(|&(z, y)| {
                    ctx.state.remaining.contains(z) && ctx.state.remaining.contains(y)
                })
                .collect(),
        };
        if !condition2(
            ctx.tester,
            x,
            &ne,
            &cp,
            &mb,
            &vs,
            use_skip.then_some(&mut self.skip2),
        )? {
            return Ok(None);
        }
        for &(z, y) in &vs {
            ctx.vstructures.insert(VStructure::new(x, z, y));
        }
        Ok(Some(ne))
    }

    fn forced_neighbors(&mut self, x: usize, ctx: &mut Ctx) -> Result<VertexSet> {
        Ok(self.neighbors(x, ctx)?.0)
    }
}

/// Learns the skeleton of a DAG over `vars`.
pub fn learn(
    tester: &dyn CiTester,
    vars: &VertexSet,
    config: &LearnConfig,
) -> Result<SkeletonResult> {
    run(tester, vars, config, &mut Marvel::default())
}
