//! Removal orders.
//!
//! A c-order removes sinks first: each vertex has no children among the
//! vertices after it. An r-order removes a removable vertex at every step.

use std::collections::HashMap;

use super::removable::{removable_dag_unchecked, removable_mag_unchecked};
use super::{check_permutation, MixedGraph};
use crate::error::Result;
use crate::set::VertexSet;

pub fn is_c_order(g: &MixedGraph, pi: &[usize]) -> Result<bool> {
    check_permutation(pi, g.n())?;
    let mut later = VertexSet::full(g.n());
    for &v in pi {
        later.remove(v);
        if !g.children(v).is_disjoint(&later) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks removability of `pi[i]` in the subgraph induced by `pi[i..]`.
pub fn is_r_order(g: &MixedGraph, pi: &[usize]) -> Result<bool> {
    check_permutation(pi, g.n())?;
    let dag = g.is_dag();
    if !dag {
        g.require_mag()?;
    }
    let mut cur = g.clone();
    for &v in pi {
        if !removable_in(&cur, v, dag) {
            return Ok(false);
        }
        cur.isolate(v);
    }
    Ok(true)
}

fn removable_in(g: &MixedGraph, v: usize, dag: bool) -> bool {
    if dag {
        removable_dag_unchecked(g, v)
    } else {
        removable_mag_unchecked(g, v)
    }
}

/// All c-orders, lexicographically sorted. Exponential; small graphs only.
pub fn enumerate_c_orders(g: &MixedGraph) -> Vec<Vec<usize>> {
    enumerate(g, &|cur: &MixedGraph, v, remaining: &VertexSet| {
        cur.children(v).is_disjoint(remaining)
    })
}

/// All r-orders, lexicographically sorted. Exponential; small graphs only.
pub fn enumerate_r_orders(g: &MixedGraph) -> Result<Vec<Vec<usize>>> {
    let dag = g.is_dag();
    if !dag {
        g.require_mag()?;
    }
    Ok(enumerate(g, &|cur: &MixedGraph, v, _: &VertexSet| {
        removable_in(cur, v, dag)
    }))
}

type StepOk<'a> = dyn Fn(&MixedGraph, usize, &VertexSet) -> bool + 'a;

fn enumerate(g: &MixedGraph, ok: &StepOk) -> Vec<Vec<usize>> {
    // Which vertices may go next depends only on the remaining set.
    let mut memo: HashMap<VertexSet, Vec<Vec<usize>>> = HashMap::new();
    fn go(
        g: &MixedGraph,
        remaining: VertexSet,
        ok: &StepOk,
        memo: &mut HashMap<VertexSet, Vec<Vec<usize>>>,
    ) -> Vec<Vec<usize>> {
        if remaining.is_empty() {
            return vec![Vec::new()];
        }
        if let Some(hit) = memo.get(&remaining) {
            return hit.clone();
        }
        let cur = g.induced(&remaining);
        let mut out = Vec::new();
        for v in remaining.iter() {
            let rest = remaining.without(&[v]);
            if ok(&cur, v, &rest) {
                for tail in go(g, rest, ok, memo) {
                    let mut o = Vec::with_capacity(tail.len() + 1);
                    o.push(v);
                    o.extend(tail);
                    out.push(o);
                }
            }
        }
        memo.insert(remaining, out.clone());
        out
    }
    go(g, g.vertices(), ok, &mut memo)
}
