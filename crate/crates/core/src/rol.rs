//! Removal-order learners.
//!
//! Any order `π` yields a graph `G^π`: remove vertices in order and join each
//! one to its neighbours among the vertices still present. The number of
//! edges is minimised exactly by removable orders, where `G^π` is the true
//! skeleton. [`rol_hc`] searches orders by local swaps; [`rol_vi`] solves the
//! problem exactly by dynamic programming over vertex subsets.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ci::{CiStats, CiTester};
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::mb::compute_mb_tc;
use crate::recursion::find_neighbors;
use crate::set::VertexSet;

/// Neighbours of `x` in the marginal over `present`, with separating sets for
/// the co-parents. The boundary is found by total conditioning within
/// `present`, then searched as usual.
pub fn neighbors_in(
    tester: &dyn CiTester,
    x: usize,
    present: &VertexSet,
) -> Result<(VertexSet, BTreeMap<usize, VertexSet>)> {
    let mut mb = VertexSet::new();
    for y in present.without(&[x]).iter() {
        if !tester.independent(x, y, &present.without(&[x, y]))? {
            mb.insert(y);
        }
    }
    find_neighbors(tester, x, &mb)
}

fn check_order(tester: &dyn CiTester, order: &[usize]) -> Result<VertexSet> {
    let set: VertexSet = order.iter().collect();
    if set.len() != order.len() {
        return Err(Error::arg(format!("order {order:?} repeats a vertex")));
    }
    if order.iter().any(|&v| v >= tester.num_vars()) {
        return Err(Error::arg(format!(
            "order {order:?} exceeds the tester's {} variables",
            tester.num_vars()
        )));
    }
    Ok(set)
}

/// Costs `|Ne(π_t; {π_t, .., π_last})|` for positions `a..=b`, clipped to
/// the positions that carry a cost (all but the last).
pub fn compute_cost(
    tester: &dyn CiTester,
    order: &[usize],
    a: usize,
    b: usize,
) -> Result<Vec<usize>> {
    check_order(tester, order)?;
    let last = order.len().saturating_sub(2);
    if order.len() < 2 || a > last {
        return Ok(Vec::new());
    }
    let mut present: VertexSet = order[a..].iter().collect();
    let mut out = Vec::with_capacity(b.min(last) + 1 - a);
    for &x in &order[a..=b.min(last)] {
        out.push(neighbors_in(tester, x, &present)?.0.len());
        present.remove(x);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpiResult {
    pub graph: UndirectedGraph,
    /// One entry per position except the last; sums to the edge count.
    pub cost: Vec<usize>,
    /// Separating sets found along the way, keyed by `(min, max)`.
    pub sepsets: BTreeMap<(usize, usize), VertexSet>,
}

/// Builds `G^π` for the given order.
pub fn learn_gpi(tester: &dyn CiTester, order: &[usize]) -> Result<GpiResult> {
    let vars = check_order(tester, order)?;
    let mut graph = UndirectedGraph::new(tester.num_vars());
    let mut cost = Vec::with_capacity(order.len().saturating_sub(1));
    let mut sepsets = BTreeMap::new();
    let mut present = vars;
    for &x in order.iter().take(order.len().saturating_sub(1)) {
        let (ne, seps) = neighbors_in(tester, x, &present)?;
        for y in ne.iter() {
            graph.add_edge(x, y);
        }
        for (y, s) in seps {
            sepsets.entry((x.min(y), x.max(y))).or_insert(s);
        }
        cost.push(ne.len());
        present.remove(x);
    }
    Ok(GpiResult {
        graph,
        cost,
        sepsets,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolResult {
    pub order: Vec<usize>,
    pub skeleton: UndirectedGraph,
    pub cost: Vec<usize>,
    pub sepsets: BTreeMap<(usize, usize), VertexSet>,
    pub stats: CiStats,
    /// Accepted swaps, for the hill climber.
    pub trace: Vec<HcStep>,
    /// Distinct `(subset, vertex)` rewards evaluated, for value iteration.
    pub reward_evaluations: u64,
}

impl RolResult {
    pub fn total_cost(&self) -> usize {
        self.cost.iter().sum()
    }

    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|e| serde_json::to_string(e).expect("trace steps serialise") + "\n")
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HcConfig {
    pub max_iter: usize,
    /// Swaps are limited to positions `a < b` with `b - a < max_swap`.
    pub max_swap: usize,
    /// Starting order; by default vertices by ascending boundary size.
    pub init: Option<Vec<usize>>,
}

impl Default for HcConfig {
    fn default() -> Self {
        Self {
            max_iter: 50,
            max_swap: 5,
            init: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HcStep {
    pub iteration: usize,
    pub a: usize,
    pub b: usize,
    pub cost_before: usize,
    pub cost_after: usize,
    pub order: Vec<usize>,
    pub cost: Vec<usize>,
}

/// Initial order for the hill climber: ascending boundary size from one
/// total-conditioning pass, ties by id.
pub fn mb_size_order(tester: &dyn CiTester, vars: &VertexSet) -> Result<Vec<usize>> {
    let mb = compute_mb_tc(tester, vars)?;
    let mut order = vars.to_vec();
    order.sort_by_key(|&v| (mb[v].len(), v));
    Ok(order)
}

/// Hill climbing over orders. Each iteration scans swaps `(a, b)` in
/// ascending order and accepts the first that strictly lowers the total
/// cost; only the costs at positions `a..=b` change. Stops after
/// `max_iter` acceptances or a scan without improvement.
pub fn rol_hc(tester: &dyn CiTester, vars: &VertexSet, config: &HcConfig) -> Result<RolResult> {
    if config.max_swap < 1 {
        return Err(Error::arg("max_swap must be at least 1"));
    }
    let before = tester.stats();
    let mut order = match &config.init {
        Some(init) => {
            if check_order(tester, init)? != *vars {
                return Err(Error::arg(format!(
                    "initial order {init:?} is not an order of {vars:?}"
                )));
            }
            init.clone()
        }
        None => mb_size_order(tester, vars)?,
    };
    let n = order.len();
    let mut cost = compute_cost(tester, &order, 0, n.saturating_sub(1))?;
    let mut trace = Vec::new();

    'outer: for iteration in 0..config.max_iter {
        for a in 0..n {
            for b in a + 1..n.min(a + config.max_swap) {
                let mut cand = order.clone();
                cand.swap(a, b);
                let new = compute_cost(tester, &cand, a, b)?;
                let hi = b.min(n - 2);
                let old: usize = cost[a..=hi].iter().sum();
                if new.iter().sum::<usize>() < old {
                    let cost_before = cost.iter().sum();
                    cost.splice(a..=hi, new);
                    order = cand;
                    log::debug!("accepted swap ({a}, {b}) at iteration {iteration}");
                    trace.push(HcStep {
                        iteration,
                        a,
                        b,
                        cost_before,
                        cost_after: cost.iter().sum(),
                        order: order.clone(),
                        cost: cost.clone(),
                    });
                    continue 'outer;
                }
            }
        }
        break;
    }

    let gpi = learn_gpi(tester, &order)?;
    if gpi.cost != cost {
        return Err(Error::consistency(format!(
            "maintained cost {cost:?} differs from recomputed {:?}",
            gpi.cost
        )));
    }
    Ok(RolResult {
        skeleton: gpi.graph.restrict(vars),
        order,
        cost,
        sepsets: gpi.sepsets,
        stats: tester.stats().since(&before),
        trace,
        reward_evaluations: 0,
    })
}

/// Largest variable count accepted by [`rol_vi`] by default.
pub const DEFAULT_VI_CAP: usize = 16;

/// Exact minimisation of the order cost by value iteration over subsets:
/// `V(s) = max_a [-|Ne(a; s)| + V(s ∖ {a})]`, computed layer by layer in
/// ascending subset size. Ties go to the lowest id.
pub fn rol_vi(tester: &dyn CiTester, vars: &VertexSet, cap: usize) -> Result<RolResult> {
    let k = vars.len();
    if k > cap {
        return Err(Error::arg(format!(
            "value iteration over {k} variables exceeds the cap of {cap}"
        )));
    }
    if vars.iter().any(|v| v >= tester.num_vars()) {
        return Err(Error::arg("variable set exceeds the tester's variables"));
    }
    let before = tester.stats();
    let ids = vars.to_vec();
    let to_set = |mask: usize| -> VertexSet {
        (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ids[i])
            .collect()
    };

    let full = (1usize << k) - 1;
    let mut value = vec![0i64; full + 1];
    let mut choice = vec![usize::MAX; full + 1];
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    for mask in 1..=full {
        layers[mask.count_ones() as usize].push(mask);
    }
    for &m in &layers[1] {
        choice[m] = m.trailing_zeros() as usize;
    }
    let mut evaluations = layers[1].len() as u64;

    for layer in layers.iter().skip(2) {
        let solved: Vec<(i64, usize)> = layer
            .par_iter()
            .map(|&mask| {
                let present = to_set(mask);
                let mut best = (i64::MIN, usize::MAX);
                for i in (0..k).filter(|i| mask >> i & 1 == 1) {
                    let ne = neighbors_in(tester, ids[i], &present)?.0.len() as i64;
                    let v = -ne + value[mask & !(1 << i)];
                    if v > best.0 {
                        best = (v, i);
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        for (&mask, (v, a)) in layer.iter().zip(solved) {
            value[mask] = v;
            choice[mask] = a;
        }
        evaluations += layer.len() as u64 * layer.first().map_or(0, |m| m.count_ones() as u64);
    }

    let mut order = Vec::with_capacity(k);
    let mut mask = full;
    while mask != 0 {
        let a = choice[mask];
        order.push(ids[a]);
        mask &= !(1 << a);
    }
    let gpi = learn_gpi(tester, &order)?;
    if gpi.cost.iter().sum::<usize>() as i64 != -value[full] {
        return Err(Error::consistency(format!(
            "decoded order costs {} but the optimum is {}",
            gpi.cost.iter().sum::<usize>(),
            -value[full]
        )));
    }
    Ok(RolResult {
        skeleton: gpi.graph.restrict(vars),
        order,
        cost: gpi.cost,
        sepsets: gpi.sepsets,
        stats: tester.stats().since(&before),
        trace: Vec::new(),
        reward_evaluations: if k == 0 { 0 } else { evaluations },
    })
}
