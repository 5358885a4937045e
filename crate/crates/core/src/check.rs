//! Exhaustive property suites against brute-force oracles, shared by the
//! `oracle-check` command and the acceptance tests.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::bench::Learned;
use crate::ci::{with_cache, GraphOracle};
use crate::error::Result;
use crate::graph::{
    enumerate_c_orders, enumerate_r_orders, is_r_order, latent_project, removable_bruteforce,
    removable_dag, removable_mag, v_structures, MixedGraph, VStructure,
};
use crate::mb::compute_mb_tc;
use crate::orient::{assemble_vstructures, meek_close};
use crate::recursion::LearnConfig;
use crate::rol::{learn_gpi, rol_vi, DEFAULT_VI_CAP};
use crate::sim::{enumerate_dags, gen_dag, Preset};

/// Messages kept per report; the count covers all failures.
const KEEP: usize = 10;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: u64,
    pub failure_count: u64,
    pub failures: Vec<String>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn case(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < KEEP {
                self.failures.push(msg());
            }
        }
    }

    fn merge(mut self, other: CheckReport) -> Self {
        self.cases += other.cases;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < KEEP {
                self.failures.push(f);
            }
        }
        self
    }
}

fn dags_up_to(max_n: usize) -> Result<Vec<MixedGraph>> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        out.extend(enumerate_dags(n)?);
    }
    Ok(out)
}

/// Both removability criteria against the definition on every vertex of
/// `g` and of its projections onto every subset of at least three vertices.
fn removability_on(g: &MixedGraph) -> Result<CheckReport> {
    let mut rep = CheckReport::new("removability");
    for x in 0..g.n() {
        let truth = removable_bruteforce(g, x)?;
        let dag = removable_dag(g, x)?;
        let mag = removable_mag(g, x)?;
        rep.case(dag == truth && mag == truth, || {
            format!("{g:?}: vertex {x} definition={truth} dag={dag} mag={mag}")
        });
    }
    for keep in g
        .vertices()
        .subsets()
        .filter(|s| s.len() >= 3 && s.len() < g.n())
    {
        let (p, _) = latent_project(g, &keep)?.compact(&keep);
        for x in 0..p.n() {
            let truth = removable_bruteforce(&p, x)?;
            let mag = removable_mag(&p, x)?;
            rep.case(mag == truth, || {
                format!("{p:?} (projection of {g:?}): vertex {x} definition={truth} mag={mag}")
            });
        }
    }
    Ok(rep)
}

/// Removability criteria versus the definition: every labelled DAG with at
/// most `max_n` vertices, plus `random` seeded DAGs on 5 or 6 vertices, and
/// all their projections.
pub fn removability(max_n: usize, random: usize, seed: u64) -> Result<CheckReport> {
    let mut graphs = dags_up_to(max_n)?;
    for i in 0..random as u64 {
        graphs.push(gen_dag(
            5 + (i % 2) as usize,
            0.4,
            seed.wrapping_add(i),
            Preset::Plain,
        )?);
    }
    let parts: Vec<CheckReport> = graphs
        .par_iter()
        .map(removability_on)
        .collect::<Result<_>>()?;
    Ok(parts
        .into_iter()
        .fold(CheckReport::new("removability"), CheckReport::merge))
}

type MecKey = (Vec<(usize, usize)>, Vec<VStructure>);

fn mec_key(g: &MixedGraph) -> Result<MecKey> {
    Ok((g.skeleton().edges(), v_structures(g)?))
}

/// Order theory on every DAG with at most `max_n` vertices: causal orders
/// are removable orders, removable orders are shared across a Markov
/// equivalence class, and value iteration attains the minimum order cost
/// over all `n!` orders with a removable order. Every removable order also
/// attains that minimum.
pub fn order_theory(max_n: usize) -> Result<CheckReport> {
    let dags = dags_up_to(max_n)?;
    let per_dag: Vec<(MecKey, BTreeSet<Vec<usize>>, CheckReport)> = dags
        .par_iter()
        .map(|g| {
            let mut rep = CheckReport::new("order theory");
            let r: BTreeSet<Vec<usize>> = enumerate_r_orders(g)?.into_iter().collect();
            for c in enumerate_c_orders(g) {
                rep.case(r.contains(&c), || {
                    format!("{g:?}: causal order {c:?} is not removable")
                });
            }
            let t = with_cache(GraphOracle::new(g.clone())?);
            let n = g.n();
            let mut best = usize::MAX;
            let mut costs = BTreeMap::new();
            for p in (0..n).permutations(n) {
                let c: usize = learn_gpi(&t, &p)?.cost.iter().sum();
                best = best.min(c);
                costs.insert(p, c);
            }
            let vi = rol_vi(&t, &g.vertices(), DEFAULT_VI_CAP)?;
            rep.case(vi.total_cost() == best, || {
                format!(
                    "{g:?}: value iteration cost {} but minimum {best}",
                    vi.total_cost()
                )
            });
            rep.case(is_r_order(g, &vi.order)?, || {
                format!(
                    "{g:?}: value iteration order {:?} is not removable",
                    vi.order
                )
            });
            rep.case(vi.skeleton == g.skeleton(), || {
                format!("{g:?}: value iteration skeleton differs")
            });
            for p in &r {
                rep.case(costs[p] == best, || {
                    format!("{g:?}: removable order {p:?} costs {} > {best}", costs[p])
                });
            }
            Ok((mec_key(g)?, r, rep))
        })
        .collect::<Result<_>>()?;

    let mut rep = CheckReport::new("order theory");
    let mut classes: BTreeMap<(usize, MecKey), &BTreeSet<Vec<usize>>> = BTreeMap::new();
    for ((key, r, part), g) in per_dag.iter().zip(&dags) {
        rep = rep.merge(part.clone());
        match classes.get(&(g.n(), key.clone())) {
            Some(first) => rep.case(*first == r, || {
                format!("{g:?}: removable orders differ from a Markov-equivalent DAG")
            }),
            None => {
                classes.insert((g.n(), key.clone()), r);
            }
        }
    }
    Ok(rep)
}

/// MARVEL plus orientation on every DAG with at most `max_n` vertices: the
/// directed CPDAG edges are exactly those shared by the whole equivalence
/// class.
pub fn cpdag(max_n: usize) -> Result<CheckReport> {
    let dags = dags_up_to(max_n)?;
    let mut classes: BTreeMap<(usize, MecKey), Vec<&MixedGraph>> = BTreeMap::new();
    for g in &dags {
        classes.entry((g.n(), mec_key(g)?)).or_default().push(g);
    }
    let mut essential: BTreeMap<(usize, MecKey), BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (k, members) in &classes {
        let mut common: BTreeSet<(usize, usize)> =
            members[0].directed_edges().into_iter().collect();
        for m in &members[1..] {
            let e: BTreeSet<_> = m.directed_edges().into_iter().collect();
            common = common.intersection(&e).copied().collect();
        }
        essential.insert(k.clone(), common);
    }
    let parts: Vec<CheckReport> = dags
        .par_iter()
        .map(|g| {
            let mut rep = CheckReport::new("cpdag");
            let t = with_cache(GraphOracle::new(g.clone())?);
            let r = crate::marvel::learn(&t, &g.vertices(), &LearnConfig::default())?;
            let c = meek_close(&r.skeleton, &assemble_vstructures(&r)?)?;
            let got: BTreeSet<_> = c.directed_edges().into_iter().collect();
            let want = &essential[&(g.n(), mec_key(g)?)];
            rep.case(&got == want && c.skeleton() == g.skeleton(), || {
                format!("{g:?}: directed {got:?}, class-invariant {want:?}")
            });
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    Ok(parts
        .into_iter()
        .fold(CheckReport::new("cpdag"), CheckReport::merge))
}

/// Compares every recorded boundary snapshot of a run (learned with
/// `record_boundaries`) against total conditioning on the marginal over the
/// remaining vertices of `truth`. Returns the mismatches.
pub fn boundary_updates(truth: &MixedGraph, learned: &Learned) -> Result<Vec<String>> {
    let oracle = GraphOracle::new(truth.clone())?;
    let t = with_cache(oracle);
    let mut out = Vec::new();
    for step in &learned.steps {
        let Some(mb) = &step.boundaries else { continue };
        let fresh = compute_mb_tc(&t, &step.remaining)?;
        for v in step.remaining.iter() {
            let kept = mb[v].intersection(&step.remaining);
            if kept != fresh[v] {
                out.push(format!(
                    "step {} (removed {}): boundary of {v} is {kept:?}, recomputed {:?}",
                    step.iteration, step.removed, fresh[v]
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOptions {
    /// Largest exhaustively enumerated vertex count.
    pub max_n: usize,
    /// Random DAGs added to the removability suite.
    pub random: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            max_n: 4,
            random: 100,
            seed: 0,
        }
    }
}

pub fn run_all(opts: &CheckOptions) -> Result<Vec<CheckReport>> {
    Ok(vec![
        removability(opts.max_n, opts.random, opts.seed)?,
        order_theory(opts.max_n)?,
        cpdag(opts.max_n)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{learn, Algo, AlgoOptions};

    #[test]
    fn suites_pass_on_small_graphs() {
        for rep in run_all(&CheckOptions {
            max_n: 3,
            random: 5,
            seed: 1,
        })
        .unwrap()
        {
            assert!(rep.passed(), "{rep:?}");
            assert!(rep.cases > 0);
        }
    }

    #[test]
    fn boundary_snapshots_match_recomputation() {
        let g = gen_dag(9, 0.35, 6, Preset::Plain).unwrap();
        let t = with_cache(GraphOracle::new(g.clone()).unwrap());
        let opts = AlgoOptions {
            learn: LearnConfig {
                record_boundaries: true,
                ..LearnConfig::default()
            },
            ..AlgoOptions::default()
        };
        let l = learn(Algo::Marvel, &t, &g.vertices(), &opts).unwrap();
        assert_eq!(l.steps.len(), 8);
        assert!(boundary_updates(&g, &l).unwrap().is_empty());
    }

    #[test]
    fn reports_keep_a_bounded_number_of_messages() {
        let mut r = CheckReport::new("x");
        for i in 0..25 {
            r.case(false, || i.to_string());
        }
        assert_eq!((r.cases, r.failure_count, r.failures.len()), (25, 25, KEEP));
    }
}
