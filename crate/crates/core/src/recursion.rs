//! The shared remove-and-recurse loop.
//!
//! Each learner supplies a [`Strategy`] that decides whether a vertex is
//! removable and which neighbours it has. The driver handles candidate
//! ordering, skip flags, boundary updates, the no-removable fallback and
//! bookkeeping.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ci::{CiStats, CiTester};
use crate::error::{Error, Result};
use crate::graph::{UndirectedGraph, VStructure};
use crate::mb::{compute_mb_gs, compute_mb_tc, update_mb, MbState, Symmetrize};
use crate::set::VertexSet;

/// Initial Markov boundary discovery.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MbMethod {
    #[default]
    TotalConditioning,
    GrowShrink(Symmetrize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub mb_method: MbMethod,
    /// Error out when no vertex passes the removability test instead of
    /// forcing out the vertex with the smallest boundary.
    pub strict: bool,
    /// Use the skip structures that avoid repeating removability checks.
    /// Turning this off only costs tests.
    pub skip_checks: bool,
    /// Keep a copy of every boundary after each removal.
    pub record_boundaries: bool,
    pub trace: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            mb_method: MbMethod::TotalConditioning,
            strict: false,
            skip_checks: true,
            record_boundaries: false,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: usize,
    pub removed: usize,
    pub neighbors: VertexSet,
    pub mb_size: usize,
    /// Unique tests issued so far in this run.
    pub unique_tests: u64,
    pub forced: bool,
    pub remaining: VertexSet,
    pub boundaries: Option<Vec<VertexSet>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Probe {
        iteration: usize,
        vertex: usize,
        mb: VertexSet,
        removable: bool,
    },
    Removal {
        iteration: usize,
        vertex: usize,
        mb_size: usize,
        unique_tests: u64,
        forced: bool,
    },
    /// A removability triple certified by the given condition.
    Triple {
        x: usize,
        y: usize,
        z: usize,
        condition: u8,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonResult {
    pub skeleton: UndirectedGraph,
    /// Witnessed separating sets, keyed by `(min, max)`.
    pub sepsets: BTreeMap<(usize, usize), VertexSet>,
    /// Non-adjacent pairs known to be co-parents.
    pub coparents: BTreeSet<(usize, usize)>,
    /// V-structures the learner identified directly.
    pub vstructures: BTreeSet<VStructure>,
    pub removal_order: Vec<usize>,
    pub stats: CiStats,
    pub steps: Vec<StepRecord>,
    pub trace: Vec<TraceEvent>,
    pub warnings: Vec<String>,
}

impl SkeletonResult {
    /// Trace as line-delimited JSON.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|e| serde_json::to_string(e).expect("trace events serialise") + "\n")
            .collect()
    }
}

/// State visible to strategies.
pub(crate) struct Ctx<'a> {
    pub tester: &'a dyn CiTester,
    pub state: MbState,
    pub ghat: UndirectedGraph,
    pub coparents: BTreeSet<(usize, usize)>,
    pub vstructures: BTreeSet<VStructure>,
    pub trace: Vec<TraceEvent>,
    pub warnings: Vec<String>,
    pub config: LearnConfig,
    pub iteration: usize,
}

impl Ctx<'_> {
    pub fn note_coparent(&mut self, a: usize, b: usize, sep: VertexSet) {
        self.coparents.insert((a.min(b), a.max(b)));
        self.state.record_sepset(a, b, sep);
    }

    pub fn emit(&mut self, e: TraceEvent) {
        if self.config.trace {
            self.trace.push(e);
        }
    }

    pub fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

pub(crate) trait Strategy {
    /// `Some(neighbours)` if `x` may be removed now.
    fn probe(&mut self, x: usize, ctx: &mut Ctx) -> Result<Option<VertexSet>>;

    /// Neighbours of `x` when it is removed without passing the test.
    fn forced_neighbors(&mut self, x: usize, ctx: &mut Ctx) -> Result<VertexSet>;

    /// Vertices whose mutual boundary membership may end when `x` goes.
    fn update_candidates(&self, _x: usize, neighbors: &VertexSet, _mb: &VertexSet) -> VertexSet {
        neighbors.clone()
    }
}

fn check_vars(tester: &dyn CiTester, vars: &VertexSet) -> Result<()> {
    if vars.iter().any(|v| v >= tester.num_vars()) {
        return Err(Error::arg(format!(
            "variables {vars:?} exceed the tester's {} variables",
            tester.num_vars()
        )));
    }
    Ok(())
}

pub(crate) fn initial_boundaries(
    tester: &dyn CiTester,
    vars: &VertexSet,
    method: MbMethod,
) -> Result<Vec<VertexSet>> {
    match method {
        MbMethod::TotalConditioning => compute_mb_tc(tester, vars),
        MbMethod::GrowShrink(sym) => compute_mb_gs(tester, vars, sym),
    }
}

pub(crate) fn run(
    tester: &dyn CiTester,
    vars: &VertexSet,
    config: &LearnConfig,
    strategy: &mut dyn Strategy,
) -> Result<SkeletonResult> {
    check_vars(tester, vars)?;
    let before = tester.stats();
    let mb = initial_boundaries(tester, vars, config.mb_method)?;
    let mut ctx = Ctx {
        tester,
        state: MbState::new(mb, vars.clone())?,
        ghat: UndirectedGraph::new(tester.num_vars()),
        coparents: BTreeSet::new(),
        vstructures: BTreeSet::new(),
        trace: Vec::new(),
        warnings: Vec::new(),
        config: config.clone(),
        iteration: 0,
    };
    let mut order = Vec::with_capacity(vars.len());
    let mut steps = Vec::new();

    while ctx.state.remaining.len() > 1 {
        let mut cands: Vec<usize> = ctx
            .state
            .remaining
            .iter()
            .filter(|&v| !(config.skip_checks && ctx.state.skip[v]))
            .collect();
        cands.sort_by_key(|&v| (ctx.state.mb[v].len(), v));

        let mut found = None;
        for x in cands {
            let verdict = strategy.probe(x, &mut ctx)?;
            ctx.emit(TraceEvent::Probe {
                iteration: ctx.iteration,
                vertex: x,
                mb: ctx.state.mb[x].clone(),
                removable: verdict.is_some(),
            });
            match verdict {
                Some(ne) => {
                    found = Some((x, ne));
                    break;
                }
                None => ctx.state.skip[x] = true,
            }
        }
        let (x, ne, forced) = match found {
            Some((x, ne)) => (x, ne, false),
            None => {
                if config.strict {
                    return Err(Error::NoRemovable {
                        iteration: ctx.iteration,
                        remaining: ctx.state.remaining.len(),
                    });
                }
                let x = ctx
                    .state
                    .remaining
                    .iter()
                    .min_by_key(|&v| (ctx.state.mb[v].len(), v))
                    .expect("at least two vertices remain");
                ctx.warn(format!(
                    "iteration {}: no removable vertex among {} remaining; forcing out {x}",
                    ctx.iteration,
                    ctx.state.remaining.len()
                ));
                let ne = strategy.forced_neighbors(x, &mut ctx)?;
                (x, ne, true)
            }
        };

        let ne = ne.intersection(&ctx.state.remaining);
        for y in ne.iter() {
            ctx.ghat.add_edge(x, y);
        }
        let mb_size = ctx.state.mb[x].len();
        let candidates = strategy.update_candidates(x, &ne, &ctx.state.mb[x]);
        update_mb(&mut ctx.state, x, &candidates, tester)?;
        order.push(x);
        let unique_tests = tester.stats().since(&before).unique_tests;
        ctx.emit(TraceEvent::Removal {
            iteration: ctx.iteration,
            vertex: x,
            mb_size,
            unique_tests,
            forced,
        });
        steps.push(StepRecord {
            iteration: ctx.iteration,
            removed: x,
            neighbors: ne,
            mb_size,
            unique_tests,
            forced,
            remaining: ctx.state.remaining.clone(),
            boundaries: config.record_boundaries.then(|| ctx.state.mb.clone()),
        });
        ctx.iteration += 1;
    }
    order.extend(ctx.state.remaining.iter());

    let mut sepsets = ctx.state.sepsets.clone();
    let mut coparents = ctx.coparents;
    coparents.extend(ctx.state.coparents.iter().copied());
    // Adjacent pairs can pick up a separating set only through a
    // finite-sample contradiction; keep the keys to non-adjacent pairs.
    sepsets.retain(|&(a, b), _| !ctx.ghat.adjacent(a, b));
    coparents.retain(|&(a, b)| !ctx.ghat.adjacent(a, b));

    Ok(SkeletonResult {
        skeleton: ctx.ghat.restrict(vars),
        sepsets,
        coparents,
        vstructures: ctx.vstructures,
        removal_order: order,
        stats: tester.stats().since(&before),
        steps,
        trace: ctx.trace,
        warnings: ctx.warnings,
    })
}

/// Searches subsets of `mb ∖ {y}`, smallest first, for one separating `x`
/// and `y`. Proper subsets only: the full set is the total-conditioning test
/// that put `y` in the boundary.
pub(crate) fn search_sepset(
    tester: &dyn CiTester,
    x: usize,
    y: usize,
    mb: &VertexSet,
) -> Result<Option<VertexSet>> {
    for s in mb.without(&[y]).proper_subsets() {
        if tester.independent(x, y, &s)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Neighbours of `x` within its boundary: `y` is a neighbour iff no proper
/// subset of `mb ∖ {y}` separates them. Returns the neighbours and a
/// separating set for each co-parent.
pub fn find_neighbors(
    tester: &dyn CiTester,
    x: usize,
    mb: &VertexSet,
) -> Result<(VertexSet, BTreeMap<usize, VertexSet>)> {
    let mut ne = VertexSet::new();
    let mut seps = BTreeMap::new();
    for y in mb.iter() {
        match search_sepset(tester, x, y, mb)? {
            Some(s) => {
                seps.insert(y, s);
            }
            None => {
                ne.insert(y);
            }
        }
    }
    Ok((ne, seps))
}
