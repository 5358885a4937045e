//! L-MARVEL: recursive skeleton learning for MAGs (latent variables allowed).
//!
//! `x` is removable iff for every `y` in its boundary and every neighbour
//! `z ≠ y`, either some boundary subset separates `y` and `z` (condition 1),
//! or no boundary subset plus `x` does (condition 2).

use std::collections::HashSet;

use crate::ci::CiTester;
use crate::error::Result;
use crate::recursion::{run, Ctx, LearnConfig, SkeletonResult, Strategy, TraceEvent};
use crate::set::VertexSet;

pub use crate::recursion::find_neighbors;

pub type Triple = (usize, usize, usize);

/// Which condition certified a triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certified {
    Separable,
    AlwaysDependentGivenX,
}

fn check_triple(
    tester: &dyn CiTester,
    x: usize,
    y: usize,
    z: usize,
    neighbors: &VertexSet,
    mb: &VertexSet,
) -> Result<Option<Certified>> {
    let rest = mb.without(&[y, z]);
    // Condition 1 can only help when y is not itself a neighbour.
    if !neighbors.contains(y) {
        for w in rest.subsets() {
            if tester.independent(y, z, &w)? {
                return Ok(Some(Certified::Separable));
            }
        }
    }
    for w in rest.subsets() {
        if tester.independent(y, z, &w.with(&[x]))? {
            return Ok(None);
        }
    }
    Ok(Some(Certified::AlwaysDependentGivenX))
}

/// Removability of `x` from tests within `Mb(x) ∪ {x}`. Triples in `skip`
/// are taken as already certified; newly certified ones are added.
pub fn is_removable(
    tester: &dyn CiTester,
    x: usize,
    neighbors: &VertexSet,
    mb: &VertexSet,
    skip: Option<&mut HashSet<Triple>>,
) -> Result<bool> {
    is_removable_traced(tester, x, neighbors, mb, skip, &mut |_, _, _| {})
}

fn is_removable_traced(
    tester: &dyn CiTester,
    x: usize,
    neighbors: &VertexSet,
    mb: &VertexSet,
    mut skip: Option<&mut HashSet<Triple>>,
    on_certified: &mut dyn FnMut(usize, usize, Certified),
) -> Result<bool> {
    for y in mb.iter() {
        for z in neighbors.iter() {
            if z == y || skip.as_deref().is_some_and(|s| s.contains(&(x, y, z))) {
                continue;
            }
            match check_triple(tester, x, y, z, neighbors, mb)? {
                None => return Ok(false),
                Some(c) => {
                    on_certified(y, z, c);
                    if let Some(s) = skip.as_deref_mut() {
                        s.insert((x, y, z));
                    }
                }
            }
        }
    }
    Ok(true)
}

#[derive(Default)]
struct LMarvel {
    learned: HashSet<usize>,
    skip: HashSet<Triple>,
}

impl LMarvel {
    fn neighbors(&mut self, x: usize, ctx: &mut Ctx) -> Result<VertexSet> {
        if self.learned.insert(x) {
            let mb = ctx.state.mb[x].clone();
            let (ne, seps) = find_neighbors(ctx.tester, x, &mb)?;
            for y in ne.iter() {
                ctx.ghat.add_edge(x, y);
            }
            for (y, s) in seps {
                ctx.note_coparent(x, y, s);
            }
            Ok(ne)
        } else {
            Ok(ctx.ghat.neighbors(x).intersection(&ctx.state.remaining))
        }
    }
}

impl Strategy for LMarvel {
    fn probe(&mut self, x: usize, ctx: &mut Ctx) -> Result<Option<VertexSet>> {
        let ne = self.neighbors(x, ctx)?;
        let mb = ctx.state.mb[x].clone();
        let skip = ctx.config.skip_checks.then_some(&mut self.skip);
        let mut certified = Vec::new();
        let ok = is_removable_traced(ctx.tester, x, &ne, &mb, skip, &mut |y, z, c| {
            certified.push((y, z, c))
        })?;
        for (y, z, c) in certified {
            ctx.emit(TraceEvent::Triple {
                x,
                y,
                z,
                condition: match c {
                    Certified::Separable => 1,
                    Certified::AlwaysDependentGivenX => 2,
                },
            });
        }
        Ok(ok.then_some(ne))
    }

    fn forced_neighbors(&mut self, x: usize, ctx: &mut Ctx) -> Result<VertexSet> {
        self.neighbors(x, ctx)
    }

    // Collider paths through `x` may join boundary members that are not
    // neighbours of `x`.
    fn update_candidates(&self, _x: usize, _neighbors: &VertexSet, mb: &VertexSet) -> VertexSet {
        mb.clone()
    }
}

/// Learns the skeleton of the MAG over `vars`.
pub fn learn(
    tester: &dyn CiTester,
    vars: &VertexSet,
    config: &LearnConfig,
) -> Result<SkeletonResult> {
    run(tester, vars, config, &mut LMarvel::default())
}
