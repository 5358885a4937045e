//! RSL: recursive learning with structural side information.
//!
//! Two variants: a known upper bound `m` on the clique number of the
//! skeleton, and diamond-free DAGs. Both test removability before learning
//! neighbours, and learn each co-parent's common children along the way.

use crate::ci::CiTester;
use crate::error::{Error, Result};
use crate::graph::{clique_number, VStructure};
use crate::recursion::{run, Ctx, LearnConfig, SkeletonResult, Strategy};
use crate::set::VertexSet;

/// Removability under a clique bound `m`: fails if, after dropping some
/// `S ⊆ Mb(x)` with `|S| ≤ m - 2`, two boundary members or `x` and a
/// boundary member become separable by the rest of `Mb(x) ∪ {x}`.
pub fn is_removable_clique(
    tester: &dyn CiTester,
    x: usize,
    mb: &VertexSet,
    m: usize,
) -> Result<bool> {
    if m < 2 {
        return Ok(true);
    }
    let with_x = mb.with(&[x]);
    for s in mb.subsets_up_to(m - 2) {
        let rest = mb.difference(&s).to_vec();
        for (i, &y) in rest.iter().enumerate() {
            for &z in &rest[i + 1..] {
                if tester.independent(y, z, &with_x.difference(&s).without(&[y, z]))? {
                    return Ok(false);
                }
            }
        }
        for &y in &rest {
            if tester.independent(x, y, &mb.difference(&s).without(&[y]))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A co-parent with its common children and the set that separated it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coparent {
    pub vertex: usize,
    pub common_children: VertexSet,
    pub sepset: VertexSet,
}

/// Neighbours under a clique bound `m`: `y` is a co-parent iff dropping some
/// `m - 1` other boundary members separates it from `x`; those members are
/// the common children.
pub fn find_neighbors_clique(
    tester: &dyn CiTester,
    x: usize,
    mb: &VertexSet,
    m: usize,
) -> Result<(VertexSet, Vec<Coparent>)> {
    let mut ne = mb.clone();
    let mut cps = Vec::new();
    if m == 0 {
        return Ok((ne, cps));
    }
    for y in mb.iter() {
        for s in mb.without(&[y]).subsets_of_size(m - 1) {
            let cond = mb.difference(&s).without(&[y]);
            if tester.independent(x, y, &cond)? {
                ne.remove(y);
                cps.push(Coparent {
                    vertex: y,
                    common_children: s,
                    sepset: cond,
                });
                break;
            }
        }
    }
    Ok((ne, cps))
}

/// Removability for diamond-free DAGs: no two boundary members are separated
/// by the rest of `Mb(x) ∪ {x}`.
pub fn is_removable_diamond_free(tester: &dyn CiTester, x: usize, mb: &VertexSet) -> Result<bool> {
    let with_x = mb.with(&[x]);
    let v = mb.to_vec();
    for (i, &y) in v.iter().enumerate() {
        for &z in &v[i + 1..] {
            if tester.independent(y, z, &with_x.without(&[y, z]))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Neighbours for diamond-free DAGs: `y` is a co-parent iff dropping a
/// single other member `z` separates it from `x`; `z` is then the unique
/// common child. Returns the neighbours, the co-parents, and how many
/// co-parents had more than one candidate child.
pub fn find_neighbors_diamond_free(
    tester: &dyn CiTester,
    x: usize,
    mb: &VertexSet,
) -> Result<(VertexSet, Vec<Coparent>, usize)> {
    let mut ne = mb.clone();
    let mut cps = Vec::new();
    let mut ambiguous = 0;
    for y in mb.iter() {
        let mut witnesses = Vec::new();
        for z in mb.without(&[y]).iter() {
            let cond = mb.without(&[y, z]);
            if tester.independent(x, y, &cond)? {
                witnesses.push((z, cond));
            }
        }
        if let Some((z, cond)) = witnesses.first().cloned() {
            ambiguous += (witnesses.len() > 1) as usize;
            ne.remove(y);
            cps.push(Coparent {
                vertex: y,
                common_children: VertexSet::singleton(z),
                sepset: cond,
            });
        }
    }
    Ok((ne, cps, ambiguous))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Variant {
    Clique(usize),
    DiamondFree,
}

struct Rsl {
    variant: Variant,
}

impl Rsl {
    fn neighbors(&self, x: usize, ctx: &mut Ctx) -> Result<VertexSet> {
        let mb = ctx.state.mb[x].clone();
        let (ne, cps) = match self.variant {
            Variant::Clique(m) => find_neighbors_clique(ctx.tester, x, &mb, m)?,
            Variant::DiamondFree => {
                let (ne, cps, ambiguous) = find_neighbors_diamond_free(ctx.tester, x, &mb)?;
                if ambiguous > 0 {
                    ctx.warn(format!(
                        "vertex {x}: {ambiguous} co-parent(s) with several candidate common children; kept the first"
                    ));
                }
                (ne, cps)
            }
        };
        for cp in cps {
            for c in cp.common_children.iter() {
                if ne.contains(c) {
                    ctx.vstructures.insert(VStructure::new(x, c, cp.vertex));
                }
            }
            ctx.note_coparent(x, cp.vertex, cp.sepset);
        }
        Ok(ne)
    }
}

impl Strategy for Rsl {
    fn probe(&mut self, x: usize, ctx: &mut Ctx) -> Result<Option<VertexSet>> {
        let mb = ctx.state.mb[x].clone();
        let removable = match self.variant {
            Variant::Clique(m) => is_removable_clique(ctx.tester, x, &mb, m)?,
            Variant::DiamondFree => is_removable_diamond_free(ctx.tester, x, &mb)?,
        };
        if !removable {
            return Ok(None);
        }
        Ok(Some(self.neighbors(x, ctx)?))
    }

    fn forced_neighbors(&mut self, x: usize, ctx: &mut Ctx) -> Result<VertexSet> {
        self.neighbors(x, ctx)
    }
}

/// Skeleton of a DAG whose skeleton has clique number at most `m`.
///
/// Always strict: a sweep without a removable vertex means the bound is
/// wrong (or a test erred), and is reported as [`Error::NoRemovable`].
pub fn learn_clique_bounded(
    tester: &dyn CiTester,
    vars: &VertexSet,
    m: usize,
    config: &LearnConfig,
) -> Result<SkeletonResult> {
    if m == 0 && !vars.is_empty() {
        return Err(Error::arg("clique bound must be at least 1"));
    }
    let cfg = LearnConfig {
        strict: true,
        ..config.clone()
    };
    run(
        tester,
        vars,
        &cfg,
        &mut Rsl {
            variant: Variant::Clique(m),
        },
    )
}

/// Tries `m = 1, 2, ..` and returns the first run that terminates with a
/// skeleton whose clique number is at most `m`, together with that `m`.
/// Statistics cover all attempts.
pub fn learn_clique_auto(
    tester: &dyn CiTester,
    vars: &VertexSet,
    config: &LearnConfig,
) -> Result<(SkeletonResult, usize)> {
    let before = tester.stats();
    let top = vars.len().max(1);
    let mut last_err = None;
    for m in 1..=top {
        match learn_clique_bounded(tester, vars, m, config) {
            Ok(mut r) if clique_number(&r.skeleton) <= m => {
                r.stats = tester.stats().since(&before);
                return Ok((r, m));
            }
            Ok(_) => {}
            Err(e @ Error::NoRemovable { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err
        .unwrap_or_else(|| Error::consistency("no clique bound gave a consistent skeleton")))
}

/// Skeleton of a diamond-free DAG.
pub fn learn_diamond_free(
    tester: &dyn CiTester,
    vars: &VertexSet,
    config: &LearnConfig,
) -> Result<SkeletonResult> {
    run(
        tester,
        vars,
        config,
        &mut Rsl {
            variant: Variant::DiamondFree,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::{with_cache, GraphOracle};
    use crate::graph::{
        is_diamond_free, is_r_order, removable_bruteforce, v_structures, MixedGraph,
    };
    use crate::mb::compute_mb_tc;
    use crate::sim::{gen_dag, Preset};
    use crate::testutil::all_dags;

    fn oracle(g: &MixedGraph) -> impl CiTester {
        with_cache(GraphOracle::new(g.clone()).unwrap())
    }

    #[test]
    fn collider_with_bound_two() {
        let g = MixedGraph::from_directed(3, &[(0, 2), (1, 2)]).unwrap();
        let t = oracle(&g);
        let mb = compute_mb_tc(&t, &g.vertices()).unwrap();
        let (ne, cps) = find_neighbors_clique(&t, 0, &mb[0], 2).unwrap();
        assert_eq!(ne, VertexSet::singleton(2));
        assert_eq!(cps[0].vertex, 1);
        assert_eq!(cps[0].common_children, VertexSet::singleton(2));
        let r = learn_clique_bounded(&t, &g.vertices(), 2, &LearnConfig::default()).unwrap();
        assert_eq!(r.skeleton, g.skeleton());
    }

    /// With the true clique number, passing the test implies removability on
    /// every small DAG.
    #[test]
    fn clique_test_is_sound_on_small_dags() {
        for n in 2..=4 {
            for g in all_dags(n) {
                let m = clique_number(&g.skeleton());
                let t = oracle(&g);
                let mb = compute_mb_tc(&t, &g.vertices()).unwrap();
                for (x, mbx) in mb.iter().enumerate() {
                    if is_removable_clique(&t, x, mbx, m).unwrap() {
                        assert!(removable_bruteforce(&g, x).unwrap(), "{g:?} x={x}");
                        let (ne, _) = find_neighbors_clique(&t, x, mbx, m).unwrap();
                        assert_eq!(ne, g.neighbors(x));
                    }
                }
            }
        }
    }

    #[test]
    fn diamond_test_is_exact_on_small_diamond_free_dags() {
        for n in 2..=4 {
            for g in all_dags(n)
                .into_iter()
                .filter(|g| is_diamond_free(g).unwrap())
            {
                let t = oracle(&g);
                let mb = compute_mb_tc(&t, &g.vertices()).unwrap();
                for (x, mbx) in mb.iter().enumerate() {
                    assert_eq!(
                        is_removable_diamond_free(&t, x, mbx).unwrap(),
                        removable_bruteforce(&g, x).unwrap(),
                        "{g:?} x={x}"
                    );
                }
            }
        }
    }

    #[test]
    fn clique_bounded_recovery() {
        for seed in 0..40 {
            let g = gen_dag(9, 0.35, seed, Preset::Plain).unwrap();
            let m = clique_number(&g.skeleton());
            let t = oracle(&g);
            let r = learn_clique_bounded(&t, &g.vertices(), m, &LearnConfig::default()).unwrap();
            assert_eq!(r.skeleton, g.skeleton());
            assert!(is_r_order(&g, &r.removal_order).unwrap());
            let truth = v_structures(&g).unwrap();
            for v in &r.vstructures {
                assert!(truth.contains(v));
            }
            let (auto, m_auto) =
                learn_clique_auto(&oracle(&g), &g.vertices(), &LearnConfig::default()).unwrap();
            assert_eq!(auto.skeleton, g.skeleton());
            assert!(m_auto <= m);
        }
    }

    #[test]
    fn diamond_free_recovery() {
        for seed in 0..40 {
            let g = gen_dag(10, 0.3, seed, Preset::DiamondFree).unwrap();
            let r =
                learn_diamond_free(&oracle(&g), &g.vertices(), &LearnConfig::default()).unwrap();
            assert_eq!(r.skeleton, g.skeleton());
            assert!(r.warnings.is_empty());
            let truth = v_structures(&g).unwrap();
            for v in &r.vstructures {
                assert!(truth.contains(v));
            }
        }
    }

    #[test]
    fn diamond_free_learner_keeps_true_edges_on_general_dags() {
        for seed in 0..30 {
            let g = gen_dag(9, 0.45, seed, Preset::Plain).unwrap();
            let r =
                learn_diamond_free(&oracle(&g), &g.vertices(), &LearnConfig::default()).unwrap();
            for (a, b) in g.skeleton().edges() {
                assert!(r.skeleton.adjacent(a, b));
            }
        }
    }

    #[test]
    fn wrong_bound_halts() {
        // a triangle needs m >= 3
        let g = MixedGraph::from_directed(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let r = learn_clique_bounded(&oracle(&g), &g.vertices(), 1, &LearnConfig::default());
        match r {
            Err(Error::NoRemovable { .. }) => {}
            Ok(r) => assert!(clique_number(&r.skeleton) > 1),
            Err(e) => panic!("{e}"),
        }
        assert!(
            learn_clique_bounded(&oracle(&g), &g.vertices(), 0, &LearnConfig::default()).is_err()
        );
    }
}
