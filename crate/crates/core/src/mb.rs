//! Markov boundary discovery and the incremental update applied after each
//! removal.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ci::CiTester;
use crate::error::{Error, Result};
use crate::set::VertexSet;

fn check_vars(tester: &dyn CiTester, vars: &VertexSet) -> Result<()> {
    if vars.iter().any(|v| v >= tester.num_vars()) {
        return Err(Error::arg("variable set exceeds the tester's variables"));
    }
    Ok(())
}

/// Total conditioning: `x` and `y` share a boundary iff they are dependent
/// given every other variable in `vars`. One test per pair.
///
/// The result is indexed by variable id; ids outside `vars` get empty sets.
pub fn compute_mb_tc(tester: &dyn CiTester, vars: &VertexSet) -> Result<Vec<VertexSet>> {
    check_vars(tester, vars)?;
    let mut mb = vec![VertexSet::new(); tester.num_vars()];
    let vs = vars.to_vec();
    for (i, &x) in vs.iter().enumerate() {
        for &y in &vs[i + 1..] {
            if !tester.independent(x, y, &vars.without(&[x, y]))? {
                mb[x].insert(y);
                mb[y].insert(x);
            }
        }
    }
    Ok(mb)
}

/// How grow-shrink reconciles `y ∈ Mb(x)` with `x ∈ Mb(y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetrize {
    #[default]
    Union,
    Intersection,
}

/// Grow-shrink boundary search per variable, then symmetrised.
pub fn compute_mb_gs(
    tester: &dyn CiTester,
    vars: &VertexSet,
    sym: Symmetrize,
) -> Result<Vec<VertexSet>> {
    check_vars(tester, vars)?;
    let mut raw = vec![VertexSet::new(); tester.num_vars()];
    for x in vars.iter() {
        let mut s = VertexSet::new();
        loop {
            let mut grew = false;
            for y in vars.iter() {
                if y != x && !s.contains(y) && !tester.independent(x, y, &s)? {
                    s.insert(y);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        for y in s.to_vec() {
            if tester.independent(x, y, &s.without(&[y]))? {
                s.remove(y);
            }
        }
        raw[x] = s;
    }
    let mut mb = vec![VertexSet::new(); tester.num_vars()];
    for x in vars.iter() {
        for y in vars.iter() {
            let keep = match sym {
                Symmetrize::Union => raw[x].contains(y) || raw[y].contains(x),
                Symmetrize::Intersection => raw[x].contains(y) && raw[y].contains(x),
            };
            if keep {
                mb[x].insert(y);
            }
        }
    }
    Ok(mb)
}

/// One conditional test issued by [`update_mb`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateTest {
    pub y: usize,
    pub z: usize,
    /// Whose boundary supplied the conditioning set.
    pub conditioned_on_mb_of: usize,
    pub cond_size: usize,
    pub separated: bool,
}

/// Boundaries and bookkeeping carried through the recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MbState {
    pub remaining: VertexSet,
    pub mb: Vec<VertexSet>,
    /// Set when a vertex failed a removability check; cleared when its
    /// boundary changes.
    pub skip: Vec<bool>,
    /// Separating sets for pairs found non-adjacent; the first one recorded
    /// is kept.
    pub sepsets: BTreeMap<(usize, usize), VertexSet>,
    /// Pairs disconnected by [`update_mb`]: co-parents whose common children
    /// have all been removed.
    pub coparents: BTreeSet<(usize, usize)>,
    pub update_log: Vec<UpdateTest>,
}

impl MbState {
    pub fn new(mb: Vec<VertexSet>, remaining: VertexSet) -> Result<Self> {
        for (x, s) in mb.iter().enumerate() {
            if s.contains(x) || s.iter().any(|y| y >= mb.len() || !mb[y].contains(x)) {
                return Err(Error::arg(format!("boundary of {x} is not symmetric")));
            }
        }
        Ok(Self {
            skip: vec![false; mb.len()],
            remaining,
            mb,
            sepsets: BTreeMap::new(),
            coparents: BTreeSet::new(),
            update_log: Vec::new(),
        })
    }

    pub fn record_sepset(&mut self, a: usize, b: usize, s: VertexSet) {
        self.sepsets.entry((a.min(b), a.max(b))).or_insert(s);
    }

    pub fn sepset(&self, a: usize, b: usize) -> Option<&VertexSet> {
        self.sepsets.get(&(a.min(b), a.max(b)))
    }
}

/// Removes `x` and refreshes the boundaries of the rest.
///
/// Two vertices whose collider paths all ran through `x` leave each
/// other's boundary once `x` is gone. Each such pair lies in `candidates`
/// and is tested given the smaller current boundary of the two (ties go to
/// the lower id), at most once. In a DAG the neighbours of `x` suffice as
/// candidates; in a MAG pass the whole boundary of `x`.
pub fn update_mb(
    state: &mut MbState,
    x: usize,
    candidates: &VertexSet,
    tester: &dyn CiTester,
) -> Result<()> {
    if !state.remaining.contains(x) {
        return Err(Error::arg(format!("vertex {x} was already removed")));
    }
    state.remaining.remove(x);
    for v in state.mb[x].to_vec() {
        state.mb[v].remove(x);
        state.skip[v] = false;
    }
    state.mb[x].clear();

    let ne: Vec<usize> = candidates.intersection(&state.remaining).to_vec();
    for (i, &y) in ne.iter().enumerate() {
        for &z in &ne[i + 1..] {
            if !state.mb[y].contains(z) {
                continue;
            }
            let by = if state.mb[y].len() <= state.mb[z].len() {
                y
            } else {
                z
            };
            let cond = state.mb[by].without(&[y, z]);
            let separated = tester.independent(y, z, &cond)?;
            state.update_log.push(UpdateTest {
                y,
                z,
                conditioned_on_mb_of: by,
                cond_size: cond.len(),
                separated,
            });
            if separated {
                state.mb[y].remove(z);
                state.mb[z].remove(y);
                state.skip[y] = false;
                state.skip[z] = false;
                state.coparents.insert((y, z));
                state.record_sepset(y, z, cond);
            }
        }
    }
    Ok(())
}
