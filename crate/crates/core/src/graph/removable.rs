use super::{m_separated_unchecked, MixedGraph};
use crate::error::{Error, Result};
use crate::set::VertexSet;

fn check_vertex(g: &MixedGraph, x: usize) -> Result<()> {
    if x >= g.n() {
        return Err(Error::arg(format!("vertex {x} out of range")));
    }
    Ok(())
}

/// Removability by definition: every m-separation statement among the other
/// vertices is the same in `g` and in `g` with `x` deleted. Exponential.
///
/// Isolated vertices cannot change any statement, so they are left out of the
/// quantification.
pub fn removable_bruteforce(g: &MixedGraph, x: usize) -> Result<bool> {
    check_vertex(g, x)?;
    g.require_ancestral()?;
    Ok(removable_bruteforce_unchecked(g, x))
}

pub(crate) fn removable_bruteforce_unchecked(g: &MixedGraph, x: usize) -> bool {
    let mut h = g.clone();
    h.isolate(x);
    let others: Vec<usize> = (0..g.n())
        .filter(|&v| v != x && !g.is_isolated(v))
        .collect();
    let others_set: VertexSet = others.iter().collect();
    for (i, &a) in others.iter().enumerate() {
        for &b in &others[i + 1..] {
            for z in others_set.without(&[a, b]).subsets() {
                if m_separated_unchecked(g, a, b, &z) != m_separated_unchecked(&h, a, b, &z) {
                    return false;
                }
            }
        }
    }
    true
}

/// Graphical removability test for DAGs: for every child `c` of `x`,
/// `Ne(x) ⊆ Ne(c) ∪ {c}`, and every child of `x` that is a parent of `c` has
/// all of its parents among the parents of `c`.
pub fn removable_dag(g: &MixedGraph, x: usize) -> Result<bool> {
    check_vertex(g, x)?;
    g.require_dag()?;
    Ok(removable_dag_unchecked(g, x))
}

pub(crate) fn removable_dag_unchecked(g: &MixedGraph, x: usize) -> bool {
    let ne_x = g.neighbors(x);
    g.children(x).iter().all(|c| {
        let ne_c = g.neighbors(c).with(&[c]);
        ne_x.is_subset(&ne_c)
            && g.children(x)
                .intersection(g.parents(c))
                .iter()
                .all(|v| g.parents(v).is_subset(g.parents(c)))
    })
}

/// Graphical removability test for MAGs: for every child `c` of `x` and every
/// collider path from `x` to some `y` whose interior lies in `Pa(c)`, `y` is
/// adjacent to `c` (or is `c`).
pub fn removable_mag(g: &MixedGraph, x: usize) -> Result<bool> {
    check_vertex(g, x)?;
    g.require_mag()?;
    Ok(removable_mag_unchecked(g, x))
}

pub(crate) fn removable_mag_unchecked(g: &MixedGraph, x: usize) -> bool {
    g.children(x)
        .iter()
        .all(|c| !collider_path_violation(g, x, c))
}

fn collider_path_violation(g: &MixedGraph, x: usize, c: usize) -> bool {
    // Depth-first over collider paths starting at x. `head` records whether
    // the edge into `last` has an arrowhead at `last`.
    fn go(g: &MixedGraph, c: usize, path: &mut Vec<usize>, head: bool) -> bool {
        let last = *path.last().unwrap();
        if path.len() > 1 {
            if last == c {
                return false;
            }
            if !g.adjacent(last, c) {
                return true;
            }
            // To extend, `last` becomes interior: it must be a collider and a
            // parent of c.
            if !head || !g.parents(c).contains(last) {
                return false;
            }
        }
        for u in g.neighbors(last).iter() {
            if path.contains(&u) {
                continue;
            }
            if path.len() > 1 && !g.arrowhead_at(u, last) {
                continue;
            }
            path.push(u);
            let bad = go(g, c, path, g.arrowhead_at(last, u));
            path.pop();
            if bad {
                return true;
            }
        }
        false
    }
    go(g, c, &mut vec![x], false)
}

/// Removability via the graphical criterion matching the graph class.
pub fn removable(g: &MixedGraph, x: usize) -> Result<bool> {
    check_vertex(g, x)?;
    if g.is_dag() {
        Ok(removable_dag_unchecked(g, x))
    } else {
        g.require_mag()?;
        Ok(removable_mag_unchecked(g, x))
    }
}
