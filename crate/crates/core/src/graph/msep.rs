use super::MixedGraph;
use crate::error::{Error, Result};
use crate::set::VertexSet;

/// Whether `x` and `y` are m-separated by `z` in an ancestral graph.
pub fn m_separated(g: &MixedGraph, x: usize, y: usize, z: &VertexSet) -> Result<bool> {
    let n = g.n();
    if x >= n || y >= n || z.iter().any(|v| v >= n) {
        return Err(Error::arg("vertex out of range in m-separation query"));
    }
    if x == y || z.contains(x) || z.contains(y) {
        return Err(Error::arg(format!(
            "m-separation query ({x}, {y} | {z:?}) is not well formed"
        )));
    }
    g.require_ancestral()?;
    Ok(m_separated_unchecked(g, x, y, z))
}

/// Reachability over (vertex, arrived-with-arrowhead) states: a walk may pass
/// a collider only if it is an ancestor of `z ∪ {x, y}`, and a non-collider
/// only if it is outside `z`.
pub(crate) fn m_separated_unchecked(g: &MixedGraph, x: usize, y: usize, z: &VertexSet) -> bool {
    let anc = g.ancestors(&z.with(&[x, y]));
    let n = g.n();
    let mut seen = vec![[false; 2]; n];
    let mut stack: Vec<(usize, bool)> = Vec::new();
    let push_from = |v: usize, stack: &mut Vec<(usize, bool)>| {
        for u in g.children(v).iter() {
            stack.push((u, true));
        }
        for u in g.spouses(v).iter() {
            stack.push((u, true));
        }
        for u in g.parents(v).iter() {
            stack.push((u, false));
        }
    };
    push_from(x, &mut stack);
    while let Some((v, head)) = stack.pop() {
        if v == y {
            return false;
        }
        if std::mem::replace(&mut seen[v][head as usize], true) {
            continue;
        }
        // Leaving via an edge with an arrowhead at v (parent or spouse edge)
        // makes v a collider when we also arrived with an arrowhead.
        let collider_ok = anc.contains(v);
        let noncollider_ok = !z.contains(v);
        for u in g.children(v).iter() {
            if noncollider_ok {
                stack.push((u, true));
            }
        }
        for u in g.parents(v).iter() {
            if (head && collider_ok) || (!head && noncollider_ok) {
                stack.push((u, false));
            }
        }
        for u in g.spouses(v).iter() {
            if (head && collider_ok) || (!head && noncollider_ok) {
                stack.push((u, true));
            }
        }
    }
    true
}
