use super::{m_separated_unchecked, MixedGraph};
use crate::error::{Error, Result};
use crate::set::VertexSet;

/// Latent projection of an ancestral graph onto `keep`.
///
/// Two kept vertices are adjacent iff an inducing path relative to the
/// dropped vertices joins them, which holds iff they are m-connected given
/// their kept ancestors. Edges are oriented by ancestry in `g`. The result
/// lives in the same id space; dropped vertices are isolated.
pub fn latent_project(g: &MixedGraph, keep: &VertexSet) -> Result<MixedGraph> {
    if keep.iter().any(|v| v >= g.n()) {
        return Err(Error::arg("projection set contains an out-of-range vertex"));
    }
    g.require_ancestral()?;
    let anc: Vec<VertexSet> = (0..g.n()).map(|v| g.ancestors_of(v)).collect();
    let kept = keep.to_vec();
    let mut out = MixedGraph::new(g.n());
    for (i, &a) in kept.iter().enumerate() {
        for &b in &kept[i + 1..] {
            let cond = anc[a].union(&anc[b]).intersection(keep).without(&[a, b]);
            if m_separated_unchecked(g, a, b, &cond) {
                continue;
            }
            match (anc[b].contains(a), anc[a].contains(b)) {
                (true, false) => out.add_directed(a, b)?,
                (false, true) => out.add_directed(b, a)?,
                _ => out.add_bidirected(a, b)?,
            }
        }
    }
    Ok(out)
}
