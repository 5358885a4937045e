//! Graph corpora shared by unit tests.

use crate::graph::{latent_project, MixedGraph};
use crate::set::VertexSet;
use crate::sim::{choose_hidden, enumerate_dags, gen_dag, Preset};

pub fn all_dags(n: usize) -> Vec<MixedGraph> {
    enumerate_dags(n).unwrap()
}

pub fn random_dags(n: usize, p: f64, count: usize, seed: u64) -> Vec<MixedGraph> {
    (0..count as u64)
        .map(|i| gen_dag(n, p, seed * 10_000 + i, Preset::Plain).unwrap())
        .collect()
}

/// MAGs over `n` vertices obtained by projecting out 3 of `n + 3`.
pub fn random_mags(n: usize, count: usize, seed: u64) -> Vec<MixedGraph> {
    (0..count as u64)
        .map(|i| {
            let s = seed * 10_000 + i;
            let g = gen_dag(n + 3, 0.45, s, Preset::Plain).unwrap();
            let hidden = choose_hidden(n + 3, 3, s).unwrap();
            let keep = VertexSet::full(n + 3).difference(&hidden);
            latent_project(&g, &keep).unwrap().compact(&keep).0
        })
        .collect()
}
