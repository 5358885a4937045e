//! Random DAGs, linear-Gaussian SEMs and exhaustive small-graph enumeration.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{clique_number, is_diamond_free, MixedGraph};
use crate::set::VertexSet;

/// Structural constraint applied by rejection sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Plain,
    DiamondFree,
    /// Skeleton clique number at most the given bound.
    CliqueBounded(usize),
}

impl Preset {
    pub fn accepts(&self, g: &MixedGraph) -> bool {
        match *self {
            Preset::Plain => true,
            Preset::DiamondFree => is_diamond_free(g).unwrap_or(false),
            Preset::CliqueBounded(m) => clique_number(&g.skeleton()) <= m,
        }
    }
}

const MAX_ATTEMPTS: usize = 1000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi DAG: each pair of a random vertex order gets an edge with
/// probability `p`, pointing forward in that order.
pub fn gen_dag(n: usize, p: f64, seed: u64, preset: Preset) -> Result<MixedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("edge probability {p} outside [0, 1]")));
    }
    if let Preset::CliqueBounded(0) = preset {
        if n > 0 {
            return Err(Error::arg("clique bound must be at least 1"));
        }
    }
    let mut rng = rng(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut g = MixedGraph::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    g.add_directed(perm[i], perm[j])?;
                }
            }
        }
        if preset.accepts(&g) {
            return Ok(g);
        }
    }
    Err(Error::Generation(format!(
        "no {preset:?} DAG with n={n}, p={p} after {MAX_ATTEMPTS} attempts"
    )))
}

/// `k` distinct vertices of `0..n`, chosen uniformly.
pub fn choose_hidden(n: usize, k: usize, seed: u64) -> Result<VertexSet> {
    if k > n {
        return Err(Error::arg(format!("cannot hide {k} of {n} vertices")));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng(seed));
    Ok(ids[..k].iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemConfig {
    /// Edge weights are drawn from `±[weight_low, weight_high]`.
    pub weight_low: f64,
    pub weight_high: f64,
    pub noise_low: f64,
    pub noise_high: f64,
}

impl Default for SemConfig {
    fn default() -> Self {
        Self {
            weight_low: 0.5,
            weight_high: 2.0,
            noise_low: 0.7,
            noise_high: 1.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// A linear-Gaussian structural equation model over a DAG.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemSpec {
    pub names: Vec<String>,
    pub edges: Vec<WeightedEdge>,
    pub noise_std: Vec<f64>,
    /// Vertices whose columns are dropped when sampling.
    pub hidden: Vec<usize>,
}

impl SemSpec {
    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn graph(&self) -> Result<MixedGraph> {
        let mut g = MixedGraph::new(self.n());
        for e in &self.edges {
            g.add_directed(e.from, e.to)?;
        }
        g.require_dag()?;
        Ok(g)
    }

    pub fn observed(&self) -> VertexSet {
        VertexSet::full(self.n()).without(&self.hidden)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: SemSpec = serde_json::from_str(s)?;
        if spec.noise_std.len() != spec.n() || spec.hidden.iter().any(|&h| h >= spec.n()) {
            return Err(Error::arg("SEM spec has inconsistent sizes"));
        }
        spec.graph()?;
        Ok(spec)
    }
}

pub fn gen_sem(g: &MixedGraph, hidden: &VertexSet, seed: u64, cfg: &SemConfig) -> Result<SemSpec> {
    g.require_dag()?;
    if !(0.0 < cfg.weight_low
        && cfg.weight_low <= cfg.weight_high
        && 0.0 < cfg.noise_low
        && cfg.noise_low <= cfg.noise_high)
    {
        return Err(Error::arg(
            "SEM parameter ranges must be positive and ordered",
        ));
    }
    let mut rng = rng(seed);
    let edges = g
        .directed_edges()
        .into_iter()
        .map(|(from, to)| {
            let mag = rng.gen_range(cfg.weight_low..=cfg.weight_high);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            WeightedEdge {
                from,
                to,
                weight: sign * mag,
            }
        })
        .collect();
    let noise_std = (0..g.n())
        .map(|_| rng.gen_range(cfg.noise_low..=cfg.noise_high))
        .collect();
    Ok(SemSpec {
        names: crate::graph::edgelist::default_names(g.n()),
        edges,
        noise_std,
        hidden: hidden.to_vec(),
    })
}

/// Draws `rows` samples; hidden columns are dropped.
pub fn sample_sem(spec: &SemSpec, rows: usize, seed: u64) -> Result<Dataset> {
    let g = spec.graph()?;
    let order = g.topological_order().expect("checked acyclic");
    let n = spec.n();
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in &spec.edges {
        incoming[e.to].push((e.from, e.weight));
    }
    let observed = spec.observed().to_vec();
    let mut rng = rng(seed);
    let mut values = Vec::with_capacity(rows * observed.len());
    let mut x = vec![0.0; n];
    for _ in 0..rows {
        for &v in &order {
            let eps: f64 = rng.sample(StandardNormal);
            x[v] =
                incoming[v].iter().map(|&(p, w)| w * x[p]).sum::<f64>() + spec.noise_std[v] * eps;
        }
        values.extend(observed.iter().map(|&v| x[v]));
    }
    let names = observed.iter().map(|&v| spec.names[v].clone()).collect();
    Dataset::new(names, rows, values)
}

/// Every labelled DAG on `n` vertices (n <= 6).
pub fn enumerate_dags(n: usize) -> Result<Vec<MixedGraph>> {
    if n > 6 {
        return Err(Error::arg("DAG enumeration is limited to n <= 6"));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut g = MixedGraph::new(n);
        for &(a, b) in &pairs {
            match c % 3 {
                1 => g.add_directed(a, b)?,
                2 => g.add_directed(b, a)?,
                _ => {}
            }
            c /= 3;
        }
        if g.is_acyclic() {
            out.push(g);
        }
    }
    Ok(out)
}
