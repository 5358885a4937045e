//! Benchmark harness: one entry point per learner, reference bound formulas
//! and a config-driven sweep that produces CSV reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ci::{with_cache, CiStats, CiTester, FisherZ, GraphOracle};
use crate::error::{Error, Result};
use crate::graph::{
    clique_number, latent_project, max_in_degree, max_pap_size, MixedGraph, UndirectedGraph,
    VStructure,
};
use crate::recursion::{LearnConfig, StepRecord};
use crate::rol::{HcConfig, DEFAULT_VI_CAP};
use crate::set::VertexSet;
use crate::sim::{choose_hidden, gen_dag, gen_sem, sample_sem, Preset, SemConfig};
use crate::{lmarvel, marvel, rol, rsl};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "marvel")]
    Marvel,
    #[serde(rename = "lmarvel")]
    LMarvel,
    #[serde(rename = "rsl-w")]
    RslW,
    #[serde(rename = "rsl-w-auto")]
    RslWAuto,
    #[serde(rename = "rsl-d")]
    RslD,
    #[serde(rename = "rol-hc")]
    RolHc,
    #[serde(rename = "rol-vi")]
    RolVi,
}

impl Algo {
    pub const ALL: [Algo; 7] = [
        Algo::Marvel,
        Algo::LMarvel,
        Algo::RslW,
        Algo::RslWAuto,
        Algo::RslD,
        Algo::RolHc,
        Algo::RolVi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Marvel => "marvel",
            Algo::LMarvel => "lmarvel",
            Algo::RslW => "rsl-w",
            Algo::RslWAuto => "rsl-w-auto",
            Algo::RslD => "rsl-d",
            Algo::RolHc => "rol-hc",
            Algo::RolVi => "rol-vi",
        }
    }

    /// Whether the learner assumes no latent variables.
    pub fn assumes_dag(self) -> bool {
        !matches!(self, Algo::LMarvel | Algo::RolHc | Algo::RolVi)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlgoOptions {
    pub learn: LearnConfig,
    /// Required by `rsl-w`.
    pub clique_bound: Option<usize>,
    pub hc: HcConfig,
    pub vi_cap: usize,
}

impl Default for AlgoOptions {
    fn default() -> Self {
        Self {
            learn: LearnConfig::default(),
            clique_bound: None,
            hc: HcConfig::default(),
            vi_cap: DEFAULT_VI_CAP,
        }
    }
}

/// What every learner reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Learned {
    pub algorithm: Algo,
    pub skeleton: UndirectedGraph,
    pub sepsets: BTreeMap<(usize, usize), VertexSet>,
    pub coparents: BTreeSet<(usize, usize)>,
    pub vstructures: BTreeSet<VStructure>,
    pub order: Vec<usize>,
    pub stats: CiStats,
    pub warnings: Vec<String>,
    pub forced_removals: usize,
    /// The bound `rsl-w-auto` settled on, or the one `rsl-w` was given.
    pub clique_bound: Option<usize>,
    /// Total cost of the order, for the order-based learners.
    pub order_cost: Option<usize>,
    pub steps: Vec<StepRecord>,
    /// Line-delimited JSON trace, if requested.
    pub trace: String,
}

impl Learned {
    fn from_skeleton(
        algorithm: Algo,
        r: crate::SkeletonResult,
        clique_bound: Option<usize>,
    ) -> Self {
        let trace = r.trace_jsonl();
        Self {
            algorithm,
            forced_removals: r.steps.iter().filter(|s| s.forced).count(),
            skeleton: r.skeleton,
            sepsets: r.sepsets,
            coparents: r.coparents,
            vstructures: r.vstructures,
            order: r.removal_order,
            stats: r.stats,
            warnings: r.warnings,
            clique_bound,
            order_cost: None,
            steps: r.steps,
            trace,
        }
    }

    fn from_order(algorithm: Algo, r: rol::RolResult) -> Self {
        Self {
            algorithm,
            trace: r.trace_jsonl(),
            order_cost: Some(r.total_cost()),
            skeleton: r.skeleton,
            sepsets: r.sepsets,
            coparents: BTreeSet::new(),
            vstructures: BTreeSet::new(),
            order: r.order,
            stats: r.stats,
            warnings: Vec::new(),
            forced_removals: 0,
            clique_bound: None,
            steps: Vec::new(),
        }
    }

    /// The learner's result as the structure [`crate::orient`] consumes.
    pub fn to_skeleton_result(&self) -> crate::SkeletonResult {
        crate::SkeletonResult {
            skeleton: self.skeleton.clone(),
            sepsets: self.sepsets.clone(),
            coparents: self.coparents.clone(),
            vstructures: self.vstructures.clone(),
            removal_order: self.order.clone(),
            stats: self.stats.clone(),
            steps: Vec::new(),
            trace: Vec::new(),
            warnings: self.warnings.clone(),
        }
    }
}

/// Runs one learner over `vars`.
pub fn learn(
    algo: Algo,
    tester: &dyn CiTester,
    vars: &VertexSet,
    opts: &AlgoOptions,
) -> Result<Learned> {
    Ok(match algo {
        Algo::Marvel => {
            Learned::from_skeleton(algo, marvel::learn(tester, vars, &opts.learn)?, None)
        }
        Algo::LMarvel => {
            Learned::from_skeleton(algo, lmarvel::learn(tester, vars, &opts.learn)?, None)
        }
        Algo::RslW => {
            let m = opts
                .clique_bound
                .ok_or_else(|| Error::arg("rsl-w needs a clique bound"))?;
            Learned::from_skeleton(
                algo,
                rsl::learn_clique_bounded(tester, vars, m, &opts.learn)?,
                Some(m),
            )
        }
        Algo::RslWAuto => {
            let (r, m) = rsl::learn_clique_auto(tester, vars, &opts.learn)?;
            Learned::from_skeleton(algo, r, Some(m))
        }
        Algo::RslD => Learned::from_skeleton(
            algo,
            rsl::learn_diamond_free(tester, vars, &opts.learn)?,
            None,
        ),
        Algo::RolHc => Learned::from_order(algo, rol::rol_hc(tester, vars, &opts.hc)?),
        Algo::RolVi => Learned::from_order(algo, rol::rol_vi(tester, vars, opts.vi_cap)?),
    })
}

fn pairs(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// The exact worst-case count of unique tests for MARVEL on a DAG with `n`
/// vertices and maximum in-degree `d`.
pub fn marvel_upper_bound(n: usize, d: usize) -> f64 {
    let (n, d) = (n as f64, d as f64);
    pairs(n) + n * pairs(d) + n / 2.0 * d * (1.0 + 0.45 * d) * 2f64.powf(d)
}

/// Reference formulas for a true graph. Everything except `marvel_upper`
/// is an asymptotic form evaluated with unit constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub n: usize,
    pub delta_in: usize,
    pub delta_in_plus: usize,
    pub omega: usize,
    pub marvel_upper: f64,
    pub lmarvel_upper_form: f64,
    pub rsl_w_upper_form: f64,
    pub rsl_d_upper_form: f64,
    pub dag_lower_form: f64,
    pub mag_lower_form: f64,
}

/// Bound values for `g`. `clique_bound` defaults to the clique number.
pub fn bound_formulas(g: &MixedGraph, clique_bound: Option<usize>) -> Bounds {
    let n = g.n();
    let d = max_in_degree(g);
    let dp = max_pap_size(g);
    let omega = clique_number(&g.skeleton());
    let m = clique_bound.unwrap_or(omega);
    let (nf, df, dpf) = (n as f64, d as f64, dp as f64);
    Bounds {
        n,
        delta_in: d,
        delta_in_plus: dp,
        omega,
        marvel_upper: marvel_upper_bound(n, d),
        lmarvel_upper_form: nf * nf + nf * dpf * dpf * 2f64.powf(dpf),
        rsl_w_upper_form: nf * nf + nf * df.powi(m as i32 + 1),
        rsl_d_upper_form: nf * nf + nf * df.powi(3),
        dag_lower_form: nf * nf + nf * df * 2f64.powf(df),
        mag_lower_form: nf * nf + nf * dpf * 2f64.powf(dpf),
    }
}

impl Bounds {
    /// The upper bound reported for `algo`, and whether it is exact.
    pub fn upper_for(&self, algo: Algo, hc: &HcConfig) -> (f64, bool) {
        let nf = self.n as f64;
        match algo {
            Algo::Marvel => (self.marvel_upper, true),
            Algo::LMarvel => (self.lmarvel_upper_form, false),
            Algo::RslW | Algo::RslWAuto => (self.rsl_w_upper_form, false),
            Algo::RslD => (self.rsl_d_upper_form, false),
            Algo::RolHc => (hc.max_iter as f64 * nf.powi(3), false),
            Algo::RolVi => (nf * nf * 2f64.powf(nf), false),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CiMode {
    #[default]
    Oracle,
    FisherZ {
        rows: usize,
        alpha: f64,
    },
}

/// A sweep over `algorithms × presets × n × p × seeds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub algorithms: Vec<Algo>,
    #[serde(default = "default_presets")]
    pub presets: Vec<Preset>,
    pub n: Vec<usize>,
    pub p: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Latent vertices per instance, drawn from the `n` generated ones.
    #[serde(default)]
    pub hidden: usize,
    #[serde(default)]
    pub ci: CiMode,
    /// Bound given to `rsl-w`; the true clique number when absent.
    #[serde(default)]
    pub clique_bound: Option<usize>,
    #[serde(default)]
    pub hc: HcConfig,
    #[serde(default)]
    pub learn: LearnConfig,
    #[serde(default)]
    pub sem: Option<SemConfig>,
    /// Fill the `runtime_ms` column. Off by default so reports are
    /// byte-for-byte reproducible.
    #[serde(default)]
    pub timing: bool,
}

fn default_presets() -> Vec<Preset> {
    vec![Preset::Plain]
}

impl BenchConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub preset: String,
    pub n: usize,
    pub observed: usize,
    pub p: f64,
    pub seed: u64,
    pub delta_in: usize,
    pub delta_in_plus: usize,
    pub omega: usize,
    pub unique_tests: Option<u64>,
    pub duplicate_tests: Option<u64>,
    pub max_cond_size: Option<usize>,
    pub skeleton_shd: Option<usize>,
    pub skeleton_f1: Option<f64>,
    pub forced_removals: Option<usize>,
    pub runtime_ms: Option<f64>,
    pub upper_bound_value: f64,
    pub upper_bound_exact: bool,
    pub lower_bound_value: f64,
    pub status: String,
}

pub fn preset_name(p: Preset) -> String {
    match p {
        Preset::Plain => "plain".into(),
        Preset::DiamondFree => "diamond_free".into(),
        Preset::CliqueBounded(m) => format!("clique_bounded({m})"),
    }
}

/// Independent seeds for the separate random choices of one instance.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// A generated instance: the full DAG, the observed vertices and the
/// ground truth over them (ids `0..observed`).
#[derive(Clone, Debug)]
pub struct Instance {
    pub dag: MixedGraph,
    pub observed: VertexSet,
    pub truth: MixedGraph,
}

pub fn make_instance(
    n: usize,
    p: f64,
    seed: u64,
    preset: Preset,
    hidden: usize,
) -> Result<Instance> {
    let dag = gen_dag(n, p, sub_seed(seed, 0), preset)?;
    let hid = choose_hidden(n, hidden, sub_seed(seed, 1))?;
    let observed = dag.vertices().difference(&hid);
    let truth = if hidden == 0 {
        dag.clone()
    } else {
        latent_project(&dag, &observed)?.compact(&observed).0
    };
    Ok(Instance {
        dag,
        observed,
        truth,
    })
}

/// A tester over the observed variables of `inst`, ids `0..observed`.
pub fn instance_tester(
    inst: &Instance,
    ci: &CiMode,
    seed: u64,
    sem: &SemConfig,
) -> Result<Box<dyn CiTester>> {
    Ok(match *ci {
        CiMode::Oracle => Box::new(with_cache(GraphOracle::marginal(
            inst.dag.clone(),
            &inst.observed,
        )?)),
        CiMode::FisherZ { rows, alpha } => {
            let hidden = inst.dag.vertices().difference(&inst.observed);
            let spec = gen_sem(&inst.dag, &hidden, sub_seed(seed, 2), sem)?;
            let data = sample_sem(&spec, rows, sub_seed(seed, 3))?;
            Box::new(with_cache(FisherZ::new(&data, alpha)?))
        }
    })
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    algo: Algo,
    preset: Preset,
    n: usize,
    p: f64,
    seed: u64,
}

fn run_cell(cfg: &BenchConfig, c: Cell) -> Result<BenchRow> {
    let inst = make_instance(c.n, c.p, c.seed, c.preset, cfg.hidden)?;
    let bounds = bound_formulas(&inst.truth, cfg.clique_bound);
    let (upper, exact) = bounds.upper_for(c.algo, &cfg.hc);
    let lower = if cfg.hidden == 0 {
        bounds.dag_lower_form
    } else {
        bounds.mag_lower_form
    };
    let mut row = BenchRow {
        algorithm: c.algo.to_string(),
        preset: preset_name(c.preset),
        n: c.n,
        observed: inst.truth.n(),
        p: c.p,
        seed: c.seed,
        delta_in: bounds.delta_in,
        delta_in_plus: bounds.delta_in_plus,
        omega: bounds.omega,
        unique_tests: None,
        duplicate_tests: None,
        max_cond_size: None,
        skeleton_shd: None,
        skeleton_f1: None,
        forced_removals: None,
        runtime_ms: None,
        upper_bound_value: upper,
        upper_bound_exact: exact,
        lower_bound_value: lower,
        status: "ok".into(),
    };
    let tester = instance_tester(&inst, &cfg.ci, c.seed, &cfg.sem.unwrap_or_default())?;
    let opts = AlgoOptions {
        learn: cfg.learn.clone(),
        clique_bound: Some(cfg.clique_bound.unwrap_or(bounds.omega)),
        hc: cfg.hc.clone(),
        vi_cap: DEFAULT_VI_CAP,
    };
    let start = Instant::now();
    let out = learn(c.algo, tester.as_ref(), &inst.truth.vertices(), &opts);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Ok(l) => {
            let truth = inst.truth.skeleton();
            row.unique_tests = Some(l.stats.unique_tests);
            row.duplicate_tests = Some(l.stats.duplicate_hits);
            row.max_cond_size = Some(l.stats.max_cond_size);
            row.skeleton_shd = Some(l.skeleton.shd(&truth));
            row.skeleton_f1 = Some(l.skeleton.precision_recall_f1(&truth).2);
            row.forced_removals = Some(l.forced_removals);
            row.runtime_ms = cfg.timing.then_some(elapsed);
        }
        Err(e) if e.is_data_error() || matches!(e, Error::NoRemovable { .. }) => {
            row.status = format!("error: {e}");
        }
        Err(e) => return Err(e),
    }
    Ok(row)
}

/// Runs every cell of the sweep (in parallel) and returns rows in
/// configuration order.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.algorithms.is_empty() || cfg.n.is_empty() || cfg.p.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::arg("bench config needs algorithms, n, p and seeds"));
    }
    let mut cells = Vec::new();
    for &algo in &cfg.algorithms {
        for &preset in &cfg.presets {
            for &n in &cfg.n {
                for &p in &cfg.p {
                    for &seed in &cfg.seeds {
                        cells.push(Cell {
                            algo,
                            preset,
                            n,
                            p,
                            seed,
                        });
                    }
                }
            }
        }
    }
    cells.par_iter().map(|&c| run_cell(cfg, c)).collect()
}

pub fn rows_to_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marvel_bound_values() {
        assert!((marvel_upper_bound(10, 3) - 357.0).abs() < 1e-9);
        assert!((marvel_upper_bound(4, 3) - 130.8).abs() < 1e-9);
        assert_eq!(marvel_upper_bound(7, 0), 21.0);
    }

    #[test]
    fn bounds_use_true_graph_parameters() {
        let g = MixedGraph::from_directed(4, &[(2, 1), (2, 0), (3, 1), (3, 0), (1, 0)]).unwrap();
        let b = bound_formulas(&g, None);
        assert_eq!((b.delta_in, b.omega), (3, 3));
        assert!((b.marvel_upper - 130.8).abs() < 1e-9);
        assert_eq!(b.dag_lower_form, 16.0 + 4.0 * 3.0 * 8.0);
    }

    #[test]
    fn algo_names_round_trip() {
        for a in Algo::ALL {
            assert_eq!(a.name().parse::<Algo>().unwrap(), a);
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                format!("\"{}\"", a.name())
            );
        }
        assert!("pc".parse::<Algo>().is_err());
    }

    fn small_config() -> BenchConfig {
        BenchConfig::from_json(
            r#"{"algorithms": ["marvel", "rsl-d", "rol-vi"], "n": [7], "p": [0.3], "seeds": [1, 2, 3]}"#,
        )
        .unwrap()
    }

    #[test]
    fn oracle_bench_is_exact_and_deterministic() {
        let cfg = small_config();
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 9);
        for r in &rows {
            if r.algorithm != "rsl-d" {
                assert_eq!(r.skeleton_shd, Some(0), "{r:?}");
            }
            if r.algorithm == "marvel" {
                assert!(r.unique_tests.unwrap() as f64 <= r.upper_bound_value);
            }
            assert!(r.runtime_ms.is_none());
        }
        let a = rows_to_csv(&rows).unwrap();
        let b = rows_to_csv(&run_bench(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("algorithm,preset,n,observed,p,seed"));
    }

    #[test]
    fn hidden_instances_score_against_the_projection() {
        let cfg = BenchConfig::from_json(
            r#"{"algorithms": ["lmarvel"], "n": [9], "p": [0.3], "seeds": [4, 5], "hidden": 2}"#,
        )
        .unwrap();
        for r in run_bench(&cfg).unwrap() {
            assert_eq!(r.observed, 7);
            assert_eq!(r.skeleton_shd, Some(0));
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(BenchConfig::from_json(r#"{"algorithms": ["marvel"], "n": [5]}"#).is_err());
        assert!(BenchConfig::from_json(
            r#"{"algorithms": ["marvel"], "n": [5], "p": [0.1], "seeds": [1], "bogus": 1}"#
        )
        .is_err());
        let empty = BenchConfig {
            seeds: vec![],
            ..small_config()
        };
        assert!(run_bench(&empty).is_err());
    }
}
