//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use rcd_core::bench::{
    instance_tester, learn, make_instance, marvel_upper_bound, Algo, AlgoOptions, CiMode, Instance,
};
use rcd_core::check::{self, boundary_updates};
use rcd_core::ci::{with_cache, CiTester, FisherZ, GraphOracle};
use rcd_core::data::Dataset;
use rcd_core::graph::{clique_number, is_diamond_free, max_in_degree, UndirectedGraph};
use rcd_core::mb::compute_mb_tc;
use rcd_core::rol::{compute_cost, rol_hc, HcConfig};
use rcd_core::sim::{gen_dag, Preset, SemConfig};
use rcd_core::LearnConfig;

const SEEDS: u64 = 100;
const N: usize = 10;
const P_PLAIN: f64 = 0.25;
/// Near the `p = n^-0.9` regime where diamonds are rare.
const P_DIAMOND_FREE: f64 = 0.15;
const P_GENERAL: f64 = 0.35;
const LMARVEL_N: usize = 12;
const LMARVEL_HIDDEN: usize = 3;
const REMOVABILITY_RANDOM: usize = 500;
const EXHAUSTIVE_N: usize = 5;
const SAMPLE_ROWS: usize = 10_000;
const SAMPLE_ALPHA: f64 = 0.01;
const SAMPLE_SEEDS: u64 = 20;
const CALIBRATION_DRAWS: u64 = 1000;
const CALIBRATION_ROWS: usize = 500;
const CALIBRATION_ALPHA: f64 = 0.05;
const CALIBRATION_RANGE: (f64, f64) = (0.03, 0.07);
const HC_N: usize = 12;
const HC_SEEDS: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// One oracle run of criterion 2, kept for criteria 3 and 6.
struct Run {
    algo: Algo,
    seed: u64,
    inst: Instance,
    learned: rcd_core::bench::Learned,
}

fn recording() -> AlgoOptions {
    AlgoOptions {
        learn: LearnConfig {
            record_boundaries: true,
            ..LearnConfig::default()
        },
        ..AlgoOptions::default()
    }
}

fn oracle_runs() -> Result<Vec<Run>, rcd_core::Error> {
    let mut runs = Vec::new();
    let plan: [(Algo, usize, f64, Preset, usize); 6] = [
        (Algo::Marvel, N, P_PLAIN, Preset::Plain, 0),
        (
            Algo::LMarvel,
            LMARVEL_N,
            P_PLAIN,
            Preset::Plain,
            LMARVEL_HIDDEN,
        ),
        (Algo::RslW, N, P_PLAIN, Preset::Plain, 0),
        (Algo::RslWAuto, N, P_PLAIN, Preset::Plain, 0),
        (Algo::RslD, N, P_DIAMOND_FREE, Preset::DiamondFree, 0),
        (Algo::RolVi, N, P_PLAIN, Preset::Plain, 0),
    ];
    for (algo, n, p, preset, hidden) in plan {
        for seed in 0..SEEDS {
            let inst = make_instance(n, p, seed, preset, hidden)?;
            let tester = instance_tester(&inst, &CiMode::Oracle, seed, &SemConfig::default())?;
            let mut opts = recording();
            opts.clique_bound = Some(clique_number(&inst.truth.skeleton()));
            let learned = learn(algo, tester.as_ref(), &inst.truth.vertices(), &opts)?;
            runs.push(Run {
                algo,
                seed,
                inst,
                learned,
            });
        }
    }
    Ok(runs)
}

fn criterion1() -> Outcome {
    match check::removability(4, REMOVABILITY_RANDOM, 0) {
        Ok(r) => outcome(
            r.passed(),
            format!(
                "{} vertex checks, {} disagreements {:?}",
                r.cases, r.failure_count, r.failures
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion2(runs: &[Run]) -> Outcome {
    let bad: Vec<String> = runs
        .iter()
        .filter(|r| r.learned.skeleton.shd(&r.inst.truth.skeleton()) != 0)
        .map(|r| format!("{} seed {}", r.algo, r.seed))
        .collect();
    outcome(
        bad.is_empty(),
        format!("{} runs, SHD > 0 on {bad:?}", runs.len()),
    )
}

fn criterion3(runs: &[Run]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for r in runs.iter().filter(|r| r.algo == Algo::Marvel) {
        let bound = marvel_upper_bound(r.inst.truth.n(), max_in_degree(&r.inst.truth));
        let used = r.learned.stats.unique_tests as f64;
        worst = worst.max(used / bound);
        if used > bound {
            bad.push(r.seed);
        }
    }
    outcome(
        bad.is_empty(),
        format!("max tests/bound ratio {worst:.3}; violations on seeds {bad:?}"),
    )
}

fn criterion4() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut seed = 0;
    while checked < SEEDS {
        let g = match gen_dag(N, P_GENERAL, seed, Preset::Plain) {
            Ok(g) => g,
            Err(e) => return outcome(false, e.to_string()),
        };
        seed += 1;
        if is_diamond_free(&g).unwrap_or(true) {
            continue;
        }
        checked += 1;
        let t = with_cache(GraphOracle::new(g.clone()).expect("DAG"));
        match learn(Algo::RslD, &t, &g.vertices(), &AlgoOptions::default()) {
            Ok(l) => {
                if g.skeleton()
                    .edges()
                    .iter()
                    .any(|&(a, b)| !l.skeleton.adjacent(a, b))
                {
                    bad.push(seed - 1);
                }
            }
            Err(e) => return outcome(false, format!("seed {}: {e}", seed - 1)),
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} DAGs with diamonds; missing edges on seeds {bad:?}"),
    )
}

fn criterion5() -> Outcome {
    match check::order_theory(EXHAUSTIVE_N) {
        Ok(r) => outcome(
            r.passed(),
            format!(
                "{} checks on all DAGs with n <= {EXHAUSTIVE_N}, {} violations {:?}",
                r.cases, r.failure_count, r.failures
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion6(runs: &[Run]) -> Outcome {
    let mut steps = 0;
    let mut bad = Vec::new();
    for r in runs.iter().filter(|r| !r.learned.steps.is_empty()) {
        steps += r.learned.steps.len();
        match boundary_updates(&r.inst.truth, &r.learned) {
            Ok(m) if m.is_empty() => {}
            Ok(m) => bad.push(format!("{} seed {}: {}", r.algo, r.seed, m[0])),
            Err(e) => bad.push(e.to_string()),
        }
    }
    outcome(
        steps > 0 && bad.is_empty(),
        format!("{steps} removal steps compared, mismatches {bad:?}"),
    )
}

fn criterion7() -> Outcome {
    match check::cpdag(EXHAUSTIVE_N) {
        Ok(r) => outcome(
            r.passed(),
            format!(
                "{} DAGs with n <= {EXHAUSTIVE_N}, {} mismatches {:?}",
                r.cases, r.failure_count, r.failures
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

fn calibration() -> Result<f64, rcd_core::Error> {
    let mut rejections = 0;
    for draw in 0..CALIBRATION_DRAWS {
        let mut rng = ChaCha8Rng::seed_from_u64(draw);
        let values: Vec<f64> = (0..2 * CALIBRATION_ROWS)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let data = Dataset::new(vec!["a".into(), "b".into()], CALIBRATION_ROWS, values)?;
        let t = with_cache(FisherZ::new(&data, CALIBRATION_ALPHA)?);
        if !t.independent(0, 1, &Default::default())? {
            rejections += 1;
        }
    }
    Ok(rejections as f64 / CALIBRATION_DRAWS as f64)
}

fn criterion8() -> Outcome {
    let ci = CiMode::FisherZ {
        rows: SAMPLE_ROWS,
        alpha: SAMPLE_ALPHA,
    };
    let mut ours = Vec::new();
    let mut baseline = Vec::new();
    for seed in 0..SAMPLE_SEEDS {
        let run = || -> Result<(f64, f64), rcd_core::Error> {
            let inst = make_instance(N, P_PLAIN, seed, Preset::Plain, 0)?;
            let truth = inst.truth.skeleton();
            let t = instance_tester(&inst, &ci, seed, &SemConfig::default())?;
            let vars = inst.truth.vertices();
            let l = learn(Algo::Marvel, t.as_ref(), &vars, &AlgoOptions::default())?;
            let mb = compute_mb_tc(t.as_ref(), &vars)?;
            let mut mb_graph = UndirectedGraph::new(N);
            for x in vars.iter() {
                for y in mb[x].iter() {
                    mb_graph.add_edge(x, y);
                }
            }
            Ok((
                l.skeleton.precision_recall_f1(&truth).2,
                mb_graph.precision_recall_f1(&truth).2,
            ))
        };
        match run() {
            Ok((a, b)) => {
                ours.push(a);
                baseline.push(b);
            }
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        }
    }
    let (m_ours, m_base) = (median(ours), median(baseline));
    let rate = match calibration() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let calibrated = (CALIBRATION_RANGE.0..=CALIBRATION_RANGE.1).contains(&rate);
    outcome(
        m_ours >= m_base && calibrated,
        format!(
            "median F1 {m_ours:.3} vs boundary-graph baseline {m_base:.3}; null rejection rate {rate:.3} (want {:?})",
            CALIBRATION_RANGE
        ),
    )
}

fn criterion9() -> Outcome {
    let mut bad = Vec::new();
    let mut accepted = 0;
    for seed in 0..HC_SEEDS {
        let mut run = || -> Result<Option<String>, rcd_core::Error> {
            let g = gen_dag(HC_N, P_PLAIN, seed, Preset::Plain)?;
            let t = with_cache(GraphOracle::new(g.clone())?);
            let c_order: Vec<usize> = g
                .topological_order()
                .expect("DAG")
                .into_iter()
                .rev()
                .collect();
            let cfg = HcConfig {
                init: Some(c_order),
                ..HcConfig::default()
            };
            let r = rol_hc(&t, &g.vertices(), &cfg)?;
            if r.total_cost() != g.num_edges() || !r.trace.is_empty() {
                return Ok(Some(format!(
                    "seed {seed}: cost {} vs {} edges",
                    r.total_cost(),
                    g.num_edges()
                )));
            }
            // From a poor start every accepted swap must strictly lower the cost.
            let mut init: Vec<usize> = (0..HC_N).collect();
            init.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
            let start: usize = compute_cost(&t, &init, 0, HC_N - 1)?.iter().sum();
            let r = rol_hc(
                &t,
                &g.vertices(),
                &HcConfig {
                    init: Some(init),
                    ..HcConfig::default()
                },
            )?;
            let mut prev = start;
            for s in &r.trace {
                accepted += 1;
                if !(s.cost_before == prev && s.cost_after < prev) {
                    return Ok(Some(format!(
                        "seed {seed}: swap {:?} did not decrease",
                        (s.a, s.b)
                    )));
                }
                prev = s.cost_after;
            }
            Ok(None)
        };
        match run() {
            Ok(None) => {}
            Ok(Some(m)) => bad.push(m),
            Err(e) => bad.push(e.to_string()),
        }
    }
    outcome(
        bad.is_empty(),
        format!("{HC_SEEDS} seeds, {accepted} accepted swaps checked, failures {bad:?}"),
    )
}

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        all_pass &= o.pass;
        println!(
            "{} criterion {id} ({name}): {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };

    report(1, "removability criteria vs definition", &mut criterion1);
    let start = Instant::now();
    let runs = oracle_runs();
    let elapsed = start.elapsed().as_secs_f64();
    match runs {
        Ok(runs) => {
            println!("oracle runs for criteria 2, 3 and 6 took {elapsed:.1}s");
            report(2, "skeleton exactness under an oracle", &mut || {
                criterion2(&runs)
            });
            report(3, "MARVEL test budget", &mut || criterion3(&runs));
            report(6, "boundary updates vs recomputation", &mut || {
                criterion6(&runs)
            });
        }
        Err(e) => {
            for (id, name) in [
                (2, "skeleton exactness"),
                (3, "test budget"),
                (6, "boundary updates"),
            ] {
                report(id, name, &mut || outcome(false, e.to_string()));
            }
        }
    }
    report(4, "RSL-D keeps every true edge", &mut criterion4);
    report(5, "order theory", &mut criterion5);
    report(7, "CPDAG correctness", &mut criterion7);
    report(8, "finite-sample smoke test", &mut criterion8);
    report(9, "hill-climbing sanity", &mut criterion9);

    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
