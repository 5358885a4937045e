//! Conditional-independence testing: a query type, raw tests (graphical
//! oracle, Fisher-z) and a counting/caching wrapper that learners talk to.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{m_separated_unchecked, MixedGraph};
use crate::set::VertexSet;

/// A canonical query `x ⟂ y | z` with `x < y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CiQuery {
    x: usize,
    y: usize,
    z: VertexSet,
}

impl CiQuery {
    pub fn new(x: usize, y: usize, z: VertexSet) -> Result<Self> {
        if x == y || z.contains(x) || z.contains(y) {
            return Err(Error::arg(format!("malformed CI query ({x}, {y} | {z:?})")));
        }
        Ok(Self {
            x: x.min(y),
            y: x.max(y),
            z,
        })
    }

    pub fn x(&self) -> usize {
        self.x
    }

    pub fn y(&self) -> usize {
        self.y
    }

    pub fn z(&self) -> &VertexSet {
        &self.z
    }

    fn failure(&self, reason: impl Into<String>) -> Error {
        Error::CiFailure {
            x: self.x,
            y: self.y,
            cond_size: self.z.len(),
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CiOutcome {
    pub independent: bool,
    /// The answer relied on a pseudo-inverse.
    pub ill_conditioned: bool,
}

/// A raw independence test without bookkeeping.
pub trait IndependenceTest: Send + Sync {
    fn num_vars(&self) -> usize;
    fn evaluate(&self, q: &CiQuery) -> Result<CiOutcome>;
}

/// What learners call. Implementations count every query.
pub trait CiTester: Send + Sync {
    fn num_vars(&self) -> usize;
    fn independent(&self, x: usize, y: usize, z: &VertexSet) -> Result<bool>;
    fn stats(&self) -> CiStats;
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiStats {
    /// Distinct queries issued.
    pub unique_tests: u64,
    /// Repeats of an already-issued query.
    pub duplicate_hits: u64,
    pub max_cond_size: usize,
    /// Unique tests by conditioning-set size.
    pub cond_size_histogram: Vec<u64>,
    pub ill_conditioned: u64,
}

impl CiStats {
    /// Counts accumulated since `earlier` (the maximum is not differenced).
    pub fn since(&self, earlier: &CiStats) -> CiStats {
        let mut hist = self.cond_size_histogram.clone();
        for (h, e) in hist.iter_mut().zip(&earlier.cond_size_histogram) {
            *h -= e;
        }
        while hist.last() == Some(&0) {
            hist.pop();
        }
        CiStats {
            unique_tests: self.unique_tests - earlier.unique_tests,
            duplicate_hits: self.duplicate_hits - earlier.duplicate_hits,
            max_cond_size: hist.len().saturating_sub(1),
            cond_size_histogram: hist,
            ill_conditioned: self.ill_conditioned - earlier.ill_conditioned,
        }
    }

    pub fn total(&self) -> u64 {
        self.unique_tests + self.duplicate_hits
    }
}

/// Counting wrapper. With `cache_answers` a repeated query is answered from
/// memory; without it the inner test runs again, but is still counted as a
/// duplicate.
pub struct Counted<T> {
    inner: T,
    cache_answers: bool,
    seen: RwLock<HashMap<CiQuery, bool>>,
    unique: AtomicU64,
    duplicate: AtomicU64,
    ill: AtomicU64,
    max_cond: AtomicUsize,
    hist: Mutex<Vec<u64>>,
}

impl<T: IndependenceTest> Counted<T> {
    pub fn new(inner: T) -> Self {
        Self {
            inner,
            cache_answers: false,
            seen: RwLock::default(),
            unique: AtomicU64::new(0),
            duplicate: AtomicU64::new(0),
            ill: AtomicU64::new(0),
            max_cond: AtomicUsize::new(0),
            hist: Mutex::default(),
        }
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }

    fn lookup(&self, q: &CiQuery) -> Option<bool> {
        self.seen.read().unwrap().get(q).copied()
    }
}

/// Counting tester that memoises answers.
pub fn with_cache<T: IndependenceTest>(inner: T) -> Counted<T> {
    Counted {
        cache_answers: true,
        ..Counted::new(inner)
    }
}

impl<T: IndependenceTest> CiTester for Counted<T> {
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn independent(&self, x: usize, y: usize, z: &VertexSet) -> Result<bool> {
        let n = self.inner.num_vars();
        if x >= n || y >= n || z.iter().any(|v| v >= n) {
            return Err(Error::arg(format!(
                "CI query ({x}, {y} | {z:?}) out of range"
            )));
        }
        let q = CiQuery::new(x, y, z.clone())?;
        let cached = self.lookup(&q);
        if let (true, Some(ans)) = (self.cache_answers, cached) {
            self.duplicate.fetch_add(1, Ordering::Relaxed);
            return Ok(ans);
        }
        let out = self.inner.evaluate(&q)?;
        if let Some(prev) = cached {
            if prev != out.independent {
                return Err(Error::consistency(format!(
                    "test ({x}, {y} | {z:?}) changed its answer"
                )));
            }
            self.duplicate.fetch_add(1, Ordering::Relaxed);
            return Ok(out.independent);
        }
        let k = q.z.len();
        let fresh = {
            let mut seen = self.seen.write().unwrap();
            seen.insert(q, out.independent).is_none()
        };
        if fresh {
            self.unique.fetch_add(1, Ordering::Relaxed);
            self.max_cond.fetch_max(k, Ordering::Relaxed);
            let mut hist = self.hist.lock().unwrap();
            if hist.len() <= k {
                hist.resize(k + 1, 0);
            }
            hist[k] += 1;
            if out.ill_conditioned {
                self.ill.fetch_add(1, Ordering::Relaxed);
            }
        } else {
            self.duplicate.fetch_add(1, Ordering::Relaxed);
        }
        Ok(out.independent)
    }

    fn stats(&self) -> CiStats {
        CiStats {
            unique_tests: self.unique.load(Ordering::Relaxed),
            duplicate_hits: self.duplicate.load(Ordering::Relaxed),
            max_cond_size: self.max_cond.load(Ordering::Relaxed),
            cond_size_histogram: self.hist.lock().unwrap().clone(),
            ill_conditioned: self.ill.load(Ordering::Relaxed),
        }
    }
}

/// Answers queries by m-separation in a known ancestral graph, optionally
/// restricted to observed vertices (query ids index into `observed`).
#[derive(Clone, Debug)]
pub struct GraphOracle {
    graph: MixedGraph,
    observed: Vec<usize>,
}

impl GraphOracle {
    pub fn new(graph: MixedGraph) -> Result<Self> {
        let observed = (0..graph.n()).collect();
        Self::build(graph, observed)
    }

    /// Oracle for the marginal over `observed`; query id `i` means vertex
    /// `observed[i]` of `graph`.
    pub fn marginal(graph: MixedGraph, observed: &VertexSet) -> Result<Self> {
        if observed.iter().any(|v| v >= graph.n()) {
            return Err(Error::arg("observed set out of range"));
        }
        Self::build(graph, observed.to_vec())
    }

    fn build(graph: MixedGraph, observed: Vec<usize>) -> Result<Self> {
        graph.require_ancestral()?;
        Ok(Self { graph, observed })
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }
}

impl IndependenceTest for GraphOracle {
    fn num_vars(&self) -> usize {
        self.observed.len()
    }

    fn evaluate(&self, q: &CiQuery) -> Result<CiOutcome> {
        let z: VertexSet = q.z.iter().map(|v| self.observed[v]).collect();
        Ok(CiOutcome {
            independent: m_separated_unchecked(
                &self.graph,
                self.observed[q.x],
                self.observed[q.y],
                &z,
            ),
            ill_conditioned: false,
        })
    }
}

pub const DEFAULT_ALPHA: f64 = 0.01;
const CLAMP: f64 = 1.0 - 1e-12;
const MAX_CONDITION: f64 = 1e12;
const SINGULAR: f64 = 1e-15;

/// Fisher-z test of zero partial correlation for Gaussian data.
#[derive(Clone, Debug)]
pub struct FisherZ {
    cov: DMatrix<f64>,
    samples: usize,
    alpha: f64,
    critical: f64,
}

impl FisherZ {
    pub fn new(data: &Dataset, alpha: f64) -> Result<Self> {
        Self::from_covariance(data.covariance()?, data.rows(), alpha)
    }

    pub fn from_covariance(cov: DMatrix<f64>, samples: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::arg(format!("alpha {alpha} outside (0, 1)")));
        }
        if !cov.is_square() {
            return Err(Error::arg("covariance matrix is not square"));
        }
        for i in 0..cov.nrows() {
            if !cov[(i, i)].is_finite() || cov[(i, i)] <= 0.0 {
                return Err(Error::DegenerateData(format!(
                    "column {i} has zero variance"
                )));
            }
        }
        let critical = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
        Ok(Self {
            cov,
            samples,
            alpha,
            critical,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Partial correlation of `x, y` given `z`, plus whether a pseudo-inverse
    /// was needed.
    pub fn partial_correlation(&self, q: &CiQuery) -> Result<(f64, bool)> {
        let s = &self.cov;
        let z = q.z.to_vec();
        let k = z.len();
        let (x, y) = (q.x, q.y);
        if k == 0 {
            let r = s[(x, y)] / (s[(x, x)] * s[(y, y)]).sqrt();
            return Ok((r.clamp(-CLAMP, CLAMP), false));
        }
        let szz = DMatrix::from_fn(k, k, |i, j| s[(z[i], z[j])]);
        let eig = SymmetricEigen::new(szz);
        let lmax = eig.eigenvalues.max();
        let lmin = eig.eigenvalues.min();
        if lmin.is_nan() || lmin <= lmax * SINGULAR {
            return Err(q.failure("conditioning covariance is singular"));
        }
        let ill = lmax / lmin > MAX_CONDITION;
        let cutoff = if ill { lmax / MAX_CONDITION } else { 0.0 };
        let inv_vals = eig
            .eigenvalues
            .map(|l| if l > cutoff { 1.0 / l } else { 0.0 });
        let inv =
            &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
        let col = |v: usize| nalgebra::DVector::from_fn(k, |i, _| s[(z[i], v)]);
        let (cx, cy) = (col(x), col(y));
        let (ix, iy) = (&inv * &cx, &inv * &cy);
        let vx = s[(x, x)] - cx.dot(&ix);
        let vy = s[(y, y)] - cy.dot(&iy);
        let cxy = s[(x, y)] - cx.dot(&iy);
        if vx <= s[(x, x)] * 1e-12 || vy <= s[(y, y)] * 1e-12 {
            return Err(q.failure("a variable is determined by the conditioning set"));
        }
        Ok(((cxy / (vx * vy).sqrt()).clamp(-CLAMP, CLAMP), ill))
    }

    /// `sqrt(N - |z| - 3) * |atanh r|`.
    pub fn statistic(&self, q: &CiQuery) -> Result<(f64, bool)> {
        let k = q.z.len();
        if self.samples <= k + 3 {
            return Err(q.failure(format!(
                "{} samples are too few for {k} conditioning variables",
                self.samples
            )));
        }
        let (r, ill) = self.partial_correlation(q)?;
        Ok((
            ((self.samples - k - 3) as f64).sqrt() * r.atanh().abs(),
            ill,
        ))
    }

    pub fn p_value(&self, q: &CiQuery) -> Result<f64> {
        let (t, _) = self.statistic(q)?;
        Ok(2.0 * (1.0 - Normal::standard().cdf(t)))
    }
}

impl IndependenceTest for FisherZ {
    fn num_vars(&self) -> usize {
        self.cov.nrows()
    }

    fn evaluate(&self, q: &CiQuery) -> Result<CiOutcome> {
        let (t, ill) = self.statistic(q)?;
        Ok(CiOutcome {
            independent: t <= self.critical,
            ill_conditioned: ill,
        })
    }
}
