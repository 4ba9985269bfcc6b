//! Monte-Carlo checks of distributional identities between tree laws.

use super::histogram::{code_histogram, CodeHistogram};
use super::testing::{chi2_two_sample, tv_distance, TestReport, Verdict};
use crate::discrete::{cop_uniform, sop, sop_one_ended, DiscreteTree, OneEndedTree, SopMode, Truncate};
use crate::error::Result;
use crate::rng::{RootSeed, StreamRng};
use crate::rtree::{discretize, discretize_conditioned, discretize_one_ended, iota_one_ended, FiniteRTree, RescaleMode};

/// Chi-square comparison of two histograms; empty samples or a single
/// pooled bucket give an inconclusive report rather than an error.
pub fn compare_histograms(name: &str, lhs: &CodeHistogram, rhs: &CodeHistogram, seed: RootSeed, level: f64) -> TestReport {
    let sizes = (lhs.total, rhs.total);
    let mut report = match chi2_two_sample(lhs, rhs) {
        Ok(chi) => TestReport::from_chi2(name, &chi, sizes, seed, level),
        Err(_) => {
            let mut r = TestReport::from_p_value(name, 0.0, 1.0, sizes, seed, level).with_note("empty sample");
            r.verdict = Verdict::Inconclusive;
            r
        }
    };
    if let Some(k) = lhs.depth {
        report = report.with_param("depth", k);
    }
    report
}

/// Does `transform` preserve the law? Both sides draw independently: the
/// left side from streams labelled `lhs`, the right side from `rhs`.
pub fn invariance_test<T, U, F, G>(
    law: F,
    transform: G,
    depth: Option<usize>,
    n: usize,
    seed: RootSeed,
    level: f64,
) -> Result<TestReport>
where
    T: Truncate,
    U: Truncate,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
    G: Fn(T, &mut StreamRng) -> Result<U> + Sync,
{
    let lhs = code_histogram(&law, depth, n, seed, "invariance/lhs")?;
    let rhs = code_histogram(|rng: &mut StreamRng| transform(law(rng)?, rng), depth, n, seed, "invariance/rhs")?;
    Ok(compare_histograms("invariance", &lhs, &rhs, seed, level))
}

/// Discretizing after rescaling against contracting after discretizing.
pub fn commutation_test(
    tree: &FiniteRTree,
    p: f64,
    q: f64,
    n: usize,
    seed: RootSeed,
    level: f64,
) -> Result<TestReport> {
    let rescaled = tree.rescale(p, q, RescaleMode::ExactSpine)?;
    let lhs = code_histogram(|rng: &mut StreamRng| Ok(discretize(&rescaled, rng)), None, n, seed, "commute/lhs")?;
    let rhs = code_histogram(
        |rng: &mut StreamRng| sop(&discretize(tree, rng), p, q, SopMode::ExactSpine, rng),
        None,
        n,
        seed,
        "commute/rhs",
    )?;
    Ok(compare_histograms("commutation", &lhs, &rhs, seed, level)
        .with_param("p", p)
        .with_param("q", q))
}

/// Contracting a discretization with `n` non-root vertices down to `m`
/// against discretizing directly with `m`.
pub fn compatibility_test(
    tree: &FiniteRTree,
    n: usize,
    m: usize,
    samples: usize,
    attempt_cap: u64,
    seed: RootSeed,
    level: f64,
) -> Result<TestReport> {
    let lhs = code_histogram(
        |rng: &mut StreamRng| cop_uniform(&discretize_conditioned(tree, n, attempt_cap, rng)?.tree, m, rng),
        None,
        samples,
        seed,
        "compat/lhs",
    )?;
    let rhs = code_histogram(
        |rng: &mut StreamRng| Ok(discretize_conditioned(tree, m, attempt_cap, rng)?.tree),
        None,
        samples,
        seed,
        "compat/rhs",
    )?;
    Ok(compare_histograms("compatibility", &lhs, &rhs, seed, level)
        .with_param("n", n)
        .with_param("m", m))
}

/// One step of the coupling-gap series.
#[derive(Clone, Debug)]
pub struct CouplingPoint {
    pub power: u32,
    pub p: f64,
    pub q: f64,
    /// Total variation between the pooled empirical code laws; `None` for
    /// empty samples.
    pub tv: Option<f64>,
    pub report: TestReport,
}

/// For `k = 1..=powers`, compares `sop(T, p^k, q^k)` with the discretized
/// rescaling of the embedded tree, at truncation `depth`.
#[allow(clippy::too_many_arguments)]
pub fn coupling_gap_test<F>(
    law: F,
    p: f64,
    q: f64,
    powers: u32,
    depth: usize,
    n: usize,
    seed: RootSeed,
    level: f64,
) -> Result<Vec<CouplingPoint>>
where
    F: Fn(&mut StreamRng) -> Result<OneEndedTree> + Sync,
{
    (1..=powers)
        .map(|k| {
            let (pk, qk) = (p.powi(k as i32), q.powi(k as i32));
            let step = seed.child("coupling", k as u64);
            let lhs = code_histogram(
                |rng: &mut StreamRng| sop_one_ended(&law(rng)?, pk, qk, SopMode::ExactSpine, rng),
                Some(depth),
                n,
                step,
                "coupling/lhs",
            )?;
            let rhs = code_histogram(
                |rng: &mut StreamRng| {
                    let real = iota_one_ended(&law(rng)?).rescale(pk, qk, RescaleMode::ExactSpine)?;
                    Ok(discretize_one_ended(&real, rng))
                },
                Some(depth),
                n,
                step,
                "coupling/rhs",
            )?;
            let tv = tv_distance(&lhs, &rhs).ok();
            let mut report = compare_histograms("coupling", &lhs, &rhs, seed, level).with_param("k", k);
            if let Some(tv) = tv {
                report = report.with_param("tv", format!("{tv:.6}"));
            }
            Ok(CouplingPoint { power: k, p: pk, q: qk, tv, report })
        })
        .collect()
}

/// Fraction of `runs` identity-transform invariance tests rejected at
/// `level`, each run with a fresh child seed.
pub fn null_rejection_rate<T, F>(law: F, depth: Option<usize>, n: usize, runs: usize, seed: RootSeed, level: f64) -> Result<f64>
where
    T: Truncate,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
{
    let mut rejected = 0usize;
    for run in 0..runs {
        let report = invariance_test(&law, |t, _| Ok(t), depth, n, seed.child("null", run as u64), level)?;
        if report.verdict == Verdict::Fail {
            rejected += 1;
        }
    }
    Ok(rejected as f64 / runs as f64)
}

/// Convenience law for a fixed finite discrete tree.
pub fn constant_law(tree: DiscreteTree) -> impl Fn(&mut StreamRng) -> Result<DiscreteTree> + Sync {
    move |_| Ok(tree.clone())
}
