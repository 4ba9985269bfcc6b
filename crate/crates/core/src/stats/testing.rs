//! Two-sample and goodness-of-fit tests plus a uniform report record.

use std::fmt;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::histogram::CodeHistogram;
use crate::error::{Error, Result};
use crate::rng::RootSeed;

/// Buckets whose smallest expected count is below this are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// A chi-square statistic over pooled buckets.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Pairs of observed counts after pooling.
    pub buckets: Vec<(u64, u64)>,
}

impl ChiSquare {
    pub fn is_conclusive(&self) -> bool {
        self.df >= 1
    }
}

fn chi2_sf(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    dist.sf(statistic).clamp(0.0, 1.0)
}

/// Pools paired counts so that every bucket has an expected count of at
/// least [`MIN_EXPECTED`] in both rows. Small buckets are lumped together;
/// if the lump itself is still small it joins the smallest kept bucket.
pub fn pool_pairs(pairs: &[(u64, u64)]) -> Vec<(u64, u64)> {
    let na: u64 = pairs.iter().map(|p| p.0).sum();
    let nb: u64 = pairs.iter().map(|p| p.1).sum();
    let n = (na + nb) as f64;
    if n == 0.0 {
        return Vec::new();
    }
    let small_row = na.min(nb) as f64;
    let expected = |(a, b): (u64, u64)| (a + b) as f64 * small_row / n;

    let mut kept = Vec::new();
    let mut lump = (0u64, 0u64);
    for &pair in pairs {
        if expected(pair) >= MIN_EXPECTED {
            kept.push(pair);
        } else {
            lump.0 += pair.0;
            lump.1 += pair.1;
        }
    }
    if lump.0 + lump.1 > 0 {
        if expected(lump) >= MIN_EXPECTED || kept.is_empty() {
            kept.push(lump);
        } else {
            let smallest = (0..kept.len())
                .min_by_key(|&i| kept[i].0 + kept[i].1)
                .expect("non-empty");
            kept[smallest].0 += lump.0;
            kept[smallest].1 += lump.1;
        }
    }
    kept
}

/// Homogeneity test of a 2 x B table given as column pairs, pooled first.
pub fn chi2_pairs(pairs: &[(u64, u64)]) -> ChiSquare {
    let buckets = pool_pairs(pairs);
    let na: u64 = buckets.iter().map(|p| p.0).sum();
    let nb: u64 = buckets.iter().map(|p| p.1).sum();
    let n = (na + nb) as f64;
    let mut statistic = 0.0;
    for &(a, b) in &buckets {
        let col = (a + b) as f64;
        for (obs, row) in [(a, na), (b, nb)] {
            let e = row as f64 * col / n;
            if e > 0.0 {
                statistic += (obs as f64 - e).powi(2) / e;
            }
        }
    }
    let df = buckets.len().saturating_sub(1);
    ChiSquare { statistic, df, p_value: chi2_sf(statistic, df), buckets }
}

/// Aligns two code histograms over the union of their keys.
pub fn paired_counts(a: &CodeHistogram, b: &CodeHistogram) -> Vec<(u64, u64)> {
    let mut keys: Vec<_> = a.counts.keys().chain(b.counts.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().map(|k| (a.count(k), b.count(k))).collect()
}

pub fn chi2_two_sample(a: &CodeHistogram, b: &CodeHistogram) -> Result<ChiSquare> {
    if a.total == 0 || b.total == 0 {
        return Err(Error::EmptySample);
    }
    Ok(chi2_pairs(&paired_counts(a, b)))
}

/// Total variation between the empirical laws after pooling buckets.
pub fn tv_distance(a: &CodeHistogram, b: &CodeHistogram) -> Result<f64> {
    if a.total == 0 || b.total == 0 {
        return Err(Error::EmptySample);
    }
    let (na, nb) = (a.total as f64, b.total as f64);
    Ok(0.5
        * pool_pairs(&paired_counts(a, b))
            .iter()
            .map(|&(x, y)| (x as f64 / na - y as f64 / nb).abs())
            .sum::<f64>())
}

/// Goodness of fit of integer samples against `pmf` on `0, 1, 2, ...`.
///
/// Bins hold consecutive values until their expected count reaches
/// [`MIN_EXPECTED`]; the last bin is open to the right and absorbs the tail.
pub fn chi2_gof(samples: &[u64], pmf: impl Fn(u64) -> f64) -> Result<ChiSquare> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = samples.len() as f64;
    let max_seen = *samples.iter().max().expect("non-empty");
    let mut observed = vec![0u64; max_seen as usize + 1];
    for &s in samples {
        observed[s as usize] += 1;
    }

    // (observed, expected) per bin
    let mut bins: Vec<(u64, f64)> = Vec::new();
    let mut current = (0u64, 0.0);
    let mut mass_used = 0.0;
    let mut k = 0u64;
    loop {
        let pk = pmf(k);
        if !(0.0..=1.0).contains(&pk) {
            return Err(Error::NotProbability(pk));
        }
        mass_used += pk;
        current.0 += observed.get(k as usize).copied().unwrap_or(0);
        current.1 += n * pk;
        let tail = n * (1.0 - mass_used).max(0.0);
        if current.1 >= MIN_EXPECTED {
            bins.push(current);
            current = (0, 0.0);
        }
        if k >= max_seen && tail < MIN_EXPECTED {
            break;
        }
        k += 1;
    }
    // leftovers: the open tail plus any unfinished bin
    let tail_obs: u64 = observed.iter().skip(k as usize + 1).sum();
    current.0 += tail_obs;
    current.1 += n * (1.0 - mass_used).max(0.0);
    if current.0 > 0 || current.1 > 0.0 {
        match bins.last_mut() {
            Some(last) if current.1 < MIN_EXPECTED => {
                last.0 += current.0;
                last.1 += current.1;
            }
            _ => bins.push(current),
        }
    }

    let statistic = bins
        .iter()
        .filter(|b| b.1 > 0.0)
        .map(|&(o, e)| (o as f64 - e).powi(2) / e)
        .sum();
    let df = bins.len().saturating_sub(1);
    Ok(ChiSquare {
        statistic,
        df,
        p_value: chi2_sf(statistic, df),
        buckets: bins.iter().map(|&(o, e)| (o, e.round() as u64)).collect(),
    })
}

/// Two-sample Kolmogorov-Smirnov test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let sorted = |xs: &[f64]| {
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    Ok(KsTest { statistic: d, p_value: kolmogorov_sf(lambda) })
}

/// P(K > x) for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 1.18 {
        kolmogorov_sf_small(x)
    } else {
        kolmogorov_sf_large(x)
    }
}

// theta-function form; converges fast for small x
fn kolmogorov_sf_small(x: f64) -> f64 {
    use std::f64::consts::PI;
    let c = PI * PI / (8.0 * x * x);
    let cdf = (1..=20)
        .map(|k| {
            let odd = (2 * k - 1) as f64;
            (-odd * odd * c).exp()
        })
        .sum::<f64>()
        * (2.0 * PI).sqrt()
        / x;
    (1.0 - cdf).clamp(0.0, 1.0)
}

fn kolmogorov_sf_large(x: f64) -> f64 {
    let sf = (1..=100)
        .map(|k| {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * kf * kf * x * x).exp()
        })
        .sum::<f64>()
        * 2.0;
    sf.clamp(0.0, 1.0)
}

/// One line of output for any statistical check.
#[derive(Clone, Debug, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub sizes: (u64, u64),
    pub seed: RootSeed,
    pub level: f64,
    pub params: Vec<(String, String)>,
    pub verdict: Verdict,
    pub note: String,
}

impl TestReport {
    /// Report for a p-value: pass when `p >= level`.
    pub fn from_p_value(name: &str, statistic: f64, p_value: f64, sizes: (u64, u64), seed: RootSeed, level: f64) -> Self {
        let verdict = if p_value >= level { Verdict::Pass } else { Verdict::Fail };
        TestReport {
            name: name.to_string(),
            statistic,
            p_value,
            sizes,
            seed,
            level,
            params: Vec::new(),
            verdict,
            note: String::new(),
        }
    }

    pub fn from_chi2(name: &str, chi: &ChiSquare, sizes: (u64, u64), seed: RootSeed, level: f64) -> Self {
        let mut report = Self::from_p_value(name, chi.statistic, chi.p_value, sizes, seed, level);
        report.params.push(("df".into(), chi.df.to_string()));
        if !chi.is_conclusive() {
            report.verdict = Verdict::Inconclusive;
            report.note = "fewer than two buckets after pooling".into();
        }
        report
    }

    pub fn with_param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub const CSV_HEADER: &'static str = "name,statistic,p_value,n_lhs,n_rhs,seed,level,params,verdict,note";

    pub fn csv_row(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.name),
            self.statistic,
            self.p_value,
            self.sizes.0,
            self.sizes.1,
            self.seed.0,
            self.level,
            csv_field(&params.join(";")),
            self.verdict,
            csv_field(&self.note),
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn short(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.3e}")
    } else {
        format!("{x:.4}")
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {:<12} stat={} p={} n=({}, {}) seed={} level={}",
            self.name,
            self.verdict,
            short(self.statistic),
            short(self.p_value),
            self.sizes.0,
            self.sizes.1,
            self.seed.0,
            self.level
        )?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        if !self.note.is_empty() {
            write!(f, " [{}]", self.note)?;
        }
        Ok(())
    }
}
