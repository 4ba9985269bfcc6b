use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::discrete::{CanonicalCode, Truncate};
use crate::error::Result;
use crate::rng::{RootSeed, StreamRng};

/// Counts of canonical codes from independent samples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodeHistogram {
    pub depth: Option<usize>,
    pub counts: BTreeMap<CanonicalCode, u64>,
    pub total: u64,
}

impl CodeHistogram {
    pub fn new(depth: Option<usize>) -> Self {
        CodeHistogram { depth, counts: BTreeMap::new(), total: 0 }
    }

    pub fn add(&mut self, code: CanonicalCode) {
        *self.counts.entry(code).or_insert(0) += 1;
        self.total += 1;
    }

    fn merge(mut self, other: CodeHistogram) -> Self {
        for (code, c) in other.counts {
            *self.counts.entry(code).or_insert(0) += c;
        }
        self.total += other.total;
        self
    }

    pub fn count(&self, code: &CanonicalCode) -> u64 {
        self.counts.get(code).copied().unwrap_or(0)
    }

    pub fn frequency(&self, code: &CanonicalCode) -> f64 {
        self.count(code) as f64 / self.total as f64
    }
}

/// Histogram of `n` samples truncated at `depth`. Replicate `i` draws from
/// stream `(seed, label, i)`, so the result does not depend on threading.
pub fn code_histogram<T, F>(sampler: F, depth: Option<usize>, n: usize, seed: RootSeed, label: &str) -> Result<CodeHistogram>
where
    T: Truncate,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .try_fold(
            || CodeHistogram::new(depth),
            |mut h, i| {
                let mut rng = seed.stream(label, i as u64);
                h.add(sampler(&mut rng)?.truncate_to(depth)?.code());
                Ok(h)
            },
        )
        .try_reduce(|| CodeHistogram::new(depth), |a, b| Ok(a.merge(b)))
}

/// Runs `f` on `n` replicates with streams `(seed, label, i)`, in order.
pub fn replicate<T, F>(n: usize, seed: RootSeed, label: &str, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(&mut seed.stream(label, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::DiscreteTree;
    use crate::draw::geometric;

    #[test]
    fn histogram_is_reproducible() {
        let law = |rng: &mut StreamRng| Ok(DiscreteTree::star(geometric(rng, 0.4) as usize));
        let a = code_histogram(law, Some(1), 5000, RootSeed(9), "t").unwrap();
        let b = code_histogram(law, Some(1), 5000, RootSeed(9), "t").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total, 5000);
        assert_eq!(a.counts.values().sum::<u64>(), 5000);
        let c = code_histogram(law, Some(1), 5000, RootSeed(10), "t").unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn one_ended_needs_depth() {
        let law = |_: &mut StreamRng| Ok(crate::discrete::OneEndedTree::ray());
        assert!(code_histogram(law, None, 3, RootSeed(1), "t").is_err());
        let h = code_histogram(law, Some(3), 3, RootSeed(1), "t").unwrap();
        assert_eq!(h.count(&DiscreteTree::path(3).code()), 3);
    }
}
