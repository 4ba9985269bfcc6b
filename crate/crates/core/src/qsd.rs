//! Quasi-stationary laws of the binomial death chain, and the sampler for
//! the decoration law of a Poisson forest.

use rand::Rng;
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::factorial::{ln_binomial, ln_factorial};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::discrete::DiscreteTree;
use crate::draw::{geometric, poisson};
use crate::error::{check_open_unit, Error, Result};
use crate::generators::{DecorationKernel, LambdaSpec, SizeSampler};
use crate::rtree::discretize::iid_discretization;
use crate::rtree::{MuSampler, DEFAULT_ATTEMPT_CAP};

/// Each of `k` individuals survives independently with probability `p`;
/// the chain is killed on reaching zero.
#[derive(Clone, Debug)]
pub struct DeathKernel {
    p: f64,
    size: usize,
    // row k holds j = 1..=k, rows packed one after another
    entries: Vec<f64>,
}

fn log_entry(p: f64, k: usize, j: usize) -> f64 {
    ln_binomial(k as u64, j as u64) + j as f64 * p.ln() + (k - j) as f64 * (-p).ln_1p()
}

impl DeathKernel {
    pub fn new(p: f64, size: usize) -> Result<Self> {
        check_open_unit("p", p)?;
        if size == 0 {
            return Err(Error::Dimension("kernel size must be positive".into()));
        }
        let mut entries = Vec::with_capacity(size * (size + 1) / 2);
        for k in 1..=size {
            let start = entries.len();
            entries.extend((1..=k).map(|j| log_entry(p, k, j).exp()));
            if entries[start..].iter().all(|&e| e == 0.0) {
                return Err(Error::Underflow { row: k });
            }
        }
        Ok(DeathKernel { p, size, entries })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `P(k, j)`; rows beyond the stored size are evaluated directly.
    pub fn entry(&self, k: usize, j: usize) -> f64 {
        if j == 0 || j > k {
            0.0
        } else if k <= self.size {
            self.entries[(k - 1) * k / 2 + j - 1]
        } else {
            log_entry(self.p, k, j).exp()
        }
    }

    pub fn row_sum(&self, k: usize) -> f64 {
        (1..=k).map(|j| self.entry(k, j)).sum()
    }
}

pub fn death_kernel(p: f64, size: usize) -> Result<DeathKernel> {
    DeathKernel::new(p, size)
}

/// Mixed-Poisson law `eta_k ~ integral e^-x x^k / k! Lambda(dx)` on `k >= 1`,
/// truncated to `1..=k_eff`.
#[derive(Clone, Debug)]
pub struct MixtureQsd {
    /// `eta[i]` is the mass at `k = i + 1`.
    pub eta: Vec<f64>,
    pub tail_mass: f64,
    pub d: f64,
    /// Claimed eigenvalue, known for comb measures.
    pub q: Option<f64>,
    pub spec: LambdaSpec,
}

impl MixtureQsd {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn with_claimed_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }
}

/// Default bound on the mass of `eta` beyond the truncation.
pub const DEFAULT_TAIL_LIMIT: f64 = 1e-10;

pub fn mixture_eta(spec: &LambdaSpec, k_eff: usize) -> Result<MixtureQsd> {
    mixture_eta_with_tail_limit(spec, k_eff, DEFAULT_TAIL_LIMIT)
}

/// Poisson upper tail `P(N > k)` for mean `x`.
fn poisson_tail(x: f64, k: usize) -> f64 {
    let a = (k + 1) as f64;
    if x > a + 60.0 * a.sqrt() + 60.0 {
        1.0
    } else {
        gamma_lr(a, x)
    }
}

pub fn mixture_eta_with_tail_limit(spec: &LambdaSpec, k_eff: usize, tail_limit: f64) -> Result<MixtureQsd> {
    if k_eff == 0 {
        return Err(Error::Dimension("k_eff must be positive".into()));
    }
    let d = spec.d();
    let (eta, tail_mass) = match spec {
        LambdaSpec::Power { alpha, eps, x_max } => {
            let eta: Vec<f64> = (1..=k_eff)
                .map(|k| {
                    let a = k as f64 - alpha;
                    let upper = if x_max.is_finite() { gamma_lr(a, *x_max) } else { 1.0 };
                    let window = upper - gamma_lr(a, *eps);
                    alpha * (ln_gamma(a) - ln_factorial(k as u64)).exp() * window / d
                })
                .collect();
            let tail = (1.0 - eta.iter().sum::<f64>()).max(0.0);
            (eta, tail)
        }
        _ => {
            let atoms = spec.discrete_atoms().unwrap();
            let eta = (1..=k_eff)
                .map(|k| {
                    let lf = ln_factorial(k as u64);
                    atoms.iter().map(|&(x, w)| w * (-x + k as f64 * x.ln() - lf).exp()).sum::<f64>() / d
                })
                .collect();
            let tail = atoms.iter().map(|&(x, w)| w * poisson_tail(x, k_eff)).sum::<f64>() / d;
            (eta, tail)
        }
    };
    if tail_mass > tail_limit {
        return Err(Error::TailMass { tail: tail_mass, k_eff, limit: tail_limit });
    }
    Ok(MixtureQsd { eta, tail_mass, d, q: spec.scaling().map(|s| s.1), spec: spec.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QsdResidual {
    /// `sum over j <= K of |(eta P)_j - q eta_j|`.
    pub residual: f64,
    /// Bound on mass flowing into `1..=K` from beyond the truncation of `eta`.
    pub leak_bound: f64,
    pub support: usize,
}

/// Checks `eta P = q eta` on the kernel's support `1..=K`. Every stored
/// entry of `eta` (up to `k_eff >= K`) contributes to the product.
pub fn qsd_residual(eta: &MixtureQsd, kernel: &DeathKernel) -> Result<QsdResidual> {
    let q = eta.q.ok_or_else(|| Error::Unsupported("no claimed eigenvalue for this measure".into()))?;
    if let Some((p, _)) = eta.spec.scaling() {
        if (p - kernel.p()).abs() > 1e-15 {
            return Err(Error::Parameter { name: "kernel p", value: kernel.p(), range: "equal to the comb's p" });
        }
    }
    let size = kernel.size();
    if eta.len() < size {
        return Err(Error::Dimension(format!("eta has {} entries, kernel needs {size}", eta.len())));
    }
    let residual = (1..=size)
        .map(|j| {
            let pushed: f64 = (j..=eta.len()).map(|k| eta.eta[k - 1] * kernel.entry(k, j)).sum();
            (pushed - q * eta.eta[j - 1]).abs()
        })
        .sum();
    let reach = Binomial::new(kernel.p(), (eta.len() + 1) as u64)
        .map(|b| b.cdf(size as u64))
        .unwrap_or(1.0);
    Ok(QsdResidual { residual, leak_bound: eta.tail_mass * reach, support: size })
}

/// Direct sampler for the decoration law of a discretized Poisson forest:
/// `Geo(1 / (1 + d))` independent non-empty pieces glued at the root.
#[derive(Clone, Debug)]
pub struct CorollarySampler {
    sizes: SizeSampler,
    kernel: DecorationKernel,
    d: f64,
    cap: u64,
}

impl CorollarySampler {
    pub fn new(spec: &LambdaSpec, kernel: &DecorationKernel) -> Result<Self> {
        let d = spec.d();
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Parameter { name: "d", value: d, range: "(0, inf)" });
        }
        Ok(CorollarySampler { sizes: spec.sampler(), kernel: kernel.clone(), d, cap: DEFAULT_ATTEMPT_CAP })
    }

    pub fn with_attempt_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Probability that the decoration is the root alone.
    pub fn single_root_probability(&self) -> f64 {
        1.0 / (1.0 + self.d)
    }

    /// A piece: size from `(1 - e^-x) Lambda(dx) / d`, the kernel tree scaled
    /// by it, discretized and conditioned to have a non-root vertex.
    pub fn sample_piece<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DiscreteTree> {
        let tree = self.kernel.attachment(self.sizes.sample_effective(rng));
        let mass = tree.total_mass();
        let mut attempts = 0;
        let count = loop {
            if attempts == self.cap {
                return Err(Error::RejectionCap { attempts });
            }
            attempts += 1;
            let n = poisson(rng, mass);
            if n > 0 {
                break n as usize;
            }
        };
        Ok(iid_discretization(&tree, &MuSampler::new(&tree)?, count, rng))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DiscreteTree> {
        let copies = geometric(rng, self.single_root_probability());
        let mut out = DiscreteTree::single();
        for _ in 0..copies {
            let piece = self.sample_piece(rng)?;
            out.graft(0, &piece);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtree::FiniteRTree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_rows() {
        let k = death_kernel(0.3, 60).unwrap();
        for row in 1..=60 {
            let want = 1.0 - 0.7f64.powi(row as i32);
            assert!((k.row_sum(row) - want).abs() < 1e-13, "row {row}");
        }
        assert_eq!(k.entry(3, 0), 0.0);
        assert_eq!(k.entry(3, 4), 0.0);
        assert!((k.entry(2, 1) - 2.0 * 0.3 * 0.7).abs() < 1e-15);
        assert!((k.entry(80, 20) - log_entry(0.3, 80, 20).exp()).abs() < 1e-18);
        assert!(death_kernel(1.0, 5).is_err());
    }

    #[test]
    fn single_atom_eta_is_a_conditioned_poisson() {
        let spec = LambdaSpec::atoms(vec![(2.0, 1.0)]).unwrap();
        let eta = mixture_eta(&spec, 60).unwrap();
        let norm = 1.0 - (-2.0f64).exp();
        assert!((eta.eta[0] - 2.0 * (-2.0f64).exp() / norm).abs() < 1e-15);
        assert!((eta.eta.iter().sum::<f64>() + eta.tail_mass - 1.0).abs() < 1e-12);
        assert!(eta.q.is_none());
        assert!(matches!(mixture_eta(&spec, 5), Err(Error::TailMass { .. })));
    }

    #[test]
    fn power_eta_sums_to_one() {
        let spec = LambdaSpec::power(0.5, 0.05, 30.0).unwrap();
        let eta = mixture_eta(&spec, 200).unwrap();
        assert!(eta.eta.iter().all(|&e| e >= 0.0));
        assert!((eta.eta.iter().sum::<f64>() + eta.tail_mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn residual_requires_matching_dimensions() {
        let spec = LambdaSpec::comb(1.0, 0.4, 0.7, -10, 2).unwrap();
        let eta = mixture_eta(&spec, 80).unwrap();
        assert!(qsd_residual(&eta, &death_kernel(0.4, 100).unwrap()).is_err());
        assert!(qsd_residual(&eta, &death_kernel(0.3, 50).unwrap()).is_err());
        let r = qsd_residual(&eta, &death_kernel(0.4, 50).unwrap()).unwrap();
        assert_eq!(r.support, 50);
        assert!(r.leak_bound < 1e-10);
    }

    #[test]
    fn corollary_sampler_root_probability() {
        let spec = LambdaSpec::atoms(vec![(1.0, 1.0)]).unwrap();
        let kernel = DecorationKernel::constant(FiniteRTree::segment(1.0).unwrap()).unwrap();
        let s = CorollarySampler::new(&spec, &kernel).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let singles = (0..n).filter(|_| s.sample(&mut rng).unwrap().len() == 1).count() as f64 / n as f64;
        assert!((singles - s.single_root_probability()).abs() < 0.012, "{singles}");
        for _ in 0..100 {
            assert!(s.sample_piece(&mut rng).unwrap().len() >= 2);
        }
    }
}
