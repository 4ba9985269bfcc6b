//! Size measures for attached subtrees.

use rand::Rng;

use crate::draw::{cumulate, pick_cumulative};
use crate::error::{check_open_unit, Error, Result};

/// Intensity of attachment sizes per unit of spine length.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaSpec {
    /// `alpha * x^(-1-alpha) dx` restricted to `[eps, x_max]`.
    Power { alpha: f64, eps: f64, x_max: f64 },
    /// Atoms at `x0 * p^(-n)` with weights `q^n`, `n_min <= n <= n_max`.
    Comb { x0: f64, p: f64, q: f64, n_min: i32, n_max: i32 },
    /// Finitely many `(size, weight)` atoms.
    Atoms(Vec<(f64, f64)>),
}

impl LambdaSpec {
    pub fn power(alpha: f64, eps: f64, x_max: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        if !(eps > 0.0) {
            return Err(Error::Parameter { name: "eps", value: eps, range: "(0, x_max): the total rate is infinite without a cutoff" });
        }
        if !(x_max > eps) {
            return Err(Error::Parameter { name: "x_max", value: x_max, range: "(eps, inf]" });
        }
        Ok(LambdaSpec::Power { alpha, eps, x_max })
    }

    pub fn comb(x0: f64, p: f64, q: f64, n_min: i32, n_max: i32) -> Result<Self> {
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(Error::Parameter { name: "x0", value: x0, range: "(0, inf)" });
        }
        check_open_unit("p", p)?;
        check_open_unit("q", q)?;
        if q <= p {
            return Err(Error::Parameter { name: "q", value: q, range: "(p, 1)" });
        }
        if n_min > n_max {
            return Err(Error::Parameter { name: "n_min", value: n_min as f64, range: "[.., n_max]" });
        }
        Ok(LambdaSpec::Comb { x0, p, q, n_min, n_max })
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Parameter { name: "atoms", value: 0.0, range: "non-empty list" });
        }
        for &(x, w) in &atoms {
            if !(x > 0.0 && x.is_finite() && w > 0.0 && w.is_finite()) {
                return Err(Error::Parameter { name: "atom", value: x, range: "positive size and weight" });
            }
        }
        Ok(LambdaSpec::Atoms(atoms))
    }

    /// The `(size, weight)` atoms of a discrete measure.
    pub fn discrete_atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            LambdaSpec::Power { .. } => None,
            LambdaSpec::Comb { x0, p, q, n_min, n_max } => {
                Some((*n_min..=*n_max).map(|n| (x0 * p.powi(-n), q.powi(n))).collect())
            }
            LambdaSpec::Atoms(a) => Some(a.clone()),
        }
    }

    /// Scaling pair `(p, q)` with `Lambda(A) = q * Lambda(p A)` for comb
    /// measures; power laws satisfy it for every `p` with `q = p^alpha`.
    pub fn scaling(&self) -> Option<(f64, f64)> {
        match self {
            LambdaSpec::Comb { p, q, .. } => Some((*p, *q)),
            _ => None,
        }
    }

    pub fn total_rate(&self) -> f64 {
        match self {
            LambdaSpec::Power { alpha, eps, x_max } => eps.powf(-alpha) - x_max.powf(-alpha),
            _ => self.discrete_atoms().unwrap().iter().map(|a| a.1).sum(),
        }
    }

    /// `d = integral of (1 - e^-x) Lambda(dx)`.
    pub fn d(&self) -> f64 {
        match self {
            LambdaSpec::Power { alpha, eps, x_max } => power_d(*alpha, *eps, *x_max),
            _ => self.discrete_atoms().unwrap().iter().map(|&(x, w)| -w * (-x).exp_m1()).sum(),
        }
    }

    pub fn sampler(&self) -> SizeSampler {
        match self {
            LambdaSpec::Power { alpha, eps, x_max } => SizeSampler::Power {
                alpha: *alpha,
                lo: x_max.powf(-alpha),
                hi: eps.powf(-alpha),
            },
            _ => {
                let atoms = self.discrete_atoms().unwrap();
                SizeSampler::Table {
                    cumulative: cumulate(atoms.iter().map(|a| a.1)),
                    effective: cumulate(atoms.iter().map(|&(x, w)| -w * (-x).exp_m1())),
                    sizes: atoms.into_iter().map(|a| a.0).collect(),
                }
            }
        }
    }
}

fn power_d(alpha: f64, eps: f64, x_max: f64) -> f64 {
    // beyond `far`, 1 - e^-x is 1 to double precision
    let far = 50.0f64;
    let upper = x_max.min(far);
    let mut total = 0.0;
    if upper > eps {
        // Simpson's rule in log scale on the smooth integrand
        let (a, b) = (eps.ln(), upper.ln());
        let n = 20_000;
        let h = (b - a) / n as f64;
        let f = |u: f64| alpha * (-alpha * u).exp() * -(-u.exp()).exp_m1();
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += s * h / 3.0;
    }
    if x_max > far {
        total += far.max(eps).powf(-alpha) - x_max.powf(-alpha);
    }
    total
}

/// Draws attachment sizes.
#[derive(Clone, Debug)]
pub enum SizeSampler {
    Power { alpha: f64, lo: f64, hi: f64 },
    Table { sizes: Vec<f64>, cumulative: Vec<f64>, effective: Vec<f64> },
}

impl SizeSampler {
    /// Size drawn from `Lambda / Lambda_total`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SizeSampler::Power { alpha, lo, hi } => {
                let u = lo + (hi - lo) * (1.0 - rng.random::<f64>());
                u.powf(-1.0 / alpha)
            }
            SizeSampler::Table { sizes, cumulative, .. } => sizes[pick_cumulative(rng, cumulative)],
        }
    }

    /// Size drawn from `(1 - e^-x) Lambda(dx) / d`.
    pub fn sample_effective<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SizeSampler::Table { sizes, effective, .. } => sizes[pick_cumulative(rng, effective)],
            SizeSampler::Power { .. } => loop {
                let x = self.sample(rng);
                if rng.random::<f64>() < -(-x).exp_m1() {
                    return x;
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn comb_is_scale_invariant() {
        let spec = LambdaSpec::comb(1.0, 0.4, 0.7, -5, 5).unwrap();
        let atoms = spec.discrete_atoms().unwrap();
        // Lambda({x_n}) = q * Lambda({p x_n}) = q * Lambda({x_(n-1)})
        for w in atoms.windows(2) {
            assert!((w[1].0 * 0.4 - w[0].0).abs() < 1e-12 * w[0].0);
            assert!((w[1].1 - 0.7 * w[0].1).abs() < 1e-12);
        }
        assert_eq!(spec.scaling(), Some((0.4, 0.7)));
    }

    #[test]
    fn validation() {
        assert!(LambdaSpec::comb(1.0, 0.7, 0.4, 0, 1).is_err());
        assert!(LambdaSpec::comb(1.0, 0.4, 0.7, 2, 1).is_err());
        assert!(LambdaSpec::power(0.5, 0.0, f64::INFINITY).is_err());
        assert!(LambdaSpec::power(1.5, 0.1, f64::INFINITY).is_err());
        assert!(LambdaSpec::atoms(vec![]).is_err());
        assert!(LambdaSpec::atoms(vec![(1.0, -1.0)]).is_err());
    }

    #[test]
    fn d_of_atoms() {
        let spec = LambdaSpec::atoms(vec![(1.0, 2.0), (3.0, 0.5)]).unwrap();
        let want = 2.0 * (1.0 - (-1.0f64).exp()) + 0.5 * (1.0 - (-3.0f64).exp());
        assert!((spec.d() - want).abs() < 1e-15);
        assert_eq!(spec.total_rate(), 2.5);
    }

    #[test]
    fn d_of_power_law() {
        // with x_max = inf, d = Gamma(1 - alpha); Gamma(1/2) = sqrt(pi)
        let spec = LambdaSpec::power(0.5, 1e-12, f64::INFINITY).unwrap();
        let want = std::f64::consts::PI.sqrt() - 1e-6;
        assert!((spec.d() - want).abs() < 1e-7, "{}", spec.d());
        let spec = LambdaSpec::power(0.5, 0.01, f64::INFINITY).unwrap();
        assert!((spec.total_rate() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn power_sizes_follow_the_tail() {
        let spec = LambdaSpec::power(0.5, 0.01, f64::INFINITY).unwrap();
        let s = spec.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 40_000;
        // P(x > 1) = rate above 1 / total rate = 1 / 10
        let above = (0..n).filter(|_| s.sample(&mut rng) > 1.0).count() as f64 / n as f64;
        assert!((above - 0.1).abs() < 0.006, "{above}");
    }

    #[test]
    fn effective_sizes_are_reweighted() {
        let spec = LambdaSpec::atoms(vec![(0.1, 1.0), (10.0, 1.0)]).unwrap();
        let s = spec.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 40_000;
        let small = (0..n).filter(|_| s.sample_effective(&mut rng) < 1.0).count() as f64 / n as f64;
        let a = 1.0 - (-0.1f64).exp();
        let b = 1.0 - (-10.0f64).exp();
        assert!((small - a / (a + b)).abs() < 0.006, "{small}");
    }
}
