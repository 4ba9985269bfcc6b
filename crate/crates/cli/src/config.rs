//! Run configuration: command-line flags, optionally completed from a
//! `key=value` spec file. Flags given on the command line win.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use sstree::rng::RootSeed;

use crate::CliError;

#[derive(Args, Clone, Debug, Default)]
pub struct RunConfig {
    /// Root seed; required by every randomized command.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Truncation depth for codes, or number of items to emit.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Grid steps for mass-process output.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Significance level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Conditioned sizes for the compatibility check.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Index range of the comb measure.
    #[arg(long, allow_hyphen_values = true)]
    pub n_min: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub n_max: Option<i32>,
    /// Kernel truncation for the death chain.
    #[arg(long)]
    pub k: Option<usize>,
    /// Truncation of the candidate law.
    #[arg(long)]
    pub k_eff: Option<usize>,
    /// Number of powers in the coupling series.
    #[arg(long)]
    pub powers: Option<u32>,
    /// Residual tolerance for the death-chain check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Finite measured tree in text form.
    #[arg(long)]
    pub tree: Option<String>,
    /// Treat inconclusive verdicts as passing.
    #[arg(long)]
    pub inconclusive_ok: bool,
    /// File of `key=value` lines filling flags that were not given.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value for {key}: {value:?}")))
}

fn fill<T: FromStr>(slot: &mut Option<T>, key: &str, value: &str) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(parse(key, value)?);
    }
    Ok(())
}

impl RunConfig {
    /// Completes unset fields from the spec file, if one was given.
    pub fn load_spec(mut self) -> Result<Self, CliError> {
        let Some(path) = self.spec.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read spec file {}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(self)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key.replace('-', "_").as_str() {
            "seed" => fill(&mut self.seed, key, value),
            "replicates" => fill(&mut self.replicates, key, value),
            "depth" => fill(&mut self.depth, key, value),
            "p" => fill(&mut self.p, key, value),
            "q" => fill(&mut self.q, key, value),
            "lambda" => fill(&mut self.lambda, key, value),
            "alpha" => fill(&mut self.alpha, key, value),
            "gamma" => fill(&mut self.gamma, key, value),
            "beta" => fill(&mut self.beta, key, value),
            "delta" => fill(&mut self.delta, key, value),
            "eps" => fill(&mut self.eps, key, value),
            "horizon" => fill(&mut self.horizon, key, value),
            "steps" => fill(&mut self.steps, key, value),
            "level" => fill(&mut self.level, key, value),
            "n" => fill(&mut self.n, key, value),
            "m" => fill(&mut self.m, key, value),
            "n_min" => fill(&mut self.n_min, key, value),
            "n_max" => fill(&mut self.n_max, key, value),
            "k" => fill(&mut self.k, key, value),
            "k_eff" => fill(&mut self.k_eff, key, value),
            "powers" => fill(&mut self.powers, key, value),
            "tol" => fill(&mut self.tol, key, value),
            "tree" => fill(&mut self.tree, key, value),
            "out" => fill(&mut self.out, key, value),
            "inconclusive_ok" => {
                self.inconclusive_ok |= parse::<bool>(key, value)?;
                Ok(())
            }
            _ => Err(CliError::Usage(format!("unknown spec key {key:?}"))),
        }
    }

    pub fn seed(&self) -> Result<RootSeed, CliError> {
        self.seed
            .map(RootSeed)
            .ok_or_else(|| CliError::Usage("--seed is required for randomized commands".into()))
    }

    /// `# key=value` lines for every field that is set.
    pub fn echo(&self, command: &str) -> String {
        let mut out = format!("# command={command}\n");
        let mut line = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(out, "# {k}={v}");
            }
        };
        line("seed", self.seed.map(|v| v.to_string()));
        line("replicates", self.replicates.map(|v| v.to_string()));
        line("depth", self.depth.map(|v| v.to_string()));
        line("p", self.p.map(|v| v.to_string()));
        line("q", self.q.map(|v| v.to_string()));
        line("lambda", self.lambda.map(|v| v.to_string()));
        line("alpha", self.alpha.map(|v| v.to_string()));
        line("gamma", self.gamma.map(|v| v.to_string()));
        line("beta", self.beta.map(|v| v.to_string()));
        line("delta", self.delta.map(|v| v.to_string()));
        line("eps", self.eps.map(|v| v.to_string()));
        line("horizon", self.horizon.map(|v| v.to_string()));
        line("steps", self.steps.map(|v| v.to_string()));
        line("level", self.level.map(|v| v.to_string()));
        line("n", self.n.map(|v| v.to_string()));
        line("m", self.m.map(|v| v.to_string()));
        line("n_min", self.n_min.map(|v| v.to_string()));
        line("n_max", self.n_max.map(|v| v.to_string()));
        line("k", self.k.map(|v| v.to_string()));
        line("k_eff", self.k_eff.map(|v| v.to_string()));
        line("powers", self.powers.map(|v| v.to_string()));
        line("tol", self.tol.map(|v| v.to_string()));
        line("tree", self.tree.clone());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_file_fills_only_missing_fields() {
        let dir = std::env::temp_dir().join(format!("sstree-spec-{}", std::process::id()));
        std::fs::write(&dir, "# comment\nseed = 7\np=0.25\nn-min=-3\n").unwrap();
        let cfg = RunConfig { p: Some(0.5), spec: Some(dir.clone()), ..Default::default() }.load_spec().unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.p, Some(0.5));
        assert_eq!(cfg.n_min, Some(-3));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply("colour", "red").is_err());
        assert!(cfg.apply("p", "half").is_err());
    }
}
