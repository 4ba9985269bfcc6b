use std::fs::File;
use std::io::{self, BufWriter, Write};

use sstree::discrete::{sop_one_ended, OneEndedTree, SopMode, Truncate};
use sstree::generators::{
    geometric_bouquet_ray, subordinator_jumps, ti_poisson_forest, uniform_density_ray, DecorationKernel, LambdaSpec,
};
use sstree::qsd::{death_kernel, mixture_eta_with_tail_limit, qsd_residual, CorollarySampler};
use sstree::rng::{RootSeed, StreamRng};
use sstree::rtree::{discretize_one_ended, mass_process, FiniteRTree, OneEndedRTree, DEFAULT_ATTEMPT_CAP};
use sstree::stats::{
    code_histogram, commutation_test, compare_histograms, compatibility_test, coupling_gap_test, invariance_test,
    TestReport, Verdict,
};
use sstree::fixtures;

use crate::config::RunConfig;
use crate::{CliError, Generator, MassGenerator, Suite};

const DEFAULT_LEVEL: f64 = 1e-3;
const DEFAULT_REPLICATES: usize = 10_000;

fn output(config: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &config.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn comb(config: &RunConfig, default_min: i32, default_max: i32) -> Result<LambdaSpec, CliError> {
    Ok(LambdaSpec::comb(
        1.0,
        config.p.unwrap_or(0.4),
        config.q.unwrap_or(0.7),
        config.n_min.unwrap_or(default_min),
        config.n_max.unwrap_or(default_max),
    )?)
}

fn unit_kernel() -> Result<DecorationKernel, CliError> {
    Ok(DecorationKernel::constant(fixtures::segment_with_end_atom())?)
}

fn tree_arg(config: &RunConfig, default: fn() -> FiniteRTree) -> Result<FiniteRTree, CliError> {
    match &config.tree {
        Some(text) => Ok(text.parse()?),
        None => Ok(default()),
    }
}

pub fn generate(generator: Generator, config: &RunConfig) -> Result<bool, CliError> {
    let depth = config.depth.unwrap_or(3);
    let count = config.replicates.unwrap_or(1);
    let mut out = output(config)?;
    out.write_all(config.echo(&format!("gen {generator:?}").to_lowercase()).as_bytes())?;

    if let Generator::Ray = generator {
        for _ in 0..count {
            writeln!(out, "{}", OneEndedTree::ray().truncate(depth).code())?;
        }
        out.flush()?;
        return Ok(true);
    }
    let seed = config.seed()?;
    let label = "gen";
    for i in 0..count {
        let mut rng = seed.stream(label, i as u64);
        let line = match generator {
            Generator::Ray => unreachable!(),
            Generator::Bouquet => geometric_bouquet_ray(config.gamma.unwrap_or(0.5), &mut rng)?.truncate(depth).code().to_string(),
            Generator::Uniform => {
                discretize_one_ended(&uniform_density_ray(config.lambda.unwrap_or(2.0))?, &mut rng).truncate(depth).code().to_string()
            }
            Generator::Forest => {
                let forest = ti_poisson_forest(&comb(config, -10, 5)?, &unit_kernel()?, &mut rng)?;
                discretize_one_ended(&forest, &mut rng).truncate(depth).code().to_string()
            }
            Generator::Corollary => {
                let sampler = CorollarySampler::new(&comb(config, -10, 5)?, &unit_kernel()?)?;
                sampler.sample(&mut rng)?.truncate_to(Some(depth))?.code().to_string()
            }
            Generator::ForestRtree => {
                let forest = ti_poisson_forest(&comb(config, -10, 5)?, &unit_kernel()?, &mut rng)?;
                forest.spine_prefix(config.horizon.unwrap_or(depth as f64), true).to_string()
            }
        };
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(true)
}

fn bouquet_law(gamma: f64) -> impl Fn(&mut StreamRng) -> sstree::Result<OneEndedTree> + Sync {
    move |rng| geometric_bouquet_ray(gamma, rng)
}

fn with_config(report: TestReport, config: &RunConfig) -> TestReport {
    report.with_param("replicates", config.replicates.unwrap_or(DEFAULT_REPLICATES))
}

fn run_suite(suite: Suite, config: &RunConfig) -> Result<Vec<TestReport>, CliError> {
    let level = config.level.unwrap_or(DEFAULT_LEVEL);
    let n = config.replicates.unwrap_or(DEFAULT_REPLICATES);
    Ok(match suite {
        Suite::Selfsim => {
            let seed = config.seed()?;
            let p = config.p.unwrap_or(0.5);
            let q = config.q.unwrap_or(p);
            let depth = Some(config.depth.unwrap_or(2));
            let transform = |t: OneEndedTree, rng: &mut StreamRng| sop_one_ended(&t, p, q, SopMode::ExactSpine, rng);
            let report = match config.lambda {
                Some(lambda) => {
                    let ray = uniform_density_ray(lambda)?;
                    invariance_test(|rng: &mut StreamRng| Ok(discretize_one_ended(&ray, rng)), transform, depth, n, seed, level)?
                        .with_param("lambda", lambda)
                }
                None => {
                    let gamma = config.gamma.unwrap_or(0.5);
                    invariance_test(bouquet_law(gamma), transform, depth, n, seed, level)?.with_param("gamma", gamma)
                }
            };
            vec![report.with_param("p", p).with_param("q", q)]
        }
        Suite::Commute => {
            let tree = tree_arg(config, fixtures::branch_with_atom)?;
            vec![commutation_test(&tree, config.p.unwrap_or(0.5), config.q.unwrap_or(0.7), n, config.seed()?, level)?]
        }
        Suite::Compat => {
            let tree = tree_arg(config, fixtures::segment_with_end_atom)?;
            let (big, small) = (config.n.unwrap_or(6), config.m.unwrap_or(3));
            if small > big {
                return Err(CliError::Usage(format!("--m {small} exceeds --n {big}")));
            }
            vec![compatibility_test(&tree, big, small, n, DEFAULT_ATTEMPT_CAP, config.seed()?, level)?]
        }
        Suite::Corollary => {
            let seed = config.seed()?;
            let spec = comb(config, -10, 5)?;
            let kernel = unit_kernel()?;
            let sampler = CorollarySampler::new(&spec, &kernel)?;
            let depth = Some(config.depth.unwrap_or(3));
            let forest = code_histogram(
                |rng: &mut StreamRng| {
                    let tree = discretize_one_ended(&ti_poisson_forest(&spec, &kernel, rng)?, rng);
                    Ok((*tree.decoration(0)).clone())
                },
                depth,
                n,
                seed,
                "forest",
            )?;
            let direct = code_histogram(|rng: &mut StreamRng| sampler.sample(rng), depth, n, seed, "corollary")?;
            let single = forest.frequency(&sstree::discrete::DiscreteTree::single().code());
            vec![compare_histograms("corollary", &forest, &direct, seed, level)
                .with_param("c", format!("{:.6}", sampler.single_root_probability()))
                .with_param("single_root", format!("{single:.6}"))]
        }
        Suite::Coupling => {
            let gamma = config.gamma.unwrap_or(0.5);
            let p = config.p.unwrap_or(0.5);
            let q = config.q.unwrap_or(p);
            let series = coupling_gap_test(
                bouquet_law(gamma),
                p,
                q,
                config.powers.unwrap_or(6),
                config.depth.unwrap_or(2),
                n,
                config.seed()?,
                level,
            )?;
            let last = series.len().saturating_sub(1);
            series
                .into_iter()
                .enumerate()
                .map(|(i, point)| if i < last { point.report.with_note("trend point, not judged") } else { point.report })
                .collect()
        }
        Suite::Qsd => {
            let spec = comb(config, -40, 40)?;
            let p = config.p.unwrap_or(0.4);
            let kernel = death_kernel(p, config.k.unwrap_or(400))?;
            let eta = mixture_eta_with_tail_limit(&spec, config.k_eff.unwrap_or(2000), 1.0)?;
            let r = qsd_residual(&eta, &kernel)?;
            let tol = config.tol.unwrap_or(1e-8);
            let mut report = TestReport::from_p_value("qsd", r.residual, f64::NAN, (eta.len() as u64, r.support as u64), RootSeed(config.seed.unwrap_or(0)), tol)
                .with_param("tail_mass", format!("{:.3e}", eta.tail_mass))
                .with_param("leak_bound", format!("{:.3e}", r.leak_bound))
                .with_note("statistic is the l1 residual; pass when below the level");
            report.verdict = if r.residual < tol { Verdict::Pass } else { Verdict::Fail };
            vec![report]
        }
    }
    .into_iter()
    .map(|r| if matches!(suite, Suite::Qsd) { r } else { with_config(r, config) })
    .collect())
}

pub fn verify(suite: Suite, config: &RunConfig) -> Result<bool, CliError> {
    let reports = run_suite(suite, config)?;
    for r in &reports {
        println!("{r}");
    }
    if let Some(path) = &config.out {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", TestReport::CSV_HEADER)?;
        for r in &reports {
            writeln!(out, "{}", r.csv_row())?;
        }
        out.flush()?;
    }
    // the coupling series only has to close by its last power
    let judged = match suite {
        Suite::Coupling => &reports[reports.len().saturating_sub(1)..],
        _ => &reports[..],
    };
    let ok = judged.iter().all(|r| match r.verdict {
        Verdict::Pass => true,
        Verdict::Inconclusive => config.inconclusive_ok,
        Verdict::Fail => false,
    });
    if !ok {
        match &config.out {
            Some(path) => eprintln!("verification failed; report at {}", path.display()),
            None => eprintln!("verification failed"),
        }
    }
    Ok(ok)
}

pub fn massproc(generator: MassGenerator, config: &RunConfig) -> Result<bool, CliError> {
    let horizon = config.horizon.unwrap_or(1.0);
    let steps = config.steps.unwrap_or(100);
    let path = match generator {
        MassGenerator::Uniform => mass_process(&uniform_density_ray(config.lambda.unwrap_or(2.0))?, horizon)?,
        MassGenerator::Subordinator => subordinator_jumps(
            config.alpha.unwrap_or(0.5),
            config.eps.unwrap_or(0.01),
            horizon,
            &mut config.seed()?.stream("massproc", 0),
        )?,
        MassGenerator::Forest => {
            let mut rng = config.seed()?.stream("massproc", 0);
            let tree: OneEndedRTree = ti_poisson_forest(&comb(config, -10, 5)?, &unit_kernel()?, &mut rng)?;
            mass_process(&tree, horizon)?
        }
    };
    let mut out = output(config)?;
    writeln!(out, "t,X,X_c,X_j")?;
    for [t, x, xc, xj] in path.grid(steps) {
        writeln!(out, "{t},{x},{xc},{xj}")?;
    }
    out.flush()?;
    Ok(true)
}
