//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on a runtime failure (including a `replay`
//! mismatch), 2 on invalid arguments or configuration.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use levyma_core::estimator::{
    check_admissible, ecf, err_w, estimate_uv0, estimate_uv1, functional, sigma_plugin,
    true_functional, AdmissibleConfig, FunctionalConfig, InfluencePlan, SmoothingKernel,
};
use levyma_core::field::FieldSample;
use levyma_core::grid::Grid;
use levyma_core::levy::{check_assumptions, check_u_beta, AssumptionConfig, AssumptionItem};
use levyma_core::Warning;
use serde_json::{json, Value};

use crate::config::{presets, Config};
use crate::experiment::{
    clt_records, consistency_records, inequality_records, run_clt, run_consistency,
    run_inequalities, CltSettings, ExperimentResult, InequalitySettings, Record,
};
use crate::io;
use crate::scenario::{summarize_warnings, Scenario};

#[derive(Parser, Debug)]
#[command(
    name = "levyma",
    version,
    about = "Lévy density functionals of moving-average random fields"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "LEVYMA_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Base seed, overriding the configuration.
    #[arg(long, env = "LEVYMA_SEED")]
    seed: Option<u64>,
    /// Replication count, overriding the configuration.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Preset {
    Consistency,
    Clt,
    CltMulti,
    Inequalities,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Simulate one field sample and write it as CSV.
    Simulate {
        #[command(flatten)]
        src: Source,
        /// Sample size, overriding `[sim] n`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the standing assumptions, (U_β) and admissibility of the test
    /// functions.
    CheckConditions {
        #[command(flatten)]
        src: Source,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the functionals and `uv₀` from a sample file.
    Estimate {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        sample: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Convergence rate of the estimation error.
    McConsistency {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Asymptotic normality of one or more functionals.
    McClt {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Joint asymptotic normality of several functionals.
    McCltMulti {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tail and moment inequalities for sums of the field.
    Inequalities {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the records of one replication and compare them with an
    /// earlier run.
    Replay {
        /// Output directory of the earlier run.
        #[arg(long)]
        out: PathBuf,
        /// Seed of the replication to recompute.
        #[arg(long)]
        seed: u64,
    },
}

/// Error raised by invalid input, mapped to exit code 2.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(e: anyhow::Error) -> anyhow::Error {
    anyhow::Error::new(ConfigError(e))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.cmd)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

fn load(src: &Source, default: Option<Preset>) -> Result<Config> {
    let mut cfg = match (&src.config, src.preset.or(default)) {
        (Some(p), _) => Config::load(p),
        (None, Some(p)) => Config::from_toml(match p {
            Preset::Consistency => presets::CONSISTENCY,
            Preset::Clt => presets::CLT,
            Preset::CltMulti => presets::CLT_MULTI,
            Preset::Inequalities => presets::INEQUALITIES,
        }),
        (None, None) => bail!("one of --config or --preset is required"),
    }
    .map_err(config_err)?;
    if let Some(s) = src.seed {
        cfg.experiment.seed = s;
    }
    if let Some(r) = src.reps {
        cfg.experiment.reps = r;
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn scenario(cfg: &Config) -> Result<Scenario> {
    Scenario::from_config(cfg).map_err(config_err)
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Simulate { src, n, out } => {
            let mut cfg = load(&src, None)?;
            if let Some(n) = n {
                cfg.sim.n = n;
                cfg.validate().map_err(config_err)?;
            }
            let sc = scenario(&cfg)?;
            sc.side(cfg.sim.n).map_err(config_err)?;
            let s = sc.simulate(cfg.sim.n, cfg.experiment.seed, cfg.sim.drift)?;
            io::write_sample(&out, &s)?;
            eprintln!(
                "wrote {} observations (m = {}) to {}",
                s.n(),
                sc.m,
                out.display()
            );
            Ok(0)
        }
        Cmd::CheckConditions { src, out } => {
            let cfg = load(&src, None)?;
            let report = check_conditions(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(out) = out {
                io::write_json(&out, &report)?;
            }
            Ok(0)
        }
        Cmd::Estimate { src, sample, out } => {
            let cfg = load(&src, None)?;
            let summary = estimate(&cfg, &sample, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
        Cmd::McConsistency { src, out } => experiment(
            &load(&src, Some(Preset::Consistency))?,
            Kind::Consistency,
            &out,
        ),
        Cmd::McClt { src, out } => experiment(&load(&src, Some(Preset::Clt))?, Kind::Clt, &out),
        Cmd::McCltMulti { src, out } => {
            experiment(&load(&src, Some(Preset::CltMulti))?, Kind::CltMulti, &out)
        }
        Cmd::Inequalities { src, out } => experiment(
            &load(&src, Some(Preset::Inequalities))?,
            Kind::Inequalities,
            &out,
        ),
        Cmd::Replay { out, seed } => replay(&out, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Consistency,
    Clt,
    CltMulti,
    Inequalities,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Consistency => "consistency",
            Kind::Clt => "clt",
            Kind::CltMulti => "clt-multi",
            Kind::Inequalities => "inequalities",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "consistency" => Kind::Consistency,
            "clt" => Kind::Clt,
            "clt-multi" => Kind::CltMulti,
            "inequalities" => Kind::Inequalities,
            other => bail!("unknown experiment {other:?}"),
        })
    }
}

/// `(i, j, c)` with test function `j` equal to `c` times test function `i`.
fn scaled_pairs(cfg: &Config) -> Vec<(usize, usize, f64)> {
    let fs = &cfg.estimator.test_functions;
    let mut out = Vec::new();
    for i in 0..fs.len() {
        for j in 0..fs.len() {
            let (a, b) = (&fs[i], &fs[j]);
            let same = a.kind == b.kind
                && a.k == b.k
                && a.sigma == b.sigma
                && a.t == b.t
                && a.xi == b.xi
                && a.beta2 == b.beta2;
            if i != j && same && a.scale == 1.0 && b.scale != 1.0 {
                out.push((i, j, b.scale));
            }
        }
    }
    out
}

pub fn clt_settings(cfg: &Config) -> CltSettings {
    let e = &cfg.experiment;
    CltSettings {
        sizes: e.sizes.clone(),
        reps: e.reps,
        seed: e.seed,
        gammas: if e.gammas.is_empty() {
            vec![cfg.sim.drift]
        } else {
            e.gammas.clone()
        },
        patches: e.patches,
        patch_side: e.patch_side,
        ks_p_min: e.ks_p_min,
        var_tol: e.var_tol,
        cov_tol: e.cov_tol,
        drift_ks_max: e.drift_ks_max,
        scaled_pairs: scaled_pairs(cfg),
    }
}

pub fn inequality_settings(cfg: &Config) -> InequalitySettings {
    let e = &cfg.experiment;
    InequalitySettings {
        n: e.sizes[0],
        reps: e.reps,
        seed: e.seed,
        t: e.ineq_t,
        k_trunc: e.ineq_k,
        bernstein_x: e.bernstein_x.clone(),
        exp_tail_x: e.exp_tail_x.clone(),
        moment_u: e.moment_u,
        moment_sizes: e.moment_sizes.clone(),
        moment_reps: e.moment_reps,
    }
}

/// Runs one experiment from a validated configuration.
pub fn run_experiment(cfg: &Config, kind: &str) -> Result<ExperimentResult> {
    let sc = scenario(cfg)?;
    for &n in &cfg.experiment.sizes {
        sc.side(n).map_err(config_err)?;
    }
    let kind = Kind::parse(kind)?;
    if matches!(kind, Kind::Clt | Kind::CltMulti) && cfg.experiment.reps < 50 {
        return Err(config_err(anyhow::anyhow!(
            "[experiment] key `reps`: distributional tests need at least 50 replications"
        )));
    }
    match kind {
        Kind::Consistency => {
            let e = &cfg.experiment;
            run_consistency(&sc, &e.sizes, e.reps, e.seed, e.slope_window)
        }
        Kind::Clt => run_clt(&sc, &clt_settings(cfg), "clt"),
        Kind::CltMulti => run_clt(&sc, &clt_settings(cfg), "clt-multi"),
        Kind::Inequalities => run_inequalities(&sc, &inequality_settings(cfg)),
    }
}

fn experiment(cfg: &Config, kind: Kind, out: &Path) -> Result<i32> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let start = Instant::now();
    let mut res = run_experiment(cfg, kind.name())?;
    res.summary["pass"] = json!(res.passed());
    res.summary["verdicts"] = serde_json::to_value(&res.verdicts)?;
    let elapsed = start.elapsed().as_secs_f64();
    io::write_text(&out.join("config.toml"), &cfg.to_toml())?;
    io::write_csv(&out.join("records.csv"), &res.records)?;
    io::write_json(&out.join("summary.json"), &res.summary)?;
    io::write_text(&out.join("verdicts.txt"), &res.verdict_table())?;
    // wall-clock time is kept apart so the other artifacts are reproducible
    io::write_json(
        &out.join("timing.json"),
        &json!({ "seconds": elapsed, "threads": rayon::current_num_threads() }),
    )?;
    print!("{}", res.verdict_table());
    eprintln!(
        "{} finished in {elapsed:.1}s; artifacts in {}",
        kind.name(),
        out.display()
    );
    Ok(0)
}

/// Records of the replication with seed `seed` of the run stored in `out`.
pub fn replay_records(cfg: &Config, kind: &str, seed: u64) -> Result<Vec<Record>> {
    let e = &cfg.experiment;
    let rep = seed
        .checked_sub(e.seed)
        .filter(|r| (*r as usize) < e.reps.max(e.moment_reps));
    let Some(rep) = rep.map(|r| r as usize) else {
        bail!(
            "seed {seed} is not a replication seed of this run (base {}, {} replications)",
            e.seed,
            e.reps
        );
    };
    let sc = scenario(cfg)?;
    let reps = rep..rep + 1;
    Ok(match Kind::parse(kind)? {
        Kind::Consistency => consistency_records(&sc, &e.sizes, reps, e.seed, &mut Vec::new())?.0,
        Kind::Clt => clt_records(&sc, &clt_settings(cfg), reps, "clt")?,
        Kind::CltMulti => clt_records(&sc, &clt_settings(cfg), reps, "clt-multi")?,
        Kind::Inequalities => inequality_records(&sc, &inequality_settings(cfg), reps)?,
    }
    .into_iter()
    .filter(|r| r.seed == seed)
    .collect())
}

fn same_bits(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

fn replay(out: &Path, seed: u64) -> Result<i32> {
    let cfg = Config::load(&out.join("config.toml")).map_err(config_err)?;
    let summary: Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("summary.json")).context("reading summary.json")?,
    )?;
    let kind = summary["experiment"]
        .as_str()
        .context("summary.json lacks `experiment`")?;
    let stored: Vec<Record> = io::read_csv::<Record>(&out.join("records.csv"))?
        .into_iter()
        .filter(|r| r.seed == seed)
        .collect();
    let fresh = replay_records(&cfg, kind, seed)?;
    let matches = stored.len() == fresh.len()
        && stored.iter().zip(&fresh).all(|(a, b)| {
            a.experiment == b.experiment
                && a.label == b.label
                && (a.n, a.rep, a.seed) == (b.n, b.rep, b.seed)
                && same_bits(a.gamma, b.gamma)
                && same_bits(a.value, b.value)
                && same_bits(a.truth, b.truth)
                && same_bits(a.scaled, b.scaled)
        });
    if matches {
        println!("replay seed {seed}: {} records match", fresh.len());
        Ok(0)
    } else {
        println!(
            "replay seed {seed}: MISMATCH ({} stored, {} recomputed)",
            stored.len(),
            fresh.len()
        );
        for (a, b) in stored.iter().zip(&fresh) {
            if a != b {
                println!("  stored   {a:?}\n  computed {b:?}");
            }
        }
        Ok(1)
    }
}

fn item_json(i: &AssumptionItem) -> Value {
    json!({ "verdict": format!("{:?}", i.verdict), "margin": i.margin, "detail": i.detail })
}

/// Assumption, `(U_β)` and admissibility report.
pub fn check_conditions(cfg: &Config) -> Result<Value> {
    let sc = scenario(cfg)?;
    let tau = sc.model.tau();
    let assumptions = check_assumptions(
        &sc.model,
        &sc.kernel,
        sc.eps,
        tau,
        &AssumptionConfig::default(),
    )?;
    let u_grid = Grid::symmetric(1e3, 20_000)?;
    let u = check_u_beta(&sc.kernel, sc.beta1, &u_grid, 1e-300);
    let mut fns = Vec::new();
    for v in &sc.test_fns {
        let adm = check_admissible(
            v,
            &sc.kernel,
            sc.eps,
            tau,
            sc.beta1,
            &AdmissibleConfig::default(),
        )?;
        fns.push(json!({
            "function": v.name(),
            "xi": v.xi,
            "beta2": if v.beta2.is_finite() { json!(v.beta2) } else { json!("inf") },
            "items": adm.items.iter().map(item_json).collect::<Vec<_>>(),
            "fitted_exponent": adm.fitted_exponent,
            "all_hold": adm.all_hold(),
        }));
    }
    Ok(json!({
        "m": sc.m,
        "assumptions": {
            "items": assumptions.items.iter().map(item_json).collect::<Vec<_>>(),
            "all_hold": assumptions.all_hold(),
        },
        "u_beta": {
            "beta1": sc.beta1,
            "holds": u.holds,
            "worst_margin": u.worst_margin,
            "worst_x": u.worst_x,
            "tail_slope": u.tail_slope,
        },
        "test_functions": fns,
    }))
}

/// Estimates from a sample file; writes `uv0_hat.csv` and `summary.json`
/// into `out` and returns the summary.
pub fn estimate(cfg: &Config, sample: &Path, out: &Path) -> Result<Value> {
    let sc = scenario(cfg)?;
    let (lo, shape, ys) = io::read_sample(sample)?;
    let n = ys.len();
    let fs = FieldSample::from_parts(
        lo,
        shape,
        ys,
        sc.delta,
        sc.h,
        cfg.experiment.seed,
        sc.drift,
        sc.model.clone(),
        sc.kernel.clone(),
    )
    .map_err(|e| config_err(e.into()))?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut warnings: Vec<Warning> = Vec::new();
    let (a_n, b_n) = (sc.a_n(n), sc.b_n(n));
    let fcfg = FunctionalConfig::with_defaults(a_n, b_n, sc.spectral.t_max)?;

    // ûv₀ on the ûv₁ grid
    let e = ecf(fs.values(), &fcfg.t_grid)?;
    let kernel = SmoothingKernel::sinc(b_n.max(1.0 / e.grid().hi()))?;
    let uv1 = estimate_uv1(&e, &kernel, fcfg.pad)?.drain_into(&mut warnings);
    let uv0 = estimate_uv0(&uv1, &sc.kernel, a_n, &fcfg.log_grid)?.drain_into(&mut warnings);
    io::write_real_column(&out.join("uv0_hat.csv"), "uv0_hat_re", &uv0)?;

    let y_grid = sc.y_grid(&[sc.drift]).ok();
    let mut rows = Vec::new();
    for v in &sc.test_fns {
        let routes = functional(v, fs.values(), &sc.kernel, &fcfg)?.drain_into(&mut warnings);
        let (plan, tuning) = sc.plan(v, n, &mut warnings)?;
        let spectral = plan.estimate(fs.values())?;
        let truth = true_functional(v, &sc.model).ok();
        let sigma_sq = match &y_grid {
            Some(g) => {
                let ip: InfluencePlan = sc.influence(&plan, sc.drift, g, &mut warnings)?;
                Some(sigma_plugin(&[&ip], &fs)?.drain_into(&mut warnings)[0])
            }
            None => None,
        };
        rows.push(json!({
            "function": v.name(),
            "L_hat": spectral,
            "L_hat_direct": routes.direct,
            "L_hat_adjoint": routes.adjoint,
            "L_true": truth,
            "err_W": truth.map(|t| err_w(spectral, t, n)),
            "sigma_sq_plugin": sigma_sq,
            "band": tuning.band,
        }));
    }
    let summary = json!({
        "n": n,
        "m": sc.m,
        "a_n": a_n,
        "b_n": b_n,
        "functionals": rows,
        "diagnostics": summarize_warnings(&warnings),
    });
    io::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
