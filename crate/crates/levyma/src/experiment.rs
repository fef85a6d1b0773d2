//! Monte Carlo experiments. Each run produces per-replication [`Record`]s;
//! verdicts are computed from the records and the model constants stored in
//! the summary, so re-aggregating archived records reproduces them.

use std::collections::BTreeMap;
use std::ops::Range;

use anyhow::{Context, Result};
use levyma_core::estimator::{
    accumulate_patches, err_w, true_functional, InfluencePlan, LagCovAccumulator, PatchConfig,
    SpectralPlan,
};
use levyma_core::field::{dependence_diagnostic, Stencil};
use levyma_core::{Warning, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::scenario::{summarize_warnings, Scenario, Tuning};
use crate::stats;

/// One replication at one sample size. `scaled` is `√n (value − truth)` for
/// estimator records and the centred, unnormalized sum for inequality
/// records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    pub label: String,
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub gamma: f64,
    pub value: f64,
    pub truth: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<Record>,
    pub summary: Value,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict_table(&self) -> String {
        let mut s = String::new();
        for v in &self.verdicts {
            s.push_str(&format!(
                "{} {}: {}\n",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.detail
            ));
        }
        s
    }
}

/// Seed of replication `rep`.
pub fn rep_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_add(rep as u64)
}

/// Seeds of the model-based variance patches, disjoint from replication
/// seeds for any realistic replication count.
pub fn patch_seed_base(base: u64) -> u64 {
    base.wrapping_add(1 << 40)
}

const PATCH_CHUNK: u64 = 1000;

/// Model-based lag-window `Σ` for the given influence plans, simulated in
/// fixed chunks and merged in chunk order so the result does not depend on
/// the thread count.
pub fn sigma_model(
    sc: &Scenario,
    plans: &[&InfluencePlan],
    drift: f64,
    patches: u64,
    patch_side: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Warning>)> {
    let cfg = PatchConfig {
        delta: sc.delta,
        h: sc.h,
        side: patch_side,
        drift,
    };
    let base = patch_seed_base(seed);
    let chunks: Vec<u64> = (0..patches.div_ceil(PATCH_CHUNK)).collect();
    let parts: Vec<LagCovAccumulator> = chunks
        .par_iter()
        .map(|c| {
            let lo = c * PATCH_CHUNK;
            let hi = (lo + PATCH_CHUNK).min(patches);
            Ok(accumulate_patches(
                plans,
                &sc.model,
                &sc.kernel,
                &cfg,
                (lo..hi).map(|p| base.wrapping_add(p)),
            )?)
        })
        .collect::<Result<_>>()?;
    let mut acc = LagCovAccumulator::new(plans.len(), sc.dim(), sc.m);
    for p in &parts {
        acc.merge(p)?;
    }
    let out = acc.finish()?;
    Ok((out.value, out.warnings))
}

fn tuning_json(t: &[Tuning]) -> Value {
    serde_json::to_value(t).expect("tuning serializes")
}

fn group(records: &[Record], key: impl Fn(&Record) -> String) -> BTreeMap<String, Vec<&Record>> {
    let mut m: BTreeMap<String, Vec<&Record>> = BTreeMap::new();
    for r in records {
        m.entry(key(r)).or_default().push(r);
    }
    m
}

// ---------------------------------------------------------------- consistency

/// Estimator records of the consistency experiment for replications `reps`.
pub fn consistency_records(
    sc: &Scenario,
    sizes: &[usize],
    reps: Range<usize>,
    seed: u64,
    warnings: &mut Vec<Warning>,
) -> Result<(Vec<Record>, Vec<Tuning>)> {
    let mut tunings = Vec::new();
    let mut records = Vec::new();
    for (i, v) in sc.test_fns.iter().enumerate() {
        let truth = true_functional(v, &sc.model)?;
        for &n in sizes {
            let (plan, tuning) = sc.plan(v, n, warnings)?;
            tunings.push(tuning);
            let rows: Vec<Record> = reps
                .clone()
                .into_par_iter()
                .map(|rep| {
                    let s = rep_seed(seed, rep);
                    let sample = sc.simulate(n, s, sc.drift)?;
                    let l = plan.estimate(sample.values())?;
                    Ok(Record {
                        experiment: "consistency".into(),
                        label: format!("f{i}:{}", v.name()),
                        n,
                        rep,
                        seed: s,
                        gamma: sc.drift,
                        value: l,
                        truth,
                        scaled: err_w(l, truth, n),
                    })
                })
                .collect::<Result<_>>()?;
            records.extend(rows);
        }
    }
    Ok((records, tunings))
}

/// Mean `|L̂ − 𝓛v|` per sample size, and its log-log slope.
pub fn run_consistency(
    sc: &Scenario,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    window: [f64; 2],
) -> Result<ExperimentResult> {
    let mut warnings = Vec::new();
    let (records, tunings) = consistency_records(sc, sizes, 0..reps, seed, &mut warnings)?;
    let schedule = schedule_report(sc, sizes);
    let verdicts = consistency_verdicts(&records, window);
    let summary = json!({
        "experiment": "consistency",
        "seed": seed,
        "reps": reps,
        "m": sc.m,
        "tuning": tuning_json(&tunings),
        "schedule_conditions": schedule,
        "rates": consistency_table(&records),
        "warnings": summarize_warnings(&warnings),
    });
    Ok(ExperimentResult {
        records,
        summary,
        verdicts,
    })
}

/// Whether the schedules satisfy the rate conditions along `sizes`:
/// `a_n → 0`, `b_n √n` bounded (non-increasing here), and for finite `β₂`
/// `a_n (n/√b_n)^{β₁/(β₂ − β₁)} → 0` (non-increasing here).
pub fn schedule_report(sc: &Scenario, sizes: &[usize]) -> Value {
    let bsq: Vec<f64> = sizes
        .iter()
        .map(|&n| sc.b_n(n) * (n as f64).sqrt())
        .collect();
    let b_ok = bsq.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let mut per_fn = Vec::new();
    for v in &sc.test_fns {
        let beta2 = v.beta2;
        let prod: Vec<f64> = if beta2.is_finite() && beta2 > sc.beta1 {
            let p = sc.beta1 / (beta2 - sc.beta1);
            sizes
                .iter()
                .map(|&n| sc.a_n(n) * (n as f64 / sc.b_n(n).sqrt()).powf(p))
                .collect()
        } else {
            sizes.iter().map(|&n| sc.a_n(n)).collect()
        };
        let ok = sc.cutoff.vanishes() && prod.windows(2).all(|w| w[1] <= w[0]);
        per_fn.push(json!({ "function": v.name(), "beta2": fmt_f(beta2), "a_n_condition": prod, "holds": ok }));
    }
    json!({ "a_n_vanishes": sc.cutoff.vanishes(), "b_n_sqrt_n": bsq, "b_n_condition_holds": b_ok, "per_function": per_fn })
}

fn fmt_f(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format!("{x}"))
    }
}

fn consistency_table(records: &[Record]) -> Value {
    let mut out = Vec::new();
    for (label, rs) in group(records, |r| r.label.clone()) {
        for (n, rn) in group_by_n(&rs) {
            let abs: Vec<f64> = rn.iter().map(|r| (r.value - r.truth).abs()).collect();
            out.push(json!({ "label": label, "n": n, "mean_abs_err": stats::mean(&abs), "reps": abs.len() }));
        }
    }
    Value::Array(out)
}

fn group_by_n<'a>(rs: &[&'a Record]) -> BTreeMap<usize, Vec<&'a Record>> {
    let mut m: BTreeMap<usize, Vec<&Record>> = BTreeMap::new();
    for r in rs {
        m.entry(r.n).or_default().push(r);
    }
    m
}

pub fn consistency_verdicts(records: &[Record], window: [f64; 2]) -> Vec<Verdict> {
    let mut out = Vec::new();
    for (label, rs) in group(records, |r| r.label.clone()) {
        let by_n = group_by_n(&rs);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (n, rn) in &by_n {
            let abs: Vec<f64> = rn.iter().map(|r| (r.value - r.truth).abs()).collect();
            x.push((*n as f64).ln());
            y.push(stats::mean(&abs));
        }
        if y.iter().all(|e| *e == 0.0) {
            out.push(Verdict::new(
                format!("consistency {label}"),
                true,
                "error identically zero",
            ));
            continue;
        }
        if x.len() < 2 {
            out.push(Verdict::new(
                format!("consistency {label}"),
                false,
                "need at least two sample sizes",
            ));
            continue;
        }
        let ly: Vec<f64> = y.iter().map(|e| e.ln()).collect();
        let fit = stats::ols(&x, &ly);
        let pass = fit.slope >= window[0] && fit.slope <= window[1];
        out.push(Verdict::new(
            format!("consistency {label}"),
            pass,
            format!(
                "slope {:.4} (95% CI [{:.4}, {:.4}]) vs window [{}, {}]; mean |err| {:?}",
                fit.slope, fit.slope_ci[0], fit.slope_ci[1], window[0], window[1], y
            ),
        ));
    }
    out
}

// ------------------------------------------------------------------------ CLT

/// Settings shared by the univariate and multivariate CLT runs.
#[derive(Debug, Clone)]
pub struct CltSettings {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub gammas: Vec<f64>,
    pub patches: u64,
    pub patch_side: usize,
    pub ks_p_min: f64,
    pub var_tol: f64,
    pub cov_tol: f64,
    pub drift_ks_max: f64,
    /// `(i, j, c)` with `v_j = c·v_i`.
    pub scaled_pairs: Vec<(usize, usize, f64)>,
}

/// Model quantities the CLT verdicts depend on, per sample size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CltModel {
    pub n: usize,
    pub labels: Vec<String>,
    /// Row-major `k × k`.
    pub sigma: Vec<f64>,
}

fn estimator_records(
    sc: &Scenario,
    plans: &[(String, SpectralPlan, f64)],
    n: usize,
    reps: Range<usize>,
    seed: u64,
    gamma: f64,
    experiment: &str,
) -> Result<Vec<Record>> {
    let rows: Vec<Vec<Record>> = reps
        .into_par_iter()
        .map(|rep| {
            let s = rep_seed(seed, rep);
            let sample = sc.simulate(n, s, gamma)?;
            let mut ecf_cache: Option<(f64, levyma_core::estimator::Ecf)> = None;
            plans
                .iter()
                .map(|(label, plan, truth)| {
                    // plans sharing a band reuse one ECF
                    let l = match (plan.t_grid(), &ecf_cache) {
                        (Some(g), Some((band, e))) if *band == g.hi() => {
                            plan.estimate_from_ecf(e)?
                        }
                        (Some(g), _) => {
                            let e = plan.ecf(sample.values())?.expect("non-empty band");
                            let l = plan.estimate_from_ecf(&e)?;
                            ecf_cache = Some((g.hi(), e));
                            l
                        }
                        (None, _) => 0.0,
                    };
                    Ok(Record {
                        experiment: experiment.into(),
                        label: label.clone(),
                        n,
                        rep,
                        seed: s,
                        gamma,
                        value: l,
                        truth: *truth,
                        scaled: err_w(l, *truth, n),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Spectral plans with labels and true values at sample size `n`.
fn clt_plans(
    sc: &Scenario,
    n: usize,
    warnings: &mut Vec<Warning>,
    tunings: &mut Vec<Tuning>,
) -> Result<Vec<(String, SpectralPlan, f64)>> {
    let mut plans = Vec::new();
    for (i, v) in sc.test_fns.iter().enumerate() {
        let truth = true_functional(v, &sc.model)?;
        let (plan, tuning) = sc.plan(v, n, warnings)?;
        tunings.push(tuning);
        plans.push((format!("f{i}:{}", v.name()), plan, truth));
    }
    Ok(plans)
}

/// Estimator records of a CLT run for replications `reps`, all drifts.
pub fn clt_records(
    sc: &Scenario,
    set: &CltSettings,
    reps: Range<usize>,
    experiment: &str,
) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    for &n in &set.sizes {
        let plans = clt_plans(sc, n, &mut Vec::new(), &mut Vec::new())?;
        for &g in &set.gammas {
            records.extend(estimator_records(
                sc,
                &plans,
                n,
                reps.clone(),
                set.seed,
                g,
                experiment,
            )?);
        }
    }
    Ok(records)
}

/// Joint CLT run for all test functions of the scenario; with one function
/// this is the univariate experiment.
pub fn run_clt(sc: &Scenario, set: &CltSettings, experiment: &str) -> Result<ExperimentResult> {
    let mut warnings = Vec::new();
    let mut tunings = Vec::new();
    let mut models = Vec::new();
    let mut records = Vec::new();
    let y_grid = sc.y_grid(&set.gammas)?;
    for &n in &set.sizes {
        let plans = clt_plans(sc, n, &mut warnings, &mut tunings)?;
        let infl: Vec<InfluencePlan> = plans
            .iter()
            .map(|(_, p, _)| sc.influence(p, set.gammas[0], &y_grid, &mut warnings))
            .collect::<Result<_>>()?;
        let refs: Vec<&InfluencePlan> = infl.iter().collect();
        let (sigma, w) = sigma_model(
            sc,
            &refs,
            set.gammas[0],
            set.patches,
            set.patch_side,
            set.seed,
        )?;
        warnings.extend(w);
        models.push(CltModel {
            n,
            labels: plans.iter().map(|p| p.0.clone()).collect(),
            sigma,
        });
        for &g in &set.gammas {
            records.extend(estimator_records(
                sc,
                &plans,
                n,
                0..set.reps,
                set.seed,
                g,
                experiment,
            )?);
        }
    }
    let verdicts = clt_verdicts(&records, &models, set);
    let summary = json!({
        "experiment": experiment,
        "seed": set.seed,
        "reps": set.reps,
        "m": sc.m,
        "tuning": tuning_json(&tunings),
        "sigma_model_mc": models,
        "patches": set.patches,
        "patch_side": set.patch_side,
        "y_grid": [y_grid.lo(), y_grid.hi(), y_grid.len()],
        "statistics": clt_statistics(&records, &models, set),
        "warnings": summarize_warnings(&warnings),
    });
    Ok(ExperimentResult {
        records,
        summary,
        verdicts,
    })
}

fn select<'a>(records: &'a [Record], n: usize, label: &str, gamma: f64) -> Vec<&'a Record> {
    let mut v: Vec<&Record> = records
        .iter()
        .filter(|r| r.n == n && r.label == label && r.gamma == gamma)
        .collect();
    v.sort_by_key(|r| r.rep);
    v
}

fn clt_statistics(records: &[Record], models: &[CltModel], set: &CltSettings) -> Value {
    let mut out = Vec::new();
    for m in models {
        let k = m.labels.len();
        for (i, label) in m.labels.iter().enumerate() {
            let s2 = m.sigma[i * k + i];
            for &g in &set.gammas {
                let errs: Vec<f64> = select(records, m.n, label, g)
                    .iter()
                    .map(|r| r.scaled)
                    .collect();
                let mut row = json!({
                    "n": m.n, "label": label, "gamma": g, "sigma_sq": s2,
                    "mean_err": stats::mean(&errs), "var_err": stats::variance(&errs),
                });
                if s2 > 0.0 {
                    let z: Vec<f64> = errs.iter().map(|e| e / s2.sqrt()).collect();
                    let (d, p) = stats::ks_normal(&z);
                    let (a2, pa) = stats::anderson_darling_normal(&z);
                    row["ks_stat"] = json!(d);
                    row["ks_p"] = json!(p);
                    row["ad_stat"] = json!(a2);
                    row["ad_p"] = json!(pa);
                    row["var_ratio"] = json!(stats::variance(&errs) / s2);
                }
                out.push(row);
            }
        }
    }
    Value::Array(out)
}

/// Directions of the Cramér–Wold spot check, fixed by the seed.
fn cramer_wold_dirs(k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FF_EE00);
    (0..3)
        .map(|_| {
            let c: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            c.iter().map(|x| x / norm).collect()
        })
        .collect()
}

pub fn clt_verdicts(records: &[Record], models: &[CltModel], set: &CltSettings) -> Vec<Verdict> {
    let mut out = Vec::new();
    let g0 = set.gammas[0];
    for m in models {
        let k = m.labels.len();
        let errs: Vec<Vec<f64>> = m
            .labels
            .iter()
            .map(|l| {
                select(records, m.n, l, g0)
                    .iter()
                    .map(|r| r.scaled)
                    .collect()
            })
            .collect();
        for (i, label) in m.labels.iter().enumerate() {
            let s2 = m.sigma[i * k + i];
            let e = &errs[i];
            if s2 <= 1e-14 {
                // degenerate limit: err → 0 in probability
                let max = e.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                out.push(Verdict::new(
                    format!("clt n={} {label} degenerate", m.n),
                    max < 1e-6,
                    format!("σ² = {s2:.3e}; max |err_W| = {max:.3e}"),
                ));
                continue;
            }
            let z: Vec<f64> = e.iter().map(|x| x / s2.sqrt()).collect();
            let (d, p) = stats::ks_normal(&z);
            let (a2, pa) = stats::anderson_darling_normal(&z);
            out.push(Verdict::new(
                format!("clt n={} {label} normality", m.n),
                p > set.ks_p_min,
                format!(
                    "KS D = {d:.4}, p = {p:.4} (min {}); AD A² = {a2:.3}, p = {pa:.4}",
                    set.ks_p_min
                ),
            ));
            let ratio = stats::variance(e) / s2;
            out.push(Verdict::new(
                format!("clt n={} {label} variance", m.n),
                (ratio - 1.0).abs() < set.var_tol,
                format!(
                    "empirical var / σ² = {ratio:.4} (σ² = {s2:.5}, tolerance {})",
                    set.var_tol
                ),
            ));
            for &g in &set.gammas[1..] {
                let zg: Vec<f64> = select(records, m.n, label, g)
                    .iter()
                    .map(|r| r.scaled / s2.sqrt())
                    .collect();
                let dd = stats::ks_two_sample(&z, &zg);
                out.push(Verdict::new(
                    format!("clt n={} {label} drift γ={g}", m.n),
                    dd < set.drift_ks_max,
                    format!(
                        "KS distance to γ = {g0}: {dd:.4} (max {})",
                        set.drift_ks_max
                    ),
                ));
            }
        }
        if k > 1 {
            let rows: Vec<Vec<f64>> = (0..errs[0].len())
                .map(|r| errs.iter().map(|e| e[r]).collect())
                .collect();
            let c = stats::covariance_matrix(&rows);
            let worst = c
                .iter()
                .zip(&m.sigma)
                .map(|(got, want)| (got - want).abs() / want.abs())
                .fold(0.0f64, f64::max);
            out.push(Verdict::new(
                format!("clt-multi n={} covariance", m.n),
                worst < set.cov_tol,
                format!(
                    "max elementwise |Ĉ − Σ|/|Σ| = {worst:.4} (tolerance {}); Ĉ = {c:?}; Σ = {:?}",
                    set.cov_tol, m.sigma
                ),
            ));
            for (d, c_dir) in cramer_wold_dirs(k, set.seed).iter().enumerate() {
                let var: f64 = (0..k)
                    .flat_map(|s| (0..k).map(move |t| (s, t)))
                    .map(|(s, t)| c_dir[s] * c_dir[t] * m.sigma[s * k + t])
                    .sum();
                let z: Vec<f64> = rows
                    .iter()
                    .map(|r| r.iter().zip(c_dir).map(|(a, b)| a * b).sum::<f64>() / var.sqrt())
                    .collect();
                let (ks, p) = stats::ks_normal(&z);
                out.push(Verdict::new(
                    format!("clt-multi n={} Cramér–Wold #{d}", m.n),
                    var > 0.0 && p > set.ks_p_min,
                    format!("c = {c_dir:.3?}; KS D = {ks:.4}, p = {p:.4}"),
                ));
            }
            for &(i, j, s) in &set.scaled_pairs {
                let (sii, sjj, sij) = (m.sigma[i * k + i], m.sigma[j * k + j], m.sigma[i * k + j]);
                let model_ok = (sjj - s * s * sii).abs() <= 1e-9 * sjj.abs()
                    && (sij - s * sii).abs() <= 1e-9 * sij.abs();
                let emp = stats::variance(&errs[j]) / (s * s * sii);
                out.push(Verdict::new(
                    format!("clt-multi n={} scaling f{j} = {s}·f{i}", m.n),
                    model_ok && (emp - 1.0).abs() < set.cov_tol,
                    format!("Σ_jj/Σ_ii = {:.6} (want {}), Σ_ij/Σ_ii = {:.6}; empirical var_j/(s²Σ_ii) = {emp:.4}", sjj / sii, s * s, sij / sii),
                ));
            }
        }
    }
    out
}

// ---------------------------------------------------------------- inequalities

/// Exact constants of a bounded centred field `X_j = φ(Y_j) − 𝔼φ(Y₀)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundedField {
    pub label: String,
    pub n: usize,
    /// `B_V² = 𝔼 S_V²`.
    pub b_v: f64,
    /// `ρ_V = Σ 𝔼X_j² / B_V²`.
    pub rho_v: f64,
    /// Bernstein moment constant.
    pub h: f64,
}

/// Constants of the inequality checks, stored in the summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityModel {
    pub m: usize,
    pub dim: usize,
    pub t: f64,
    pub k_trunc: f64,
    pub fields: Vec<BoundedField>,
    pub bernstein_x: Vec<f64>,
    pub exp_tail_x: Vec<f64>,
    pub moment_u: f64,
}

#[derive(Debug, Clone)]
pub struct InequalitySettings {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub t: f64,
    pub k_trunc: f64,
    pub bernstein_x: Vec<f64>,
    pub exp_tail_x: Vec<f64>,
    pub moment_u: f64,
    pub moment_sizes: Vec<usize>,
    pub moment_reps: usize,
}

/// Lags `ℓ ∈ [−m, m]^d` with their multiplicity `Π (L − |ℓ_i|)` in a cube of
/// side `L`.
fn lags(dim: usize, m: usize, side: usize) -> Vec<(Vec<i64>, f64)> {
    let width = 2 * m + 1;
    let mut out = Vec::new();
    for code in 0..width.pow(dim as u32) {
        let mut c = code;
        let l: Vec<i64> = (0..dim)
            .map(|_| {
                let v = (c % width) as i64 - m as i64;
                c /= width;
                v
            })
            .collect();
        let mult: f64 = l
            .iter()
            .map(|x| (side as f64 - x.unsigned_abs() as f64).max(0.0))
            .product();
        out.push((l, mult));
    }
    out
}

/// `B_V²` and `ρ_V` of `cos(tY_j)` (or `sin` when `sine`) over a cube of side
/// `L`, from the exact joint characteristic function of the discretized
/// field.
fn trig_field_constants(
    st: &Stencil,
    b: f64,
    t: f64,
    m: usize,
    side: usize,
    sine: bool,
) -> (f64, f64) {
    let d = st.dim();
    let zero = vec![0i64; d];
    let psi = st.psi(b, t);
    let mean = if sine { psi.im } else { psi.re };
    let mut b2 = 0.0;
    let mut var0 = 0.0;
    for (l, mult) in lags(d, m, side) {
        let same = st
            .log_joint_cf(b, &[(zero.clone(), t), (l.clone(), t)])
            .exp();
        let opp = st
            .log_joint_cf(b, &[(zero.clone(), t), (l.clone(), -t)])
            .exp();
        // cos a cos b = ½[cos(a+b) + cos(a−b)], sin a sin b = ½[cos(a−b) − cos(a+b)]
        let prod = if sine {
            0.5 * (opp.re - same.re)
        } else {
            0.5 * (same.re + opp.re)
        };
        let cov = prod - mean * mean;
        if l.iter().all(|x| *x == 0) {
            var0 = cov;
        }
        b2 += mult * cov;
    }
    let n = (side as f64).powi(d as i32);
    (b2, n * var0 / b2)
}

fn inequality_model(
    sc: &Scenario,
    set: &InequalitySettings,
) -> Result<(Stencil, f64, InequalityModel)> {
    let b = sc
        .model
        .gamma_rate()
        .context("inequality checks need a Gamma model")?;
    let st = Stencil::new(&sc.kernel, sc.delta, sc.h)?;
    let side = sc.side(set.n)?;
    let mut fields = Vec::new();
    for (label, sine) in [("cos", false), ("sin", true)] {
        let (b2, rho) = trig_field_constants(&st, b, set.t, sc.m, side, sine);
        fields.push(BoundedField {
            label: label.into(),
            n: set.n,
            b_v: b2.sqrt(),
            rho_v: rho,
            h: 2.0,
        });
    }
    let model = InequalityModel {
        m: sc.m,
        dim: sc.dim(),
        t: set.t,
        k_trunc: set.k_trunc,
        fields,
        bernstein_x: set.bernstein_x.clone(),
        exp_tail_x: set.exp_tail_x.clone(),
        moment_u: set.moment_u,
    };
    Ok((st, b, model))
}

/// Field sums and moment deviations for replications `reps`. Truncated
/// fields have no closed-form mean; their `truth` is NaN and they are
/// centred by the pooled mean when judged.
pub fn inequality_records(
    sc: &Scenario,
    set: &InequalitySettings,
    reps: Range<usize>,
) -> Result<Vec<Record>> {
    let b = sc
        .model
        .gamma_rate()
        .context("inequality checks need a Gamma model")?;
    let st = Stencil::new(&sc.kernel, sc.delta, sc.h)?;
    let (t, k, n) = (set.t, set.k_trunc, set.n);
    let psi = st.psi(b, t);
    let rows: Vec<Vec<Record>> = reps
        .clone()
        .into_par_iter()
        .map(|rep| {
            let s = rep_seed(set.seed, rep);
            let sample = sc.simulate(n, s, 0.0)?;
            let (mut c, mut si, mut tc, mut ts) = (0.0, 0.0, 0.0, 0.0);
            for &y in sample.values() {
                let (sn, cs) = (t * y).sin_cos();
                c += cs;
                si += sn;
                if y.abs() <= k {
                    tc += y * cs;
                    ts += y * sn;
                }
            }
            let nf = n as f64;
            let rec = |label: &str, value: f64, truth: f64| Record {
                experiment: "inequalities".into(),
                label: label.into(),
                n,
                rep,
                seed: s,
                gamma: 0.0,
                value,
                truth,
                scaled: value - truth,
            };
            Ok(vec![
                rec("cos", c, nf * psi.re),
                rec("sin", si, nf * psi.im),
                rec("ycos_trunc", tc, f64::NAN),
                rec("ysin_trunc", ts, f64::NAN),
            ])
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<Record> = rows.into_iter().flatten().collect();

    // second moment of θ̂(u) − θ(u)
    let u = set.moment_u;
    let theta = st.theta(b, u);
    for &nm in &set.moment_sizes {
        let rows: Vec<Record> = reps
            .clone()
            .filter(|r| *r < set.moment_reps)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|rep| {
                let s = rep_seed(set.seed, rep);
                let sample = sc.simulate(nm, s, 0.0)?;
                let th: C64 = sample
                    .values()
                    .iter()
                    .map(|y| C64::new(0.0, u * y).exp() * y)
                    .sum::<C64>()
                    / nm as f64;
                let dev = (th - theta).norm_sqr();
                Ok(Record {
                    experiment: "inequalities".into(),
                    label: "theta_sq_dev".into(),
                    n: nm,
                    rep,
                    seed: s,
                    gamma: 0.0,
                    value: dev,
                    truth: 0.0,
                    scaled: dev * nm as f64,
                })
            })
            .collect::<Result<_>>()?;
        records.extend(rows);
    }
    Ok(records)
}

pub fn run_inequalities(sc: &Scenario, set: &InequalitySettings) -> Result<ExperimentResult> {
    let (st, b, model) = inequality_model(sc, set)?;
    let records = inequality_records(sc, set, 0..set.reps)?;
    let theta = st.theta(b, set.moment_u);
    let dep = dependence_diagnostic(&sc.simulate(set.n, set.seed, 0.0)?, sc.m + 2)?;
    let verdicts = inequality_verdicts(&records, &model, set.reps);
    let summary = json!({
        "experiment": "inequalities",
        "seed": set.seed,
        "reps": set.reps,
        "model": model,
        "theta_u": [theta.re, theta.im],
        "dependence_flags_beyond_m": dep.any_flag(),
        "tails": inequality_tails(&records, &model),
    });
    Ok(ExperimentResult {
        records,
        summary,
        verdicts,
    })
}

/// Centred sums per label, truncated fields centred by their pooled mean.
fn centred(records: &[Record], label: &str) -> Vec<f64> {
    let rs: Vec<&Record> = records.iter().filter(|r| r.label == label).collect();
    if rs.iter().any(|r| r.truth.is_nan()) {
        let pooled = rs.iter().map(|r| r.value).sum::<f64>() / rs.len() as f64;
        rs.iter().map(|r| r.value - pooled).collect()
    } else {
        rs.iter().map(|r| r.scaled).collect()
    }
}

fn bernstein_bound(f: &BoundedField, x: f64, m: usize, d: usize) -> f64 {
    let c = 4.0 * ((m + 1) as f64).powi(d as i32);
    if x <= f.rho_v * f.b_v / f.h {
        (-x * x / (c * f.rho_v)).exp()
    } else {
        (-x * f.b_v / (c * f.h)).exp()
    }
}

fn exponential_bound(x: f64, n: usize, m: usize, d: usize, k: f64) -> f64 {
    let c = 8.0 * ((m + 1) as f64).powi(d as i32) * k * k;
    2.0 * (-(x * x) / (c * (x + 2.0 * n as f64))).exp()
}

/// `(check, label, x, empirical frequency, bound)` rows.
fn tail_rows(records: &[Record], model: &InequalityModel) -> Vec<(String, String, f64, f64, f64)> {
    let mut out = Vec::new();
    for f in &model.fields {
        let s = centred(records, &f.label);
        for &x in &model.bernstein_x {
            let freq = s.iter().filter(|v| **v >= x * f.b_v).count() as f64 / s.len() as f64;
            out.push((
                "bernstein".into(),
                f.label.clone(),
                x,
                freq,
                bernstein_bound(f, x, model.m, model.dim),
            ));
        }
    }
    for (label, k) in [
        ("cos", 1.0),
        ("sin", 1.0),
        ("ycos_trunc", model.k_trunc),
        ("ysin_trunc", model.k_trunc),
    ] {
        let s = centred(records, label);
        if s.is_empty() {
            continue;
        }
        let n = records
            .iter()
            .find(|r| r.label == label)
            .map(|r| r.n)
            .unwrap_or(1);
        for &c in &model.exp_tail_x {
            let x = c * (n as f64).sqrt();
            let freq = s.iter().filter(|v| v.abs() >= x).count() as f64 / s.len() as f64;
            out.push((
                "exponential".into(),
                label.into(),
                x,
                freq,
                exponential_bound(x, n, model.m, model.dim, k),
            ));
        }
    }
    out
}

fn inequality_tails(records: &[Record], model: &InequalityModel) -> Value {
    Value::Array(
        tail_rows(records, model)
            .into_iter()
            .map(|(check, label, x, freq, bound)| json!({ "check": check, "field": label, "x": x, "empirical": freq, "bound": bound }))
            .collect(),
    )
}

pub fn inequality_verdicts(
    records: &[Record],
    model: &InequalityModel,
    reps: usize,
) -> Vec<Verdict> {
    let mut out = Vec::new();
    let mut by_check: BTreeMap<String, (bool, Vec<String>)> = BTreeMap::new();
    for (check, label, x, freq, bound) in tail_rows(records, model) {
        let p = bound.min(1.0);
        let slack = 3.0 * (p * (1.0 - p) / reps as f64).sqrt();
        let ok = freq <= bound + slack;
        let e = by_check
            .entry(format!("{check} {label}"))
            .or_insert((true, Vec::new()));
        e.0 &= ok;
        e.1.push(format!(
            "x={x:.3}: {freq:.4} ≤ {bound:.4}{}",
            if ok { "" } else { " VIOLATED" }
        ));
    }
    for (name, (ok, parts)) in by_check {
        out.push(Verdict::new(name, ok, parts.join("; ")));
    }
    let mut per_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.label == "theta_sq_dev") {
        per_n.entry(r.n).or_default().push(r.scaled);
    }
    if !per_n.is_empty() {
        let scaled: Vec<(usize, f64)> = per_n.iter().map(|(n, v)| (*n, stats::mean(v))).collect();
        let (lo, hi) = scaled
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), (_, v)| {
                (a.min(*v), b.max(*v))
            });
        out.push(Verdict::new(
            "moment bound n·E|θ̂ − θ|²",
            hi / lo <= 2.0,
            format!(
                "n·E|θ̂(u) − θ(u)|² per n: {scaled:?}; max/min = {:.3}",
                hi / lo
            ),
        ));
    }
    out
}
