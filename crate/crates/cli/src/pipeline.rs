use crate::config::{CheckKind, ExperimentConfig, ProcessSpec};
use anyhow::{bail, Context, Result};
use geocume_core::estat::{
    clt_check, cluster_decay_check, concentration_check, cumulant_growth_check, gamma_exponent,
    sample_cumulants, slln_check, variance_asymptotic_check, SampleSet,
};
use geocume_core::pointproc::{
    attach_marks, sample_gibbs, sample_poisson, DppSampler, PointConfig, Window,
};
use geocume_core::scores::evaluate_statistic;
use geocume_core::seed::child_seed;
use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};

/// Seed-path tags (see core::seed): marks hang off the replicate seed.
const MARKS_TAG: u64 = 0x4D61;

/// Per-window-volume sampling engine; DPP eigendecompositions are built
/// once here and shared across replicates.
enum Engine {
    Poisson(f64),
    Dpp(DppSampler),
    /// α = −1/m superposition of m thinned copies.
    AlphaDpp { sampler: DppSampler, m: usize },
    Gibbs {
        spec: geocume_core::pointproc::GibbsSpec,
        mcmc: geocume_core::pointproc::McmcParams,
    },
}

impl Engine {
    fn build(process: &ProcessSpec, window: Window) -> Result<Self> {
        Ok(match process {
            ProcessSpec::Poisson { intensity } => Engine::Poisson(*intensity),
            ProcessSpec::Dpp { kernel, grid } => {
                Engine::Dpp(DppSampler::new(window, kernel, *grid)?)
            }
            ProcessSpec::AlphaDpp { kernel, m, grid } => {
                if *m == 0 {
                    bail!("alpha_dpp needs m >= 1");
                }
                Engine::AlphaDpp {
                    sampler: DppSampler::with_scale(window, kernel, *grid, 1.0 / *m as f64)?,
                    m: *m,
                }
            }
            ProcessSpec::Gibbs { spec, mcmc } => Engine::Gibbs {
                spec: spec.clone(),
                mcmc: *mcmc,
            },
        })
    }

    fn sample(&self, window: Window, seed: u64) -> Result<PointConfig> {
        Ok(match self {
            Engine::Poisson(intensity) => sample_poisson(window, *intensity, seed)?,
            Engine::Dpp(sampler) => sampler.sample(seed),
            Engine::AlphaDpp { sampler, m } => {
                let mut points = Vec::new();
                for i in 0..*m {
                    points.extend(sampler.sample(child_seed(seed, &[i as u64])).points().to_vec());
                }
                PointConfig::new(window, points, None)?
            }
            Engine::Gibbs { spec, mcmc } => {
                let (cfg, diag) = sample_gibbs(window, spec, *mcmc, seed)?;
                if !diag.converged {
                    log::warn!(
                        "gibbs acceptance rate {:.3} outside [0.05, 0.95] (seed {seed})",
                        diag.acceptance_rate
                    );
                }
                cfg
            }
        })
    }
}

fn cache_dir(out: &Path, digest: &str) -> PathBuf {
    out.join("cache").join(digest)
}

fn cache_file(out: &Path, digest: &str, n_idx: usize, rep: usize) -> PathBuf {
    cache_dir(out, digest).join(format!("n{n_idx}_rep{rep}.json"))
}

fn load_cached(path: &Path, digest: &str) -> Result<Option<(PointConfig, u64)>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading cache file {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing cache file {}", path.display()))?;
    let (cfg, seed, stamp) = PointConfig::from_json(&value)
        .map_err(|e| anyhow::anyhow!("{e} in {}", path.display()))?;
    if stamp != digest {
        bail!(
            "stale cache: {} was generated under digest {stamp}, current config digest is {digest}",
            path.display()
        );
    }
    Ok(Some((cfg, seed)))
}

/// One replicate: load from cache or generate and persist. Returns the
/// config together with its replicate seed.
fn materialize(
    config: &ExperimentConfig,
    engine: &Engine,
    window: Window,
    digest: &str,
    out: &Path,
    n_idx: usize,
    rep: usize,
) -> Result<(PointConfig, u64, bool)> {
    let path = cache_file(out, digest, n_idx, rep);
    if let Some((cfg, seed)) = load_cached(&path, digest)? {
        return Ok((cfg, seed, false));
    }
    let seed = child_seed(config.seed, &[n_idx as u64, rep as u64]);
    let mut cfg = engine.sample(window, seed)?;
    if config.marks {
        cfg = attach_marks(&cfg, child_seed(seed, &[MARKS_TAG]))?;
    }
    let json = cfg.to_json(seed, digest);
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string(&json)?)?;
    fs::rename(&tmp, &path)?;
    Ok((cfg, seed, true))
}

/// Samples (or re-validates) the full replicate grid. Returns
/// (generated, reused) counts.
pub fn cmd_sample(config: &ExperimentConfig, out: &Path) -> Result<(usize, usize)> {
    let digest = config.digest();
    fs::create_dir_all(cache_dir(out, &digest))?;
    let mut generated = 0usize;
    let mut reused = 0usize;
    for (n_idx, &n) in config.n_grid.iter().enumerate() {
        let window = Window::new(config.d, n)?;
        let engine = Engine::build(&config.process, window)?;
        let fresh: Vec<bool> = (0..config.replicates)
            .into_par_iter()
            .map(|rep| {
                materialize(config, &engine, window, &digest, out, n_idx, rep)
                    .map(|(_, _, fresh)| fresh)
            })
            .collect::<Result<_>>()?;
        let new = fresh.iter().filter(|&&f| f).count();
        generated += new;
        reused += config.replicates - new;
        log::info!("n={n}: {new} generated, {} cached", config.replicates - new);
    }
    Ok((generated, reused))
}

/// One results.csv row; empty stderr/bound fields are omitted via None.
pub struct ResultRow {
    pub check: &'static str,
    pub n: f64,
    pub param: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub bound: Option<f64>,
    pub pass: bool,
}

pub struct RunOutput {
    pub digest: String,
    pub rows: Vec<ResultRow>,
    pub all_pass: bool,
}

/// Loads or generates all replicates, evaluates μ_n^ξ(f), runs the
/// requested checks, and writes statistics.csv, results.csv, summary.json.
pub fn cmd_run(config: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    let digest = config.digest();
    fs::create_dir_all(cache_dir(out, &digest))?;

    let mut samples: Vec<SampleSet> = Vec::new();
    let mut seeds: Vec<Vec<u64>> = Vec::new();
    // Kept only for the cluster-decay check (largest n).
    let mut last_configs: Vec<PointConfig> = Vec::new();
    let need_configs = config.checks.contains(&CheckKind::ClusterDecay);

    for (n_idx, &n) in config.n_grid.iter().enumerate() {
        let window = Window::new(config.d, n)?;
        let engine = Engine::build(&config.process, window)?;
        let reps: Vec<(PointConfig, u64)> = (0..config.replicates)
            .into_par_iter()
            .map(|rep| {
                materialize(config, &engine, window, &digest, out, n_idx, rep)
                    .map(|(c, s, _)| (c, s))
            })
            .collect::<Result<_>>()?;
        let values: Vec<f64> = reps
            .par_iter()
            .map(|(cfg, _)| {
                evaluate_statistic(cfg, &config.score, &config.test_function)
                    .map_err(anyhow::Error::from)
            })
            .collect::<Result<_>>()?;
        seeds.push(reps.iter().map(|(_, s)| *s).collect());
        if need_configs && n_idx + 1 == config.n_grid.len() {
            last_configs = reps.into_iter().map(|(c, _)| c).collect();
        }
        samples.push(SampleSet::new(n, values).map_err(anyhow::Error::from)?);
        log::info!("n={n}: {} statistics evaluated", config.replicates);
    }

    write_statistics_csv(out, &digest, config, &samples, &seeds)?;

    let mut rows: Vec<ResultRow> = Vec::new();
    for check in &config.checks {
        match check {
            CheckKind::Clt => {
                let report = clt_check(&samples)?;
                for r in report.rows {
                    rows.push(ResultRow {
                        check: "clt",
                        n: r.n,
                        param: "ks".into(),
                        value: r.ks,
                        stderr: None,
                        bound: Some(r.floor),
                        pass: r.pass,
                    });
                }
            }
            CheckKind::Variance => {
                let report = variance_asymptotic_check(&samples)?;
                for r in report.rows {
                    rows.push(ResultRow {
                        check: "variance",
                        n: r.n,
                        param: "var_over_n".into(),
                        value: r.var_over_n,
                        stderr: Some(r.var_stderr),
                        bound: None,
                        pass: r.pass,
                    });
                    rows.push(ResultRow {
                        check: "variance",
                        n: r.n,
                        param: "mean_over_n".into(),
                        value: r.mean_over_n,
                        stderr: Some(r.mean_stderr),
                        bound: None,
                        pass: r.pass,
                    });
                }
            }
            CheckKind::CumulantGrowth => {
                let kmax = config.kmax.min(4);
                let report = cumulant_growth_check(&samples, kmax)?;
                let pass = report.pass;
                for r in report.rows {
                    rows.push(ResultRow {
                        check: "cumulant_growth",
                        n: r.n,
                        param: format!("k{}_over_n", r.k),
                        value: r.ratio,
                        stderr: Some(r.stderr),
                        bound: None,
                        pass,
                    });
                }
                // Diagnostics: plug-in orders above 4 when requested.
                if config.kmax > 4 {
                    for s in &samples {
                        let rep = sample_cumulants(s, config.kmax)?;
                        for c in rep.cumulants.iter().filter(|c| c.k > 4) {
                            rows.push(ResultRow {
                                check: "cumulant_growth",
                                n: s.n,
                                param: format!("k{}_over_n_plugin", c.k),
                                value: c.value / s.n,
                                stderr: Some(c.stderr / s.n),
                                bound: None,
                                pass: true,
                            });
                        }
                    }
                }
            }
            CheckKind::Concentration => {
                let params = config.gamma.as_ref().expect("validated");
                let report = concentration_check(&samples, params, &config.s_grid)?;
                let (gamma, exponent) = gamma_exponent(params)?;
                rows.push(ResultRow {
                    check: "concentration",
                    n: 0.0,
                    param: "gamma".into(),
                    value: gamma,
                    stderr: None,
                    bound: Some(exponent),
                    pass: report.pass,
                });
                rows.push(ResultRow {
                    check: "concentration",
                    n: 0.0,
                    param: "c_calibrated".into(),
                    value: report.c,
                    stderr: None,
                    bound: Some(1.0),
                    pass: report.pass,
                });
                let pass = report.pass;
                for r in report.rows {
                    rows.push(ResultRow {
                        check: "concentration",
                        n: r.n,
                        param: format!("s={}", r.s),
                        value: r.frequency,
                        stderr: None,
                        bound: Some(r.bound),
                        pass,
                    });
                }
            }
            CheckKind::Slln => {
                let report = slln_check(&samples, config.epsilon)?;
                let pass = report.pass;
                for r in report.rows {
                    rows.push(ResultRow {
                        check: "slln",
                        n: r.n,
                        param: "deviation".into(),
                        value: r.deviation,
                        stderr: None,
                        bound: None,
                        pass,
                    });
                }
            }
            CheckKind::ClusterDecay => {
                let report =
                    cluster_decay_check(&last_configs, &config.score, &config.cluster_bins)?;
                let pass = report.pass;
                let n = *config.n_grid.last().unwrap();
                rows.push(ResultRow {
                    check: "cluster_decay",
                    n,
                    param: "m1".into(),
                    value: report.m1,
                    stderr: None,
                    bound: None,
                    pass,
                });
                for r in report.rows {
                    if r.pairs < 10 {
                        log::warn!("cluster_decay bin r={} dropped ({} pairs)", r.r, r.pairs);
                        continue;
                    }
                    rows.push(ResultRow {
                        check: "cluster_decay",
                        n,
                        param: format!("r={}", r.r),
                        value: r.gap,
                        stderr: Some(r.stderr),
                        bound: None,
                        pass,
                    });
                }
            }
        }
    }

    let all_pass = rows.iter().all(|r| r.pass);
    write_results_csv(out, &digest, config, &rows)?;
    write_summary_json(out, &digest, config, &samples, &rows, all_pass)?;
    Ok(RunOutput {
        digest,
        rows,
        all_pass,
    })
}

fn write_statistics_csv(
    out: &Path,
    digest: &str,
    config: &ExperimentConfig,
    samples: &[SampleSet],
    seeds: &[Vec<u64>],
) -> Result<()> {
    let mut csv = String::from("replicate,n,value,digest,seed\n");
    for (s, reps) in samples.iter().zip(seeds) {
        for (j, (&v, &seed)) in s.values.iter().zip(reps).enumerate() {
            csv.push_str(&format!("{j},{},{v},{digest},{seed}\n", s.n));
        }
    }
    fs::write(out.join("statistics.csv"), csv)?;
    let _ = config;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_results_csv(
    out: &Path,
    digest: &str,
    config: &ExperimentConfig,
    rows: &[ResultRow],
) -> Result<()> {
    let mut csv = String::from("check,n,param,value,stderr,bound,pass,digest,seed\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{digest},{}\n",
            r.check,
            r.n,
            r.param,
            r.value,
            fmt_opt(r.stderr),
            fmt_opt(r.bound),
            r.pass,
            config.seed
        ));
    }
    fs::write(out.join("results.csv"), csv)?;
    Ok(())
}

fn write_summary_json(
    out: &Path,
    digest: &str,
    config: &ExperimentConfig,
    samples: &[SampleSet],
    rows: &[ResultRow],
    all_pass: bool,
) -> Result<()> {
    let gamma = match &config.gamma {
        Some(p) => {
            let (g, e) = gamma_exponent(p)?;
            serde_json::json!({ "params": p, "gamma": g, "berry_esseen_exponent": e })
        }
        None => serde_json::Value::Null,
    };
    let summary = serde_json::json!({
        "schema_version": 1,
        "name": config.name,
        "digest": digest,
        "seed": config.seed,
        "n_grid": config.n_grid,
        "replicates": config.replicates,
        "gamma": gamma,
        "per_n": samples.iter().map(|s| serde_json::json!({
            "n": s.n,
            "mean": s.mean(),
            "variance": s.variance(),
        })).collect::<Vec<_>>(),
        "checks": config.checks,
        "rows": rows.len(),
        "pass": all_pass,
    });
    fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(())
}
