// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use dss_core::data::{load_csv, load_matrix_csv, Dataset, LoadOptions, PredictionDesign, RngConfig};
use dss_core::dss::{select_heuristic, solve_path, summarize as dss_summarize, Selection, SolutionPath, SparsitySummary};
use dss_core::glm::{logistic_lambda_grid, logistic_solve_path, logistic_summarize, sample_logistic, LogisticSamplerConfig, ProbabilityField};
use dss_core::graph::{
    default_graph_grid, graph_solve_path, read_matrix_csv, sample_covariance_posterior, write_edges_csv, write_matrix_csv,
    CovSummary,
};
use dss_core::horseshoe::{sample_horseshoe_chains, GlobalScale, HorseshoeConfig};
use dss_core::model_space::{
    bma_draws, enumerate_models, gibbs_search, GibbsConfig, HyperGPreset, ModelPrior, ModelSpacePosterior, PriorConfig,
};
use dss_core::plot::{render_coef, render_psi, render_rho, write_coef_csv};
use dss_core::posterior::PosteriorDraws;
use dss_core::{DssError, Result};
use log::info;
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::{
    DataArgs, ExportArgs, FitArgs, GlmArgs, GlobalKind, GraphArgs, ModelPriorKind, PlotArgs, PriorKind, SelectArgs,
    SummarizeArgs, WeightKind,
};

const MANIFEST: &str = "manifest.json";

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn open_artifact(path: &Path, produced_by: &str) -> Result<BufReader<File>> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(DssError::PipelineOrder(format!(
            "{} not found; run `dss {produced_by}` first",
            path.display()
        ))),
        Err(e) => Err(e.into()),
    }
}

fn read_manifest(out: &Path) -> Map<String, Value> {
    fs::read_to_string(out.join(MANIFEST))
        .ok()
        .and_then(|s| serde_json::from_str::<Value>(&s).ok())
        .and_then(|v| match v {
            Value::Object(m) => Some(m),
            _ => None,
        })
        .unwrap_or_default()
}

/// Records one command's configuration under its own key, keeping entries
/// written by earlier commands.
fn update_manifest(out: &Path, command: &str, entry: Value) -> Result<()> {
    let mut m = read_manifest(out);
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert(command.into(), entry);
    let text = serde_json::to_string_pretty(&Value::Object(m)).map_err(|e| DssError::Io(e.into()))?;
    fs::write(out.join(MANIFEST), text + "\n")?;
    Ok(())
}

fn data_json(d: &DataArgs) -> Value {
    json!({
        "data": d.data.as_ref().map(|p| p.display().to_string()),
        "response": d.response,
        "log": d.log,
        "no_standardize": d.no_standardize,
    })
}

/// Fills unset data options from the `fit` entry of the manifest.
fn resolve_data(d: &DataArgs, out: &Path) -> Result<DataArgs> {
    if d.data.is_some() {
        return Ok(d.clone());
    }
    let m = read_manifest(out);
    let fit = m
        .get("fit")
        .ok_or_else(|| DssError::Argument("no --data given and no fit recorded in the output directory".into()))?;
    let path = fit
        .get("data")
        .and_then(Value::as_str)
        .ok_or_else(|| DssError::Argument("manifest fit entry has no data path".into()))?;
    Ok(DataArgs {
        data: Some(PathBuf::from(path)),
        response: d
            .response
            .clone()
            .or_else(|| fit.get("response").and_then(Value::as_str).map(String::from)),
        log: if d.log.is_empty() {
            fit.get("log")
                .and_then(Value::as_array)
                .map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect())
                .unwrap_or_default()
        } else {
            d.log.clone()
        },
        no_standardize: d.no_standardize || fit.get("no_standardize").and_then(Value::as_bool).unwrap_or(false),
    })
}

fn load(d: &DataArgs) -> Result<Dataset> {
    let path = d
        .data
        .as_ref()
        .ok_or_else(|| DssError::Argument("--data is required".into()))?;
    load_csv(
        path,
        &LoadOptions {
            response: d.response.clone(),
            log_columns: d.log.clone(),
            no_standardize: d.no_standardize,
        },
    )
}

fn binary_response(data: &Dataset) -> Result<Vec<f64>> {
    let (_, y) = data.unstandardize();
    y.iter()
        .map(|v| {
            let r = v.round();
            if (v - r).abs() < 1e-8 && (r == 0.0 || r == 1.0) {
                Ok(r)
            } else {
                Err(DssError::Argument(format!("logistic response must be 0/1, found {v}")))
            }
        })
        .collect()
}

fn prior_config(a: &FitArgs, n: usize) -> Result<PriorConfig> {
    let mp = match a.model_prior {
        ModelPriorKind::Uniform => ModelPrior::Uniform,
        ModelPriorKind::BetaBinomial => ModelPrior::BetaBinomial,
    };
    let cfg = match a.prior {
        PriorKind::Gprior => {
            let g = if a.g == "n" {
                n as f64
            } else {
                a.g.parse::<f64>()
                    .map_err(|_| DssError::Argument(format!("--g must be a number or 'n', got '{}'", a.g)))?
            };
            PriorConfig::fixed_g(g, mp)
        }
        PriorKind::HyperG => {
            let preset = HyperGPreset::parse(&a.preset)
                .ok_or_else(|| DssError::Argument(format!("unknown hyper-g preset '{}'", a.preset)))?;
            PriorConfig::hyper_g(preset.build(n), mp)
        }
        _ => unreachable!("model-space prior requested for a non-conjugate fit"),
    };
    Ok(match a.budget {
        Some(m) => cfg.with_budget(m),
        None => cfg,
    })
}

pub fn fit(a: &FitArgs) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    let data = load(&a.data)?;
    let rng = RngConfig::new(a.seed).with_stream(a.stream);
    let names = data.names().to_vec();
    let mut entry = json!({
        "prior": format!("{:?}", a.prior).to_lowercase(),
        "seed": a.seed,
        "stream": a.stream,
        "draws": a.draws,
        "n": data.n(),
        "p": data.p(),
    });
    entry
        .as_object_mut()
        .expect("object literal")
        .extend(data_json(&a.data).as_object().cloned().unwrap_or_default());

    let draws = match a.prior {
        PriorKind::Horseshoe => {
            if a.chains == 0 || a.draws % a.chains != 0 {
                return Err(DssError::Argument(format!(
                    "--draws {} is not divisible into {} chains",
                    a.draws, a.chains
                )));
            }
            let cfg = HorseshoeConfig {
                draws: a.draws / a.chains,
                burn_in: a.burn_in,
                thin: a.thin,
                global: match a.global {
                    GlobalKind::Unit => GlobalScale::Unit,
                    GlobalKind::Noise => GlobalScale::NoiseScaled,
                },
                frozen: None,
            };
            let m = entry.as_object_mut().expect("object literal");
            m.insert("burn_in".into(), json!(a.burn_in));
            m.insert("thin".into(), json!(a.thin));
            m.insert("chains".into(), json!(a.chains));
            m.insert("global".into(), json!(format!("{:?}", a.global).to_lowercase()));
            sample_horseshoe_chains(&data, &cfg, &rng, a.chains)?
        }
        PriorKind::Logistic => {
            let y = binary_response(&data)?;
            let cfg = LogisticSamplerConfig {
                draws: a.draws,
                burn_in: a.burn_in,
                thin: a.thin,
                ..LogisticSamplerConfig::default()
            };
            let m = entry.as_object_mut().expect("object literal");
            m.insert("burn_in".into(), json!(a.burn_in));
            m.insert("thin".into(), json!(a.thin));
            m.insert("slope_prior_sd".into(), json!(cfg.prior_sd));
            m.insert("intercept_prior_sd".into(), json!(cfg.intercept_sd));
            sample_logistic(data.x(), &y, &cfg, &rng)?
        }
        PriorKind::Gprior | PriorKind::HyperG => {
            let prior = prior_config(a, data.n())?;
            let space = match a.gibbs_sweeps {
                Some(sweeps) => gibbs_search(&data, &prior, &GibbsConfig::new(sweeps), &rng)?,
                None => enumerate_models(&data, &prior)?,
            };
            info!("model space holds {} records", space.records().len());
            space.write_models_csv(create(&a.out, "models.csv")?)?;
            space.write_inclusion_csv(create(&a.out, "inclusion.csv")?, &names)?;
            let m = entry.as_object_mut().expect("object literal");
            m.insert("g".into(), json!(a.g));
            m.insert("preset".into(), json!(a.preset));
            m.insert("model_prior".into(), json!(format!("{:?}", a.model_prior).to_lowercase()));
            m.insert("budget".into(), json!(a.budget));
            m.insert(
                "search".into(),
                match a.gibbs_sweeps {
                    Some(s) => json!({ "gibbs_sweeps": s }),
                    None => json!("enumerate"),
                },
            );
            bma_draws(&data, &space, &prior, a.draws, &rng)?
        }
    };
    draws.write_csv(create(&a.out, "draws.csv")?, &names)?;
    update_manifest(&a.out, "fit", entry)
}

fn read_draws(path: &Path, names: &[String]) -> Result<PosteriorDraws> {
    let (draws, header) = PosteriorDraws::read_csv(open_artifact(path, "fit")?)?;
    if header != names {
        return Err(DssError::Schema(format!(
            "draws columns [{}] do not match dataset predictors [{}]",
            header.join(","),
            names.join(",")
        )));
    }
    Ok(draws)
}

/// Raw-scale prediction points, reordered to the dataset's predictor order.
fn read_points(path: &Path, data: &Dataset) -> Result<DMatrix<f64>> {
    let (cols, m) = load_matrix_csv(path, &[])?;
    let idx: Vec<usize> = data
        .names()
        .iter()
        .map(|n| {
            cols.iter()
                .position(|c| c == n)
                .ok_or_else(|| DssError::Schema(format!("prediction file lacks column '{n}'")))
        })
        .collect::<Result<_>>()?;
    Ok(m.select_columns(&idx))
}

fn support_names(support: &[usize], names: &[String]) -> String {
    if support.is_empty() {
        return "(none)".into();
    }
    support.iter().map(|&j| names[j].as_str()).collect::<Vec<_>>().join(", ")
}

fn report(data: &Dataset, summary: &SparsitySummary, sel: &Selection) -> Result<String> {
    let names = data.names();
    let mut s = String::new();
    let (lo, hi) = summary.benchmark_interval;
    let _ = writeln!(s, "benchmark E(rho2_0) = {:.4}  [{:.4}, {:.4}]", summary.benchmark, lo, hi);
    let _ = writeln!(s, "\nsize  rho2 mean [interval]          psi mean [interval]           support");
    for r in &summary.rows {
        let _ = writeln!(
            s,
            "{:>4}  {:.4} [{:.4}, {:.4}]  {:.4} [{:.4}, {:.4}]  {}",
            r.cardinality,
            r.rho_mean,
            r.rho_lo,
            r.rho_hi,
            r.psi_mean,
            r.psi_lo,
            r.psi_hi,
            support_names(&r.support, names)
        );
    }
    let r2 = data.refit_r_squared(&sel.support)?;
    let (icpt, slopes) = data.raw_coefficients(&sel.gamma);
    let _ = writeln!(s, "\nselected model: {} variables at lambda = {:.6e}", sel.cardinality, sel.lambda);
    let _ = writeln!(s, "support: {}", support_names(&sel.support, names));
    let _ = writeln!(s, "refit R2: {r2:.4}");
    let _ = writeln!(s, "coefficients (raw scale):");
    let _ = writeln!(s, "  {:<12} {:>14.6}", "(intercept)", icpt);
    for &j in &sel.support {
        let _ = writeln!(s, "  {:<12} {:>14.6}", names[j], slopes[j]);
    }
    Ok(s)
}

pub fn summarize(a: &SummarizeArgs) -> Result<()> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(DssError::Argument(format!("--level must lie in (0, 1), got {}", a.level)));
    }
    let da = resolve_data(&a.data, &a.out)?;
    let data = load(&da)?;
    let names = data.names().to_vec();
    let draws_path = a.draws.clone().unwrap_or_else(|| a.out.join("draws.csv"));
    let draws = read_draws(&draws_path, &names)?;
    if draws.intercept().is_some() {
        return Err(DssError::Argument(
            "draws carry an intercept column; use `dss glm-summarize` for logistic posteriors".into(),
        ));
    }
    fs::create_dir_all(&a.out)?;
    let design = match (&a.design, &a.augment) {
        (Some(f), _) => PredictionDesign::user_supplied(&data, &read_points(f, &data)?)?,
        (None, Some(f)) => PredictionDesign::augmented(&data, &read_points(f, &data)?)?,
        (None, None) => PredictionDesign::from_dataset(&data),
    };
    let beta_bar = draws.mean_beta();
    let weights = match a.weights {
        WeightKind::Mean => beta_bar.clone(),
        WeightKind::Uniform => vec![1.0; beta_bar.len()],
    };
    let path = solve_path(&beta_bar, &design, &weights)?;
    let summary = dss_summarize(&path, &draws, &design, a.level)?;
    let sel = select_heuristic(&summary)?;

    path.write_csv(create(&a.out, "path.csv")?, &names)?;
    summary.write_csv(create(&a.out, "summary.csv")?)?;
    write_coef_csv(create(&a.out, "coef.csv")?, &summary, &names)?;
    let text = report(&data, &summary, &sel)?;
    fs::write(a.out.join("report.txt"), &text)?;
    print!("{text}");

    let mut entry = data_json(&da);
    let m = entry.as_object_mut().expect("object literal");
    m.insert("draws".into(), json!(draws_path.display().to_string()));
    m.insert("weights".into(), json!(format!("{:?}", a.weights).to_lowercase()));
    m.insert("design".into(), json!(a.design.as_ref().map(|p| p.display().to_string())));
    m.insert("augment".into(), json!(a.augment.as_ref().map(|p| p.display().to_string())));
    m.insert("level".into(), json!(a.level));
    m.insert("selected".into(), json!(sel.support.iter().map(|&j| names[j].clone()).collect::<Vec<_>>()));
    update_manifest(&a.out, "summarize", entry)
}

pub fn plot(a: &PlotArgs) -> Result<()> {
    let summary_path = a.out.join("summary.csv");
    let coef_path = a.out.join("coef.csv");
    let summary = SparsitySummary::read_csv(open_artifact(&summary_path, "summarize")?, None)?;
    let mut files = Vec::new();
    if summary.rows.iter().any(|r| r.rho_mean.is_finite()) {
        fs::write(a.out.join("rho.svg"), render_rho(open_artifact(&summary_path, "summarize")?)?)?;
        files.push("rho.svg");
    } else {
        info!("summary carries no variation-explained values; skipping rho.svg");
    }
    fs::write(a.out.join("psi.svg"), render_psi(open_artifact(&summary_path, "summarize")?)?)?;
    fs::write(a.out.join("coef.svg"), render_coef(open_artifact(&coef_path, "summarize")?)?)?;
    files.extend(["psi.svg", "coef.svg"]);
    update_manifest(&a.out, "plot", json!({ "files": files }))
}

fn load_selection(out: &Path) -> Result<(Selection, SparsitySummary, Vec<String>)> {
    let (path, names) = SolutionPath::read_csv(open_artifact(&out.join("path.csv"), "summarize")?)?;
    let summary = SparsitySummary::read_csv(open_artifact(&out.join("summary.csv"), "summarize")?, Some(&path))?;
    let sel = select_heuristic(&summary)?;
    Ok((sel, summary, names))
}

pub fn select(a: &SelectArgs) -> Result<()> {
    let (sel, summary, names) = load_selection(&a.out)?;
    println!("benchmark: {:.4}", summary.benchmark);
    println!("cardinality: {}", sel.cardinality);
    println!("lambda: {:.6e}", sel.lambda);
    println!("support: {}", support_names(&sel.support, &names));
    for &j in &sel.support {
        println!("  {:<12} {:>14.6}", names[j], sel.gamma[j]);
    }
    Ok(())
}

pub fn glm_summarize(a: &GlmArgs) -> Result<()> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(DssError::Argument(format!("--level must lie in (0, 1), got {}", a.level)));
    }
    let da = resolve_data(&a.data, &a.out)?;
    let data = load(&da)?;
    let names = data.names().to_vec();
    let draws_path = a.draws.clone().unwrap_or_else(|| a.out.join("draws.csv"));
    let draws = read_draws(&draws_path, &names)?;
    if draws.intercept().is_none() {
        return Err(DssError::Argument(
            "draws carry no intercept column; fit with `--prior logistic` first".into(),
        ));
    }
    fs::create_dir_all(&a.out)?;
    let design = PredictionDesign::from_dataset(&data);
    let pi = ProbabilityField::from_draws(&draws, &design)?;
    let grid = logistic_lambda_grid(&design, &pi, a.grid, a.ratio)?;
    let path = logistic_solve_path(&design, &pi, &grid)?;
    let summary = logistic_summarize(&path, &draws, &design, a.level)?;

    path.write_csv(create(&a.out, "path.csv")?, &names)?;
    summary.write_csv(create(&a.out, "summary.csv")?)?;
    write_coef_csv(create(&a.out, "coef.csv")?, &summary, &names)?;
    let mut text = String::from("size  psi mean [interval]           support\n");
    for r in &summary.rows {
        let _ = writeln!(
            text,
            "{:>4}  {:.4} [{:.4}, {:.4}]  {}",
            r.cardinality,
            r.psi_mean,
            r.psi_lo,
            r.psi_hi,
            support_names(&r.support, &names)
        );
    }
    fs::write(a.out.join("report.txt"), &text)?;
    print!("{text}");

    let mut entry = data_json(&da);
    let m = entry.as_object_mut().expect("object literal");
    m.insert("draws".into(), json!(draws_path.display().to_string()));
    m.insert("grid".into(), json!(a.grid));
    m.insert("ratio".into(), json!(a.ratio));
    m.insert("level".into(), json!(a.level));
    update_manifest(&a.out, "glm-summarize", entry)
}

pub fn graph_summarize(a: &GraphArgs) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    let (names, sigma_bar) = match (&a.data, &a.sigma) {
        (Some(f), _) => {
            let (names, x) = load_matrix_csv(f, &a.log)?;
            let rng = RngConfig::new(a.seed).with_stream(a.stream);
            (names, sample_covariance_posterior(&x, a.draws, &rng)?.mean)
        }
        (None, Some(f)) => read_matrix_csv(BufReader::new(File::open(f)?))?,
        (None, None) => return Err(DssError::Argument("give either --data or --sigma".into())),
    };
    let cov = CovSummary::new(sigma_bar)?;
    let grid = default_graph_grid(&cov, a.grid);
    let path = graph_solve_path(&cov, &grid)?;

    write_matrix_csv(create(&a.out, "sigma_bar.csv")?, &names, cov.matrix())?;
    write_edges_csv(create(&a.out, "edges.csv")?, &names, &path)?;
    let mut w = csv::Writer::from_writer(create(&a.out, "graph_path.csv")?);
    w.write_record(["lambda", "edges", "duality_gap"])?;
    for e in &path {
        w.write_record([format!("{}", e.lambda), e.edges.len().to_string(), format!("{:e}", e.duality_gap)])?;
        println!("lambda {:.6e}: {} edges", e.lambda, e.edges.len());
    }
    w.flush()?;

    update_manifest(
        &a.out,
        "graph-summarize",
        json!({
            "data": a.data.as_ref().map(|p| p.display().to_string()),
            "sigma": a.sigma.as_ref().map(|p| p.display().to_string()),
            "log": a.log,
            "draws": a.draws,
            "grid": a.grid,
            "seed": a.seed,
            "stream": a.stream,
        }),
    )
}

pub fn export(a: &ExportArgs) -> Result<()> {
    let (sel, summary, names) = load_selection(&a.out)?;
    let pick = |s: &[usize]| s.iter().map(|&j| names[j].clone()).collect::<Vec<_>>();
    let mut doc = json!({
        "selection": {
            "cardinality": sel.cardinality,
            "lambda": sel.lambda,
            "support": pick(&sel.support),
            "coefficients": names
                .iter()
                .zip(&sel.gamma)
                .map(|(n, g)| (n.clone(), json!(g)))
                .collect::<Map<String, Value>>(),
        },
        "benchmark": summary.benchmark,
    });
    let models = a.out.join("models.csv");
    if models.exists() {
        let space = ModelSpacePosterior::read_models_csv(BufReader::new(File::open(&models)?))?;
        if space.p() != names.len() {
            return Err(DssError::Schema("models.csv and path.csv disagree on the predictor count".into()));
        }
        let m = doc.as_object_mut().expect("object literal");
        m.insert(
            "inclusion".into(),
            Value::Object(
                names
                    .iter()
                    .cloned()
                    .zip(space.inclusion().iter().map(|v| json!(v)))
                    .collect(),
            ),
        );
        m.insert("hpm".into(), json!(pick(&space.hpm()?.support())));
        m.insert("mpm".into(), json!(pick(&space.mpm().support())));
    }
    let text = serde_json::to_string_pretty(&doc).map_err(|e| DssError::Io(e.into()))? + "\n";
    fs::write(a.out.join("export.json"), &text)?;
    print!("{text}");
    Ok(())
}
