//! One function per pipeline command. Every command reads and writes only
//! the documented file formats, and all output files are written through a
//! temp-file-then-rename so interrupted runs never leave partial artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};

use tvnet::data::{load_dataset, save_dataset, PseudoTimeDataset};
use tvnet::evaluate::{auc, geweke_test, heidelberger_test, roc_curve};
use tvnet::gibbs::{gibbs_fit, read_draws, write_draws, ModelHyperparams, SamplerConfig};
use tvnet::network::{
    assemble_network, export_edges, read_summary, summarize, write_summary, LocalFitSummary,
};
use tvnet::screening::{holp_screen, ScreenBudget};
use tvnet::simulate::{
    read_truth_json, simulate_dataset, write_truth_json, SimulationSpec,
};
use tvnet::tune::grid_search;
use tvnet::RngStream;

/// Writes `content` to `path` atomically.
fn write_atomic(path: &Path, write_fn: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    write_fn(&tmp)?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", tmp.display()))?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
}

/// Loads and standardizes the input dataset, naming the file on failure.
fn load_input(path: &Path) -> Result<PseudoTimeDataset> {
    let ds = load_dataset(path).with_context(|| format!("input {}", path.display()))?;
    ds.standardize()
        .with_context(|| format!("standardizing input {}", path.display()))
}

/// Parses a `--targets` list of node names (or indices) into indices.
fn resolve_targets(spec: Option<&str>, ds: &PseudoTimeDataset) -> Result<Vec<usize>> {
    match spec {
        None => Ok((0..ds.n_nodes()).collect()),
        Some(list) => list
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                if let Some(idx) = ds.node_index(tok) {
                    return Ok(idx);
                }
                if let Ok(idx) = tok.parse::<usize>() {
                    if idx < ds.n_nodes() {
                        return Ok(idx);
                    }
                }
                Err(anyhow!("targets: unknown node {tok:?}"))
            })
            .collect(),
    }
}

fn parse_budget(spec: Option<&str>) -> Result<Option<ScreenBudget>> {
    match spec {
        None => Ok(None),
        Some("auto") => Ok(Some(ScreenBudget::Auto)),
        Some(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| anyhow!("screen-budget: expected `auto` or an integer, got {v:?}"))?;
            Ok(Some(ScreenBudget::Fixed(n)))
        }
    }
}

fn parse_grid(name: &str, spec: &str) -> Result<Vec<f64>> {
    let vals: Result<Vec<f64>> = spec
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("{name}: bad grid value {tok:?}"))
        })
        .collect();
    let vals = vals?;
    if vals.is_empty() {
        bail!("{name}: empty grid");
    }
    Ok(vals)
}

// ---------------------------------------------------------------------------

pub struct SimulateOpts {
    pub spec: SimulationSpec,
    pub output_dir: PathBuf,
}

pub fn simulate(opts: &SimulateOpts) -> Result<()> {
    ensure_dir(&opts.output_dir)?;
    let mut rng = RngStream::new(opts.spec.seed, 0);
    // simulate_dataset applies the dropout pass itself when omega is set
    let (ds, truth) = simulate_dataset(&opts.spec, &mut rng)?;
    let data_path = opts.output_dir.join("data.csv");
    write_atomic(&data_path, |tmp| Ok(save_dataset(&ds, tmp)?))?;
    let truth_path = opts.output_dir.join("truth.json");
    write_atomic(&truth_path, |tmp| Ok(write_truth_json(&truth, tmp)?))?;
    println!(
        "wrote {} ({} samples x {} nodes) and {}",
        data_path.display(),
        ds.n_samples(),
        ds.n_nodes(),
        truth_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

pub struct ScreenOpts {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub budget: ScreenBudget,
    pub targets: Option<String>,
}

pub fn screen(opts: &ScreenOpts) -> Result<()> {
    ensure_dir(&opts.output_dir)?;
    let ds = load_input(&opts.input)?;
    let targets = resolve_targets(opts.targets.as_deref(), &ds)?;
    let path = opts.output_dir.join("screen.csv");
    write_atomic(&path, |tmp| {
        let mut out = std::io::BufWriter::new(std::fs::File::create(tmp)?);
        writeln!(out, "target,rank,predictor")?;
        for &target in &targets {
            let picked = holp_screen(&ds, target, opts.budget)?;
            for (rank, &j) in picked.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{}",
                    ds.node_names()[target],
                    rank + 1,
                    ds.node_names()[j]
                )?;
            }
        }
        out.flush()?;
        Ok(())
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn read_screen_file(path: &Path, ds: &PseudoTimeDataset) -> Result<Vec<(usize, Vec<usize>)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading screen file {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("target,rank,predictor") => {}
        other => bail!("screen file {}: bad header {other:?}", path.display()),
    }
    let mut per_target: Vec<(usize, Vec<usize>)> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            bail!("screen file: bad row {line:?}");
        }
        let target = ds
            .node_index(fields[0])
            .ok_or_else(|| anyhow!("screen file: unknown target {:?}", fields[0]))?;
        let predictor = ds
            .node_index(fields[2])
            .ok_or_else(|| anyhow!("screen file: unknown predictor {:?}", fields[2]))?;
        match per_target.last_mut() {
            Some((t, preds)) if *t == target => preds.push(predictor),
            _ => per_target.push((target, vec![predictor])),
        }
    }
    Ok(per_target)
}

// ---------------------------------------------------------------------------

pub struct FitOpts {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub hyper: ModelHyperparams,
    pub sampler: SamplerConfig,
    pub workers: usize,
    pub targets: Option<String>,
    pub screen_budget: Option<ScreenBudget>,
    pub screen_file: Option<PathBuf>,
}

pub fn fit(opts: &FitOpts) -> Result<()> {
    let draws_dir = opts.output_dir.join("draws");
    let summaries_dir = opts.output_dir.join("summaries");
    ensure_dir(&draws_dir)?;
    ensure_dir(&summaries_dir)?;
    let ds = load_input(&opts.input)?;
    let targets = resolve_targets(opts.targets.as_deref(), &ds)?;

    // predictor lists: explicit screen file, inline screening, or all others
    let screened: Option<Vec<(usize, Vec<usize>)>> = match (&opts.screen_file, opts.screen_budget) {
        (Some(path), _) => Some(read_screen_file(path, &ds)?),
        (None, Some(budget)) => {
            let mut lists = Vec::with_capacity(targets.len());
            for &target in &targets {
                lists.push((target, holp_screen(&ds, target, budget)?));
            }
            Some(lists)
        }
        (None, None) => None,
    };
    let predictors_for = |target: usize| -> Result<Vec<usize>> {
        match &screened {
            None => Ok((0..ds.n_nodes()).filter(|&j| j != target).collect()),
            Some(lists) => lists
                .iter()
                .find(|(t, _)| *t == target)
                .map(|(_, preds)| preds.clone())
                .ok_or_else(|| {
                    anyhow!("screen file has no entry for target {}", ds.node_names()[target])
                }),
        }
    };

    let next = AtomicUsize::new(0);
    let failures: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let workers = opts.workers.clamp(1, targets.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= targets.len() {
                    break;
                }
                let target = targets[idx];
                let name = &ds.node_names()[target];
                let run = || -> Result<()> {
                    let predictors = predictors_for(target)?;
                    let draws = gibbs_fit(&ds, target, &predictors, &opts.hyper, &opts.sampler)?;
                    let summary = summarize(&draws)?;
                    write_atomic(&draws_dir.join(format!("{name}.csv")), |tmp| {
                        Ok(write_draws(&draws, tmp)?)
                    })?;
                    write_atomic(&summaries_dir.join(format!("{name}.csv")), |tmp| {
                        Ok(write_summary(&summary, tmp)?)
                    })?;
                    Ok(())
                };
                if let Err(e) = run() {
                    failures.lock().unwrap().push(format!("{name}: {e}"));
                }
            });
        }
    });
    let failures = failures.into_inner().unwrap();
    if !failures.is_empty() {
        bail!("{} target fit(s) failed: {}", failures.len(), failures.join("; "));
    }
    println!(
        "fitted {} targets into {} and {}",
        targets.len(),
        draws_dir.display(),
        summaries_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

fn load_summaries(dir: &Path) -> Result<Vec<LocalFitSummary>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading summaries directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no summary files in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| Ok(read_summary(p)?))
        .collect::<Result<Vec<_>>>()
}

pub struct AssembleOpts {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub phi: f64,
}

pub fn assemble(opts: &AssembleOpts) -> Result<()> {
    ensure_dir(&opts.output_dir)?;
    let summaries = load_summaries(&opts.input)?;
    let net = assemble_network(&summaries, opts.phi)?;
    let path = opts.output_dir.join("edges.csv");
    write_atomic(&path, |tmp| Ok(export_edges(&net, tmp)?))?;
    println!("wrote {} ({} edges at phi={})", path.display(), net.edge_count(), opts.phi);
    Ok(())
}

pub struct SweepOpts {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub phi_grid: Vec<f64>,
}

pub fn sweep_threshold(opts: &SweepOpts) -> Result<()> {
    ensure_dir(&opts.output_dir)?;
    let summaries = load_summaries(&opts.input)?;
    let path = opts.output_dir.join("sweep.csv");
    let mut grid = opts.phi_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    write_atomic(&path, |tmp| {
        let mut out = std::io::BufWriter::new(std::fs::File::create(tmp)?);
        writeln!(out, "phi,edge_count")?;
        for &phi in &grid {
            let net = assemble_network(&summaries, phi)?;
            writeln!(out, "{phi},{}", net.edge_count())?;
        }
        out.flush()?;
        Ok(())
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------

pub struct EvaluateOpts {
    pub input: PathBuf,
    pub truth: PathBuf,
    pub output_dir: PathBuf,
}

pub fn evaluate(opts: &EvaluateOpts) -> Result<()> {
    ensure_dir(&opts.output_dir)?;
    let truth = read_truth_json(&opts.truth)?;
    let summaries = load_summaries(&opts.input)?;
    let curve = roc_curve(&truth, &summaries)?;
    let area = auc(&curve)?;
    let roc_path = opts.output_dir.join("roc.csv");
    write_atomic(&roc_path, |tmp| {
        let mut out = std::io::BufWriter::new(std::fs::File::create(tmp)?);
        writeln!(out, "fp_rate,tp_rate")?;
        for (fp, tp) in &curve {
            writeln!(out, "{fp},{tp}")?;
        }
        out.flush()?;
        Ok(())
    })?;
    let auc_path = opts.output_dir.join("auc.csv");
    write_atomic(&auc_path, |tmp| {
        let mut out = std::io::BufWriter::new(std::fs::File::create(tmp)?);
        writeln!(out, "auc")?;
        writeln!(out, "{area}")?;
        out.flush()?;
        Ok(())
    })?;
    println!("wrote {} and {} (AUC = {area:.4})", roc_path.display(), auc_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------

pub struct DiagnoseOpts {
    pub input: PathBuf,
    pub output_dir: PathBuf,
}

pub fn diagnose(opts: &DiagnoseOpts) -> Result<()> {
    ensure_dir(&opts.output_dir)?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&opts.input)
        .with_context(|| format!("reading draws directory {}", opts.input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no draw files in {}", opts.input.display());
    }
    let path = opts.output_dir.join("diagnostics.csv");
    write_atomic(&path, |tmp| {
        let mut out = std::io::BufWriter::new(std::fs::File::create(tmp)?);
        writeln!(
            out,
            "target,parameter,geweke_z,geweke_p,heidel_stationarity_p,heidel_halfwidth_pass"
        )?;
        for p in &paths {
            let draws = read_draws(p)?;
            let mut chains: Vec<(String, Vec<f64>)> = Vec::new();
            chains.push(("a".into(), draws.draws.iter().map(|s| s.a).collect()));
            chains.push(("tau".into(), draws.draws.iter().map(|s| s.tau).collect()));
            for (j, name) in draws.predictor_names.iter().enumerate() {
                for t in 0..draws.t_len {
                    chains.push((
                        format!("b.t{}.{name}", t + 1),
                        draws.draws.iter().map(|s| s.b[(t, j)]).collect(),
                    ));
                }
            }
            for (param, chain) in chains {
                let (gz, gp) = match geweke_test(&chain) {
                    Ok(g) => (format!("{}", g.z), format!("{}", g.p)),
                    Err(_) => ("nan".into(), "nan".into()),
                };
                let (hp, hw) = match heidelberger_test(&chain) {
                    Ok(h) => (format!("{}", h.stationarity_p), h.halfwidth_pass.to_string()),
                    Err(_) => ("nan".into(), "false".into()),
                };
                writeln!(out, "{},{param},{gz},{gp},{hp},{hw}", draws.target_name)?;
            }
        }
        out.flush()?;
        Ok(())
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------

pub struct TuneOpts {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub lambda_grid: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub sampler: SamplerConfig,
    pub targets: Option<String>,
}

pub fn tune(opts: &TuneOpts) -> Result<()> {
    ensure_dir(&opts.output_dir)?;
    let ds = load_input(&opts.input)?;
    let targets = resolve_targets(opts.targets.as_deref(), &ds)?;
    let result = grid_search(&ds, &targets, &opts.lambda_grid, &opts.k_grid, &opts.sampler)?;
    let scores_path = opts.output_dir.join("tune_scores.csv");
    write_atomic(&scores_path, |tmp| {
        let mut out = std::io::BufWriter::new(std::fs::File::create(tmp)?);
        writeln!(out, "lambda,k,target,mean_log_lik,error")?;
        for cell in &result.table {
            writeln!(
                out,
                "{},{},{},{},{}",
                cell.lambda,
                cell.k,
                ds.node_names()[cell.target],
                cell.mean_log_lik.map_or("nan".into(), |v| format!("{v}")),
                cell.error.as_deref().unwrap_or("")
            )?;
        }
        out.flush()?;
        Ok(())
    })?;
    let best_path = opts.output_dir.join("tune_best.csv");
    write_atomic(&best_path, |tmp| {
        let mut out = std::io::BufWriter::new(std::fs::File::create(tmp)?);
        writeln!(out, "lambda,k,total_mean_log_lik")?;
        writeln!(out, "{},{},{}", result.best_lambda, result.best_k, result.best_score)?;
        out.flush()?;
        Ok(())
    })?;
    println!(
        "wrote {} and {} (best lambda = {}, k = {})",
        scores_path.display(),
        best_path.display(),
        result.best_lambda,
        result.best_k
    );
    Ok(())
}

/// Shared parsing of grid strings for tune.
pub fn tune_grids(lambda: Option<&str>, k: Option<&str>) -> Result<(Vec<f64>, Vec<f64>)> {
    let lambda_grid = parse_grid(
        "lambda-grid",
        lambda.ok_or_else(|| anyhow!("lambda-grid: required for tune"))?,
    )?;
    let k_grid = parse_grid("k-grid", k.ok_or_else(|| anyhow!("k-grid: required for tune"))?)?;
    Ok((lambda_grid, k_grid))
}

pub fn parse_phi_grid(spec: &str) -> Result<Vec<f64>> {
    parse_grid("phi-grid", spec)
}

pub fn screen_budget_from(spec: Option<&str>) -> Result<Option<ScreenBudget>> {
    parse_budget(spec)
}
