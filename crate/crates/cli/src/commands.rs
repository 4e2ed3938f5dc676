//! One function per subcommand. Stages talk to each other only through
//! files, so each can be re-run on its own.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use modpso::cluster::{agglomerate, distance_matrix, grid_search, Dendrogram, Linkage, Metric, MERGE_HEADER};
use modpso::fanova::{
    decompose, exact_decompose, fit_forest, marginal_performance, ExactTable, FactorTable, FanovaError,
    ForestParams, MarginalSource, MarginalTable,
};
use modpso::report::{
    self, build_index, curve_to_text, parse_curve, parse_summaries, summaries_to_text, svg, Clustermap,
    PerformanceSummary, CURVE_HEADER, INDEX_FILE, SUMMARY_HEADER,
};
use modpso::runner::{self, enumerate_configs, ExecuteOptions, ExperimentPlan, PerformanceDataset, SpaceDescription};
use modpso::swarm::Module;
use modpso::EffectVector;
use serde::Serialize;

use crate::error::CliError;
use crate::{
    AnalysisOptions, AnalyzeArgs, ClusterArgs, ClusterOptions, EnumerateArgs, Format, PipelineArgs, PlanArgs,
    PlotArgs, RunArgs, Stage,
};

const DATASETS: &str = "datasets";
const EFFECTS: &str = "effects";
const CURVES: &str = "curves";
const MARGINALS: &str = "marginals";
const CLUSTER: &str = "cluster";
const PLOTS: &str = "plots";
const JOURNAL: &str = "journal.tsv";

/// Pair whose marginal table is always emitted alongside the main effects.
const HEATMAP_PAIR: [Module; 2] = [Module::Matrix, Module::Inertia];

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

/// Files named directly, plus the regular files of named directories in
/// path order.
fn expand(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| CliError::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file())
                .collect();
            files.sort();
            out.extend(files);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(CliError::Data(format!("{}: no such file or directory", p.display())));
        }
    }
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
}

fn write_index(out: &Path) -> Result<(), CliError> {
    let index = build_index(out).map_err(|e| CliError::io(out, e))?;
    write(&out.join(INDEX_FILE), &to_json(&index))
}

pub fn resolve_plan(args: &PlanArgs) -> Result<ExperimentPlan, CliError> {
    let mut plan = match &args.plan {
        Some(path) => ExperimentPlan::from_json(&read(path)?).map_err(|e| CliError::in_file(path, e))?,
        None => {
            if args.functions.is_empty() || args.dims.is_empty() {
                return Err(CliError::Usage("give --plan, or both --functions and --dims".into()));
            }
            ExperimentPlan {
                space: SpaceDescription::full(),
                problems: args.functions.clone(),
                dimensions: args.dims.clone(),
                runs_per_cell: 10,
                budget_multiplier: 5000,
                master_seed: 0,
                transform_seed: None,
            }
        }
    };
    if let Some(seed) = args.seed {
        plan.master_seed = seed;
    }
    if !args.dims.is_empty() {
        plan.dimensions = args.dims.clone();
    }
    if !args.functions.is_empty() {
        plan.problems = args.functions.clone();
    }
    if let Some(r) = args.runs {
        plan.runs_per_cell = r;
    }
    if let Some(b) = args.budget_mult {
        plan.budget_multiplier = b;
    }
    plan.validate()?;
    Ok(plan)
}

pub fn enumerate(args: &EnumerateArgs) -> Result<(), CliError> {
    let space = match &args.plan.plan {
        Some(path) => {
            resolve_plan(&PlanArgs { plan: Some(path.clone()), ..args.plan.clone() })?.space
        }
        None => SpaceDescription::full(),
    };
    let configs = enumerate_configs(&space)?;
    let (name, text) = match args.format {
        Format::Csv => {
            let mut s = format!("# count={}\n", configs.len());
            for c in &configs {
                s.push_str(&c.to_string());
                s.push('\n');
            }
            ("configs.txt", s)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Listing {
                count: usize,
                configs: Vec<String>,
            }
            ("configs.json", to_json(&Listing { count: configs.len(), configs: configs.iter().map(|c| c.to_string()).collect() }))
        }
    };
    match &args.out {
        Some(dir) => {
            write(&dir.join(name), &text)?;
            write_index(dir)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_plan(plan: &ExperimentPlan, out: &Path, workers: usize) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let journal = out.join(JOURNAL);
    let last = AtomicUsize::new(0);
    let progress = |done: usize, total: usize| {
        let pct = done * 100 / total.max(1);
        if last.fetch_max(pct, Ordering::Relaxed) < pct || done == total {
            eprintln!("progress {done}/{total} cells ({pct}%)");
        }
    };
    let options = ExecuteOptions { workers, journal: Some(&journal), progress: Some(&progress) };
    let datasets = runner::execute(plan, &options)?;
    let mut paths = Vec::new();
    for d in &datasets {
        let path = out.join(DATASETS).join(format!("{}.csv", d.id()));
        write(&path, &d.to_text())?;
        paths.push(path);
    }
    // The journal only serves resumption; its line order depends on thread
    // scheduling, so it is not left in the output tree.
    fs::remove_file(&journal).map_err(|e| CliError::io(&journal, e))?;
    Ok(paths)
}

pub fn run(args: &RunArgs, workers: usize) -> Result<(), CliError> {
    let plan = resolve_plan(&args.plan)?;
    run_plan(&plan, &args.out, workers)?;
    write_index(&args.out)
}

struct Analysis {
    id: String,
    effects: EffectVector,
    marginals: Vec<(String, MarginalTable)>,
    summary: PerformanceSummary,
}

fn marginals_of<S: MarginalSource + ?Sized>(
    source: &S,
    table: &FactorTable,
) -> Result<Vec<(String, MarginalTable)>, CliError> {
    let mut out = Vec::new();
    for m in Module::ALL {
        let t = marginal_performance(source, table, &[m.index()])?;
        out.push((m.key().to_string(), t));
    }
    let pair = [HEATMAP_PAIR[0].index(), HEATMAP_PAIR[1].index()];
    let t = marginal_performance(source, table, &pair)?;
    out.push((format!("{}+{}", HEATMAP_PAIR[0].key(), HEATMAP_PAIR[1].key()), t));
    Ok(out)
}

fn analyze_dataset(dataset: &PerformanceDataset, opts: &AnalysisOptions) -> Result<Analysis, CliError> {
    let id = dataset.id();
    let summary = PerformanceSummary::of(dataset)?;
    let features: Vec<String> = Module::ALL.iter().map(|m| m.key().to_string()).collect();
    let placeholder = |note: &str| {
        let mut ev = EffectVector::degenerate(features.clone(), opts.max_order);
        ev.metadata.insert("dataset".into(), id.clone());
        ev.metadata.insert("note".into(), note.into());
        ev
    };
    let (effects, marginals) = if opts.exact {
        let table = FactorTable::from_dataset_observed(dataset);
        let source = ExactTable::new(&table)?;
        let effects = match exact_decompose(&table, opts.max_order) {
            Ok(mut ev) => {
                ev.metadata.insert("dataset".into(), id.clone());
                ev.metadata.insert("mode".into(), "exact".into());
                ev
            }
            Err(FanovaError::Degenerate(_)) => placeholder("zero variance"),
            Err(e) => return Err(e.into()),
        };
        (effects, marginals_of(&source, &table)?)
    } else {
        let params = ForestParams { seed: opts.forest_seed, ..ForestParams::default() };
        let table = FactorTable::from_dataset(dataset);
        let effects = match decompose(dataset, params, opts.max_order) {
            Ok((_, ev)) => ev,
            Err(FanovaError::Degenerate(_)) => placeholder("zero variance"),
            Err(e) => return Err(e.into()),
        };
        let forest = fit_forest(&table, params)?;
        (effects, marginals_of(&forest, &table)?)
    };
    let sum: f64 = effects.importances().iter().sum();
    if effects.importances().iter().any(|&i| i < 0.0) || sum > 1.0 + 1e-9 {
        return Err(CliError::Invariant(format!("{id}: importances outside the simplex")));
    }
    Ok(Analysis { id, effects, marginals, summary })
}

fn analyze_files(inputs: &[PathBuf], out: &Path, opts: &AnalysisOptions) -> Result<(), CliError> {
    if opts.max_order == 0 || opts.max_order > Module::ALL.len() {
        return Err(CliError::Usage(format!("--max-order must lie in 1..={}", Module::ALL.len())));
    }
    let files = expand(inputs)?;
    if files.is_empty() {
        return Err(CliError::Data("no dataset files".into()));
    }
    let mut summaries = Vec::new();
    for path in &files {
        let dataset = PerformanceDataset::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))?;
        let a = analyze_dataset(&dataset, opts).map_err(|e| CliError::in_file(path, e))?;
        if a.effects.degenerate {
            eprintln!("{}: degenerate dataset (zero variance); effect vector flagged", a.id);
        }
        match opts.format {
            Format::Csv => write(&out.join(EFFECTS).join(format!("{}.csv", a.id)), &a.effects.to_text())?,
            Format::Json => write(&out.join(EFFECTS).join(format!("{}.json", a.id)), &to_json(&a.effects))?,
        }
        write(&out.join(CURVES).join(format!("{}.csv", a.id)), &curve_to_text(&a.effects))?;
        for (name, table) in &a.marginals {
            write(&out.join(MARGINALS).join(format!("{}.{name}.csv", a.id)), &table.to_text())?;
        }
        summaries.push(a.summary);
    }
    match opts.format {
        Format::Csv => write(&out.join("summaries.csv"), &summaries_to_text(&summaries)),
        Format::Json => write(&out.join("summaries.json"), &to_json(&summaries)),
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    analyze_files(&args.inputs, &args.out, &args.analysis)?;
    write_index(&args.out)
}

fn load_effects(path: &Path) -> Result<EffectVector, CliError> {
    let text = read(path)?;
    let parsed = if text.trim_start().starts_with('{') {
        serde_json::from_str::<EffectVector>(&text).map_err(|e| CliError::Data(e.to_string()))
    } else {
        EffectVector::parse(&text).map_err(CliError::from)
    };
    parsed.map_err(|e| CliError::in_file(path, e))
}

fn cluster_files(inputs: &[PathBuf], out: &Path, opts: &ClusterOptions) -> Result<(), CliError> {
    let mut names = Vec::new();
    let mut vectors: Vec<EffectVector> = Vec::new();
    for path in expand(inputs)? {
        let ev = load_effects(&path)?;
        let name = ev.metadata.get("dataset").cloned().unwrap_or_else(|| stem(&path));
        if ev.degenerate {
            eprintln!("{name}: degenerate effect vector left out of clustering");
            continue;
        }
        if let Some(first) = vectors.first() {
            if first.features != ev.features || first.terms.len() != ev.terms.len() {
                return Err(CliError::Data(format!("{}: effect terms differ from the first file", path.display())));
            }
        }
        names.push(name);
        vectors.push(ev);
    }
    if vectors.len() < 2 {
        return Err(CliError::Data(format!("clustering needs at least 2 effect vectors, got {}", vectors.len())));
    }
    let n = vectors.len();
    let points: Vec<Vec<f64>> = vectors.iter().map(EffectVector::importances).collect();
    let ks = match opts.k {
        Some(k) if !(2..=n.saturating_sub(1).max(2)).contains(&k) => {
            return Err(CliError::Usage(format!("--k must lie in 2..={} for {n} vectors", (n - 1).max(2))));
        }
        Some(k) => k..=k,
        None => 2..=n.saturating_sub(1).max(2),
    };
    let metrics: Vec<Metric> = opts.metric.map_or_else(|| Metric::ALL.to_vec(), |m| vec![m]);
    let linkages: Vec<Linkage> = opts.linkage.map_or_else(|| Linkage::ALL.to_vec(), |l| vec![l]);
    if metrics == [Metric::Cosine] && linkages == [Linkage::Ward] {
        return Err(CliError::Usage("ward linkage requires the euclidean metric".into()));
    }
    let report = grid_search(&names, &points, ks, &metrics, &linkages)?;
    let tree = agglomerate(&distance_matrix(&points, report.metric)?, report.linkage)?.with_labels(names);
    let clustermap = Clustermap::build(&vectors, &report, &tree)?;

    let dir = out.join(CLUSTER);
    write(&dir.join("clustermap.csv"), &clustermap.to_text())?;
    write(&dir.join("dendrogram.csv"), &tree.to_text())?;
    write(&dir.join("report.json"), &format!("{}\n", report.to_json()))
}

pub fn cluster(args: &ClusterArgs) -> Result<(), CliError> {
    cluster_files(&args.inputs, &args.out, &args.cluster)?;
    write_index(&args.out)
}

enum PlotInput {
    Summaries(Vec<PerformanceSummary>),
    Curve(Vec<report::CurvePoint>),
    Marginal(MarginalTable),
    Dendrogram(Dendrogram),
}

fn first_data_line(text: &str) -> &str {
    text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("")
}

fn classify(path: &Path, text: &str) -> Result<Option<PlotInput>, CliError> {
    let first = first_data_line(text);
    let wrap = |e: CliError| CliError::in_file(path, e);
    Ok(Some(if first == SUMMARY_HEADER {
        PlotInput::Summaries(parse_summaries(text).map_err(|e| wrap(e.into()))?)
    } else if first == CURVE_HEADER {
        PlotInput::Curve(parse_curve(text).map_err(|e| wrap(e.into()))?)
    } else if first == MERGE_HEADER {
        PlotInput::Dendrogram(Dendrogram::parse(text).map_err(|e| wrap(e.into()))?)
    } else if first.ends_with(",value") {
        PlotInput::Marginal(MarginalTable::parse(text).map_err(|e| wrap(e.into()))?)
    } else {
        return Ok(None);
    }))
}

fn plot_files(inputs: &[PathBuf], out: &Path) -> Result<usize, CliError> {
    let mut written = 0;
    for path in expand(inputs)? {
        let text = read(&path)?;
        let title = stem(&path);
        let svg = match classify(&path, &text)? {
            Some(PlotInput::Summaries(s)) => svg::boxplots(&s),
            Some(PlotInput::Curve(c)) => svg::cumulative_curve(&c, &title),
            Some(PlotInput::Marginal(m)) => svg::heatmap(&m, &title),
            Some(PlotInput::Dendrogram(d)) => svg::dendrogram(&d, &title),
            None => {
                eprintln!("{}: not a plottable file, skipped", path.display());
                continue;
            }
        };
        write(&out.join(format!("{title}.svg")), &svg)?;
        written += 1;
    }
    Ok(written)
}

pub fn plot(args: &PlotArgs) -> Result<(), CliError> {
    if plot_files(&args.inputs, &args.out)? == 0 {
        return Err(CliError::Data("no plottable input files".into()));
    }
    write_index(&args.out)
}

#[derive(Serialize)]
struct PipelineManifest<'a> {
    plan: Option<String>,
    out: String,
    stages: &'a [Stage],
    master_seed: u64,
    transform_seed: u64,
    forest_seed: u64,
    max_order: usize,
    exact: bool,
    format: Format,
    k: Option<usize>,
    metric: Option<Metric>,
    linkage: Option<Linkage>,
}

pub fn pipeline(args: &PipelineArgs, workers: usize) -> Result<(), CliError> {
    let plan = resolve_plan(&args.plan)?;
    let out = &args.out;
    let mut stages = args.stages.clone();
    stages.sort();
    stages.dedup();
    let manifest = PipelineManifest {
        plan: args.plan.plan.as_ref().map(|p| p.display().to_string()),
        out: out.display().to_string(),
        stages: &stages,
        master_seed: plan.master_seed,
        transform_seed: plan.transform_seed(),
        forest_seed: args.analysis.forest_seed,
        max_order: args.analysis.max_order,
        exact: args.analysis.exact,
        format: args.analysis.format,
        k: args.cluster.k,
        metric: args.cluster.metric,
        linkage: args.cluster.linkage,
    };
    write(&out.join("manifest.json"), &to_json(&manifest))?;
    write(&out.join("plan.json"), &format!("{}\n", plan.to_json()))?;

    let datasets = out.join(DATASETS);
    if stages.contains(&Stage::Run) {
        run_plan(&plan, out, workers)?;
    }
    if stages.contains(&Stage::Analyze) {
        analyze_files(std::slice::from_ref(&datasets), out, &args.analysis)?;
    }
    if stages.contains(&Stage::Cluster) {
        let usable = expand(&[out.join(EFFECTS)])?
            .iter()
            .filter(|p| load_effects(p).is_ok_and(|e| !e.degenerate))
            .count();
        if usable >= 2 {
            cluster_files(&[out.join(EFFECTS)], out, &args.cluster)?;
        } else {
            eprintln!("clustering skipped: {usable} usable effect vector(s)");
        }
    }
    if stages.contains(&Stage::Plot) {
        let mut sources = vec![out.join(CURVES), out.join(MARGINALS)];
        for extra in ["summaries.csv", "cluster/dendrogram.csv"] {
            if out.join(extra).is_file() {
                sources.push(out.join(extra));
            }
        }
        sources.retain(|p| p.exists());
        if !sources.is_empty() {
            plot_files(&sources, &out.join(PLOTS))?;
        }
    }
    write_index(out)
}
