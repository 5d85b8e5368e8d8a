//! Command-line front end. Each command loads and validates a scenario,
//! computes its artifacts in memory, writes them to `--out` all-or-nothing,
//! and prints a JSON run report on stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::coupling::{check_consensus, propagate_network, NodeRole};
use crate::error::{Error, ErrorClass, Result};
use crate::evaluator::{evaluate_policies, select_best, RankedPolicies};
use crate::format::{Cell, NamedValues, Table};
use crate::logicmodel::{couple_facts, propagate, FactBinding, ImpactReport};
use crate::scenario::{load_scenario, LoadedScenario, Scenario, SurveySource, TableFormat};
use crate::sim::{normalize_ternary, run_sweep, SweepOutcome, SweepTable};
use crate::survey::{
    aggregate_survey, fit_target, read_survey_csv, regression_data, strip_question,
    write_survey_csv, ConstructMap, DesignMatrix, LikertScale, RegressionModel, SurveyResponse,
};
use crate::we_model::{consensus_curve, sample_surface};

#[derive(Debug, Parser)]
#[command(
    name = "wepolicy",
    version,
    about = "Scenario-driven well-being policy evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunFlags {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Table format; overrides the scenario's output.format.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Overrides every seed in the scenario.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-scope well-being surface and consensus curve.
    Surface(RunFlags),
    /// Check narrow/wide consensus on a probe grid.
    ConsensusCheck(RunFlags),
    /// Aggregate the survey and fit the regression target.
    Fit(RunFlags),
    /// Simulate the policy grid.
    Sweep(RunFlags),
    /// Rank policies under each weighting profile and select the best.
    Select(RunFlags),
    /// Propagate the logic model with coupled facts.
    Impact(RunFlags),
    /// Propagate fact deltas through the parameter network.
    Network(RunFlags),
    /// Validate a scenario without running anything.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Surface(_) => "surface",
            Command::ConsensusCheck(_) => "consensus-check",
            Command::Fit(_) => "fit",
            Command::Sweep(_) => "sweep",
            Command::Select(_) => "select",
            Command::Impact(_) => "impact",
            Command::Network(_) => "network",
            Command::Validate { .. } => "validate",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub scenario: String,
    pub scenario_digest: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
}

/// Files produced by a command, written together at the end.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    fn table(&mut self, stem: &str, table: &Table, format: TableFormat) {
        match format {
            TableFormat::Csv => self.add(format!("{stem}.csv"), table.to_csv()),
            TableFormat::Json => self.add(format!("{stem}.json"), table.to_json()),
        }
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }
}

/// Write every artifact or none: on failure, remove whatever was written
/// (and the directory itself if this call created it).
pub fn write_all(out: &Path, artifacts: &Artifacts) -> Result<Vec<PathBuf>> {
    let created_dir = !out.exists();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        for (name, bytes) in &artifacts.files {
            let path = out.join(name);
            let tmp = out.join(format!(".{name}.partial"));
            fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
            written.push(tmp.clone());
            fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
            written.pop();
            written.push(path);
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            if created_dir {
                let _ = fs::remove_dir_all(out);
            }
            Err(e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Validation => 1,
        ErrorClass::Numerical => 2,
        ErrorClass::Io => 3,
    }
}

/// Parse `args` (including the program name) and run. Returns the process
/// exit code; the report goes to stdout and diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(report) => {
            // a closed stdout must not turn a successful run into a panic
            let _ = writeln!(
                std::io::stdout(),
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: &Command) -> Result<RunReport> {
    let start = Instant::now();
    if let Command::Validate { scenario } = command {
        let loaded = load_scenario(scenario)?;
        let findings = loaded.scenario.validate();
        for f in &findings {
            eprintln!("invalid: {f}");
        }
        if let Some(first) = findings.into_iter().next() {
            return Err(first);
        }
        return Ok(RunReport {
            command: command.name().into(),
            scenario: scenario.display().to_string(),
            scenario_digest: loaded.digest,
            seed: loaded.scenario.effective_seed(),
            outputs: vec![],
            warnings: vec![],
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let flags = match command {
        Command::Surface(f)
        | Command::ConsensusCheck(f)
        | Command::Fit(f)
        | Command::Sweep(f)
        | Command::Select(f)
        | Command::Impact(f)
        | Command::Network(f) => f,
        Command::Validate { .. } => unreachable!(),
    };
    let mut loaded = load_scenario(&flags.scenario)?;
    if let Some(seed) = flags.seed {
        loaded.scenario.override_seed(seed);
    }
    if let Some(first) = loaded.scenario.validate().into_iter().next() {
        return Err(first);
    }
    let format = match flags.format {
        Some(FormatArg::Csv) => TableFormat::Csv,
        Some(FormatArg::Json) => TableFormat::Json,
        None => loaded.scenario.output.format.unwrap_or_default(),
    };
    let artifacts = match command {
        Command::Surface(_) => cmd_surface(&loaded.scenario, format)?,
        Command::ConsensusCheck(_) => cmd_consensus(&loaded.scenario)?,
        Command::Fit(_) => cmd_fit(&loaded)?,
        Command::Sweep(_) => cmd_sweep(&loaded.scenario, format)?,
        Command::Select(_) => cmd_select(&loaded, format)?,
        Command::Impact(_) => cmd_impact(&loaded)?,
        Command::Network(_) => cmd_network(&loaded.scenario)?,
        Command::Validate { .. } => unreachable!(),
    };
    let written = write_all(&flags.out, &artifacts)?;
    Ok(RunReport {
        command: command.name().into(),
        scenario: flags.scenario.display().to_string(),
        scenario_digest: loaded.digest.clone(),
        seed: loaded.scenario.effective_seed(),
        outputs: written.iter().map(|p| p.display().to_string()).collect(),
        warnings: artifacts.warnings,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
    section
        .as_ref()
        .ok_or_else(|| Error::invalid(name, "section is required by this command"))
}

fn cmd_surface(s: &Scenario, format: TableFormat) -> Result<Artifacts> {
    let def = require(&s.surface, "surface")?;
    let model = s.build_model()?;
    let (xn, xw) = (def.x_n.points(), def.x_w.points());
    let mut art = Artifacts::default();
    for (layer, axis) in model.layers().iter().zip([&xn, &xw]) {
        if let Some(peak) = layer.function.quadratic_peak() {
            if axis.iter().any(|x| x.abs() > peak) {
                art.warnings.push(format!(
                    "layer {} uses the quadratic family beyond its peak at {peak}; values are non-monotone there",
                    layer.scope
                ));
            }
        }
    }
    let mut table = Table::new(&["x_n", "x_w", "W"]);
    for p in sample_surface(&model, &xn, &xw)? {
        table.push(vec![
            Cell::Float(p.x_n),
            Cell::Float(p.x_w),
            Cell::Float(p.w),
        ]);
    }
    art.table("surface", &table, format);

    if let Some(axis) = &def.curve {
        let layer = match &def.curve_layer {
            Some(name) => model
                .layers()
                .iter()
                .find(|l| l.scope.label() == name)
                .expect("validated scope"),
            None => &model.layers()[0],
        };
        let mut curve = Table::new(&["x", "W"]);
        for p in consensus_curve(layer, &axis.points())? {
            curve.push(vec![Cell::Float(p.x), Cell::Float(p.w)]);
        }
        art.table("curve", &curve, format);
    }
    Ok(art)
}

fn cmd_consensus(s: &Scenario) -> Result<Artifacts> {
    let def = require(&s.consensus, "consensus")?;
    let model = s.build_model()?;
    let find = |scope: &str| {
        model
            .layers()
            .iter()
            .find(|l| l.scope.label() == scope)
            .expect("validated scope")
    };
    let (narrow, wide) = (find(&def.narrow), find(&def.wide));
    let f = s.build_map()?;
    let probes = s.probe_points(def, f.source_dim());
    let report = check_consensus(narrow, &f, wide, &probes, def.tol)?;
    let mut art = Artifacts::default();
    if !report.holds {
        art.warnings.push(format!(
            "consensus does not hold: max deviation {} exceeds tol {}",
            report.max_deviation, report.tol
        ));
    }
    art.json("consensus.json", &report)?;
    Ok(art)
}

struct Fitted {
    model: RegressionModel,
    baseline: Vec<f64>,
    responses: Vec<SurveyResponse>,
}

fn fit(loaded: &LoadedScenario) -> Result<Fitted> {
    let s = &loaded.scenario;
    let def = require(&s.survey, "survey")?;
    let scale = LikertScale::new(def.scale)?;
    let map = ConstructMap::new(def.construct_map.clone())?;
    let wb = def.wellbeing_index()?;
    let responses = match &def.source {
        SurveySource::File(p) => {
            let path = loaded.resolve(p);
            let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            read_survey_csv(file)?
        }
        SurveySource::Synthetic(syn) => syn.generate(&map, scale)?,
    };
    let baseline = aggregate_survey(&strip_question(&responses, wb), &map, scale)?;
    let (rows, y) = regression_data(&responses, &map, scale, wb)?;
    let names = s.wide_names(map.constructs());
    let design = DesignMatrix::with_intercept(&names, &rows)?;
    let model = fit_target(&design, &y)?;
    Ok(Fitted {
        model,
        baseline,
        responses,
    })
}

fn cmd_fit(loaded: &LoadedScenario) -> Result<Artifacts> {
    let fitted = fit(loaded)?;
    let mut art = Artifacts::default();
    art.json("model.json", &fitted.model)?;
    art.json("aggregate.json", &fitted.baseline)?;
    if matches!(
        loaded.scenario.survey.as_ref().map(|d| &d.source),
        Some(SurveySource::Synthetic(_))
    ) {
        let mut buf = Vec::new();
        write_survey_csv(&mut buf, &fitted.responses)?;
        art.add("survey.csv", buf);
    }
    Ok(art)
}

fn sweep(s: &Scenario) -> Result<SweepOutcome> {
    let cfg = require(&s.dynamics, "dynamics")?;
    let grid = require(&s.sweep_grid, "sweep_grid")?;
    run_sweep(cfg, grid)
}

pub fn sweep_table(table: &SweepTable) -> Table {
    let mut t = Table::new(&["policy_id", "s", "t", "v", "econ", "env", "social"]);
    for r in &table.rows {
        t.push(vec![
            Cell::Int(r.policy_id as u64),
            Cell::Float(r.knobs.s),
            Cell::Float(r.knobs.t),
            Cell::Float(r.knobs.v),
            Cell::Float(r.indicators.economic),
            Cell::Float(r.indicators.environmental),
            Cell::Float(r.indicators.social),
        ]);
    }
    t
}

fn cmd_sweep(s: &Scenario, format: TableFormat) -> Result<Artifacts> {
    let outcome = sweep(s)?;
    let mut art = Artifacts::default();
    art.table("sweep", &sweep_table(&outcome.table), format);
    let mut ternary = Table::new(&["policy_id", "p_econ", "p_env", "p_soc"]);
    for r in normalize_ternary(&outcome.table) {
        ternary.push(vec![
            Cell::Int(r.policy_id as u64),
            Cell::Float(r.p_econ),
            Cell::Float(r.p_env),
            Cell::Float(r.p_soc),
        ]);
    }
    art.table("ternary", &ternary, format);
    if !outcome.skipped.is_empty() {
        art.warnings.push(format!(
            "{} grid combination(s) skipped for exceeding the s + v budget",
            outcome.skipped.len()
        ));
    }
    art.json("skipped.json", &outcome.skipped)?;
    Ok(art)
}

fn ranked_table(ranked: &RankedPolicies, names: &[String]) -> Table {
    let mut header = vec![
        "rank".to_string(),
        "policy_id".to_string(),
        "W_prime".to_string(),
    ];
    header.extend(names.iter().map(|n| format!("x_w_prime_{n}")));
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for (i, r) in ranked.rows.iter().enumerate() {
        let mut row = vec![
            Cell::Int(i as u64 + 1),
            Cell::Int(r.policy_id as u64),
            Cell::Float(r.w_prime),
        ];
        row.extend(r.x_w_prime.iter().map(|v| Cell::Float(*v)));
        t.rows.push(row);
    }
    t
}

struct Selection {
    ranked: Vec<RankedPolicies>,
    selected: BTreeMap<String, usize>,
    sweep: SweepOutcome,
    names: Vec<String>,
}

fn select(loaded: &LoadedScenario) -> Result<Selection> {
    let s = &loaded.scenario;
    let profiles = s.profiles();
    if profiles.is_empty() {
        return Err(Error::invalid(
            "weighting_profiles",
            "select needs weighting_profiles or fact_coupling",
        ));
    }
    let fitted = fit(loaded)?;
    let outcome = sweep(s)?;
    let mut ranked = Vec::with_capacity(profiles.len());
    let mut selected = BTreeMap::new();
    for p in &profiles {
        let r = evaluate_policies(&fitted.model, &fitted.baseline, p, &outcome.table)?;
        selected.insert(p.name.clone(), select_best(&r)?);
        ranked.push(r);
    }
    Ok(Selection {
        ranked,
        selected,
        sweep: outcome,
        names: fitted.model.names.clone(),
    })
}

fn cmd_select(loaded: &LoadedScenario, format: TableFormat) -> Result<Artifacts> {
    let sel = select(loaded)?;
    let mut art = Artifacts::default();
    for r in &sel.ranked {
        art.table(
            &format!("ranked_{}", file_stem(&r.profile)),
            &ranked_table(r, &sel.names),
            format,
        );
        let warned = r.warnings();
        if warned > 0 {
            art.warnings.push(format!(
                "profile {}: {warned} of {} policies exceed the perturbation threshold",
                r.profile,
                r.rows.len()
            ));
        }
    }
    art.json("selection.json", &sel.selected)?;
    Ok(art)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[derive(Serialize)]
struct ImpactOutput<'a> {
    fact_values: Option<NamedValues>,
    selected_policy: Option<usize>,
    #[serde(flatten)]
    report: &'a ImpactReport,
}

fn cmd_impact(loaded: &LoadedScenario) -> Result<Artifacts> {
    let s = &loaded.scenario;
    let def = require(&s.logic_model, "logic_model")?;
    let model = def.model();
    let mut selected_policy = None;
    let (report, fact_values) = match &def.fact_binding {
        None => (propagate(&model, &def.inputs)?, None),
        Some(b) => {
            let fact_names = s.fact_names();
            let values = match (&b.values, &b.from_selection) {
                (Some(v), _) => v.clone(),
                (None, Some(profile)) => {
                    let sel = select(loaded)?;
                    let id = sel.selected[profile];
                    selected_policy = Some(id);
                    sel.sweep.table.rows[id].indicators.to_vec()
                }
                (None, None) => unreachable!("validated binding"),
            };
            let binding = FactBinding {
                bindings: b.bindings.clone(),
                fact_names: fact_names.clone(),
                values: values.clone(),
            };
            let named = NamedValues(fact_names.into_iter().zip(values).collect());
            (couple_facts(&model, &binding, &def.inputs)?, Some(named))
        }
    };
    let mut art = Artifacts::default();
    art.json(
        "impact.json",
        &ImpactOutput {
            fact_values,
            selected_policy,
            report: &report,
        },
    )?;
    Ok(art)
}

fn cmd_network(s: &Scenario) -> Result<Artifacts> {
    let def = require(&s.parameter_network, "parameter_network")?;
    let net = s.build_network()?;
    let deltas = propagate_network(&net, &def.delta_facts)?;
    let ordered = NamedValues(
        net.nodes()
            .iter()
            .filter(|n| n.role == NodeRole::Value)
            .map(|n| (n.name.clone(), deltas[&n.name]))
            .collect(),
    );
    let mut art = Artifacts::default();
    art.json("network.json", &ordered)?;
    Ok(art)
}
