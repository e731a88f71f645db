//! Command-line front end for the `longmem` library.
//!
//! Exit status: 0 on success, 1 on usage, configuration, domain, data or
//! I/O errors (one line `error: <kind>: <message>` on stderr), 2 on internal
//! faults. Every run writes one JSON manifest.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use longmem::dgp::{simulate, DgpKind, DgpSpec};
use longmem::forecast::{forecast, LossKind};
use longmem::harness::{
    format_sig17, render_failures, render_table, run_grid, ExperimentConfig, TableLayout,
};
use longmem::mcs::{mcs, BootstrapConfig, LossPanel, Statistic, DEFAULT_REPLICATIONS};
use longmem::models::{fit, gph_estimate, local_whittle_estimate, ModelSpec};
use longmem::rvdata::{load_rv, run_window_study, WindowStudyConfig};
use longmem::{Error, TimeSeries};

#[derive(Parser)]
#[command(name = "longmem", version, about = "Long-memory simulation, estimation, forecasting and model confidence sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a long-memory path to a one-column CSV.
    Simulate(SimulateArgs),
    /// Fit one model and print a parameter report.
    Fit(FitArgs),
    /// Estimate the memory parameter.
    Memest(MemestArgs),
    /// Fit one model and forecast h steps ahead.
    Forecast(ForecastArgs),
    /// Model confidence set on a loss panel.
    Mcs(McsArgs),
    /// Monte Carlo forecasting experiment from a config file.
    Experiment(ExperimentArgs),
    /// Expanding-window study on realized variance.
    RvStudy(RvStudyArgs),
}

#[derive(Args)]
struct Common {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Manifest path; defaults to `<output>.manifest.json`, or
    /// `<subcommand>.manifest.json` when writing to standard output.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    dgp: DgpKind,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    length: usize,
    #[arg(long)]
    seed: u64,
    /// AR(1) coefficient (arfima).
    #[arg(long)]
    phi: Option<f64>,
    /// Number of aggregated units (csa).
    #[arg(long)]
    n_units: Option<usize>,
    /// First Beta shape (csa).
    #[arg(long)]
    beta_p: Option<f64>,
    /// Put the Beta law on the AR coefficient rather than its square (csa).
    #[arg(long)]
    beta_on_alpha: bool,
    /// Discarded warm-up (arfima) or duration window (edm).
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    innovation_sd: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct InputArgs {
    /// CSV input; `#` lines are skipped, the first remaining line is a header.
    #[arg(long)]
    input: PathBuf,
    /// Column to read; the last column by default.
    #[arg(long)]
    column: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    /// Model, e.g. "ARFIMA(1,d,0)", "ARMA(2,1)", "AR(22)", "HAR(3)", "I(1)".
    #[arg(long)]
    model: ModelSpec,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum MemMethod {
    Gph,
    Lw,
    Mle,
}

#[derive(Args)]
struct MemestArgs {
    #[arg(long, value_enum)]
    method: MemMethod,
    /// Number of Fourier frequencies (gph, lw).
    #[arg(long)]
    bandwidth: Option<usize>,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long)]
    model: ModelSpec,
    #[arg(long)]
    h: usize,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct McsArgs {
    /// CSV with one column per model and one row per period.
    #[arg(long)]
    losses: PathBuf,
    #[arg(long, default_value = "range")]
    stat: Statistic,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap block length; ceil(n^(1/3)) when omitted.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    boot: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Loss the panel was built from (recorded only).
    #[arg(long, default_value = "ad")]
    loss: LossKind,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for tables, failure logs and the manifest.
    #[arg(long, default_value = "experiment_out")]
    out_dir: PathBuf,
    /// Override the configured worker count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RvStudyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "rv5")]
    column: String,
    #[arg(long, default_value = "rv_study_out")]
    out_dir: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

/// What a subcommand produced, for the manifest.
struct Report {
    config: Value,
    seeds: Vec<u64>,
    warnings: Vec<String>,
    failures: usize,
    outputs: Vec<PathBuf>,
}

impl Report {
    fn new(config: Value) -> Self {
        Self {
            config,
            seeds: Vec::new(),
            warnings: Vec::new(),
            failures: 0,
            outputs: Vec::new(),
        }
    }
}

fn write_output(common: &Common, text: &str, report: &mut Report) -> Result<(), Error> {
    match &common.output {
        Some(path) => {
            write_file(path, text)?;
            report.outputs.push(path.clone());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })?;
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn manifest_path(common: &Common, name: &str) -> PathBuf {
    if let Some(m) = &common.manifest {
        return m.clone();
    }
    match &common.output {
        Some(o) => {
            let mut s = o.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        None => PathBuf::from(format!("{name}.manifest.json")),
    }
}

fn read_series(input: &InputArgs) -> Result<TimeSeries, Error> {
    TimeSeries::read_csv(&input.input, input.column.as_deref())
}

fn run_simulate(a: &SimulateArgs) -> Result<Report, Error> {
    let mut spec = DgpSpec::default_for(a.dgp, a.d);
    if let Some(v) = a.phi {
        spec.phi = v;
    }
    if let Some(v) = a.n_units {
        spec.n_units = v;
    }
    if let Some(v) = a.beta_p {
        spec.beta_p = v;
    }
    if let Some(v) = a.burn_in {
        spec.burn_in = v;
    }
    if let Some(v) = a.innovation_sd {
        spec.innovation_sd = v;
    }
    spec.beta_on_alpha = a.beta_on_alpha;
    let path = simulate(&spec, a.length, a.seed)?;
    let mut text = format!("# {} length={} seed={}\nvalue\n", spec.describe(), a.length, a.seed);
    for v in path.series.values() {
        let _ = writeln!(text, "{}", format_sig17(*v));
    }
    let mut report = Report::new(json!({
        "dgp": spec.kind.to_string(),
        "spec": spec.describe(),
        "length": a.length,
        "seed": a.seed,
    }));
    report.seeds.push(a.seed);
    report.warnings.extend(
        path.series
            .meta
            .iter()
            .filter(|(k, _)| k.contains("fallback"))
            .map(|(k, v)| format!("{k}={v}")),
    );
    write_output(&a.common, &text, &mut report)?;
    Ok(report)
}

fn run_fit(a: &FitArgs) -> Result<Report, Error> {
    let series = read_series(&a.input)?;
    let m = fit(&series, &a.model)?;
    let mut t = String::new();
    let _ = writeln!(t, "model: {}", m.spec);
    let _ = writeln!(t, "method: {:?}", m.method);
    let _ = writeln!(t, "observations: {}", m.n_obs);
    let _ = writeln!(t, "parameter,value");
    if let Some(d) = m.d_hat {
        let _ = writeln!(t, "d,{}", format_sig17(d));
    }
    if m.har_coeffs.is_empty() {
        for (i, v) in m.ar_coeffs.iter().enumerate() {
            let _ = writeln!(t, "ar{},{}", i + 1, format_sig17(*v));
        }
    } else {
        for (i, v) in m.har_coeffs.iter().enumerate() {
            let _ = writeln!(t, "har{},{}", i + 1, format_sig17(*v));
        }
    }
    for (i, v) in m.ma_coeffs.iter().enumerate() {
        let _ = writeln!(t, "ma{},{}", i + 1, format_sig17(*v));
    }
    if let Some(c) = m.intercept {
        let _ = writeln!(t, "intercept,{}", format_sig17(c));
    }
    let _ = writeln!(t, "mean,{}", format_sig17(m.process_mean()));
    let _ = writeln!(t, "sigma2,{}", format_sig17(m.sigma2_hat));
    let opt = |v: Option<f64>| v.map(format_sig17).unwrap_or_else(|| "NA".into());
    let _ = writeln!(t, "loglik: {}", opt(m.loglik));
    let _ = writeln!(t, "bic: {}", opt(m.bic));
    let mut report = Report::new(json!({
        "model": m.spec.to_string(),
        "input": a.input.input,
        "column": a.input.column,
    }));
    write_output(&a.common, &t, &mut report)?;
    Ok(report)
}

fn run_memest(a: &MemestArgs) -> Result<Report, Error> {
    let series = read_series(&a.input)?;
    let (name, d, bw, se) = match a.method {
        MemMethod::Gph => {
            let e = gph_estimate(&series, a.bandwidth)?;
            ("gph", e.d_hat, Some(e.bandwidth), Some(e.std_error))
        }
        MemMethod::Lw => {
            let e = local_whittle_estimate(&series, a.bandwidth)?;
            ("lw", e.d_hat, Some(e.bandwidth), Some(e.std_error))
        }
        MemMethod::Mle => {
            if a.bandwidth.is_some() {
                return Err(Error::Config("--bandwidth does not apply to mle".into()));
            }
            let m = fit(&series, &ModelSpec::fi())?;
            ("mle", m.d_hat.expect("fractional fit"), None, None)
        }
    };
    let fmt_opt = |v: Option<String>| v.unwrap_or_else(|| "NA".into());
    let text = format!(
        "method,d_hat,bandwidth,std_error\n{name},{},{},{}\n",
        format_sig17(d),
        fmt_opt(bw.map(|b| b.to_string())),
        fmt_opt(se.map(format_sig17))
    );
    let mut report = Report::new(json!({
        "method": name,
        "bandwidth": bw,
        "input": a.input.input,
        "column": a.input.column,
    }));
    write_output(&a.common, &text, &mut report)?;
    Ok(report)
}

fn run_forecast(a: &ForecastArgs) -> Result<Report, Error> {
    let series = read_series(&a.input)?;
    let m = fit(&series, &a.model)?;
    let path = forecast(&m, &series, a.h)?;
    let mut text = format!("# model={} origin={}\nstep,forecast\n", m.spec, path.origin_index);
    for (i, v) in path.values.iter().enumerate() {
        let _ = writeln!(text, "{},{}", i + 1, format_sig17(*v));
    }
    let mut report = Report::new(json!({
        "model": m.spec.to_string(),
        "h": a.h,
        "input": a.input.input,
        "column": a.input.column,
    }));
    write_output(&a.common, &text, &mut report)?;
    Ok(report)
}

fn read_loss_panel(path: &Path, kind: LossKind) -> Result<LossPanel, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let ids: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Data(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Data(format!("row {}: cannot parse '{f}'", i + 1)))
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        rows.push(row);
    }
    LossPanel::from_rows(ids, &rows, kind)
}

fn run_mcs(a: &McsArgs) -> Result<Report, Error> {
    let panel = read_loss_panel(&a.losses, a.loss)?;
    let boot = BootstrapConfig {
        replications: a.boot,
        block_length: a.blocks,
        seed: a.seed,
    };
    let res = mcs(&panel, a.stat, a.alpha, &boot)?;
    let mut text = format!(
        "# statistic={} alpha={} replications={} block_length={} seed={}\nmodel,in_mcs,p_value,elimination_step\n",
        res.statistic, res.alpha, res.bootstrap.replications, res.bootstrap.block_length, res.bootstrap.seed
    );
    for (id, p) in &res.p_values {
        let step = res
            .elimination_order
            .iter()
            .position(|(l, _)| l == id)
            .map(|s| (s + 1).to_string())
            .unwrap_or_else(|| "NA".into());
        let _ = writeln!(text, "{},{},{},{step}", csv_field(id), u8::from(res.contains(id)), format_sig17(*p));
    }
    let mut report = Report::new(json!({
        "losses": a.losses,
        "statistic": a.stat.to_string(),
        "alpha": a.alpha,
        "block_length": res.bootstrap.block_length,
        "replications": res.bootstrap.replications,
        "loss": a.loss.to_string(),
    }));
    report.seeds.push(a.seed);
    write_output(&a.common, &text, &mut report)?;
    Ok(report)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

fn run_experiment(a: &ExperimentArgs) -> Result<Report, Error> {
    let mut cfg = ExperimentConfig::from_file(&a.config)?;
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    create_dir(&a.out_dir)?;
    let results = run_grid(&cfg)?;
    let mut report = Report::new(json!({ "config_file": a.config, "config": cfg.to_toml() }));
    report.seeds.push(cfg.master_seed);
    for res in &results {
        let tag = format!("{}_d{}", cfg.dgp.kind, res.d);
        let files = [
            (format!("table_{tag}.csv"), render_table(res, TableLayout::PaperTable)?),
            (format!("tidy_{tag}.csv"), render_table(res, TableLayout::TidyCsv)?),
            (format!("failures_{tag}.csv"), render_failures(res)),
        ];
        for (name, text) in files {
            let path = a.out_dir.join(name);
            write_file(&path, &text)?;
            report.outputs.push(path);
        }
        report.failures += res.failures.len();
    }
    Ok(report)
}

fn run_rv_study(a: &RvStudyArgs) -> Result<Report, Error> {
    let mut cfg = WindowStudyConfig::from_file(&a.config)?;
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let series = load_rv(&a.input, &a.column)?;
    create_dir(&a.out_dir)?;
    let res = run_window_study(&series, &cfg)?;
    let mut report = Report::new(json!({
        "config_file": a.config,
        "config": cfg.to_toml(),
        "input": a.input,
        "column": a.column,
        "windows": res.n_windows,
    }));
    report.seeds.push(cfg.seed);
    if series.dropped > 0 {
        report.warnings.push(format!("{} input rows dropped", series.dropped));
    }
    let mut failures = String::from("window,model,message\n");
    for f in &res.failures {
        let _ = writeln!(failures, "{},{},{}", f.replication, csv_field(&f.model), csv_field(&f.message));
    }
    let mut inclusion = String::from("model,horizon,mcs_inclusion,mean_rmad,mean_rmse\n");
    for (i, m) in res.models.iter().enumerate() {
        for (k, h) in res.horizons.iter().enumerate() {
            let _ = writeln!(
                inclusion,
                "{},{h},{},{},{}",
                csv_field(m),
                format_sig17(res.inclusion[i][k]),
                format_sig17(res.mean_rmad[i][k]),
                format_sig17(res.mean_rmse[i][k])
            );
        }
    }
    let files = [
        ("groups.csv", res.render_groups()),
        ("first_window.csv", res.render_first_window()),
        ("inclusion.csv", inclusion),
        ("failures.csv", failures),
    ];
    for (name, text) in files {
        let path = a.out_dir.join(name);
        write_file(&path, &text)?;
        report.outputs.push(path);
    }
    report.failures = res.failures.len();
    Ok(report)
}

fn write_manifest(
    path: &Path,
    subcommand: &str,
    argv: &[String],
    outcome: &Result<Report, Error>,
    started: chrono::DateTime<chrono::Utc>,
    wall: f64,
) -> Result<(), Error> {
    let empty = Report::new(Value::Null);
    let (report, error) = match outcome {
        Ok(r) => (r, Value::Null),
        Err(e) => (&empty, Value::String(e.to_string())),
    };
    let manifest = json!({
        "subcommand": subcommand,
        "argv": argv,
        "version": env!("CARGO_PKG_VERSION"),
        "config": report.config,
        "seeds": report.seeds,
        "started_utc": started.to_rfc3339(),
        "finished_utc": chrono::Utc::now().to_rfc3339(),
        "wall_time_s": wall,
        "warnings": report.warnings,
        "failure_count": report.failures,
        "outputs": report.outputs,
        "error": error,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(path, &(text + "\n"))
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<(), Error> {
    let started = chrono::Utc::now();
    let clock = Instant::now();
    let (name, outcome, manifest) = match &cli.command {
        Command::Simulate(a) => ("simulate", run_simulate(a), manifest_path(&a.common, "simulate")),
        Command::Fit(a) => ("fit", run_fit(a), manifest_path(&a.common, "fit")),
        Command::Memest(a) => ("memest", run_memest(a), manifest_path(&a.common, "memest")),
        Command::Forecast(a) => ("forecast", run_forecast(a), manifest_path(&a.common, "forecast")),
        Command::Mcs(a) => ("mcs", run_mcs(a), manifest_path(&a.common, "mcs")),
        Command::Experiment(a) => ("experiment", run_experiment(a), a.out_dir.join("manifest.json")),
        Command::RvStudy(a) => ("rv-study", run_rv_study(a), a.out_dir.join("manifest.json")),
    };
    let written = write_manifest(&manifest, name, argv, &outcome, started, clock.elapsed().as_secs_f64());
    // The run's own error takes precedence over a manifest write failure.
    outcome?;
    written
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| dispatch(&cli, &argv)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("error: internal: unexpected fault");
            ExitCode::from(2)
        }
    }
}
