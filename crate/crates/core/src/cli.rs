//! The `wdepth` command line.
//!
//! Exit codes: 0 on success (an uncertified dataset is a success), 1 when
//! the analysis fails, 2 on unusable input.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bootstrap::{
    bootstrap_estimates, bootstrap_reoptimized, confidence_and_intervals, negative_fraction, witness_dump, Basis,
    BootstrapResult, ConfidenceReport, Resamples,
};
use crate::config::{join_list, AnalysisSettings, KeyValues, RunConfig, SimulationMode};
use crate::dataset::{CountsDataset, SCHEMA_VERSION};
use crate::error::Error;
use crate::inference::{full_pipeline, PipelineOutput, PopulationEstimate};
use crate::simulator::{analytic_dataset, ground_truth, run_campaign};
use crate::witness::{certify_depth_with, min_f, DepthCertificate, SearchSettings, WitnessParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANALYSIS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Number of bins of the witness histogram.
pub const HISTOGRAM_BINS: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "wdepth", version, about = "Certify the entanglement depth of multimode W states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that witness coefficient sets are valid depth witnesses.
    ValidateWitness {
        /// Lines of `alpha beta gamma k n`.
        params: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Tolerated negativity of the bi-separable minimum.
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a photon-counting campaign.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate populations and fidelity from a dataset.
    Infer {
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the entanglement depth of a dataset with bootstrap confidence.
    Certify {
        dataset: PathBuf,
        /// Number of ensembles, by default taken from the dataset.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        reoptimize_per_resample: bool,
        /// Confidence a depth needs before it is certified.
        #[arg(long)]
        min_confidence: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tables and histogram data from certificates and witness dumps.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output prefix for `.csv`, `.txt` and `.hist.csv` files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure { code: EXIT_INPUT, message: e.to_string() }
}

fn analysis<E: std::fmt::Display>(e: E) -> Failure {
    Failure { code: EXIT_ANALYSIS, message: e.to_string() }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    match command {
        Command::ValidateWitness { params, config, slack, out } => {
            let settings = load_settings(config.as_deref())?;
            let slack = slack.unwrap_or(settings.slack);
            cmd_validate_witness(&params, slack, out.or(settings.out).as_deref(), stdout)
        }
        Command::Simulate { config, seed, out } => cmd_simulate(&config, seed, out.as_deref(), stdout),
        Command::Infer { dataset, out } => cmd_infer(&dataset, out.as_deref(), stdout, stderr),
        Command::Certify { dataset, n, config, seed, samples, reoptimize_per_resample, min_confidence, out } => {
            let mut settings = load_settings(config.as_deref())?;
            settings.seed = seed.or(settings.seed);
            settings.samples = samples.unwrap_or(settings.samples);
            settings.reoptimize_per_resample |= reoptimize_per_resample;
            settings.min_confidence = min_confidence.unwrap_or(settings.min_confidence);
            settings.out = out.or(settings.out);
            cmd_certify(&dataset, n, &settings, stdout, stderr)
        }
        Command::Report { inputs, out } => cmd_report(&inputs, out.as_deref(), stdout),
    }
}

fn load_settings(path: Option<&Path>) -> std::result::Result<AnalysisSettings, Failure> {
    match path {
        Some(p) => AnalysisSettings::parse(&read(p)?).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => Ok(AnalysisSettings::default()),
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => write(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(input),
    }
}

/// Parses lines of five numbers `alpha beta gamma k n`, separated by
/// whitespace or commas.
pub fn parse_witness_params(text: &str) -> crate::Result<Vec<WitnessParams>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: no + 1, message };
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() != 5 {
            return Err(parse_err(format!("expected `alpha beta gamma k n`, got {} fields", fields.len())));
        }
        let real = |s: &str| s.parse::<f64>().map_err(|e| parse_err(format!("{s:?}: {e}")));
        let int = |s: &str| s.parse::<usize>().map_err(|e| parse_err(format!("{s:?}: {e}")));
        let params = WitnessParams::new(real(fields[0])?, real(fields[1])?, real(fields[2])?, int(fields[3])?, int(fields[4])?)
            .map_err(|e| parse_err(e.to_string()))?;
        out.push(params);
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 0, message: "no witness parameters".into() });
    }
    Ok(out)
}

fn cmd_validate_witness(path: &Path, slack: f64, out: Option<&Path>, stdout: &mut dyn Write) -> CmdResult {
    let all = parse_witness_params(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let mut text = String::new();
    let mut passed = 0;
    for p in &all {
        let m = min_f(p);
        let ok = m.f_min >= -slack;
        passed += ok as usize;
        writeln!(
            text,
            "{} alpha={} beta={} gamma={} k={} n={} f_min={:.6e} argmin=(l={}, theta1={:.6}, theta2={:.6}) method={}",
            if ok { "PASS" } else { "FAIL" },
            p.alpha,
            p.beta,
            p.gamma,
            p.k,
            p.n,
            m.f_min,
            m.argmin.l,
            m.argmin.theta1,
            m.argmin.theta2,
            m.method.as_str()
        )
        .expect("write to string");
    }
    writeln!(text, "{passed} of {} passed (slack {slack})", all.len()).expect("write to string");
    emit(out, &text, stdout)?;
    Ok(if passed == all.len() { EXIT_OK } else { EXIT_ANALYSIS })
}

fn cmd_simulate(config: &Path, seed: Option<u64>, out: Option<&Path>, stdout: &mut dyn Write) -> CmdResult {
    let cfg = RunConfig::parse(&read(config)?).map_err(|e| input(format!("{}: {e}", config.display())))?;
    let seed = seed.unwrap_or(cfg.seed);
    let out = out.map(Path::to_path_buf).or(cfg.analysis.out.clone()).ok_or_else(|| input("no output path (--out)"))?;
    let dataset = match cfg.mode {
        SimulationMode::Sampled => run_campaign(&cfg.model, &cfg.plan, seed, true),
        SimulationMode::Analytic => analytic_dataset(&cfg.model),
    }
    .map_err(input)?;
    write(&out, &dataset.to_jsonl())?;
    let truth_path = with_suffix(&out, ".truth");
    write(&truth_path, &truth_report(&cfg, seed).render())?;
    writeln!(stdout, "wrote {} records to {} and ground truth to {}", dataset.records.len(), out.display(), truth_path.display())
        .map_err(input)?;
    Ok(EXIT_OK)
}

fn truth_report(cfg: &RunConfig, seed: u64) -> KeyValues {
    let m = &cfg.model;
    let t = ground_truth(m);
    let mut kv = KeyValues::default();
    kv.push("schema_version", SCHEMA_VERSION);
    kv.push("kind", "ground_truth");
    kv.push("seed", seed);
    kv.push("mode", if cfg.mode == SimulationMode::Analytic { "analytic" } else { "sampled" });
    kv.push("n_modes", m.n_modes);
    kv.push("lambda", m.lambda);
    kv.push("eta", join_list(&m.eta));
    kv.push("excite_weights", join_list(m.excite_weights.weights()));
    kv.push("excite_phases", join_list(m.excite_weights.phases()));
    kv.push("signal_efficiency", m.signal_efficiency);
    kv.push("signal_dark", m.signal_dark);
    kv.push("idler_dark", m.idler_dark);
    kv.push("memory_loss", m.memory_loss);
    push_estimate(&mut kv, "", &t.estimate());
    kv.push("p2_over_p1", if t.p1 > 0.0 { t.p2 / t.p1 } else { 0.0 });
    kv.push("higher_order_mass", t.higher_order_mass);
    kv.push("herald_probability", t.herald_probability);
    kv.push("genuine_fraction", t.genuine_fraction);
    kv.push("mode_overlap", t.mode_overlap);
    kv
}

fn push_estimate(kv: &mut KeyValues, prefix: &str, e: &PopulationEstimate) {
    for (name, v) in estimate_columns(e) {
        kv.push(&format!("{prefix}{name}"), v);
    }
}

fn estimate_columns(e: &PopulationEstimate) -> [(&'static str, f64); 8] {
    [
        ("p0", e.p0),
        ("p1", e.p1),
        ("p2", e.p2),
        ("F", e.fidelity),
        ("p0p", e.p0p),
        ("p1p", e.p1p),
        ("p2p", e.p2p),
        ("Fp", e.fidelity_p),
    ]
}

fn load_dataset(path: &Path) -> std::result::Result<CountsDataset, Failure> {
    CountsDataset::from_jsonl(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn run_pipeline(dataset: &CountsDataset, stderr: &mut dyn Write) -> std::result::Result<PipelineOutput, Failure> {
    let out = full_pipeline(dataset).map_err(analysis)?;
    for w in &out.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    Ok(out)
}

fn cmd_infer(path: &Path, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let dataset = load_dataset(path)?;
    let res = run_pipeline(&dataset, stderr)?;
    let mut kv = KeyValues::default();
    kv.push("schema_version", SCHEMA_VERSION);
    kv.push("kind", "inference");
    kv.push("n_modes", res.calibration.n_modes());
    kv.push("eta", join_list(&res.calibration.eta));
    kv.push("total_transfer", res.calibration.total_transfer);
    kv.push("overlap_sq", res.calibration.overlap_sq);
    kv.push("alpha3", res.estimate.alpha3);
    kv.push("S", res.s_sum);
    kv.push("lambda", res.corrected.lambda_poisson);
    push_estimate(&mut kv, "", &res.estimate);
    push_estimate(&mut kv, "corrected.", &res.corrected);
    push_warnings(&mut kv, &res.warnings);
    emit(out, &kv.render(), stdout)?;
    Ok(EXIT_OK)
}

fn push_warnings(kv: &mut KeyValues, warnings: &[String]) {
    for (i, w) in warnings.iter().enumerate() {
        kv.push(&format!("warning.{i}"), w.replace(['\n', '#'], " "));
    }
}

/// Depth scan of one basis with confidence from the shared resamples.
fn certify_basis(
    est: &PopulationEstimate,
    n: usize,
    resamples: &Resamples,
    basis: Basis,
    corrected: bool,
    min_confidence: f64,
) -> crate::Result<DepthCertificate> {
    certify_depth_with(&basis.select(est), n, &SearchSettings::default(), min_confidence, |p| {
        Ok(negative_fraction(&resamples.witness_values(p, basis, corrected)))
    })
}

/// Witness whose bootstrap distribution is reported: the certified one, or
/// the full-depth witness when nothing was certified.
fn reported_witness(cert: &DepthCertificate) -> (usize, WitnessParams) {
    match (cert.k, cert.params) {
        (Some(k), Some(p)) => (k, p),
        _ => {
            let top = &cert.scan[0];
            (top.k, top.optimized.params)
        }
    }
}

fn distribution(resamples: &Resamples, params: &WitnessParams, basis: Basis) -> BootstrapResult {
    let values = resamples.witness_values(params, basis, false);
    let samples = resamples.samples.iter().map(|s| s.estimate).zip(values).collect();
    BootstrapResult::new(samples, basis, resamples.failed, resamples.seed)
}

fn push_certificate(kv: &mut KeyValues, prefix: &str, cert: &DepthCertificate) {
    kv.push(&format!("{prefix}certified"), cert.certified());
    if let (Some(k), Some(p), Some(w), Some(c)) = (cert.k, cert.params, cert.witness_value, cert.confidence) {
        kv.push(&format!("{prefix}k"), k);
        kv.push(&format!("{prefix}alpha"), p.alpha);
        kv.push(&format!("{prefix}beta"), p.beta);
        kv.push(&format!("{prefix}gamma"), p.gamma);
        kv.push(&format!("{prefix}witness_value"), w);
        kv.push(&format!("{prefix}confidence"), c);
    }
}

fn push_intervals(kv: &mut KeyValues, report: &ConfidenceReport) {
    for i in &report.intervals {
        kv.push(&format!("interval.{}", i.name), join_list(&[i.median, i.lo, i.hi]));
    }
}

fn cmd_certify(
    path: &Path,
    n: Option<usize>,
    settings: &AnalysisSettings,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    let dataset = load_dataset(path)?;
    let seed = settings.seed.ok_or_else(|| input("a seed is required (--seed or `seed` in --config)"))?;
    if settings.samples < crate::bootstrap::MIN_SAMPLES {
        return Err(input(format!("--samples must be at least {}", crate::bootstrap::MIN_SAMPLES)));
    }
    let n = n.unwrap_or_else(|| dataset.n_modes());
    if n != dataset.n_modes() {
        return Err(input(format!("--n {n} but the dataset has {} ensembles", dataset.n_modes())));
    }
    let point = run_pipeline(&dataset, stderr)?;
    let resamples = bootstrap_estimates(&dataset, settings.samples, seed).map_err(analysis)?;
    let min_conf = settings.min_confidence;

    let spin = certify_basis(&point.estimate, n, &resamples, Basis::SpinWave, false, min_conf).map_err(analysis)?;
    let photonic = certify_basis(&point.estimate, n, &resamples, Basis::Photonic, false, min_conf).map_err(analysis)?;
    let corrected = certify_basis(&point.corrected, n, &resamples, Basis::SpinWave, true, min_conf).map_err(analysis)?;

    let (dump_k, dump_params) = reported_witness(&spin);
    let dist = distribution(&resamples, &dump_params, Basis::SpinWave);
    let report = confidence_and_intervals(&dist).map_err(analysis)?;
    let (_, photonic_params) = reported_witness(&photonic);
    let photonic_report =
        confidence_and_intervals(&distribution(&resamples, &photonic_params, Basis::Photonic)).map_err(analysis)?;

    let mut kv = KeyValues::default();
    kv.push("schema_version", SCHEMA_VERSION);
    kv.push("kind", "certificate");
    kv.push("n", n);
    kv.push("seed", seed);
    kv.push("samples", settings.samples);
    kv.push("failed", resamples.failed);
    kv.push("min_confidence", min_conf);
    push_certificate(&mut kv, "", &spin);
    if let Some(p) = spin.params {
        let values = resamples.witness_values(&p, Basis::SpinWave, true);
        kv.push("confidence_corrected", negative_fraction(&values));
    }
    if settings.reoptimize_per_resample {
        if let Some(k) = spin.k {
            let re = bootstrap_reoptimized(&resamples, k, n, Basis::SpinWave).map_err(analysis)?;
            kv.push("confidence_reoptimized", re.confidence_negative);
        }
    }
    push_certificate(&mut kv, "photonic.", &photonic);
    push_certificate(&mut kv, "corrected.", &corrected);
    kv.push("alpha3", point.estimate.alpha3);
    kv.push("lambda", point.corrected.lambda_poisson);
    push_estimate(&mut kv, "estimate.", &point.estimate);
    push_estimate(&mut kv, "corrected.estimate.", &point.corrected);
    kv.push("dump.k", dump_k);
    push_intervals(&mut kv, &report);
    if let Some(w) = photonic_report.interval("W") {
        kv.push("photonic.interval.W", join_list(&[w.median, w.lo, w.hi]));
    }
    for row in &spin.scan {
        let o = &row.optimized;
        kv.push(
            &format!("scan.k{}", row.k),
            format!("{}, {}, {}, {}, {}", o.params.alpha, o.params.beta, o.params.gamma, o.value, o.certifiable),
        );
    }
    push_warnings(&mut kv, &point.warnings);

    match &settings.out {
        Some(out) => {
            write(out, &kv.render())?;
            write(&with_suffix(out, ".dist"), &witness_dump(&dist.witness_values()))?;
        }
        None => emit(None, &kv.render(), stdout)?,
    }
    match (spin.k, spin.confidence) {
        (Some(k), Some(c)) => writeln!(stderr, "certified depth {k} of {n} with confidence {c}"),
        _ => writeln!(stderr, "not certified"),
    }
    .map_err(input)?;
    Ok(EXIT_OK)
}

enum ReportInput {
    Certificate { label: String, kv: KeyValues },
    Dump { label: String, values: Vec<f64> },
}

fn label_of(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn load_report_input(path: &Path) -> std::result::Result<ReportInput, Failure> {
    let text = read(path)?;
    let label = label_of(path);
    if let Ok(kv) = KeyValues::parse(&text) {
        if kv.get("kind") == Some("certificate") {
            return Ok(ReportInput::Certificate { label, kv });
        }
    }
    let values: std::result::Result<Vec<f64>, _> =
        text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::parse::<f64>).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(ReportInput::Dump { label, values: v }),
        _ => Err(input(format!("{}: neither a certificate nor a witness dump", path.display()))),
    }
}

const TABLE_ROWS: [&str; 9] = ["p0", "p1", "p2", "F", "p0p", "p1p", "p2p", "Fp", "W"];

/// Point estimate, median and 68% interval of one quantity in a certificate.
fn certificate_row(kv: &KeyValues, name: &str) -> [Option<f64>; 4] {
    let point = if name == "W" {
        kv.get("witness_value").and_then(|v| v.parse().ok())
    } else {
        kv.get(&format!("estimate.{name}")).and_then(|v| v.parse().ok())
    };
    let interval = kv
        .list(&format!("interval.{name}"))
        .ok()
        .flatten()
        .filter(|v| v.len() == 3)
        .map(|v| [Some(v[0]), Some(v[1]), Some(v[2])])
        .unwrap_or([None; 3]);
    [point, interval[0], interval[1], interval[2]]
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// CSV and text tables comparing certificates side by side.
pub fn certificate_tables(certs: &[(String, KeyValues)]) -> (String, String) {
    let mut csv = String::from("quantity");
    for (label, _) in certs {
        for col in ["estimate", "median", "lo", "hi"] {
            write!(csv, ",{label}:{col}").expect("write to string");
        }
    }
    csv.push('\n');

    let mut txt = String::new();
    for (label, kv) in certs {
        let field = |k: &str| kv.get(k).unwrap_or("-").to_string();
        writeln!(
            txt,
            "{label}: n = {}, certified = {}, k = {}, confidence = {}",
            field("n"),
            field("certified"),
            field("k"),
            field("confidence")
        )
        .expect("write to string");
    }
    write!(txt, "{:<10}", "quantity").expect("write to string");
    for i in 0..certs.len() {
        let tag = if certs.len() > 1 { format!("[{}] ", i + 1) } else { String::new() };
        write!(txt, " {:>24} {:>24}", format!("{tag}estimate"), format!("{tag}median [lo, hi]")).expect("write to string");
    }
    txt.push('\n');

    for name in TABLE_ROWS {
        csv.push_str(name);
        write!(txt, "{name:<10}").expect("write to string");
        for (_, kv) in certs {
            let row = certificate_row(kv, name);
            for v in row {
                write!(csv, ",{}", v.map(|x| x.to_string()).unwrap_or_default()).expect("write to string");
            }
            let spread = match (row[1], row[2], row[3]) {
                (Some(m), Some(lo), Some(hi)) => format!("{m:.4} [{lo:.4}, {hi:.4}]"),
                _ => String::new(),
            };
            write!(txt, " {:>24} {:>24}", cell(row[0]), spread).expect("write to string");
        }
        csv.push('\n');
        txt.push('\n');
    }
    (csv, txt)
}

/// Histogram with [`HISTOGRAM_BINS`] equal bins spanning the pooled range of
/// all dumps; the last bin is closed.
pub fn histogram_csv(dumps: &[(String, Vec<f64>)]) -> String {
    let all = dumps.iter().flat_map(|d| d.1.iter().copied());
    let lo = all.clone().fold(f64::INFINITY, f64::min);
    let mut hi = all.fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut counts = vec![vec![0u64; HISTOGRAM_BINS]; dumps.len()];
    for (d, (_, values)) in dumps.iter().enumerate() {
        for v in values {
            let b = (((v - lo) / width).floor() as usize).min(HISTOGRAM_BINS - 1);
            counts[d][b] += 1;
        }
    }
    let mut csv = String::from("bin_lo,bin_hi");
    for (label, _) in dumps {
        write!(csv, ",{label}").expect("write to string");
    }
    csv.push('\n');
    for b in 0..HISTOGRAM_BINS {
        let edge = |i: usize| if i == HISTOGRAM_BINS { hi } else { lo + i as f64 * width };
        write!(csv, "{:e},{:e}", edge(b), edge(b + 1)).expect("write to string");
        for c in &counts {
            write!(csv, ",{}", c[b]).expect("write to string");
        }
        csv.push('\n');
    }
    csv
}

fn cmd_report(inputs: &[PathBuf], out: Option<&Path>, stdout: &mut dyn Write) -> CmdResult {
    let mut certs = Vec::new();
    let mut dumps = Vec::new();
    for p in inputs {
        match load_report_input(p)? {
            ReportInput::Certificate { label, kv } => certs.push((label, kv)),
            ReportInput::Dump { label, values } => dumps.push((label, values)),
        }
    }
    let tables = (!certs.is_empty()).then(|| certificate_tables(&certs));
    let hist = (!dumps.is_empty()).then(|| histogram_csv(&dumps));
    match out {
        Some(prefix) => {
            if let Some((csv, txt)) = &tables {
                write(&with_suffix(prefix, ".csv"), csv)?;
                write(&with_suffix(prefix, ".txt"), txt)?;
            }
            if let Some(h) = &hist {
                write(&with_suffix(prefix, ".hist.csv"), h)?;
            }
        }
        None => {
            if let Some((_, txt)) = &tables {
                emit(None, txt, stdout)?;
            }
            if let Some(h) = &hist {
                emit(None, h, stdout)?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_param_lines() {
        let ps = parse_witness_params("# a b g k n\n0.369 0.889 0.268 9 9\n0.635,0.813,0.240,14,16\n").unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!((ps[1].k, ps[1].n), (14, 16));
        assert!(parse_witness_params("\n# nothing\n").is_err());
        match parse_witness_params("0.1 0.2 0.3 9 9\n0.1 0.2 9 9\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn histogram_counts_every_value() {
        let values: Vec<f64> = (0..1000).map(|i| -0.1 + 0.2 * i as f64 / 999.0).collect();
        let csv = histogram_csv(&[("w".into(), values)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), HISTOGRAM_BINS + 1);
        let total: u64 = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
        assert_eq!(total, 1000);
        // equal-width bins over 1000 evenly spread values hold 10 each
        assert!(lines[1..].iter().all(|l| l.ends_with(",10")));
    }

    #[test]
    fn degenerate_histogram() {
        let csv = histogram_csv(&[("a".into(), vec![0.5; 7]), ("b".into(), vec![0.5])]);
        assert!(csv.lines().nth(1).unwrap().ends_with(",7,1"));
    }

    #[test]
    fn tables_from_certificate() {
        let kv = KeyValues::parse(
            "kind = certificate\nn = 9\ncertified = true\nk = 9\nconfidence = 0.99\nwitness_value = -0.05\n\
             estimate.p1 = 0.9\ninterval.p1 = 0.9, 0.89, 0.91\ninterval.W = -0.05, -0.06, -0.04\n",
        )
        .unwrap();
        let (csv, txt) = certificate_tables(&[("a".into(), kv)]);
        assert!(csv.lines().any(|l| l == "p1,0.9,0.9,0.89,0.91"));
        assert!(csv.lines().any(|l| l == "W,-0.05,-0.05,-0.06,-0.04"));
        assert!(csv.lines().any(|l| l == "p0,,,,"));
        assert!(txt.contains("k = 9"));
        assert!(txt.contains("0.9000 [0.8900, 0.9100]"));
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["wdepth", "frobnicate"], &mut o, &mut e), EXIT_INPUT);
        assert_eq!(run(["wdepth", "--help"], &mut o, &mut e), EXIT_OK);
    }
}
