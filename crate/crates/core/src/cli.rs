//! Command-line front end.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 for bad
//! input data, 3 for internal failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::baselines::{Aggregate, HashHeatParams};
use crate::bf2::{Bf2Config, ClearMode};
use crate::error::{Error, Result};
use crate::events::{
    load_stream, mix_streams, read_csv, save_stream_with_comment, write_csv, Label, LabeledStream, LoadOptions,
    SensorGeometry, StreamFormat,
};
use crate::filter::{classify_stream, FilterConfig, FilterKind, Knob};
use crate::metrics::{confusion, confusion_from_labels, log_grid, rates, roc_sweep, ConfusionCounts};
use crate::plot::LinePlot;
use crate::resources::{
    default_bf2_config, energy_per_event, memory_bits, throughput, EnergyCostTable, REFERENCE_GEOMETRIES,
};
use crate::stcf::StcfParams;
use crate::synth::{gen_scene, gen_shot_noise, NoiseSpec, SceneSpec, DEFAULT_NOISE_RATE};
use crate::theory::{dse_sweep, estimate_rate_histogram, predict, PredictionReport};

#[derive(Debug, Parser)]
#[command(name = "bf2", version, about = "Hash-based background-activity filtering for event cameras")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify every event of a stream.
    Filter(FilterCmd),
    /// Score a filter (or stored predictions) against ground truth.
    Evaluate(EvaluateCmd),
    /// Sweep a filter's window and report the ROC curve.
    Roc(RocCmd),
    /// Predict error rates and F1 of one BF2 layout from a labelled sample.
    Predict(PredictCmd),
    /// Rank BF2 layouts by predicted F1.
    Dse(DseCmd),
    /// Memory, energy and throughput models.
    Resources(ResourcesCmd),
    /// Generate synthetic streams.
    #[command(subcommand)]
    Synth(SynthCmd),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Event file (.csv/.txt as CSV, anything else as binary).
    input: PathBuf,
    /// Sensor size as WxH; required for CSV input.
    #[arg(long)]
    geometry: Option<SensorGeometry>,
    /// Sort events by time instead of rejecting out-of-order input.
    #[arg(long)]
    sort: bool,
}

impl InputArgs {
    fn load(&self) -> Result<LabeledStream> {
        load_stream(
            &self.input,
            StreamFormat::from_path(&self.input),
            LoadOptions {
                geometry: self.geometry,
                sort: self.sort,
            },
        )
    }

    fn echo(&self) -> String {
        let mut s = format!("input={}", self.input.display());
        if let Some(g) = self.geometry {
            let _ = write!(s, " geometry={g}");
        }
        let _ = write!(s, " sort={}", self.sort);
        s
    }
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Filter engine: bf2, baf, guo, onf or hashheat.
    #[arg(long, default_value = "bf2")]
    filter: FilterKind,
    /// Correlation window in microseconds.
    #[arg(long, default_value_t = 5000)]
    tau_us: u64,
    /// Supporting neighbours required for signal (bf2, guo).
    #[arg(short = 's', long, default_value_t = 1)]
    support: u32,
    /// Bits per BF2 row (power of two).
    #[arg(short = 'W', long, default_value_t = 16384)]
    width: usize,
    /// BF2 rows.
    #[arg(short = 'D', long, default_value_t = 4)]
    depth: usize,
    /// BF2 banks (hash functions).
    #[arg(short = 'K', long, default_value_t = 4)]
    banks: usize,
    #[arg(long, default_value = "strict")]
    clear_mode: ClearMode,
    /// Separate BF2 stores for ON and OFF events.
    #[arg(long)]
    polarity_split: bool,
    #[arg(long, default_value_t = 0)]
    hash_seed: u64,
    /// HashHeat hash functions.
    #[arg(long, default_value_t = 4)]
    hh_k: usize,
    /// HashHeat array cells.
    #[arg(long, default_value_t = 4096)]
    hh_m: usize,
    /// HashHeat bits per cell.
    #[arg(long, default_value_t = 8)]
    hh_cell_width: u32,
    /// HashHeat segment length.
    #[arg(long, default_value_t = 1000.0)]
    hh_segment: f64,
    /// HashHeat threshold.
    #[arg(long, default_value_t = 4)]
    hh_threshold: u32,
    /// HashHeat reset period in events.
    #[arg(long, default_value_t = 2000)]
    hh_reset: usize,
    /// HashHeat aggregate: sum or min.
    #[arg(long, default_value = "sum")]
    hh_aggregate: Aggregate,
}

impl FilterArgs {
    fn config(&self) -> Result<FilterConfig> {
        Ok(match self.filter {
            FilterKind::Bf2 => FilterConfig::Bf2 {
                params: StcfParams::new(self.tau_us, self.support, self.width, self.depth, self.banks)?
                    .with_clear_mode(self.clear_mode)
                    .with_polarity_split(self.polarity_split),
                hash_seed: self.hash_seed,
            },
            FilterKind::Baf => FilterConfig::Baf { tau: self.tau_us },
            FilterKind::Guo => FilterConfig::Guo {
                tau: self.tau_us,
                support: self.support,
            },
            FilterKind::Onf => FilterConfig::Onf { tau: self.tau_us },
            FilterKind::HashHeat => {
                let params = HashHeatParams {
                    functions: self.hh_k,
                    cells: self.hh_m,
                    cell_width: self.hh_cell_width,
                    segment_length: self.hh_segment,
                    threshold: self.hh_threshold,
                    reset_period: self.hh_reset,
                    aggregate: self.hh_aggregate,
                };
                params.validate()?;
                FilterConfig::HashHeat {
                    params,
                    seed: self.hash_seed,
                }
            }
        })
    }
}

#[derive(Debug, Args)]
struct FilterCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    filter: FilterArgs,
    /// Output file; CSV gets a `pred` column.
    #[arg(short, long)]
    output: PathBuf,
    /// Write only the events classified as signal.
    #[arg(long)]
    only_signal: bool,
}

#[derive(Debug, Args)]
struct EvaluateCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    filter: FilterArgs,
    /// Score the input's `pred` column instead of running a filter.
    #[arg(long)]
    from_predictions: bool,
    /// Also write the metrics to this CSV file.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RocCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    filter: FilterArgs,
    /// Grid points, log-spaced between the knob bounds.
    #[arg(long, default_value_t = 16)]
    points: usize,
    /// Lower knob bound (default 100 us, or 1 for hashheat).
    #[arg(long)]
    knob_min: Option<f64>,
    /// Upper knob bound (default 1 s, or 8192 for hashheat).
    #[arg(long)]
    knob_max: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
    /// Also draw the curve as SVG.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictCmd {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 5000)]
    tau_us: u64,
    #[arg(short = 'W', long, default_value_t = 16384)]
    width: usize,
    #[arg(short = 'D', long, default_value_t = 4)]
    depth: usize,
    #[arg(short = 'K', long, default_value_t = 4)]
    banks: usize,
    #[arg(short, long)]
    output: PathBuf,
    /// Draw the events-per-row histogram as SVG.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DseCmd {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 5000)]
    tau_us: u64,
    #[arg(short = 'K', long, default_value_t = 4)]
    banks: usize,
    /// Comma-separated WxD layouts.
    #[arg(long, default_value = "32768x2,16384x4,8192x8,4096x16,2048x32")]
    configs: String,
    #[arg(short, long)]
    output: PathBuf,
    /// Draw predicted F1 against depth as SVG.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResourcesCmd {
    /// Comma-separated filters, or `all`.
    #[arg(long, default_value = "all")]
    filters: String,
    /// Comma-separated WxH sizes, or `table2` for the reference set.
    #[arg(long, default_value = "table2")]
    geometries: String,
    #[arg(long, default_value_t = 5000)]
    tau_us: u64,
    /// TOML cost table replacing the bundled 45 nm defaults.
    #[arg(long)]
    costs: Option<PathBuf>,
    /// Clock used for the throughput line.
    #[arg(long, default_value_t = 166e6)]
    clock_hz: f64,
    #[arg(short, long)]
    output: PathBuf,
    /// Draw energy per event against sensor size as SVG.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SynthCmd {
    /// Uniform shot noise, labelled noise.
    Noise(NoiseCmd),
    /// Moving bars, labelled signal, optionally mixed with shot noise.
    Scene(SceneCmd),
}

#[derive(Debug, Args)]
struct NoiseCmd {
    #[arg(long, default_value = "346x260")]
    geometry: SensorGeometry,
    /// Events per pixel per second.
    #[arg(long, default_value_t = DEFAULT_NOISE_RATE)]
    rate_hz: f64,
    #[arg(long, default_value_t = 1_000_000)]
    duration_us: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SceneCmd {
    #[arg(long, default_value = "346x260")]
    geometry: SensorGeometry,
    #[arg(long, default_value_t = 1_000_000)]
    duration_us: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Events per covered pixel per second.
    #[arg(long)]
    interior_rate_hz: Option<f64>,
    /// Maximum delay of edge events in microseconds.
    #[arg(long)]
    jitter_us: Option<u64>,
    /// Mix in shot noise at this per-pixel rate (seeded with seed + 1).
    #[arg(long, default_value_t = 0.0)]
    noise_rate_hz: f64,
    #[arg(short, long)]
    output: PathBuf,
}

fn echo(command: &str, body: impl AsRef<str>) -> String {
    format!("bf2 {command} {}", body.as_ref())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_file(comment: &str, header: &str, rows: &[String]) -> String {
    let mut s = format!("# {comment}\n{header}\n");
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

fn fmt_rate(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}

fn cmd_filter(cmd: &FilterCmd) -> Result<()> {
    let config = cmd.filter.config()?;
    let stream = cmd.input.load()?;
    let mut filter = config.build(stream.geometry())?;
    let out = classify_stream(&mut filter, &stream)?;
    let comment = echo(
        "filter",
        format!("{} {} only_signal={}", cmd.input.echo(), config.describe(), cmd.only_signal),
    );
    let format = StreamFormat::from_path(&cmd.output);
    if cmd.only_signal {
        let kept = stream
            .iter()
            .zip(&out)
            .filter(|(_, c)| c.class == Label::Signal)
            .map(|(e, _)| *e)
            .collect();
        let kept = LabeledStream::new(stream.geometry(), kept)?;
        save_stream_with_comment(&kept, &cmd.output, format, Some(&comment))?;
    } else {
        if format != StreamFormat::Csv {
            return Err(Error::Config("per-event predictions need CSV output; use --only-signal for binary".into()));
        }
        let preds: Vec<Label> = out.iter().map(|c| c.class).collect();
        let mut text = String::new();
        write_csv(&mut text, stream.events(), Some(&comment), Some(&preds));
        write_text(&cmd.output, &text)?;
    }
    let signal = out.iter().filter(|c| c.class == Label::Signal).count();
    println!("events={} signal={} noise={}", out.len(), signal, out.len() - signal);
    Ok(())
}

fn cmd_evaluate(cmd: &EvaluateCmd) -> Result<()> {
    let stream = cmd.input.load()?;
    let (counts, what): (ConfusionCounts, String) = if cmd.from_predictions {
        if StreamFormat::from_path(&cmd.input.input) != StreamFormat::Csv {
            return Err(Error::Config("--from-predictions needs CSV input".into()));
        }
        let text = std::fs::read_to_string(&cmd.input.input).map_err(|e| Error::io(&cmd.input.input, e))?;
        let mut contents = read_csv(&text)?;
        let preds = contents
            .predictions
            .take()
            .ok_or_else(|| Error::Label("input has no pred column".into()))?;
        let preds = if cmd.input.sort {
            // Keep predictions attached to their events through the stable sort.
            let mut order: Vec<usize> = (0..contents.events.len()).collect();
            order.sort_by_key(|&i| contents.events[i].t);
            order.into_iter().map(|i| preds[i]).collect()
        } else {
            preds
        };
        (confusion_from_labels(&preds, &stream)?, "predictions=pred-column".into())
    } else {
        let config = cmd.filter.config()?;
        let mut filter = config.build(stream.geometry())?;
        let out = classify_stream(&mut filter, &stream)?;
        (confusion(&out, &stream)?, config.describe())
    };
    let r = rates(&counts);
    let summary = [
        ("tp", counts.tp.to_string()),
        ("fp", counts.fp.to_string()),
        ("tn", counts.tn.to_string()),
        ("fn", counts.fn_.to_string()),
        ("fpr", fmt_rate(r.fpr)),
        ("fnr", fmt_rate(r.fnr)),
        ("tpr", fmt_rate(r.tpr)),
        ("precision", fmt_rate(r.precision)),
        ("recall", fmt_rate(r.recall)),
        ("f1", fmt_rate(r.f1)),
    ];
    for (k, v) in &summary {
        println!("{k}={v}");
    }
    if let Some(path) = &cmd.output {
        let comment = echo("evaluate", format!("{} {what}", cmd.input.echo()));
        let header = summary.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(",");
        let row = summary.iter().map(|(_, v)| v.as_str()).collect::<Vec<_>>().join(",");
        write_text(path, &csv_file(&comment, &header, &[row]))?;
    }
    Ok(())
}

fn cmd_roc(cmd: &RocCmd) -> Result<()> {
    let config = cmd.filter.config()?;
    let (lo, hi) = match config.knob() {
        Knob::Tau => (100.0, 1e6),
        Knob::SegmentLength => (1.0, 8192.0),
    };
    let (lo, hi) = (cmd.knob_min.unwrap_or(lo), cmd.knob_max.unwrap_or(hi));
    if cmd.points == 0 || !(lo > 0.0 && hi >= lo) {
        return Err(Error::Config("ROC grid needs at least one point and 0 < knob-min <= knob-max".into()));
    }
    let grid = log_grid(lo, hi, cmd.points);
    let stream = cmd.input.load()?;
    let curve = roc_sweep(&stream, &config, &grid)?;
    let comment = echo(
        "roc",
        format!(
            "{} {} points={} knob_min={lo} knob_max={hi}",
            cmd.input.echo(),
            config.describe(),
            cmd.points
        ),
    );
    let rows: Vec<String> = curve
        .points
        .iter()
        .map(|p| format!("{:.3},{:.6},{:.6}", p.knob, p.fpr, p.tpr))
        .collect();
    let mut text = csv_file(&comment, &format!("{},fpr,tpr", curve.knob.as_str()), &rows);
    let _ = writeln!(text, "# auc={:.6}", curve.auc);
    write_text(&cmd.output, &text)?;
    if let Some(path) = &cmd.plot {
        let mut pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        pts.push((0.0, 0.0));
        pts.push((1.0, 1.0));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let svg = LinePlot::new(&format!("ROC, {} (AUC {:.3})", config.kind(), curve.auc), "FPR", "TPR")
            .add(config.kind().as_str(), pts)
            .to_svg();
        write_text(path, &svg)?;
    }
    println!("auc={:.6}", curve.auc);
    Ok(())
}

fn report_row(r: &PredictionReport) -> String {
    format!(
        "{},{},{},{},{},{:.6},{:.6},{:.6}",
        r.width, r.depth, r.banks, r.tau_row, r.memory_bits, r.fpr, r.fnr, r.f1
    )
}

const REPORT_HEADER: &str = "W,D,K,tau_row_us,memory_bits,fpr_pred,fnr_pred,f1_pred";

fn cmd_predict(cmd: &PredictCmd) -> Result<()> {
    let config = Bf2Config::from_window(cmd.width, cmd.depth, cmd.banks, cmd.tau_us)?;
    let stream = cmd.input.load()?;
    let report = predict(&stream, &config)?;
    let comment = echo(
        "predict",
        format!(
            "{} tau_us={} W={} D={} K={}",
            cmd.input.echo(),
            cmd.tau_us,
            cmd.width,
            cmd.depth,
            cmd.banks
        ),
    );
    write_text(&cmd.output, &csv_file(&comment, REPORT_HEADER, &[report_row(&report)]))?;
    if let Some(path) = &cmd.plot {
        let hist = estimate_rate_histogram(&stream, config.tau_row())?;
        let pts = hist.probs().iter().enumerate().map(|(i, p)| (i as f64, *p)).collect();
        let svg = LinePlot::new("Events per row period", "events", "probability")
            .add("p(i)", pts)
            .to_svg();
        write_text(path, &svg)?;
    }
    println!("fpr_pred={:.6} fnr_pred={:.6} f1_pred={:.6}", report.fpr, report.fnr, report.f1);
    Ok(())
}

fn parse_layouts(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|item| {
            let (w, d) = item
                .trim()
                .split_once('x')
                .ok_or_else(|| Error::Config(format!("layout `{item}` is not WxD")))?;
            let parse = |v: &str| v.parse::<usize>().map_err(|_| Error::Config(format!("bad number in `{item}`")));
            Ok((parse(w)?, parse(d)?))
        })
        .collect()
}

fn cmd_dse(cmd: &DseCmd) -> Result<()> {
    let layouts = parse_layouts(&cmd.configs)?;
    let stream = cmd.input.load()?;
    let ranked = dse_sweep(&stream, cmd.tau_us, cmd.banks, &layouts)?;
    let comment = echo(
        "dse",
        format!(
            "{} tau_us={} K={} configs={}",
            cmd.input.echo(),
            cmd.tau_us,
            cmd.banks,
            cmd.configs
        ),
    );
    let rows: Vec<String> = ranked.iter().map(report_row).collect();
    write_text(&cmd.output, &csv_file(&comment, REPORT_HEADER, &rows))?;
    if let Some(path) = &cmd.plot {
        let mut pts: Vec<(f64, f64)> = ranked.iter().map(|r| (r.depth as f64, r.f1)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let svg = LinePlot::new("Predicted F1", "D", "F1").log_x(true).add("F1_pred", pts).to_svg();
        write_text(path, &svg)?;
    }
    if let Some(best) = ranked.first() {
        println!("best W={} D={} f1_pred={:.6}", best.width, best.depth, best.f1);
    }
    Ok(())
}

fn parse_geometries(s: &str) -> Result<Vec<SensorGeometry>> {
    if s == "table2" {
        return REFERENCE_GEOMETRIES
            .iter()
            .map(|&(w, h)| SensorGeometry::new(w, h))
            .collect();
    }
    s.split(',').map(|g| g.trim().parse()).collect()
}

fn parse_filters(s: &str) -> Result<Vec<FilterKind>> {
    if s == "all" {
        return Ok(FilterKind::ALL.to_vec());
    }
    s.split(',').map(|f| f.trim().parse()).collect()
}

fn reference_config(kind: FilterKind, geometry: SensorGeometry, tau: u64) -> Result<FilterConfig> {
    Ok(match kind {
        FilterKind::Bf2 => FilterConfig::Bf2 {
            params: StcfParams::from_config(tau, 1, default_bf2_config(geometry, tau)?)?,
            hash_seed: 0,
        },
        FilterKind::Baf => FilterConfig::Baf { tau },
        FilterKind::Guo => FilterConfig::Guo { tau, support: 1 },
        FilterKind::Onf => FilterConfig::Onf { tau },
        FilterKind::HashHeat => FilterConfig::HashHeat {
            params: HashHeatParams::default(),
            seed: 0,
        },
    })
}

fn cmd_resources(cmd: &ResourcesCmd) -> Result<()> {
    let costs = match &cmd.costs {
        Some(p) => EnergyCostTable::load(p)?,
        None => EnergyCostTable::default(),
    };
    let filters = parse_filters(&cmd.filters)?;
    let geometries = parse_geometries(&cmd.geometries)?;
    let mut rows = Vec::new();
    let mut series: Vec<(FilterKind, Vec<(f64, f64)>)> = filters.iter().map(|&k| (k, Vec::new())).collect();
    for &g in &geometries {
        for (kind, pts) in series.iter_mut() {
            let config = reference_config(*kind, g, cmd.tau_us)?;
            let bits = memory_bits(&config, g);
            let pj = energy_per_event(&config, g, &costs)?;
            rows.push(format!("{g},{kind},{bits},{:.3},{pj:.3}", bits as f64 / 8192.0));
            pts.push(((g.pixels() as f64).sqrt(), pj));
        }
    }
    let comment = echo(
        "resources",
        format!(
            "filters={} geometries={} tau_us={} costs={} clock_hz={}",
            cmd.filters,
            cmd.geometries,
            cmd.tau_us,
            cmd.costs.as_ref().map_or("default".into(), |p| p.display().to_string()),
            cmd.clock_hz
        ),
    );
    let mut text = csv_file(&comment, "geometry,filter,memory_bits,memory_kib,energy_pj", &rows);
    let _ = writeln!(text, "# bf2_throughput_eps={:.1}", throughput(cmd.clock_hz));
    write_text(&cmd.output, &text)?;
    if let Some(path) = &cmd.plot {
        let mut plot = LinePlot::new("Energy per event", "sqrt(R*C)", "pJ");
        for (kind, pts) in series {
            plot = plot.add(kind.as_str(), pts);
        }
        write_text(path, &plot.to_svg())?;
    }
    println!("bf2_throughput_eps={:.1}", throughput(cmd.clock_hz));
    Ok(())
}

fn cmd_synth(cmd: &SynthCmd) -> Result<()> {
    let (stream, output, comment) = match cmd {
        SynthCmd::Noise(n) => {
            let spec = NoiseSpec {
                geometry: n.geometry,
                rate_hz: n.rate_hz,
                duration_us: n.duration_us,
                seed: n.seed,
            };
            let comment = echo(
                "synth noise",
                format!(
                    "geometry={} rate_hz={} duration_us={} seed={}",
                    n.geometry, n.rate_hz, n.duration_us, n.seed
                ),
            );
            (gen_shot_noise(&spec)?, &n.output, comment)
        }
        SynthCmd::Scene(s) => {
            let mut spec = SceneSpec::demo(s.geometry, s.duration_us, s.seed);
            if let Some(r) = s.interior_rate_hz {
                spec.interior_rate_hz = r;
            }
            if let Some(j) = s.jitter_us {
                spec.jitter_us = j;
            }
            let mut stream = gen_scene(&spec)?;
            if s.noise_rate_hz > 0.0 {
                let noise = gen_shot_noise(&NoiseSpec {
                    geometry: s.geometry,
                    rate_hz: s.noise_rate_hz,
                    duration_us: s.duration_us,
                    seed: s.seed.wrapping_add(1),
                })?;
                stream = mix_streams(&stream, &noise)?;
            }
            let comment = echo(
                "synth scene",
                format!(
                    "geometry={} duration_us={} seed={} interior_rate_hz={} jitter_us={} noise_rate_hz={}",
                    s.geometry, s.duration_us, s.seed, spec.interior_rate_hz, spec.jitter_us, s.noise_rate_hz
                ),
            );
            (stream, &s.output, comment)
        }
    };
    save_stream_with_comment(&stream, output, StreamFormat::from_path(output), Some(&comment))?;
    println!("events={}", stream.len());
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Filter(c) => cmd_filter(c),
        Command::Evaluate(c) => cmd_evaluate(c),
        Command::Roc(c) => cmd_roc(c),
        Command::Predict(c) => cmd_predict(c),
        Command::Dse(c) => cmd_dse(c),
        Command::Resources(c) => cmd_resources(c),
        Command::Synth(c) => cmd_synth(c),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) if e.is_data_error() => {
            eprintln!("error: {e}");
            2
        }
        Ok(Err(e @ Error::Config(_))) => {
            eprintln!("error: {e}\n\n{}", Cli::command().render_usage());
            1
        }
        Ok(Err(e)) => {
            eprintln!("internal error: {e}");
            3
        }
        Err(_) => 3,
    }
}
