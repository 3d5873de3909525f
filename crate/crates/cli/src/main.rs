mod config;
mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use scsim::accel::{self, MemoryModel, TechProfile};
use scsim::counter::{gate_report, unpack_planes, write_gate_report, ApcTree};
use scsim::network::{self, Dataset, QuantizedModel, Readout, ScConfig};
use scsim::neuron::B2sMode;
use scsim::pcc::{self, PccKind};
use scsim::rns::{IdealSource, PolynomialTable, RandomSource};
use scsim::DEFAULT_SEED;

use config::{parse_list, RunConfig};
use svg::{line_plot, Series};

const DATA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data");
const OUT_ENV: &str = "SCSIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "scsim", version, about = "Stochastic-computing CNN simulator and accelerator model")]
struct Cli {
    /// JSON file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (also settable through SCSIM_OUT_DIR)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively check the NAND-NOR chain against its recurrence
    VerifyLemma1(LemmaArgs),
    /// Expected output of every PCC kind over all input words
    PccCurves(CurveArgs),
    /// Compare the full-adder parallel counter with popcount
    ApcCheck(ApcArgs),
    /// Fixed-point and SC accuracy of a model at one setting
    Infer(InferArgs),
    /// Accuracy over bitstream lengths and precisions
    Sweep(SweepArgs),
    /// Area, latency, energy and products over channel counts
    ArchReport(ArchArgs),
}

#[derive(Args)]
struct LemmaArgs {
    /// Precisions, e.g. 3..10
    #[arg(long)]
    n: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Replace the inverter mask (negative control)
    #[arg(long)]
    corrupt_mask: Option<u32>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    n: Option<String>,
}

#[derive(Args)]
struct ApcArgs {
    #[arg(long, default_value_t = 25)]
    inputs: usize,
    /// Random vectors when the input count is too large to enumerate
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Swap the outputs of one adder (negative control)
    #[arg(long)]
    inject_fault: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct EvalArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// IDX image file (labels alongside) or CSV
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Evaluate only the first N images
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    pcc: Option<String>,
    /// ideal or lfsr
    #[arg(long)]
    source: Option<String>,
    /// per-cycle or accumulated
    #[arg(long)]
    b2s: Option<String>,
    /// count or restochastic
    #[arg(long)]
    readout: Option<String>,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n_bits: Option<u32>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    k_values: Option<String>,
    #[arg(long)]
    n_bits_values: Option<String>,
}

#[derive(Args)]
struct ArchArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    channels: Option<String>,
    /// Technology profile JSON; repeat for several
    #[arg(long = "profile")]
    profiles: Vec<PathBuf>,
    /// Off-chip bandwidth in bytes per ns
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n_bits: Option<u32>,
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    seed: u64,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let out = cli
            .out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
        Ok(Self { cfg, out, seed })
    }

    fn header(&self, command: &str, extra: &str) -> String {
        format!("# scsim {command} seed={:#x}{extra}\n", self.seed)
    }

    fn write(&self, name: &str, header: &str, body: &[u8]) -> Result<PathBuf> {
        let p = self.out.join(name);
        let mut f = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        f.write_all(header.as_bytes())?;
        f.write_all(body)?;
        info!("wrote {}", p.display());
        Ok(p)
    }

    fn write_svg(&self, name: &str, svg: &str) -> Result<()> {
        let p = self.out.join(name);
        fs::write(&p, svg).with_context(|| format!("creating {}", p.display()))?;
        Ok(())
    }
}

fn data_path(rel: &str) -> PathBuf {
    Path::new(DATA_DIR).join(rel)
}

fn verify_lemma1(ctx: &Ctx, a: &LemmaArgs) -> Result<bool> {
    let range = a.n.clone().or(ctx.cfg.n_range.clone()).unwrap_or_else(|| "3..10".into());
    let ns: Vec<u32> = parse_list(&range)?;
    if ns.iter().any(|&n| n > 10) {
        warn!("precisions above 10 enumerate 4^N cases and may take long");
    }
    let rows = pcc::verify_chain(&ns, a.corrupt_mask, a.tol)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    let extra =
        format!(" n={range} tol={:e}{}", a.tol, a.corrupt_mask.map(|m| format!(" mask={m:#x}")).unwrap_or_default());
    ctx.write("lemma1.csv", &ctx.header("verify-lemma1", &extra), &buf)?;
    let mut ok = true;
    for &n in &ns {
        let sub: Vec<_> = rows.iter().filter(|r| r.n == n).collect();
        let pass = sub.iter().filter(|r| r.pass).count();
        let worst = sub.iter().map(|r| r.abs_error).fold(0.0, f64::max);
        println!("N={n:2}  {pass}/{} pass  max |error| = {worst:.3e}", sub.len());
        ok &= pass == sub.len();
    }
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn pcc_curves(ctx: &Ctx, a: &CurveArgs) -> Result<bool> {
    let range = a.n.clone().or(ctx.cfg.n_range.clone()).unwrap_or_else(|| "3..10".into());
    let ns: Vec<u32> = parse_list(&range)?;
    let mut buf = Vec::new();
    let mut series = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for &n in &ns {
            for kind in PccKind::ALL {
                let pts = pcc::conversion_curve(kind, n)?;
                for p in &pts {
                    w.serialize(p)?;
                }
                let scale = f64::from(1u32 << n);
                series.push(Series {
                    name: format!("{} N={n}", kind.name()),
                    points: pts.iter().map(|p| (f64::from(p.x) / scale, p.expected_value)).collect(),
                    dashed: kind == PccKind::MuxChain,
                });
            }
        }
        w.flush()?;
    }
    ctx.write("pcc_curves.csv", &ctx.header("pcc-curves", &format!(" n={range}")), &buf)?;
    ctx.write_svg("pcc_curves.svg", &line_plot("PCC conversion curves", "X / 2^N", "P(output = 1)", &series, false))?;
    for &n in &ns {
        let scale = f64::from(1u32 << n);
        let offs: Vec<f64> = (0..1u32 << n).map(|x| pcc::nandnor_expected(x, n) - f64::from(x) / scale).collect();
        let lo = offs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = offs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("N={n:2}  NAND-NOR offset {lo:.6} (spread {:.1e})", hi - lo);
    }
    Ok(true)
}

fn apc_check(ctx: &Ctx, a: &ApcArgs) -> Result<bool> {
    let mut tree = ApcTree::new(a.inputs)?;
    if let Some(g) = a.inject_fault {
        if g >= tree.fa_count() + tree.ha_count() {
            bail!("fault gate {g} out of range (tree has {} adders)", tree.fa_count() + tree.ha_count());
        }
        tree.inject_fault(g);
    }
    let n = a.inputs;
    let exhaustive = n <= 16;
    let total: u64 = if exhaustive { 1 << n } else { a.samples };
    let mut src = IdealSource::new(ctx.seed, 32)?;
    let mut inputs = vec![0u64; n];
    let mut wires = Vec::new();
    let mut planes = vec![0u64; tree.output_width()];
    let mut counts = vec![0u32; 64];
    let mut mismatches = 0u64;
    let mut done = 0u64;
    while done < total {
        let lanes = (total - done).min(64) as usize;
        for (i, w) in inputs.iter_mut().enumerate() {
            *w = if exhaustive {
                (0..lanes).fold(0u64, |acc, t| acc | ((((done + t as u64) >> i) & 1) << t))
            } else {
                u64::from(src.next_word()) | (u64::from(src.next_word()) << 32)
            };
        }
        // corner cases lead the sampled run
        if !exhaustive && done == 0 {
            for w in inputs.iter_mut() {
                *w = (*w & !3) | 2;
            }
        }
        tree.count_lanes(&inputs, &mut wires, &mut planes)?;
        unpack_planes(&planes, lanes, &mut counts);
        for (t, &c) in counts.iter().enumerate().take(lanes) {
            let want: u32 = inputs.iter().map(|w| ((w >> t) & 1) as u32).sum();
            if c != want {
                mismatches += 1;
            }
        }
        done += lanes as u64;
    }
    let mode = if exhaustive { "exhaustive" } else { "sampled" };
    let body = format!(
        "n_inputs,mode,vectors,mismatches,fa_count,ha_count\n{n},{mode},{total},{mismatches},{},{}\n",
        tree.fa_count(),
        tree.ha_count()
    );
    let extra = a.inject_fault.map(|g| format!(" fault={g}")).unwrap_or_default();
    ctx.write("apc_check.csv", &ctx.header("apc-check", &extra), body.as_bytes())?;
    println!(
        "APC{n} {mode}: {total} vectors, {mismatches} mismatches ({} FA, {} HA)",
        tree.fa_count(),
        tree.ha_count()
    );
    Ok(mismatches == 0)
}

struct EvalSetup {
    model: QuantizedModel,
    data: Dataset,
    base: ScConfig,
}

fn eval_setup(ctx: &Ctx, a: &EvalArgs) -> Result<EvalSetup> {
    let c = &ctx.cfg;
    let model_path = a.model.clone().or(c.model.clone()).unwrap_or_else(|| data_path("models/toy_mnist.json"));
    let data_path_ =
        a.dataset.clone().or(c.dataset.clone()).unwrap_or_else(|| data_path("mnist/eval1000-images-idx3-ubyte"));
    let model = QuantizedModel::load(&model_path).with_context(|| format!("loading model {}", model_path.display()))?;
    let mut data = Dataset::load(&data_path_).with_context(|| format!("loading dataset {}", data_path_.display()))?;
    if let Some(n) = a.limit.or(c.limit) {
        data = data.take(n);
    }
    let mut base = ScConfig::new(1);
    if let Some(p) = a.pcc.as_ref().or(c.pcc.as_ref()) {
        base.pcc = p.parse()?;
    }
    if let Some(s) = a.source.as_ref().or(c.source.as_ref()) {
        base.source = serde_json::from_value(serde_json::Value::String(s.clone()))
            .with_context(|| format!("unknown source `{s}`"))?;
    }
    if let Some(s) = a.b2s.as_ref().or(c.b2s.as_ref()) {
        base.b2s_mode = serde_json::from_value::<B2sMode>(serde_json::Value::String(s.clone()))
            .with_context(|| format!("unknown B2S mode `{s}`"))?;
    }
    if let Some(s) = a.readout.as_ref().or(c.readout.as_ref()) {
        base.readout = serde_json::from_value::<Readout>(serde_json::Value::String(s.clone()))
            .with_context(|| format!("unknown readout `{s}`"))?;
    }
    if let Some(taps) = &c.lfsr_taps {
        let table = PolynomialTable { taps: taps.clone() };
        table.validate().context("lfsr_taps in config")?;
        base.lfsr_taps = Some(table);
    }
    Ok(EvalSetup { model, data, base })
}

fn describe(cfg: &ScConfig) -> String {
    let name = |v: serde_json::Value| v.as_str().unwrap_or_default().to_string();
    format!(
        " pcc={} source={} b2s={} readout={}",
        cfg.pcc.name(),
        name(serde_json::json!(cfg.source)),
        name(serde_json::json!(cfg.b2s_mode)),
        name(serde_json::json!(cfg.readout))
    )
}

fn infer(ctx: &Ctx, a: &InferArgs) -> Result<bool> {
    let s = eval_setup(ctx, &a.eval)?;
    let k = a.k.or(ctx.cfg.k).unwrap_or(128);
    let n_bits = a.n_bits.or(ctx.cfg.n_bits).unwrap_or(s.model.n_bits);
    let model = if n_bits == s.model.n_bits { s.model } else { s.model.requantize(n_bits)? };
    let fixed = network::fixed_point_accuracy(&model, &s.data)?;
    let sc = network::sc_accuracy(&model, &s.data, &ScConfig { k, ..s.base.clone() }, ctx.seed)?;
    let mut buf = Vec::new();
    network::write_reports(&[with_seed(fixed.clone(), ctx.seed), sc.clone()], &mut buf)?;
    ctx.write("infer.csv", &ctx.header("infer", &format!(" model={}{}", model.name, describe(&s.base))), &buf)?;
    println!("{} images, n_bits={n_bits}", s.data.len());
    println!("fixed point  {:.2}%", 100.0 * fixed.accuracy);
    println!("SC k={k:<6}  {:.2}%", 100.0 * sc.accuracy);
    Ok(true)
}

/// Baseline rows carry the run seed so every CSV row is self-describing.
fn with_seed(mut r: network::EvalReport, seed: u64) -> network::EvalReport {
    r.seed = seed;
    r
}

fn sweep(ctx: &Ctx, a: &SweepArgs) -> Result<bool> {
    let s = eval_setup(ctx, &a.eval)?;
    let ks: Vec<usize> =
        parse_list(&a.k_values.clone().or(ctx.cfg.k_values.clone()).unwrap_or_else(|| "8,16,32,64,128".into()))?;
    let nbs: Vec<u32> = match a.n_bits_values.clone().or(ctx.cfg.n_bits_values.clone()) {
        Some(v) => parse_list(&v)?,
        None => vec![s.model.n_bits],
    };
    let mut reports = Vec::new();
    let mut series = Vec::new();
    for &n in &nbs {
        let m = if n == s.model.n_bits { s.model.clone() } else { s.model.requantize(n)? };
        let fixed = with_seed(network::fixed_point_accuracy(&m, &s.data)?, ctx.seed);
        println!("n_bits={n:2}  fixed point      {:.2}%", 100.0 * fixed.accuracy);
        reports.push(fixed);
        let rows = network::accuracy_sweep(&m, &s.data, &ks, &[n], ctx.seed, &s.base)?;
        for r in &rows {
            println!("n_bits={n:2}  SC k={:<8}  {:.2}%", r.k.unwrap_or(0), 100.0 * r.accuracy);
        }
        series.push(Series {
            name: format!("n_bits={n}"),
            points: rows.iter().map(|r| (r.k.unwrap_or(0) as f64, 100.0 * r.accuracy)).collect(),
            dashed: false,
        });
        reports.extend(rows);
    }
    let mut buf = Vec::new();
    network::write_reports(&reports, &mut buf)?;
    ctx.write("sweep.csv", &ctx.header("sweep", &format!(" model={}{}", s.model.name, describe(&s.base))), &buf)?;
    ctx.write_svg("sweep.svg", &line_plot("SC accuracy vs bitstream length", "k", "accuracy (%)", &series, true))?;
    Ok(true)
}

fn arch_report(ctx: &Ctx, a: &ArchArgs) -> Result<bool> {
    let c = &ctx.cfg;
    let model_path = a.model.clone().or(c.model.clone()).unwrap_or_else(|| data_path("models/lenet5.json"));
    let model = QuantizedModel::load(&model_path).with_context(|| format!("loading model {}", model_path.display()))?;
    let channels: Vec<usize> = parse_list(&a.channels.clone().or(c.channels.clone()).unwrap_or_else(|| "1-32".into()))?;
    let paths = if a.profiles.is_empty() { c.profiles.clone().unwrap_or_default() } else { a.profiles.clone() };
    let profiles = if paths.is_empty() {
        TechProfile::defaults()
    } else {
        paths
            .iter()
            .map(|p| {
                TechProfile::load(p)
                    .map(TechProfile::apply_scaling)
                    .with_context(|| format!("loading profile {}", p.display()))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut mem = MemoryModel::default();
    if let Some(bw) = a.bandwidth.or(c.bandwidth) {
        mem = MemoryModel::new(bw)?;
    }
    let k = a.k.or(c.k).unwrap_or(32);
    let n_bits = a.n_bits.or(c.n_bits).unwrap_or(8);
    let report = accel::channel_sweep(&model, &channels, &profiles, &mem, n_bits, k)?;
    let extra = format!(" model={} k={k} n_bits={n_bits} bandwidth={}", model.name, mem.bandwidth_bytes_per_ns);

    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    ctx.write("arch_sweep.csv", &ctx.header("arch-report", &extra), &buf)?;

    let mut gates = Vec::new();
    write_gate_report(&gate_report(n_bits, 25, 16)?, &mut gates)?;
    ctx.write("arch_gates.csv", &ctx.header("arch-report", &extra), &gates)?;

    let mut checks = String::from("check,profile,value,pass\n");
    let mut ok = true;
    for p in &profiles {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.profile == p.name).collect();
        let xs: Vec<f64> = rows.iter().map(|r| r.channels as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.logic_area_um2).collect();
        let r2 = r_squared(&xs, &ys);
        let lin = r2 >= 0.999;
        let doubling = rows
            .iter()
            .all(|r| rows.iter().find(|q| q.channels == 2 * r.channels).is_none_or(|q| q.latency_ns <= r.latency_ns));
        checks.push_str(&format!("logic_area_r2,{},{r2:.6},{lin}\n", p.name));
        checks.push_str(&format!("latency_doubling_monotone,{},{doubling},{doubling}\n", p.name));
        ok &= lin && doubling;
        for m in ["adp", "edp", "edap"] {
            if let Some(am) = report.argmin_of(&p.name, m) {
                checks.push_str(&format!("argmin_{m},{},{},{}\n", p.name, am.channels, am.interior));
                println!(
                    "{:<12} argmin {m:<4} = {:3} channels{}",
                    p.name,
                    am.channels,
                    if am.interior { "" } else { " (at range edge)" }
                );
            }
        }
    }
    if profiles.len() >= 2 {
        let (f, r) = (&profiles[0], &profiles[1]);
        for (block, metric, g) in accel::profile_gains(f, r) {
            checks.push_str(&format!("gain_{block}_{metric},{}/{},{g:.2},true\n", f.name, r.name));
            println!("{block:<8} {metric:<6} gain {} -> {}: {g:6.2}%", f.name, r.name);
        }
        if let Some(best) = report.argmin_of(&f.name, "edap") {
            if let (Some(a0), Some(b0)) = (report.row(&f.name, best.channels), report.row(&r.name, best.channels)) {
                let g = accel::gain_percent(a0.edap, b0.edap);
                checks.push_str(&format!("edap_gain_at_{},{}/{},{g:.2},true\n", best.channels, f.name, r.name));
                println!("EDAP gain at {} channels: {g:.2}%", best.channels);
            }
        }
    }
    ctx.write("arch_summary.csv", &ctx.header("arch-report", &extra), checks.as_bytes())?;

    let series: Vec<Series> = profiles
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            let rows: Vec<_> = report.rows.iter().filter(|r| r.profile == p.name).collect();
            let norm = |f: fn(&accel::SweepRow) -> f64| {
                let m = rows.iter().map(|r| f(r)).fold(f64::INFINITY, f64::min);
                rows.iter().map(|r| (r.channels as f64, f(r) / m)).collect::<Vec<_>>()
            };
            vec![
                Series { name: format!("{} ADP", p.name), points: norm(|r| r.adp), dashed: i > 0 },
                Series { name: format!("{} EDAP", p.name), points: norm(|r| r.edap), dashed: i > 0 },
                Series { name: format!("{} latency", p.name), points: norm(|r| r.latency_ns), dashed: i > 0 },
            ]
        })
        .collect();
    ctx.write_svg(
        "arch_sweep.svg",
        &line_plot("Channel sweep (normalized to minimum)", "channels", "relative", &series, false),
    )?;
    Ok(ok)
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 1.0;
    }
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

fn run(cli: &Cli) -> Result<bool> {
    let ctx = Ctx::new(cli)?;
    match &cli.cmd {
        Command::VerifyLemma1(a) => verify_lemma1(&ctx, a),
        Command::PccCurves(a) => pcc_curves(&ctx, a),
        Command::ApcCheck(a) => apc_check(&ctx, a),
        Command::Infer(a) => infer(&ctx, a),
        Command::Sweep(a) => sweep(&ctx, a),
        Command::ArchReport(a) => arch_report(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
