//! Command-line surface. `run` returns an [`AppError`] whose
//! [`exit_code`](AppError::exit_code) the binary reports.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use circaphase_core::anf::{anf_run, extract_phase};
use circaphase_core::cosinor::{actogram, daily_acrophases};
use circaphase_core::periodogram::inclusion_at_threshold;
use circaphase_core::prc::{PrcCurve, PrcMethod};
use circaphase_core::synth::corrupt;
use circaphase_core::{average_traces, TraceGroup};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::compare::compare;
use crate::config::{RunConfig, OUT_DIR_ENV};
use crate::csv_io::{write_csv, CsvLayout};
use crate::dam::write_dam;
use crate::error::{AppError, AppResult};
use crate::load::{load_entry, load_input, Manifest, ManifestEntry, MANIFEST_FILE};
use crate::output::{
    read_json, read_prc, write_actogram, write_json, write_phase_series, write_prc, write_rows, Metadata,
};
use crate::pipeline::{corrupt_group, run_prc, screen_groups, with_workers, PrcGroup};
use crate::scenario::{generate, Role, Scenario, Truth};

#[derive(Debug, Parser)]
#[command(name = "circaphase", version, about = "Circadian phase estimation from activity recordings")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate monitor files and ground truth from a scenario.
    Synth(SynthArgs),
    /// Exclude arrhythmic and inactive channels.
    Screen(ScreenArgs),
    /// Run the notch filter and write phase series.
    Estimate(EstimateArgs),
    /// Daily acrophases, free-running period and actograms.
    Cosinor(CosinorArgs),
    /// Phase-response curve against a control.
    Prc(PrcArgs),
    /// Add Gaussian noise to traces.
    Corrupt(CorruptArgs),
    /// Error table between two PRC curves and a reference.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "table1")]
    pub scenario: Option<PathBuf>,
    /// Use the built-in nine-incubator pulse protocol.
    #[arg(long)]
    pub table1: bool,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScreenFlags {
    /// Analysis window in hours, `start,end`.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
    /// Power-ratio threshold for rhythmicity.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Minimum mean counts per bin.
    #[arg(long)]
    pub floor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// Monitor (.txt) or CSV (.csv) files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub flags: ScreenFlags,
    /// Ground-truth JSON files written by `synth`; matched by label.
    #[arg(long)]
    pub truth: Vec<PathBuf>,
    /// Report the inclusion ratio at each of these thresholds.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AnfFlags {
    /// Notch damping.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Frequency adaptation gain.
    #[arg(long)]
    pub gamma_omega: Option<f64>,
    /// Bias estimator gain (1/h).
    #[arg(long)]
    pub gamma_d: Option<f64>,
    /// Resonator sections, one per harmonic.
    #[arg(long)]
    pub harmonics: Option<usize>,
    /// RK4 steps per bin.
    #[arg(long)]
    pub substeps: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Monitor (.txt) or CSV (.csv) files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub anf: AnfFlags,
    /// Detrend window in hours, `start,end`.
    #[arg(long, value_parser = parse_window)]
    pub detrend_window: Option<(f64, f64)>,
    /// Estimate the mean of each file instead of every channel.
    #[arg(long)]
    pub group_mean: bool,
    /// Period tolerance (h) for the settling-time report.
    #[arg(long, default_value_t = 0.1)]
    pub settle_tol: f64,
}

#[derive(Debug, Args)]
pub struct CosinorArgs {
    /// Monitor (.txt) or CSV (.csv) files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Cosine period of the daily fits (h).
    #[arg(long)]
    pub period: Option<f64>,
    /// Whole days inside this window (hours, `start,end`) enter the regression.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
    /// Also write a double-plotted actogram per channel, folded at this period.
    #[arg(long)]
    pub actogram: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Anf,
    Acrophase,
    Both,
}

#[derive(Debug, Args)]
pub struct PrcArgs {
    /// Manifest written by `synth`.
    #[arg(long, conflicts_with_all = ["control", "target"])]
    pub manifest: Option<PathBuf>,
    /// Control recording (when no manifest is given).
    #[arg(long)]
    pub control: Option<PathBuf>,
    /// Stimulated recording as `CP=FILE`; repeatable.
    #[arg(long, value_parser = parse_target)]
    pub target: Vec<(f64, PathBuf)>,
    /// Phase estimator.
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// 1-based day on which shifts are read.
    #[arg(long)]
    pub eval_day: Option<u32>,
    #[command(flatten)]
    pub screen: ScreenFlags,
    #[command(flatten)]
    pub anf: AnfFlags,
    /// Use every channel without screening.
    #[arg(long)]
    pub no_screen: bool,
    /// Corrupt the included traces with Gaussian noise of this variance.
    #[arg(long)]
    pub noise_var: Option<f64>,
    /// Seed of the added noise.
    #[arg(long, default_value_t = 1)]
    pub noise_seed: u64,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    /// Monitor (.txt) or CSV (.csv) file.
    pub input: PathBuf,
    /// Noise variance per bin.
    #[arg(long)]
    pub variance: f64,
    /// Noise seed (default: the configured seed).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// First PRC CSV.
    pub a: PathBuf,
    /// Second PRC CSV.
    pub b: PathBuf,
    /// Reference PRC CSV, e.g. the clean-data curve.
    #[arg(long)]
    pub reference: PathBuf,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `start,end`")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad start `{a}`"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad end `{b}`"))?;
    if b <= a {
        return Err("window end must be after its start".into());
    }
    Ok((a, b))
}

fn parse_target(s: &str) -> Result<(f64, PathBuf), String> {
    let (cp, file) = s.split_once('=').ok_or("expected `CP=FILE`")?;
    let cp: f64 = cp.trim().parse().map_err(|_| format!("bad CP `{cp}`"))?;
    Ok((cp, PathBuf::from(file)))
}

/// Effective configuration after applying global and per-command flags.
struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
}

impl Ctx {
    fn new(cli: &Cli) -> AppResult<Self> {
        let mut cfg = RunConfig::load(cli.config.as_deref())?;
        if let Some(w) = cli.workers {
            cfg.workers = Some(w);
        }
        if let Some(o) = &cli.out {
            cfg.out_dir = o.clone();
        }
        let out = cfg.out_dir.clone();
        Ok(Self { cfg, out })
    }

    fn apply_anf(&mut self, f: &AnfFlags) -> AppResult<()> {
        let a = &mut self.cfg.anf;
        a.zeta = f.zeta.unwrap_or(a.zeta);
        a.gamma_omega = f.gamma_omega.unwrap_or(a.gamma_omega);
        a.gamma_d = f.gamma_d.unwrap_or(a.gamma_d);
        a.harmonics = f.harmonics.unwrap_or(a.harmonics);
        a.substeps_per_bin = f.substeps.unwrap_or(a.substeps_per_bin);
        a.validate().map_err(|e| AppError::Usage(e.to_string()))
    }

    fn apply_screen(&mut self, f: &ScreenFlags) {
        self.cfg.window_h = f.window.unwrap_or(self.cfg.window_h);
        let s = &mut self.cfg.screening;
        s.periodogram.threshold = f.threshold.unwrap_or(s.periodogram.threshold);
        s.activity_floor = f.floor.unwrap_or(s.activity_floor);
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn load_all(inputs: &[PathBuf]) -> AppResult<Vec<crate::load::Loaded>> {
    inputs
        .iter()
        .map(|p| load_input(p, &CsvLayout::default()))
        .collect()
}

fn input_names(inputs: &[PathBuf]) -> Vec<String> {
    inputs.iter().map(|p| p.display().to_string()).collect()
}

pub fn run(cli: Cli) -> AppResult<()> {
    let mut ctx = Ctx::new(&cli)?;
    let workers = ctx.cfg.workers;
    match cli.command {
        Command::Synth(a) => with_workers(workers, || cmd_synth(&ctx, &a))?,
        Command::Screen(a) => {
            ctx.apply_screen(&a.flags);
            with_workers(workers, || cmd_screen(&ctx, &a))?
        }
        Command::Estimate(a) => {
            ctx.apply_anf(&a.anf)?;
            with_workers(workers, || cmd_estimate(&ctx, &a))?
        }
        Command::Cosinor(a) => {
            ctx.cfg.window_h = a.window.unwrap_or(ctx.cfg.window_h);
            ctx.cfg.nominal_period_h = a.period.unwrap_or(ctx.cfg.nominal_period_h);
            cmd_cosinor(&ctx, &a)
        }
        Command::Prc(a) => {
            ctx.apply_anf(&a.anf)?;
            ctx.apply_screen(&a.screen);
            ctx.cfg.eval_day = a.eval_day.unwrap_or(ctx.cfg.eval_day);
            with_workers(workers, || cmd_prc(&ctx, &a))?
        }
        Command::Corrupt(a) => cmd_corrupt(&ctx, &a),
        Command::Compare(a) => cmd_compare(&ctx, &a),
    }
}

fn cmd_synth(ctx: &Ctx, a: &SynthArgs) -> AppResult<()> {
    let mut scenario = match (&a.scenario, a.table1) {
        (Some(p), _) => read_json::<Scenario>(p)?,
        (None, true) => Scenario::table1(ctx.cfg.seed),
        (None, false) => return Err(AppError::Usage("synth needs --scenario FILE or --table1".into())),
    };
    if let Some(s) = a.seed {
        scenario.seed = s;
    }
    scenario.validate()?;
    let generated = generate(&scenario)?;
    std::fs::create_dir_all(&ctx.out).map_err(|e| AppError::io(&ctx.out, e))?;
    let mut entries = Vec::with_capacity(generated.len());
    for g in &generated {
        let file = format!("{}.txt", g.incubator.label);
        let truth_file = format!("{}.truth.json", g.incubator.label);
        let path = ctx.path(&file);
        let f = File::create(&path).map_err(|e| AppError::io(&path, e))?;
        write_dam(BufWriter::new(f), &g.cohort.group, &g.protocol.schedule)?;
        write_json(&ctx.path(&truth_file), &g.truth(&scenario))?;
        entries.push(ManifestEntry {
            label: g.incubator.label.clone(),
            role: g.incubator.role,
            cp_h: g.incubator.cp_h,
            file,
            truth: truth_file,
            channels: g.cohort.group.channel_ids(),
        });
        println!(
            "{}: {} flies ({} rhythmic) -> {}",
            g.incubator.label,
            g.cohort.labels.len(),
            g.cohort.labels.iter().filter(|l| l.rhythmic).count(),
            path.display()
        );
    }
    let manifest = Manifest {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        reference_control: scenario.reference_control.clone(),
        incubators: entries,
    };
    write_json(&ctx.path(MANIFEST_FILE), &manifest)?;
    write_json(&ctx.path("scenario.json"), &scenario)?;
    let meta = Metadata::new("synth", &scenario)
        .with_seeds(generated.iter().map(|g| g.seed))
        .with_inputs(a.scenario.iter().map(|p| p.display().to_string()));
    write_json(&ctx.path("synth.meta.json"), &meta)
}

fn cmd_screen(ctx: &Ctx, a: &ScreenArgs) -> AppResult<()> {
    let truths: Vec<Truth> = a.truth.iter().map(|p| read_json(p)).collect::<AppResult<_>>()?;
    let mut groups = Vec::new();
    for l in load_all(&a.inputs)? {
        let group = match truths.iter().find(|t| t.label == l.group.label) {
            Some(t) => l.group.select(&t.flies.iter().map(|f| f.channel_id.clone()).collect::<Vec<_>>())?,
            None => l.group,
        };
        groups.push(group);
    }
    let reports = screen_groups(&groups, ctx.cfg.window_h, &ctx.cfg.screening)?;
    let mut rows = Vec::new();
    let (mut tp, mut fp, mut fneg, mut correct, mut labeled) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for (g, r) in groups.iter().zip(&reports) {
        println!("{}: {}/{} included ({:.2})", g.label, r.included.len(), g.len(), r.inclusion_ratio);
        for c in &r.channels {
            let status = r
                .excluded
                .iter()
                .find(|(id, _)| *id == c.channel_id)
                .map_or("included".to_string(), |(_, reason)| format!("{reason:?}").to_lowercase());
            rows.push(vec![
                g.label.clone(),
                c.channel_id.clone(),
                c.mean_activity.to_string(),
                c.power_ratio.to_string(),
                c.dominant_period_h.to_string(),
                status.clone(),
            ]);
            let label = truths
                .iter()
                .flat_map(|t| t.flies.iter())
                .find(|f| f.channel_id == c.channel_id);
            if let Some(f) = label {
                let included = status == "included";
                labeled += 1;
                correct += usize::from(included == f.rhythmic);
                match (included, f.rhythmic) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fneg += 1,
                    _ => {}
                }
            }
        }
    }
    let params = json!({ "window_h": ctx.cfg.window_h, "screening": ctx.cfg.screening });
    let meta = Metadata::new("screen", &params).with_inputs(input_names(&a.inputs));
    write_rows(
        &ctx.path("screening.csv"),
        &["group", "channel_id", "mean_activity", "power_ratio", "dominant_period_h", "status"],
        rows,
        &meta,
    )?;
    write_json(&ctx.path("screening.json"), &reports)?;
    if labeled > 0 {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        println!(
            "vs labels: precision {:.3} recall {:.3} accuracy {:.3} ({labeled} labelled channels)",
            ratio(tp, tp + fp),
            ratio(tp, tp + fneg),
            ratio(correct, labeled)
        );
    }
    if !a.sweep.is_empty() {
        let mut header = vec!["threshold".to_string()];
        header.extend(groups.iter().map(|g| g.label.clone()));
        header.push("overall".into());
        let total: usize = groups.iter().map(TraceGroup::len).sum();
        let rows: Vec<Vec<String>> = a
            .sweep
            .iter()
            .map(|&th| {
                let per: Vec<f64> = reports
                    .iter()
                    .map(|r| inclusion_at_threshold(r, ctx.cfg.screening.activity_floor, th))
                    .collect();
                let overall = per.iter().zip(&groups).map(|(p, g)| p * g.len() as f64).sum::<f64>() / total as f64;
                println!("threshold {th}: overall inclusion {overall:.3}");
                std::iter::once(th.to_string())
                    .chain(per.iter().map(|p| format!("{p:.4}")))
                    .chain(std::iter::once(format!("{overall:.4}")))
                    .collect()
            })
            .collect();
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        write_rows(&ctx.path("threshold_sweep.csv"), &header_refs, rows, &meta)?;
    }
    Ok(())
}

fn cmd_estimate(ctx: &Ctx, a: &EstimateArgs) -> AppResult<()> {
    use rayon::prelude::*;
    let window = a.detrend_window.unwrap_or(ctx.cfg.window_h);
    let mut traces = Vec::new();
    for l in load_all(&a.inputs)? {
        if a.group_mean {
            traces.push(average_traces(&l.group)?.0);
        } else {
            traces.extend(l.group.traces);
        }
    }
    let params = ctx.cfg.anf;
    let series = traces
        .par_iter()
        .map(|t| {
            let raw = anf_run(t, &params)?;
            let s = if raw.times_h.last().copied().unwrap_or(0.0) >= window.1 - t.bin_hours() {
                extract_phase(&raw, window)?
            } else {
                raw
            };
            Ok(s)
        })
        .collect::<AppResult<Vec<_>>>()?;
    let meta = Metadata::new("estimate", json!({ "anf": params, "detrend_window_h": window }))
        .with_inputs(input_names(&a.inputs));
    let mut summary = Vec::new();
    for (t, s) in traces.iter().zip(&series) {
        let name = t.channel_id.replace([':', '/'], "_");
        write_phase_series(&ctx.path(&format!("phase/{name}.csv")), s, meta.clone())?;
        let final_period = s.period_h.last().copied().unwrap_or(f64::NAN);
        let settle = s.settling_time_h(a.settle_tol);
        match (s.phase_defined, settle) {
            (false, _) => println!("{}: phase undefined (no oscillation)", t.channel_id),
            (true, Some(st)) => println!("{}: period {final_period:.3} h, settled after {st:.1} h", t.channel_id),
            (true, None) => println!("{}: period {final_period:.3} h, not settled", t.channel_id),
        }
        summary.push(vec![
            t.channel_id.clone(),
            s.phase_defined.to_string(),
            final_period.to_string(),
            settle.map_or(String::new(), |v| v.to_string()),
            s.held_samples.to_string(),
        ]);
    }
    write_rows(
        &ctx.path("estimate_summary.csv"),
        &["channel_id", "phase_defined", "final_period_h", "settling_time_h", "held_samples"],
        summary,
        &meta,
    )
}

fn cmd_cosinor(ctx: &Ctx, a: &CosinorArgs) -> AppResult<()> {
    let params = json!({ "nominal_period_h": ctx.cfg.nominal_period_h, "window_h": ctx.cfg.window_h, "actogram_fold_h": a.actogram });
    let meta = Metadata::new("cosinor", &params).with_inputs(input_names(&a.inputs));
    let mut tracks = Vec::new();
    let mut days = Vec::new();
    for l in load_all(&a.inputs)? {
        for t in &l.group.traces {
            match daily_acrophases(t, ctx.cfg.nominal_period_h, ctx.cfg.window_h) {
                Ok(tr) => {
                    println!("{}: tau {:.3} h over {} days", t.channel_id, tr.tau_h, tr.day_index.len());
                    for (d, ac) in tr.day_index.iter().zip(&tr.acrophase_abs_h) {
                        days.push(vec![t.channel_id.clone(), d.to_string(), ac.to_string()]);
                    }
                    tracks.push(vec![
                        t.channel_id.clone(),
                        tr.tau_h.to_string(),
                        tr.slope_h_per_day.to_string(),
                        tr.day_index.len().to_string(),
                        tr.valid.to_string(),
                    ]);
                }
                Err(e) => {
                    log::warn!("{}: {e}", t.channel_id);
                    tracks.push(vec![t.channel_id.clone(), String::new(), String::new(), "0".into(), "false".into()]);
                }
            }
            if let Some(fold) = a.actogram {
                let name = t.channel_id.replace([':', '/'], "_");
                write_actogram(&ctx.path(&format!("actogram/{name}.csv")), &actogram(t, fold)?, meta.clone())?;
            }
        }
    }
    write_rows(&ctx.path("cosinor.csv"), &["channel_id", "tau_h", "slope_h_per_day", "days", "valid"], tracks, &meta)?;
    write_rows(&ctx.path("acrophases.csv"), &["channel_id", "day", "acrophase_abs_h"], days, &meta)
}

/// Label, role, CP, traces and programmed shift of one incubator.
type PrcInput = (String, Role, Option<f64>, TraceGroup, Option<f64>);

fn cmd_prc(ctx: &Ctx, a: &PrcArgs) -> AppResult<()> {
    let mut loaded: Vec<PrcInput> = Vec::new();
    let control_label;
    let mut scenario_ids = Vec::new();
    if let Some(mpath) = &a.manifest {
        let (m, dir) = Manifest::read(mpath)?;
        for e in &m.incubators {
            let (g, truth) = load_entry(&dir, e)?;
            loaded.push((e.label.clone(), e.role, e.cp_h, g, e.cp_h.map(|_| truth.programmed_shift_h)));
        }
        control_label = m.reference_control.clone();
        scenario_ids.push(format!("{}#{}", m.scenario, m.seed));
    } else {
        let cpath = a
            .control
            .as_ref()
            .ok_or_else(|| AppError::Usage("prc needs --manifest FILE or --control FILE".into()))?;
        let c = load_input(cpath, &CsvLayout::default())?;
        control_label = c.group.label.clone();
        loaded.push((control_label.clone(), Role::Control, None, c.group, None));
        for (i, (cp, p)) in a.target.iter().enumerate() {
            let t = load_input(p, &CsvLayout::default())?;
            // the same file may serve as control and target
            let label = format!("{}@cp{cp}#{i}", t.group.label);
            loaded.push((label.clone(), Role::Pulse, Some(*cp), TraceGroup { label, ..t.group }, None));
        }
    }
    let groups: Vec<TraceGroup> = loaded.iter().map(|l| l.3.clone()).collect();
    let included: Vec<Vec<String>> = if a.no_screen {
        groups.iter().map(TraceGroup::channel_ids).collect()
    } else {
        screen_groups(&groups, ctx.cfg.window_h, &ctx.cfg.screening)?
            .into_iter()
            .map(|r| r.included)
            .collect()
    };
    let mut prc_groups = Vec::with_capacity(loaded.len());
    let mut counts = BTreeMap::new();
    for (i, ((label, role, cp, group, _), ids)) in loaded.iter().zip(&included).enumerate() {
        counts.insert(label.clone(), json!({ "included": ids.len(), "total": group.len() }));
        let mut traces: Vec<_> = group.traces.iter().filter(|t| ids.contains(&t.channel_id)).cloned().collect();
        if let Some(var) = a.noise_var {
            if !traces.is_empty() {
                let g = TraceGroup::new(label.clone(), traces)?;
                traces = corrupt_group(&g, var, a.noise_seed.wrapping_mul(1_000_003).wrapping_add(i as u64))?.traces;
            }
        }
        prc_groups.push(PrcGroup {
            label: label.clone(),
            role: *role,
            cp_h: *cp,
            traces,
        });
    }
    let methods: &[PrcMethod] = match a.method {
        MethodArg::Anf => &[PrcMethod::Anf],
        MethodArg::Acrophase => &[PrcMethod::Acrophase],
        MethodArg::Both => &[PrcMethod::Anf, PrcMethod::Acrophase],
    };
    let prc_cfg = ctx.cfg.prc();
    let programmed: Vec<(f64, f64)> = loaded.iter().filter_map(|l| Some((l.2?, l.4?))).collect();
    let mut curves: Vec<PrcCurve> = Vec::new();
    for &m in methods {
        let curve = run_prc(&prc_groups, &control_label, m, &prc_cfg)?;
        let params = json!({
            "config": prc_cfg,
            "screening": if a.no_screen { serde_json::Value::Null } else { json!(ctx.cfg.screening) },
            "window_h": ctx.cfg.window_h,
            "control": control_label,
            "scenarios": scenario_ids,
            "screening_counts": counts,
            "noise_var": a.noise_var,
        });
        let seeds = a.noise_var.map(|_| a.noise_seed);
        let meta = Metadata::new("prc", params)
            .with_seeds(seeds)
            .with_inputs(a.manifest.iter().chain(a.control.iter()).chain(a.target.iter().map(|t| &t.1)).map(|p| p.display().to_string()));
        write_prc(&ctx.path(&format!("prc_{}.csv", m.as_str())), &curve, meta)?;
        println!("{} PRC (eval day {}):", m.as_str(), curve.eval_day);
        for p in &curve.points {
            println!("  CP {:>5.2}  shift {:+.3} h  sd {:.3} h  (n {} vs {})", p.cp_h, p.shift_h, p.sd_h, p.n_target, p.n_control);
        }
        if !programmed.is_empty() {
            let rms = curve.rms_against(|cp| {
                programmed.iter().find(|(c, _)| (c - cp).abs() < 1e-9).map_or(f64::NAN, |p| p.1)
            });
            println!("  RMS vs programmed: {rms:.3} h");
        }
        curves.push(curve);
    }
    if let [x, y] = curves.as_slice() {
        let gap = crate::compare::compare(x, y, y)?;
        println!("RMS gap anf vs acrophase: {:.3} h", gap.rms_gap_h);
    }
    Ok(())
}

fn cmd_corrupt(ctx: &Ctx, a: &CorruptArgs) -> AppResult<()> {
    let l = load_input(&a.input, &CsvLayout::default())?;
    let seed = a.seed.unwrap_or(ctx.cfg.seed);
    let traces = l
        .group
        .traces
        .iter()
        .enumerate()
        .map(|(i, t)| corrupt(t, a.variance, seed.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let group = TraceGroup::new(l.group.label.clone(), traces)?;
    let path = ctx.path(&format!("{}.corrupt.csv", l.group.label));
    std::fs::create_dir_all(&ctx.out).map_err(|e| AppError::io(&ctx.out, e))?;
    let f = File::create(&path).map_err(|e| AppError::io(&path, e))?;
    write_csv(BufWriter::new(f), &group)?;
    let meta = Metadata::new("corrupt", json!({ "variance": a.variance }))
        .with_seeds([seed])
        .with_inputs([a.input.display().to_string()]);
    write_json(&crate::output::sidecar_path(&path), &meta)?;
    println!("{} -> {}", a.input.display(), path.display());
    Ok(())
}

fn cmd_compare(ctx: &Ctx, a: &CompareArgs) -> AppResult<()> {
    let (x, y, r) = (read_prc(&a.a)?, read_prc(&a.b)?, read_prc(&a.reference)?);
    let c = compare(&x, &y, &r)?;
    let rows = c
        .rows
        .iter()
        .map(|row| {
            [row.cp_h, row.a_h, row.b_h, row.reference_h, row.err_a_h, row.err_b_h]
                .iter()
                .map(f64::to_string)
                .collect()
        })
        .collect();
    let meta = Metadata::new("compare", json!({}))
        .with_inputs([&a.a, &a.b, &a.reference].iter().map(|p| p.display().to_string()))
        .with_extra(json!({
            "mean_abs_err_a_h": c.mean_abs_err_a_h,
            "mean_abs_err_b_h": c.mean_abs_err_b_h,
            "rms_gap_h": c.rms_gap_h,
        }));
    write_rows(&ctx.path("compare.csv"), &["cp_h", "a_h", "b_h", "reference_h", "err_a_h", "err_b_h"], rows, &meta)?;
    println!(
        "mean |a - ref| {:.3} h, mean |b - ref| {:.3} h, RMS |a - b| {:.3} h",
        c.mean_abs_err_a_h, c.mean_abs_err_b_h, c.rms_gap_h
    );
    Ok(())
}

