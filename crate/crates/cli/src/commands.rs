use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use hhqec::circuit::{build_injection_circuit, build_memory_circuit, Basis};
use hhqec::decoder::{build_dem, DetectorErrorModel, Matcher, MatchingGraph};
use hhqec::experiments::fit::fit_scaling;
use hhqec::experiments::injection::{
    distance3_layout, eigenstates, reference_acceptance_rows, reference_rows, write_acceptance_csv, AcceptanceRow,
};
use hhqec::experiments::memory::synthetic_sweep;
use hhqec::experiments::tomography::{basis_index, format_pm};
use hhqec::experiments::{
    magic_state_report, run_injection_grid, threshold_sweep, GridConfig, InjectionPoint, SweepConfig, SweepResult,
    TomographyCounts,
};
use hhqec::lattice::{build_layout, injection_layout, qubit_counts, render_svg, CodeDistance, CodeVariant, PauliKind};
use hhqec::noise::{apply_noise, NoiseModel};
use hhqec::sim::frame::{frame_sample, injected_frame_sample};
use hhqec::sim::shots::ShotBatch;

use crate::{write_file, NoiseArgs, OutArgs};

/// Flag combinations the argument parser cannot rule out on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl NoiseArgs {
    /// Preset or file first, then per-channel overrides, then the scale.
    pub fn model(&self, default: NoiseModel) -> Result<NoiseModel> {
        let mut m = match (&self.noise, self.noise_preset.as_deref()) {
            (Some(_), Some(_)) => return Err(usage("--noise and --noise-preset are exclusive")),
            (Some(path), None) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                NoiseModel::from_json(&text)?
            }
            (None, Some("calibrated")) => NoiseModel::calibrated_preset(),
            (None, Some("noiseless")) => NoiseModel::noiseless(),
            (None, Some(_)) => NoiseModel::uniform(self.p.ok_or_else(|| usage("--noise-preset uniform needs --p"))?),
            (None, None) => self.p.map(NoiseModel::uniform).unwrap_or(default),
        };
        if let Some(v) = self.p1 {
            m.p1 = v;
        }
        if let Some(v) = self.p2 {
            m.p2 = v;
        }
        if let Some(v) = self.p_spam {
            m.p_spam = v;
        }
        if let Some(v) = self.p_idle {
            m.p_idle = v;
        }
        if let Some(s) = self.noise_scale {
            if !(s >= 0.0) {
                return Err(usage("--noise-scale must be non-negative"));
            }
            m = m.scaled(s);
        }
        m.validate()?;
        Ok(m)
    }
}

fn parse_basis(s: &str) -> Result<Basis> {
    Ok(Basis::parse(s)?)
}

fn parse_memory_basis(s: &str) -> Result<PauliKind> {
    match s.trim().to_ascii_uppercase().as_str() {
        "Z" => Ok(PauliKind::Z),
        "X" => Ok(PauliKind::X),
        other => Err(usage(format!("memory basis must be Z or X, got `{other}`"))),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> hhqec::Result<()>) -> Result<Vec<u8>> {
    let mut v = Vec::new();
    f(&mut v)?;
    Ok(v)
}

// ---------------------------------------------------------------- layout

#[derive(Args)]
pub struct LayoutArgs {
    #[arg(long)]
    d: i64,
    /// Write the layout JSON here (stdout when neither --json nor --svg).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Colour the SVG by the injection preparation bases (d = 3 only).
    #[arg(long)]
    injection: bool,
    /// Print data/total qubit counts for both code variants instead.
    #[arg(long)]
    counts: bool,
}

pub fn layout(a: &LayoutArgs) -> Result<u8> {
    if a.counts {
        let r = qubit_counts(a.d, CodeVariant::Rotated)?;
        let u = qubit_counts(a.d, CodeVariant::Unrotated)?;
        print!("{}", to_json(&json!({ "d": a.d, "rotated": r, "unrotated": u }))?);
        return Ok(0);
    }
    let layout = build_layout(CodeDistance::new(a.d)?);
    if let Some(p) = &a.json {
        write_file(p, layout.to_json() + "\n")?;
    }
    if let Some(p) = &a.svg {
        let inj = if a.injection {
            Some(injection_layout(&layout)?)
        } else {
            None
        };
        write_file(p, render_svg(&layout, inj.as_ref()))?;
    }
    if a.json.is_none() && a.svg.is_none() {
        println!("{}", layout.to_json());
    }
    Ok(0)
}

// ------------------------------------------------------------- threshold

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("bad list element `{x}`")))
        .collect()
}

// Comma lists are parsed whole; spelling the type `std::vec::Vec` keeps clap
// from treating the field as a repeated flag.
#[derive(Args)]
pub struct ThresholdArgs {
    #[arg(long = "d", value_parser = list::<u32>, default_value = "3,5,7")]
    distances: std::vec::Vec<u32>,
    #[arg(long, value_parser = list::<f64>, default_value = "0.002,0.003,0.004,0.005,0.006")]
    p_grid: std::vec::Vec<f64>,
    #[arg(long, default_value_t = 200_000)]
    shots: usize,
    /// Memory bases: Z (logical X errors), X (logical Z errors), or both.
    #[arg(long, default_value = "Z,X")]
    basis: String,
    #[arg(long)]
    seed: u64,
    /// Rounds per experiment (default: d).
    #[arg(long)]
    rounds: Option<usize>,
    /// Also fit the scaling law on rows with p <= this value, using each
    /// basis's crossing as its threshold.
    #[arg(long)]
    fit_p_max: Option<f64>,
    /// Replace sampling by exact curves C (p/p_th)^(a(d+1)/2): "C,a,p_th".
    #[arg(long, value_parser = list::<f64>)]
    synthetic: Option<std::vec::Vec<f64>>,
    /// Add the published threshold values as labelled reference rows.
    #[arg(long)]
    reference_rows: bool,
    #[command(flatten)]
    out: OutArgs,
}

pub fn threshold(a: &ThresholdArgs) -> Result<u8> {
    let bases: Vec<PauliKind> = a.basis.split(',').map(parse_memory_basis).collect::<Result<_>>()?;
    let sweep = match &a.synthetic {
        Some(v) if v.len() == 3 => {
            let mut s = SweepResult::default();
            for &b in &bases {
                s.rows
                    .extend(synthetic_sweep(b, &a.distances, &a.p_grid, v[0], v[1], v[2]).rows);
            }
            s
        }
        Some(_) => return Err(usage("--synthetic takes C,a,p_th")),
        None => threshold_sweep(&SweepConfig {
            distances: a.distances.clone(),
            p_grid: a.p_grid.clone(),
            shots: a.shots,
            bases: bases.clone(),
            rounds: a.rounds,
            seed: a.seed,
        })?,
    };
    let dir = a.out.dir()?;
    write_file(&dir.join("sweep.csv"), csv_bytes(|w| sweep.write_csv(w))?)?;

    let mut crossings = Vec::new();
    let mut fits = Vec::new();
    for &b in &bases {
        let c = sweep.crossing(b);
        match c.p_th {
            Some(p) => println!(
                "p_th^{:?} = {:.4}%  (logical {:?} errors, {:?}-basis memory)",
                c.error_type,
                p * 100.0,
                c.error_type,
                b
            ),
            None => println!("p_th^{:?}: no crossing within the grid", c.error_type),
        }
        if let (Some(pmax), Some(pth)) = (a.fit_p_max, c.p_th) {
            let rows = SweepResult {
                rows: sweep.rows.iter().filter(|r| r.p <= pmax).cloned().collect(),
            };
            let f = fit_scaling(&rows, b, pth)?;
            println!(
                "  fit: a_{:?} = {:.3} ± {:.3}, C = {:.3e}",
                c.error_type,
                f.a,
                f.a_err(),
                f.c
            );
            fits.push(json!({ "basis": b, "error_type": c.error_type, "fit": f }));
        }
        crossings.push(c);
    }
    let mut report = json!({ "crossings": crossings, "fits": fits });
    if a.reference_rows {
        report["reference"] = json!(reference_rows()
            .into_iter()
            .filter(|r| r.label.contains("threshold"))
            .collect::<Vec<_>>());
    }
    write_file(&dir.join("crossing.json"), to_json(&report)?)?;
    Ok(0)
}

// ---------------------------------------------------------------- sample

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long)]
    d: i64,
    #[arg(long, default_value = "Z")]
    basis: String,
    /// Rounds (default: d).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    shots: usize,
    #[arg(long)]
    seed: u64,
    /// Shot file format.
    #[arg(long, value_parser = ["bin", "csv"], default_value = "bin")]
    format: String,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    out: OutArgs,
}

pub fn sample(a: &SampleArgs) -> Result<u8> {
    let layout = build_layout(CodeDistance::new(a.d)?);
    let basis = parse_memory_basis(&a.basis)?;
    let model = a.noise.model(NoiseModel::uniform(1e-3))?;
    let rounds = a.rounds.unwrap_or(a.d as usize);
    let mc = build_memory_circuit(&layout, basis, rounds)?;
    let noisy = apply_noise(&mc.circuit, &model)?;
    let dem = build_dem(&noisy)?;
    let batch = frame_sample(&noisy, a.shots, a.seed)?;
    let dir = a.out.dir()?;
    write_file(&dir.join("circuit.txt"), noisy.to_text())?;
    write_file(&dir.join("noise.json"), model.to_json() + "\n")?;
    write_file(&dir.join("dem.json"), dem.to_json() + "\n")?;
    let shots_path = dir.join(format!("shots.{}", a.format));
    let f = BufWriter::new(File::create(&shots_path).with_context(|| format!("creating {}", shots_path.display()))?);
    if a.format == "csv" {
        batch.write_csv(f)?;
    } else {
        batch.write_binary(f)?;
    }
    println!(
        "{} shots, {} detectors, {} mechanisms -> {}",
        a.shots,
        dem.num_detectors,
        dem.mechanisms.len(),
        dir.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------- inject

#[derive(Args)]
pub struct InjectArgs {
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// X, Y, Z, or "all" for tomography.
    #[arg(long, default_value = "all")]
    basis: String,
    /// Inject the H-type or T-type magic state and compare with its
    /// distillation threshold.
    #[arg(long, value_parser = ["H", "T"])]
    magic: Option<String>,
    #[arg(long, default_value_t = 20_000)]
    shots: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    /// Also write a per-shot CSV (accepted flag, outcome as +1/-1) per basis.
    #[arg(long)]
    per_shot: bool,
    #[arg(long)]
    reference_rows: bool,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    out: OutArgs,
}

pub fn inject(a: &InjectArgs) -> Result<u8> {
    let model = a.noise.model(NoiseModel::noiseless())?;
    let dir = a.out.dir()?;
    if let Some(m) = &a.magic {
        if a.theta.is_some() || a.phi.is_some() {
            return Err(usage("--magic fixes theta and phi"));
        }
        let mut report = magic_state_report(&model, a.shots, a.seed, a.resamples, a.reference_rows)?;
        report.entries.retain(|e| &e.name == m);
        let e = &report.entries[0];
        println!(
            "|{}_L>: F = {}  threshold {}  -> {}",
            e.name,
            e.fidelity_text.as_deref().unwrap_or("n/a (no accepted shots)"),
            e.threshold,
            match e.above_threshold {
                Some(true) => "above",
                Some(false) => "below",
                None => "undetermined",
            }
        );
        write_file(&dir.join("magic_report.json"), to_json(&report)?)?;
        return Ok(0);
    }
    let (theta, phi) = match (a.theta, a.phi) {
        (Some(t), p) => (t, p.unwrap_or(0.0)),
        (None, _) => return Err(usage("--theta (or --magic) is required")),
    };
    let bases: Vec<Basis> = if a.basis.eq_ignore_ascii_case("all") {
        Basis::ALL.to_vec()
    } else {
        a.basis.split(',').map(parse_basis).collect::<Result<_>>()?
    };
    let layout = distance3_layout();
    let mut counts = TomographyCounts::default();
    for &b in &bases {
        let inj = build_injection_circuit(&layout, theta, phi, b)?;
        let noisy = apply_noise(&inj.circuit, &model)?;
        let seed = hhqec::experiments::derive_seed(a.seed, &[theta.to_bits(), phi.to_bits(), basis_index(b) as u64]);
        let batch = injected_frame_sample(&inj, &noisy, a.shots, seed)?;
        let bits = batch.injection.as_ref().expect("injection outcomes");
        let c = counts.get_mut(b);
        c.shots = a.shots as u64;
        let mut per_shot = csv::Writer::from_writer(Vec::new());
        per_shot.write_record(["shot", "accepted", "outcome"])?;
        for s in 0..a.shots {
            let (acc, minus) = (bits.accepted.get(s), bits.outcomes.get(s));
            if acc {
                if minus {
                    c.down += 1;
                } else {
                    c.up += 1;
                }
            }
            if a.per_shot {
                per_shot.write_record([
                    s.to_string(),
                    u8::from(acc).to_string(),
                    if minus { "-1" } else { "+1" }.into(),
                ])?;
            }
        }
        if a.per_shot {
            write_file(
                &dir.join(format!("outcomes_{}.csv", b.symbol())),
                per_shot.into_inner()?,
            )?;
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "phi", "basis", "N", "accepted", "n_up"])?;
    for &b in &bases {
        let c = counts.get(b);
        w.write_record([
            format!("{theta:.6}"),
            format!("{phi:.6}"),
            b.symbol().to_string(),
            c.shots.to_string(),
            c.accepted().to_string(),
            c.up.to_string(),
        ])?;
    }
    write_file(&dir.join("counts.csv"), w.into_inner()?)?;

    let expectations: Vec<_> = bases
        .iter()
        .map(|&b| {
            let c = counts.get(b);
            json!({ "basis": b, "acceptance": c.acceptance(), "expectation": c.expectation() })
        })
        .collect();
    let mut report = json!({
        "theta": theta, "phi": phi, "noise": model, "shots_per_basis": a.shots, "seed": a.seed,
        "bases": expectations,
    });
    for &b in &bases {
        let c = counts.get(b);
        println!(
            "{}: acceptance {:.4}, <{}_L> = {}",
            b.symbol(),
            c.acceptance(),
            b.symbol(),
            c.expectation().map_or("n/a".into(), |e| format!("{e:.4}"))
        );
    }
    if bases.len() == 3 {
        let mut pt = InjectionPoint {
            theta,
            phi,
            counts,
            analysis: None,
        };
        pt.analyze(a.resamples, a.seed)?;
        if let Some(an) = &pt.analysis {
            println!("F = {}", format_pm(an.fidelity.value, an.fidelity.std_err));
            report["tomography"] = json!(an);
        }
    }
    if a.reference_rows {
        report["reference"] = json!(reference_rows());
    }
    write_file(&dir.join("inject_report.json"), to_json(&report)?)?;
    Ok(0)
}

// ----------------------------------------------------------- inject-grid

#[derive(Args)]
pub struct GridArgs {
    /// Polar angles in units of pi (default 0,0.25,...,2).
    #[arg(long, value_parser = list::<f64>)]
    thetas: Option<std::vec::Vec<f64>>,
    /// Azimuthal angles in units of pi (default 0,0.25,...,2).
    #[arg(long, value_parser = list::<f64>)]
    phis: Option<std::vec::Vec<f64>>,
    #[arg(long, default_value_t = 20_000)]
    shots: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long)]
    reference_rows: bool,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    out: OutArgs,
}

pub fn inject_grid(a: &GridArgs) -> Result<u8> {
    let model = a.noise.model(NoiseModel::noiseless())?;
    let default_grid: Vec<f64> = (0..=8).map(|k| k as f64 / 4.0).collect();
    let scale = |v: &Option<Vec<f64>>| {
        v.clone()
            .unwrap_or_else(|| default_grid.clone())
            .iter()
            .map(|x| x * PI)
            .collect()
    };
    let grid = run_injection_grid(&GridConfig {
        thetas: scale(&a.thetas),
        phis: scale(&a.phis),
        shots: a.shots,
        noise: model,
        seed: a.seed,
        resamples: a.resamples,
    })?;
    let dir = a.out.dir()?;
    write_file(&dir.join("grid.csv"), csv_bytes(|w| grid.write_counts_csv(w))?)?;
    write_file(&dir.join("fidelity.csv"), csv_bytes(|w| grid.write_fidelity_csv(w))?)?;
    write_file(&dir.join("fidelity.svg"), grid.fidelity_svg())?;

    // Acceptance table from the grid's eigenstate points, where present.
    let mut table: Vec<AcceptanceRow> = eigenstates()
        .iter()
        .filter_map(|&(label, t, p)| {
            grid.points
                .iter()
                .find(|pt| (pt.theta - t).abs() < 1e-9 && (pt.phi - p).abs() < 1e-9)
                .map(|pt| AcceptanceRow {
                    label: label.to_string(),
                    theta: t,
                    phi: p,
                    rates: pt.counts.bases.map(|b| b.acceptance()),
                    reference: false,
                })
        })
        .collect();
    if a.reference_rows {
        table.extend(reference_acceptance_rows());
    }
    write_file(
        &dir.join("acceptance.csv"),
        csv_bytes(|w| write_acceptance_csv(&table, w))?,
    )?;

    let summary = grid.fidelity_summary();
    let mut report = json!({
        "points": grid.points.len(),
        "shots_per_basis": a.shots,
        "seed": a.seed,
        "noise": model,
        "acceptance": grid.acceptance(),
        "fidelity_mean": summary.map(|s| s.0),
        "fidelity_sd": summary.map(|s| s.1),
        "fidelity_min": summary.map(|s| s.2),
        "unanalyzed_points": grid.points.iter().filter(|p| p.analysis.is_none()).count(),
    });
    if a.reference_rows {
        report["reference"] = json!(reference_rows());
    }
    write_file(&dir.join("grid_report.json"), to_json(&report)?)?;
    println!("{} points, acceptance {:.4}", grid.points.len(), grid.acceptance());
    if let Some((mean, sd, min)) = summary {
        println!("fidelity mean {mean:.4} (sd {sd:.4}), min {min:.4}");
    }
    Ok(0)
}

// ---------------------------------------------------------------- decode

#[derive(Args)]
pub struct DecodeArgs {
    #[arg(long)]
    dem: PathBuf,
    /// Shot file (.bin or .csv).
    #[arg(long)]
    shots: PathBuf,
    /// Also check every matching against the exhaustive oracle (shots with
    /// at most 16 defects).
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    out: OutArgs,
}

fn read_shots(path: &Path) -> Result<ShotBatch> {
    let f = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let batch = if path.extension().is_some_and(|e| e == "csv") {
        ShotBatch::read_csv(f)?
    } else {
        ShotBatch::read_binary(f)?
    };
    Ok(batch)
}

pub fn decode(a: &DecodeArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&a.dem).with_context(|| format!("reading {}", a.dem.display()))?;
    let dem = DetectorErrorModel::from_json(&text)?;
    let batch = read_shots(&a.shots)?;
    if batch.num_detectors() != dem.num_detectors || batch.num_observables() != dem.num_observables {
        return Err(hhqec::Error::Validation(format!(
            "shots have {} detectors / {} observables, DEM has {} / {}",
            batch.num_detectors(),
            batch.num_observables(),
            dem.num_detectors,
            dem.num_observables
        ))
        .into());
    }
    let matcher = Matcher::new(&MatchingGraph::from_dem(&dem));
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["shot", "defects", "predicted", "actual", "weight", "failed"])?;
    let mut failures = 0usize;
    let (mut checked, mut discrepancies) = (0usize, 0usize);
    let obs_mask =
        |s: usize| (0..batch.num_observables()).fold(0u64, |m, o| m | (u64::from(batch.observable(s, o)) << o));
    for s in 0..batch.shots() {
        let defects: Vec<u32> = batch.fired(s).into_iter().map(|d| d as u32).collect();
        let c = matcher.decode(&defects)?;
        let actual = obs_mask(s);
        let failed = c.observables != actual;
        failures += usize::from(failed);
        if a.oracle && defects.len() <= 16 {
            checked += 1;
            if matcher.decode_exhaustive(&defects)?.weight != c.weight {
                discrepancies += 1;
            }
        }
        out.write_record([
            s.to_string(),
            defects.len().to_string(),
            c.observables.to_string(),
            actual.to_string(),
            c.weight.to_string(),
            u8::from(failed).to_string(),
        ])?;
    }
    let dir = a.out.dir()?;
    write_file(&dir.join("corrections.csv"), out.into_inner()?)?;
    let n = batch.shots().max(1) as f64;
    let rate = failures as f64 / n;
    let mut summary = json!({
        "shots": batch.shots(),
        "failures": failures,
        "failure_rate": rate,
        "std_err": (rate * (1.0 - rate) / n).sqrt(),
    });
    if a.oracle {
        summary["oracle_checked"] = json!(checked);
        summary["oracle_discrepancies"] = json!(discrepancies);
    }
    let text = to_json(&summary)?;
    write_file(&dir.join("decode_summary.json"), &text)?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(if discrepancies > 0 { 3 } else { 0 })
}
