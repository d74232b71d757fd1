use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use epicam_core::camera::{Intrinsics, Trajectory};
use epicam_core::curation::{curate, parse_manifest, CurationPolicy};
use epicam_core::diffusion::{
    sample, ConditionalGaussianDenoiser, GuidanceSchedule, NoiseSchedule, SamplerConfig, Solver,
};
use epicam_core::eca::{
    eca_cost, eca_forward, epipolar_band_mask, gather_epipolar_features, masked_dense_attention_oracle,
    EcaWeights, FeatureMap,
};
use epicam_core::epipolar::{build_epipolar_geometry, default_samples};
use epicam_core::io::{format_trajectory, format_trajectory_json, read_trajectory};
use epicam_core::metrics::evaluate;
use epicam_core::plucker::plucker_embed;
use epicam_core::preset::{generate_preset, PresetKind, TrajectoryPreset};
use epicam_core::viz::{grid_queries, render_epipolar};
use epicam_core::Error;

#[derive(Parser)]
#[command(name = "epicam", version, about = "Camera-conditioning geometry toolkit")]
struct Cli {
    /// Seed for every random choice a subcommand makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a preset camera trajectory.
    Traj {
        #[arg(long, value_parser = parse_kind)]
        kind: PresetKind,
        #[arg(long, default_value_t = 14)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        magnitude: f64,
        #[arg(long = "h", default_value_t = 256)]
        h: u32,
        #[arg(long = "w", default_value_t = 256)]
        w: u32,
        /// Horizontal field of view in degrees.
        #[arg(long, default_value_t = 60.0)]
        fov: f64,
        /// Output path; `.json` selects the JSON format. Stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the Plücker embedding of one frame.
    Embed {
        #[arg(long)]
        traj: PathBuf,
        /// 1-based frame index.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        frame: u64,
        #[arg(long = "h", default_value_t = 256)]
        h: usize,
        #[arg(long = "w", default_value_t = 256)]
        w: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render sampled epipolar lines of a frame against the first frame as PPM.
    Epiviz {
        #[arg(long)]
        traj: PathBuf,
        /// 1-based frame index, at least 2.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        frame: u64,
        #[arg(long = "h", default_value_t = 256)]
        h: usize,
        #[arg(long = "w", default_value_t = 256)]
        w: usize,
        /// Samples per line; defaults to max(h, w).
        #[arg(long)]
        l: Option<usize>,
        /// Queries form a k×k grid.
        #[arg(long, default_value_t = 3)]
        queries: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the guided Gaussian toy model and report per-frame statistics.
    SampleToy {
        #[arg(long, default_value_t = 25)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        omega_start: f64,
        #[arg(long, default_value_t = 3.0)]
        omega_end: f64,
        #[arg(long, default_value_t = 14)]
        frames: usize,
        /// Values per frame.
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 256)]
        runs: usize,
        /// Conditional data mean; the unconditional model has mean 0.
        #[arg(long, default_value_t = 1.0)]
        mean: f64,
        #[arg(long, default_value_t = 1.0)]
        std: f64,
        #[arg(long, value_enum, default_value_t = SolverArg::Heun)]
        solver: SolverArg,
    },
    /// Rotation and translation error of a predicted trajectory.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        per_frame: bool,
    },
    /// Filter a JSONL manifest of annotated videos.
    Curate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = epicam_core::curation::DEFAULT_MIN_DISPLACEMENT)]
        min_displacement: f64,
        #[arg(long, default_value_t = epicam_core::curation::DEFAULT_MIN_POINTS)]
        min_points: u64,
    },
    /// Time epipolar attention against the dense masked oracle.
    BenchEca {
        #[arg(long = "h", default_value_t = 32)]
        h: usize,
        #[arg(long = "w", default_value_t = 32)]
        w: usize,
        #[arg(long, default_value_t = 32)]
        l: usize,
        #[arg(long, default_value_t = 16)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        iters: usize,
        /// Skip timing the dense oracle.
        #[arg(long)]
        no_dense: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Euler,
    Heun,
}

fn parse_kind(s: &str) -> Result<PresetKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = PresetKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn frame_index(frame: u64, traj: &Trajectory) -> Result<usize> {
    let i = frame as usize - 1;
    if i >= traj.len() {
        bail!("frame {frame} out of range, trajectory has {} frames", traj.len());
    }
    Ok(i)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load(path: &Path) -> Result<Trajectory> {
    read_trajectory(path).with_context(|| format!("reading {}", path.display()))
}

/// Runs a subcommand and returns what it prints on stdout.
fn run(cli: Cli) -> Result<String> {
    let mut out = String::new();
    match cli.cmd {
        Cmd::Traj { kind, n, magnitude, h, w, fov, out: dest } => {
            let preset = TrajectoryPreset {
                kind,
                n,
                magnitude,
                intrinsics: Intrinsics::from_fov(w, h, fov.to_radians()),
            };
            let traj = match generate_preset(&preset) {
                Err(Error::DegenerateScale) => {
                    eprintln!("warning: {} has no translation, writing it unnormalised", kind.name());
                    preset.raw_trajectory()?
                }
                other => other?,
            };
            let json = dest.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
            let text = if json { format_trajectory_json(&traj)? + "\n" } else { format_trajectory(&traj) };
            match dest {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => out = text,
            }
        }
        Cmd::Embed { traj, frame, h, w, out: dest } => {
            let t = load(&traj)?;
            let i = frame_index(frame, &t)?;
            if h == 0 || w == 0 {
                bail!("embedding size must be positive");
            }
            let map = plucker_embed(t.pose(i), t.intrinsics(), h, w);
            let mut f = create(&dest)?;
            map.write_to(&mut f)?;
            f.flush()?;
            let max_moment = map.data().chunks(6).flat_map(|p| p[..3].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
            writeln!(out, "{}", json!({ "frame": frame, "h": h, "w": w, "max_abs_moment": max_moment }))?;
        }
        Cmd::Epiviz { traj, frame, h, w, l, queries, out: dest } => {
            let t = load(&traj)?;
            let i = frame_index(frame, &t)?;
            if i == 0 {
                bail!("frame 1 is the reference frame; pick a later frame");
            }
            let l = l.unwrap_or_else(|| default_samples(h, w));
            let qs = grid_queries(w, h, queries);
            let img = render_epipolar(&t, i, h, w, l, &qs)?;
            let mut f = create(&dest)?;
            img.write_ppm(&mut f)?;
            f.flush()?;
            let geo = build_epipolar_geometry(&t, i, h, w, l)?;
            let valid = geo.lines.iter().filter(|ln| ln.any_valid()).count();
            let epipole = geo.fundamental.and_then(|f| f.epipole());
            writeln!(out, 
                "{}",
                json!({
                    "frame": frame,
                    "degenerate": geo.degenerate,
                    "epipole": epipole,
                    "valid_lines": valid,
                    "pixels": h * w,
                })
            )?;
        }
        Cmd::SampleToy { steps, omega_start, omega_end, frames, dim, runs, mean, std, solver } => {
            if frames == 0 || dim == 0 || runs < 2 {
                bail!("need frames ≥ 1, dim ≥ 1 and runs ≥ 2");
            }
            let guidance = if frames == 1 {
                GuidanceSchedule::constant(1, omega_start)
            } else {
                GuidanceSchedule::linear(frames, omega_start, omega_end)?
            };
            let config = SamplerConfig {
                schedule: NoiseSchedule::with_steps(steps)?,
                solver: match solver {
                    SolverArg::Euler => Solver::Euler,
                    SolverArg::Heun => Solver::Heun,
                },
            };
            let den = ConditionalGaussianDenoiser { std };
            let cond = vec![mean; frames * dim];
            let mut seeds = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut sum = vec![0.0; frames];
            let mut sq = vec![0.0; frames];
            for _ in 0..runs {
                let x = sample(&den, &cond, frames * dim, &guidance, &config, seeds.random())?;
                for (f, chunk) in x.chunks(dim).enumerate() {
                    sum[f] += chunk.iter().sum::<f64>();
                    sq[f] += chunk.iter().map(|v| v * v).sum::<f64>();
                }
            }
            let count = (runs * dim) as f64;
            let per_frame: Vec<_> = (0..frames)
                .map(|f| {
                    let m = sum[f] / count;
                    let var = (sq[f] - count * m * m) / (count - 1.0);
                    let omega = guidance.weights()[f];
                    json!({
                        "frame": f + 1,
                        "omega": omega,
                        "expected_mean": omega * mean,
                        "mean": m,
                        "expected_variance": std * std,
                        "variance": var,
                    })
                })
                .collect();
            let report = json!({
                "seed": cli.seed,
                "steps": steps,
                "solver": match solver { SolverArg::Euler => "euler", SolverArg::Heun => "heun" },
                "runs": runs,
                "frames": per_frame,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Cmd::Eval { pred, gt, per_frame } => {
            let errs = evaluate(&load(&pred)?, &load(&gt)?)?;
            if per_frame {
                writeln!(out, "frame\tr_err\tt_err")?;
                for (i, (r, t)) in errs.per_frame.iter().enumerate() {
                    writeln!(out, "{}\t{r}\t{t}", i + 1)?;
                }
                writeln!(out, "total\t{}\t{}", errs.r_err, errs.t_err)?;
            } else {
                writeln!(out, "r_err\tt_err")?;
                writeln!(out, "{}\t{}", errs.r_err, errs.t_err)?;
            }
        }
        Cmd::Curate { manifest, out: dest, report, min_displacement, min_points } => {
            let src = fs::read_to_string(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let entries = parse_manifest(&src)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let anns = entries
                .iter()
                .map(|e| e.load(base).with_context(|| format!("loading {}", e.video_id)))
                .collect::<Result<Vec<_>>>()?;
            let policy = CurationPolicy {
                displacement_min: min_displacement,
                point_count_min: min_points,
                ..CurationPolicy::default()
            };
            let outcome = curate(&anns, &policy)?;
            let mut f = create(&dest)?;
            for &i in &outcome.accepted {
                writeln!(f, "{}", serde_json::to_string(&entries[i])?)?;
            }
            f.flush()?;
            let mut f = create(&report)?;
            for r in &outcome.rejected {
                writeln!(f, "{}", serde_json::to_string(r)?)?;
            }
            f.flush()?;
            writeln!(out, "{}", json!({ "accepted": outcome.accepted.len(), "rejected": outcome.rejected.len() }))?;
        }
        Cmd::BenchEca { h, w, l, d, iters, no_dense } => {
            let cost = eca_cost(h as u64, w as u64, l as u64, d as u64)?;
            if iters == 0 {
                bail!("iters must be positive");
            }
            let mut preset = TrajectoryPreset::new(PresetKind::Orbit);
            preset.n = 2;
            preset.intrinsics = Intrinsics::from_fov(w as u32, h as u32, 1.0);
            let traj = generate_preset(&preset)?;
            let geo = build_epipolar_geometry(&traj, 1, h, w, l)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let z_i = FeatureMap::random(1, h, w, d, rng.random());
            let z_1 = FeatureMap::random(0, h, w, d, rng.random());
            let wts = EcaWeights::random(d, 1, rng.random())?;
            let e = gather_epipolar_features(&z_1, &geo.lines)?;
            let start = Instant::now();
            for _ in 0..iters {
                std::hint::black_box(eca_forward(&z_i, &e, &wts)?);
            }
            let eca_ms = start.elapsed().as_secs_f64() * 1e3 / iters as f64;
            let dense_ms = if no_dense {
                f64::NAN
            } else {
                let mask = epipolar_band_mask(&geo, 0.5);
                let start = Instant::now();
                for _ in 0..iters {
                    std::hint::black_box(masked_dense_attention_oracle(&z_i, &z_1, &mask, &wts)?);
                }
                start.elapsed().as_secs_f64() * 1e3 / iters as f64
            };
            writeln!(out, "h\tw\tl\td\teca_score_ops\tdense_score_ops\tratio\teca_ms\tdense_ms")?;
            writeln!(out, 
                "{h}\t{w}\t{l}\t{d}\t{}\t{}\t{}\t{eca_ms:.4}\t{dense_ms:.4}",
                cost.eca_score_ops, cost.dense_score_ops, cost.ratio
            )?;
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
            _ => ExitCode::SUCCESS,
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
