//! Acceptance gate. Prints one PASS/FAIL line per criterion, then fails if any
//! criterion failed. Run with `--nocapture` to see the report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use epicam_core::camera::{axis_angle, pixel_ray, Intrinsics, Pose, Trajectory};
use epicam_core::curation::{curate, sample_frames, CurationPolicy, RejectReason, VideoAnnotation};
use epicam_core::diffusion::{
    condition_dropout, guidance_schedule, sample, score_from_denoiser, GaussianDenoiser, GuidanceSchedule,
    SamplerConfig,
};
use epicam_core::eca::{
    eca_cost, eca_forward, epipolar_band_mask, gather_epipolar_features, masked_dense_attention_oracle,
    EcaWeights, EpipolarFeatures, FeatureMap,
};
use epicam_core::epipolar::{build_epipolar_geometry, epipolar_line, fundamental_matrix, SampledEpipolarLine};
use epicam_core::io::{format_trajectory, parse_trajectory};
use epicam_core::metrics::{evaluate, rotation_error, translation_error};
use epicam_core::plucker::{plucker_embed, PluckerMap};
use epicam_core::preset::{generate_preset, PresetKind, TrajectoryPreset};
use epicam_core::viz::RgbImage;

type Check = Result<(), String>;
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(r: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        if v.norm() > 0.1 && v.norm() < 1.0 {
            return v.normalize();
        }
    }
}

fn rot(r: &mut impl Rng, max: f64) -> Matrix3<f64> {
    axis_angle(unit(r), r.random_range(0.0..max))
}

fn random_pose(r: &mut impl Rng) -> Pose {
    let t = unit(r) * r.random_range(0.0..4.0);
    Pose::new(rot(r, std::f64::consts::PI), t).unwrap()
}

fn random_k(r: &mut impl Rng) -> Intrinsics {
    let (w, h) = (r.random_range(32..128u32), r.random_range(32..128u32));
    Intrinsics::new(
        r.random_range(0.6..1.5) * w as f64,
        r.random_range(0.6..1.5) * w as f64,
        r.random_range(0.3..0.7) * w as f64,
        r.random_range(0.3..0.7) * h as f64,
        w,
        h,
    )
    .unwrap()
}

fn random_traj(r: &mut impl Rng, n: usize) -> Trajectory {
    let k = random_k(r);
    Trajectory::new((0..n).map(|_| random_pose(r)).collect(), k).unwrap()
}

fn c1_plucker() -> Check {
    let mut r = rng(1);
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let (p, k) = (random_pose(&mut r), random_k(&mut r));
        let map = plucker_embed(&p, &k, 4, 4);
        let (y, x) = (r.random_range(0..4), r.random_range(0..4));
        let (m, d) = (map.moment(y, x), map.direction(y, x));
        let alpha = r.random_range(-10.0..10.0);
        worst[0] = worst[0].max((d.norm() - 1.0).abs());
        worst[1] = worst[1].max(m.dot(&d).abs());
        worst[2] = worst[2].max(((p.translation + alpha * d).cross(&d) - m).amax());
    }
    ensure!(worst[0] < 1e-9, "direction norm off by {}", worst[0]);
    ensure!(worst[1] < 1e-9, "moment not orthogonal: {}", worst[1]);
    ensure!(worst[2] < 1e-9, "origin shift changed moment by {}", worst[2]);
    for _ in 0..50 {
        let k = random_k(&mut r);
        let map = plucker_embed(&Pose::identity(), &k, 16, 16);
        ensure!(map.data().chunks(6).all(|px| px[..3] == [0.0; 3]), "first-frame moment not exactly zero");
    }
    Ok(())
}

fn c2_epipolar() -> Check {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let mut points = 0;
    let mut poses = 0;
    while poses < 100 {
        let rel = Pose::new(rot(&mut r, 0.5), unit(&mut r) * r.random_range(0.2..2.0)).unwrap();
        let k = random_k(&mut r);
        let f = fundamental_matrix(&rel, &k, &k).map_err(|e| e.to_string())?;
        ensure!(f.rank_ratio() < 1e-8, "rank ratio {}", f.rank_ratio());
        let mut found = 0;
        // some relative poses share almost no field of view; those are redrawn
        for _ in 0..20_000 {
            if found == 100 {
                break;
            }
            let (u, v) = (r.random_range(0.0..k.width as f64 - 1.0), r.random_range(0.0..k.height as f64 - 1.0));
            let (o, d) = pixel_ray(&Pose::identity(), &k, u, v);
            let x = o + d * r.random_range(2.0..12.0);
            let c = rel.world_to_camera(&x);
            let Some(px) = k.project(&c) else { continue };
            if px[0] < 0.0 || px[1] < 0.0 || px[0] > k.width as f64 - 1.0 || px[1] > k.height as f64 - 1.0 {
                continue;
            }
            let line = epipolar_line(&f, px[0], px[1]).map_err(|e| e.to_string())?;
            worst = worst.max(line.distance([u, v]).abs());
            found += 1;
        }
        if found == 100 {
            poses += 1;
            points += found;
        }
    }
    ensure!(points == 10_000, "only {points} visible points");
    ensure!(worst < 1e-6, "worst residual {worst}");
    Ok(())
}

fn eca_oracle(z: &FeatureMap, e: &EpipolarFeatures, w: &EcaWeights) -> Vec<f64> {
    let d = z.channels();
    let dh = d / w.heads();
    let mv = |x: &[f64], m: &epicam_core::eca::Weight| -> Vec<f64> {
        (0..d).map(|c| (0..d).map(|r| x[r] * m.get(r, c)).sum()).collect()
    };
    let mut out = Vec::new();
    for p in 0..z.pixels() {
        let (feats, valid) = e.row(p);
        let zp = z.pixel(p);
        let live: Vec<usize> = (0..e.samples()).filter(|&j| valid[j]).collect();
        if live.is_empty() {
            out.extend_from_slice(zp);
            continue;
        }
        let q = mv(zp, &w.w_q);
        let ks: Vec<_> = live.iter().map(|&j| mv(&feats[j * d..(j + 1) * d], &w.w_k)).collect();
        let vs: Vec<_> = live.iter().map(|&j| mv(&feats[j * d..(j + 1) * d], &w.w_v)).collect();
        let mut att = vec![0.0; d];
        for h in 0..w.heads() {
            let cs = h * dh..(h + 1) * dh;
            let s: Vec<f64> = ks.iter().map(|k| cs.clone().map(|c| q[c] * k[c]).sum::<f64>() / (dh as f64).sqrt()).collect();
            let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ex: Vec<f64> = s.iter().map(|v| (v - m).exp()).collect();
            let tot: f64 = ex.iter().sum();
            for (a, v) in ex.iter().zip(&vs) {
                for c in cs.clone() {
                    att[c] += a / tot * v[c];
                }
            }
        }
        out.extend(zp.iter().zip(mv(&att, &w.w_out)).map(|(a, b)| a + b));
    }
    out
}

fn random_lines(r: &mut impl Rng, n: usize, l: usize, side: usize) -> Vec<SampledEpipolarLine> {
    let hi = (side - 1).max(1) as f64;
    (0..n)
        .map(|_| SampledEpipolarLine {
            points: (0..l).map(|_| [r.random_range(0.0..hi), r.random_range(0.0..hi)]).collect(),
            valid: (0..l).map(|_| r.random_bool(0.7)).collect(),
        })
        .collect()
}

fn c3_eca_oracle() -> Check {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..12 {
        let side = r.random_range(1..=16);
        let l = r.random_range(1..=16);
        let heads = [1, 2, 4][r.random_range(0..3)];
        let d = heads * r.random_range(1..=32 / heads);
        let z = FeatureMap::random(1, side, side, d, r.random());
        let src = FeatureMap::random(0, side, side, d, r.random());
        let lines = random_lines(&mut r, side * side, l, side);
        let e = gather_epipolar_features(&src, &lines).map_err(|e| e.to_string())?;
        let w = EcaWeights::random(d, heads, r.random()).map_err(|e| e.to_string())?;
        let got = eca_forward(&z, &e, &w).map_err(|e| e.to_string())?;
        for (a, b) in got.data().iter().zip(eca_oracle(&z, &e, &w)) {
            worst = worst.max((a - b).abs());
        }
        let init = EcaWeights::init(d, heads, r.random()).map_err(|e| e.to_string())?;
        ensure!(eca_forward(&z, &e, &init).unwrap() == z, "zero W_out is not a bit-exact identity");
        let perm: Vec<SampledEpipolarLine> = lines
            .iter()
            .map(|ln| SampledEpipolarLine {
                points: ln.points.iter().rev().copied().collect(),
                valid: ln.valid.iter().rev().copied().collect(),
            })
            .collect();
        let ep = gather_epipolar_features(&src, &perm).unwrap();
        let pg = eca_forward(&z, &ep, &w).unwrap();
        let dev = got.data().iter().zip(pg.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure!(dev < 1e-9, "permutation changed output by {dev}");
    }
    ensure!(worst < 1e-6, "max deviation from scalar oracle {worst}");
    Ok(())
}

fn best_time(iters: usize, mut f: impl FnMut()) -> f64 {
    (0..iters)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn c4_eca_cost() -> Check {
    for (h, w, l, d) in [(32, 32, 32, 16), (64, 48, 64, 8), (16, 16, 16, 4), (256, 256, 256, 320)] {
        let c = eca_cost(h, w, l, d).map_err(|e| e.to_string())?;
        ensure!(c.ratio == (h * w) as f64 / l as f64, "ratio {} for {h}x{w}, l={l}", c.ratio);
    }
    let (side, d) = (32, 16);
    let mut preset = TrajectoryPreset::new(PresetKind::Orbit);
    preset.n = 2;
    preset.intrinsics = Intrinsics::from_fov(side as u32, side as u32, 1.0);
    let traj = generate_preset(&preset).unwrap();
    let z_i = FeatureMap::random(1, side, side, d, 1);
    let z_1 = FeatureMap::random(0, side, side, d, 2);
    let w = EcaWeights::random(d, 1, 3).unwrap();
    let ls = [8.0, 16.0, 32.0, 64.0];
    let mut times = Vec::new();
    let mut eca32 = 0.0;
    for &l in &ls {
        let geo = build_epipolar_geometry(&traj, 1, side, side, l as usize).unwrap();
        let e = gather_epipolar_features(&z_1, &geo.lines).unwrap();
        let t = best_time(7, || {
            std::hint::black_box(eca_forward(&z_i, &e, &w).unwrap());
        });
        if l == 32.0 {
            eca32 = t;
        }
        times.push(t);
    }
    let n = ls.len() as f64;
    let (mx, my) = (ls.iter().sum::<f64>() / n, times.iter().sum::<f64>() / n);
    let slope = ls.iter().zip(&times).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / ls.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    let icpt = my - slope * mx;
    ensure!(slope > 0.0, "time does not grow with l: {times:?}");
    for (x, y) in ls.iter().zip(&times) {
        let fit = icpt + slope * x;
        ensure!((y - fit).abs() <= 0.2 * fit, "l={x}: {y:.2e}s vs fit {fit:.2e}s");
    }
    let geo = build_epipolar_geometry(&traj, 1, side, side, 32).unwrap();
    let mask = epipolar_band_mask(&geo, 0.5);
    let dense = best_time(3, || {
        std::hint::black_box(masked_dense_attention_oracle(&z_i, &z_1, &mask, &w).unwrap());
    });
    ensure!(dense >= 5.0 * eca32, "dense {dense:.2e}s is only {:.1}x ECA {eca32:.2e}s", dense / eca32);
    Ok(())
}

fn c5_diffusion() -> Check {
    let mut r = rng(5);
    for _ in 0..100 {
        let den = GaussianDenoiser { mean: vec![r.random_range(-2.0..2.0); 3], std: r.random_range(0.2..3.0) };
        let sigma = r.random_range(0.01..80.0);
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-5.0..5.0) * (1.0 + sigma)).collect();
        let s = score_from_denoiser(&den, &x, sigma, &[]).unwrap();
        for i in 0..3 {
            let h = 1e-4 * (1.0 + sigma);
            let (mut up, mut dn) = (x.clone(), x.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (den.marginal_log_density(&up, sigma) - den.marginal_log_density(&dn, sigma)) / (2.0 * h);
            ensure!((fd - s[i]).abs() <= 1e-4 * s[i].abs().max(1e-3), "score {} vs finite difference {fd}", s[i]);
        }
    }
    let (mu, sd) = (0.7, 1.0);
    let den = GaussianDenoiser { mean: vec![mu], std: sd };
    let g = GuidanceSchedule::constant(1, 1.0);
    let config = SamplerConfig::default();
    let runs = 4096;
    let xs: Vec<f64> = (0..runs).map(|s| sample(&den, &[], 1, &g, &config, s as u64).unwrap()[0]).collect();
    let m = xs.iter().sum::<f64>() / runs as f64;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (runs - 1) as f64;
    ensure!((m - mu).abs() < 3.0 * sd / (runs as f64).sqrt(), "sample mean {m} vs {mu}");
    ensure!((var - sd * sd).abs() < 0.1 * sd * sd, "sample variance {var} vs {}", sd * sd);
    let w = guidance_schedule(14).unwrap();
    let w = w.weights();
    ensure!(w[0] == 1.0 && w[13] == 3.0, "endpoints {} and {}", w[0], w[13]);
    // (13 + 2i)/13 is exactly linear; each weight must be its correctly rounded value,
    // which leaves float second differences at the rounding floor of a couple of ulps
    for (i, &wi) in w.iter().enumerate() {
        ensure!(wi == (13 + 2 * i) as f64 / 13.0, "weight {i} is {wi}, not the rounded linear value");
    }
    let second = w.windows(3).map(|t| (t[2] - 2.0 * t[1] + t[0]).abs()).fold(0.0, f64::max);
    ensure!(second <= 4.0 * f64::EPSILON, "second difference {second} above rounding");
    let mut dropped = 0;
    for _ in 0..100_000 {
        if condition_dropout(&[1.0], 0.1, &mut r).unwrap()[0] == 0.0 {
            dropped += 1;
        }
    }
    let rate = dropped as f64 / 100_000.0;
    ensure!((0.094..=0.106).contains(&rate), "dropout rate {rate}");
    Ok(())
}

fn c6_metrics() -> Check {
    let mut r = rng(6);
    let k = Intrinsics::from_fov(64, 64, 1.0);
    let t = random_traj(&mut r, 14);
    ensure!(rotation_error(&t, &t).unwrap() == 0.0 && translation_error(&t, &t).unwrap() == 0.0, "self error");
    let e = evaluate(&t, &t).unwrap();
    ensure!(e.r_err == 0.0 && e.t_err == 0.0, "canonical self error {} {}", e.r_err, e.t_err);
    let rz = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let a = Trajectory::new(vec![Pose::new(rz, Vector3::zeros()).unwrap()], k).unwrap();
    let b = Trajectory::new(vec![Pose::identity()], k).unwrap();
    let q = rotation_error(&a, &b).unwrap();
    ensure!(q == std::f64::consts::FRAC_PI_2, "quarter turn gives {q}");
    let a = Trajectory::new(vec![Pose::from_translation(Vector3::new(3.0, 4.0, 0.0))], k).unwrap();
    let f = translation_error(&a, &b).unwrap();
    ensure!(f == 5.0, "3-4-5 offset gives {f}");
    for _ in 0..200 {
        let (p, g) = (random_traj(&mut r, 6), random_traj(&mut r, 6));
        let base = evaluate(&p, &g).unwrap();
        let s = r.random_range(0.1..10.0);
        let (ga, gb) = (rot(&mut r, 3.0), rot(&mut r, 3.0));
        let (ba, bb) = (unit(&mut r) * 5.0, unit(&mut r) * 5.0);
        let p2 = p.map_poses(|x| Pose::new(ga * x.rotation, s * (ga * x.translation) + ba).unwrap());
        let g2 = g.map_poses(|x| Pose::new(gb * x.rotation, (gb * x.translation) / s + bb).unwrap());
        let moved = evaluate(&p2, &g2).unwrap();
        let dev = (base.r_err - moved.r_err).abs().max((base.t_err - moved.t_err).abs());
        ensure!(dev < 1e-9, "gauge change moved the metrics by {dev}");
    }
    for _ in 0..10_000 {
        let g = random_traj(&mut r, 1);
        let tiny = axis_angle(unit(&mut r), r.random_range(0.0..1e-7));
        let p = g.map_poses(|x| Pose::new(x.rotation * tiny, x.translation).unwrap());
        let e = rotation_error(&p, &g).unwrap();
        ensure!(e.is_finite(), "NaN rotation error near identity");
    }
    Ok(())
}

fn c7_curation() -> Check {
    let mut r = rng(7);
    let k = Intrinsics::from_fov(32, 32, 1.0);
    let mut anns = Vec::new();
    let mut labels = BTreeSet::new();
    for i in 0..100 {
        let dist = if r.random_bool(0.5) { r.random_range(0.06..3.0) } else { r.random_range(0.0..0.04) };
        let points = if r.random_bool(0.7) { r.random_range(100..5000) } else { r.random_range(0..100) };
        let world = random_pose(&mut r);
        let poses = (0..5)
            .map(|j| world.compose(&Pose::new(rot(&mut r, 0.3), unit(&mut r) * dist * j as f64 / 4.0).unwrap()))
            .collect();
        if dist >= 0.05 && points >= 100 {
            labels.insert(i);
        }
        anns.push(VideoAnnotation {
            video_id: format!("clip{i}"),
            n_frames: 5,
            traj: Trajectory::new(poses, k).unwrap(),
            point_count: points,
            source: None,
        });
    }
    let out = curate(&anns, &CurationPolicy::default()).unwrap();
    ensure!(out.accepted.iter().copied().collect::<BTreeSet<_>>() == labels, "accepted set differs from labels");
    ensure!(out.accepted.len() + out.rejected.len() == 100, "entries lost");
    ensure!(
        out.rejected.iter().all(|j| !j.reasons.is_empty()
            && j.reasons.contains(&RejectReason::LowPointCount) == (j.point_count < 100)),
        "rejection reasons wrong"
    );
    let mut strides = BTreeSet::new();
    for _ in 0..10_000 {
        let count = r.random_range(2..=32);
        let n = count + r.random_range(0..200);
        let idx = sample_frames(n, count, &mut r).unwrap();
        let s = idx[1] - idx[0];
        ensure!(idx.len() == count && *idx.last().unwrap() < n, "bad indices {idx:?} for n={n}");
        ensure!((1..=(n - 1) / (count - 1)).contains(&s), "stride {s} out of range");
        ensure!(idx.windows(2).all(|w| w[1] - w[0] == s), "uneven stride");
        if n == 140 && count == 14 {
            strides.insert(s);
        }
    }
    let mut cover = BTreeSet::new();
    for _ in 0..10_000 {
        let idx = sample_frames(140, 14, &mut r).unwrap();
        cover.insert(idx[1] - idx[0]);
    }
    ensure!(cover == (1..=10).collect(), "strides seen at n=140: {cover:?}");
    Ok(())
}

fn epicam(args: &[&str], dir: &Path) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_epicam"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("epicam {args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn c8_cli() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    epicam(&["traj", "--kind", "orbit", "--n", "14", "--out", "t.txt"], d)?;
    let text = std::fs::read_to_string(d.join("t.txt")).unwrap();
    let parsed = parse_trajectory(&text).map_err(|e| e.to_string())?;
    let expected = generate_preset(&TrajectoryPreset::new(PresetKind::Orbit)).unwrap();
    let reparsed = parse_trajectory(&format_trajectory(&parsed)).unwrap();
    for (a, b) in [(&parsed, &expected), (&reparsed, &parsed)] {
        for (p, q) in a.poses().iter().zip(b.poses()) {
            let dev = (p.rotation - q.rotation).amax().max((p.translation - q.translation).amax());
            ensure!(dev <= 1e-12, "round trip deviates by {dev}");
        }
    }
    epicam(&["embed", "--traj", "t.txt", "--frame", "1", "--h", "32", "--w", "32", "--out", "f1.plk"], d)?;
    let bytes = std::fs::read(d.join("f1.plk")).unwrap();
    ensure!(bytes.starts_with(b"PLK1 32 32"), "bad embedding header");
    let map = PluckerMap::read_from(&bytes[..]).map_err(|e| e.to_string())?;
    ensure!(map.data().chunks(6).all(|px| px[..3] == [0.0; 3]), "frame 1 moments not zero");
    epicam(&["epiviz", "--traj", "t.txt", "--frame", "7", "--h", "64", "--w", "64", "--out", "v.ppm"], d)?;
    let img = RgbImage::read_ppm(&std::fs::read(d.join("v.ppm")).unwrap()).map_err(|e| e.to_string())?;
    ensure!(img.height == 64 && img.width > 128, "unexpected PPM size {}x{}", img.width, img.height);
    let eval = epicam(&["eval", "--pred", "t.txt", "--gt", "t.txt"], d)?;
    ensure!(eval == "r_err\tt_err\n0\t0\n", "self-comparison printed {eval:?}");
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("Plücker embedding invariants", Duration::from_secs(5), c1_plucker),
        ("Epipolar residuals and rank", Duration::from_secs(10), c2_epipolar),
        ("ECA matches scalar oracle", Duration::from_secs(30), c3_eca_oracle),
        ("ECA cost and scaling", Duration::from_secs(120), c4_eca_cost),
        ("Diffusion core", Duration::from_secs(120), c5_diffusion),
        ("Pose metrics", Duration::from_secs(10), c6_metrics),
        ("Curation filters and sampling", Duration::from_secs(10), c7_curation),
        ("End-to-end CLI pipeline", Duration::from_secs(30), c8_cli),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = result.and_then(|()| {
            if took > limit {
                Err(format!("took {took:.2?}, limit {limit:?}"))
            } else {
                Ok(())
            }
        });
        match result {
            Ok(()) => println!("PASS {} {name} ({took:.2?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name} ({took:.2?}): {msg}", i + 1);
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
