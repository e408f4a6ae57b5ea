//! Acceptance run: one PASS/FAIL line per criterion, with the measured values.
//!
//! Corpora are generated with fixed seeds into a temporary directory and the
//! end-to-end criteria drive the `speedsign` binary. Exits nonzero if any
//! criterion fails.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use speedsign::dataset::read_manifest;
use speedsign::features::{extract_glyph, BLOCK, NUM_BLOCKS};
use speedsign::morph::{close, dilate, erode, open, StructuringElement};
use speedsign::raster::{hsv_to_rgb, rgb_to_hsv, HsvPixel, RedThresholds};
use speedsign::recognize::{corpus_training_set, Pipeline};
use speedsign::regions::{label, region_props};
use speedsign::segmenter::{GLYPH_HEIGHT, GLYPH_WIDTH};
use speedsign::svm::{dual_objective, kkt_violation, solve_dual, train_multiclass, Kernel, TrainConfig};
use speedsign::{BinaryImage, MulticlassModel};

const TRAIN_SEED: &str = "1";
const CLEAN_SEED: &str = "7";
const NOISY_SEED: &str = "3";
const CLEAN_RUNTIME_LIMIT: Duration = Duration::from_secs(60);
const DETECTION_MIN: f64 = 0.95;
const FP_PER_IMAGE_MAX: f64 = 0.05;
const LARGE_BUCKET_MIN: f64 = 0.90;
const DISK_METRIC: (f64, f64) = (0.9, 1.1);
const SQUARE_METRIC_TOL: f64 = 0.08;
const KKT_TOL: f64 = 1e-3;
const DUAL_REL_TOL: f64 = 1e-3;
const FEATURE_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_speedsign"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "speedsign {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str, per_class: &str, extra: &[&str]) -> PathBuf {
    let mut args = vec!["synth", "--out", s(dir), "--n-per-class", per_class, "--seed", seed];
    args.extend_from_slice(extra);
    run(&args);
    dir.join("manifest.jsonl")
}

fn eval_report(manifest: &Path, model: &Path, out: &Path) -> Value {
    run(&["eval", "--manifest", s(manifest), "--model", s(model), "--out", s(out)]);
    serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap()
}

fn rate(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap()
}

struct Trained {
    manifest: PathBuf,
    model: PathBuf,
}

fn clean_corpus(root: &Path) -> (Outcome, Trained) {
    let start = Instant::now();
    let train_manifest = synth(&root.join("train"), TRAIN_SEED, "20", &["--radius-min", "15"]);
    let model = root.join("model.json");
    run(&["train", "--manifest", s(&train_manifest), "--out", s(&model)]);
    let test_manifest = synth(&root.join("clean"), CLEAN_SEED, "20", &["--noise", "0", "--blur", "1"]);
    let r = eval_report(&test_manifest, &model, &root.join("clean.json"));
    let elapsed = start.elapsed();
    let (det, fp, rec) = (
        rate(&r, "detection_rate"),
        rate(&r, "false_positives_per_image"),
        rate(&r, "recognition_rate"),
    );
    let pass = r["images"] == 100
        && det >= DETECTION_MIN
        && fp <= FP_PER_IMAGE_MAX
        && rec == 1.0
        && elapsed <= CLEAN_RUNTIME_LIMIT;
    let detail = format!(
        "100 images: detection {det:.4} (>= {DETECTION_MIN}), fp/image {fp:.4} (<= {FP_PER_IMAGE_MAX}), \
         recognition {rec:.4} (= 1), synth+train+eval {:.1}s (<= {}s)",
        elapsed.as_secs_f64(),
        CLEAN_RUNTIME_LIMIT.as_secs()
    );
    (
        outcome(pass, detail),
        Trained {
            manifest: train_manifest,
            model,
        },
    )
}

fn degradation(root: &Path, trained: &Trained) -> Outcome {
    let manifest = synth(
        &root.join("noisy"),
        NOISY_SEED,
        "40",
        &["--noise", "8", "--radius-min", "15", "--radius-max", "80"],
    );
    let r = eval_report(&manifest, &trained.model, &root.join("noisy.json"));
    let buckets: Vec<(f64, f64, f64)> = r["buckets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| (rate(b, "radius_min"), rate(b, "radius_max"), rate(b, "detection_rate")))
        .collect();
    let monotone = buckets.windows(2).all(|w| w[0].2 <= w[1].2);
    let largest = buckets.last().map(|b| b.2).unwrap_or(0.0);
    let listing: Vec<String> = buckets.iter().map(|(lo, hi, d)| format!("{lo}-{hi}: {d:.3}")).collect();
    outcome(
        monotone && largest >= LARGE_BUCKET_MIN && buckets.len() == 3,
        format!(
            "noise 8, 200 images, detection by radius [{}], non-increasing as radius shrinks: {monotone}, \
             largest >= {LARGE_BUCKET_MIN}",
            listing.join(", ")
        ),
    )
}

fn shape_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut disk_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut disk_ok = 0;
    for _ in 0..50 {
        let r: f64 = rng.random_range(20.0..100.0);
        let side = (2.0 * r) as usize + 8;
        let (cx, cy) = (
            side as f64 / 2.0 + rng.random_range(-0.5..0.5),
            side as f64 / 2.0 + rng.random_range(-0.5..0.5),
        );
        let mut img = BinaryImage::new(side, side);
        for y in 0..side {
            for x in 0..side {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                img.set(x, y, dx * dx + dy * dy <= r * r);
            }
        }
        let m = region_props(&label(&img))[0].metric;
        disk_range = (disk_range.0.min(m), disk_range.1.max(m));
        disk_ok += usize::from((DISK_METRIC.0..=DISK_METRIC.1).contains(&m));
    }
    let mut worst_square: f64 = 0.0;
    let mut square_ok = 0;
    for _ in 0..50 {
        let side = rng.random_range(40..=120);
        let mut img = BinaryImage::new(side + 6, side + 6);
        for y in 3..side + 3 {
            for x in 3..side + 3 {
                img.set(x, y, true);
            }
        }
        let m = region_props(&label(&img))[0].metric;
        worst_square = worst_square.max((m - FRAC_PI_4).abs());
        square_ok += usize::from((m - FRAC_PI_4).abs() <= SQUARE_METRIC_TOL && m < 0.9);
    }
    outcome(
        disk_ok == 50 && square_ok == 50,
        format!(
            "disks r in [20, 100): {disk_ok}/50 in [{}, {}] (range {:.4}..{:.4}); squares side in [40, 120]: \
             {square_ok}/50 within {SQUARE_METRIC_TOL} of pi/4 and below 0.9 (worst {worst_square:.4})",
            DISK_METRIC.0, DISK_METRIC.1, disk_range.0, disk_range.1
        ),
    )
}

fn random_binary(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryImage {
    let density = rng.random_range(0.05..0.95);
    BinaryImage::from_raw(w, h, (0..w * h).map(|_| rng.random_bool(density)).collect()).unwrap()
}

fn flood_fill(img: &BinaryImage) -> (Vec<u32>, u32) {
    let (w, h) = (img.width(), img.height());
    let mut ids = vec![0u32; w * h];
    let mut next = 0;
    for start in 0..w * h {
        if !img.get(start % w, start / w) || ids[start] != 0 {
            continue;
        }
        next += 1;
        ids[start] = next;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for (dx, dy) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if img.get(nx as usize, ny as usize) && ids[j] == 0 {
                    ids[j] = next;
                    stack.push(j);
                }
            }
        }
    }
    (ids, next)
}

fn labeling_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let img = random_binary(&mut rng, 32, 32);
        let map = label(&img);
        let (oracle, count) = flood_fill(&img);
        let mut fwd = HashMap::new();
        let mut back = HashMap::new();
        let same = map.count() == count
            && map.labels().iter().zip(&oracle).all(|(&a, &b)| {
                (a == 0) == (b == 0) && *fwd.entry(a).or_insert(b) == b && *back.entry(b).or_insert(a) == a
            });
        mismatches += usize::from(!same);
    }
    outcome(
        mismatches == 0,
        format!("1000 random 32x32 images, {mismatches} mismatches against flood fill"),
    )
}

fn morphology_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let box3 = StructuringElement::square(3).unwrap();
    let mut violations = [0usize; 4];
    for _ in 0..1000 {
        let img = random_binary(&mut rng, 16, 16);
        let (w, h) = (2 * rng.random_range(0..3) + 1, 2 * rng.random_range(0..3) + 1);
        let mut mask: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.5)).collect();
        mask[(h / 2) * w + w / 2] = true;
        let se = StructuringElement::new(w, h, mask).unwrap();
        violations[0] += usize::from(erode(&img, &se) != dilate(&img.complement(), &se.reflect()).complement());
        violations[1] += usize::from(!img.is_subset_of(&dilate(&img, &box3)));
        violations[2] += usize::from(!erode(&img, &box3).is_subset_of(&img));
        violations[3] += usize::from(!(open(&img, &se).is_subset_of(&img) && img.is_subset_of(&close(&img, &se))));
    }
    outcome(
        violations.iter().all(|&v| v == 0),
        format!(
            "1000 random 16x16 images: duality {}, dilation extensive {}, erosion anti-extensive {}, \
             opening <= image <= closing {} violations",
            violations[0], violations[1], violations[2], violations[3]
        ),
    )
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (r[i] - (i + 1..n).map(|k| a[i][k] * x[k]).sum::<f64>()) / a[i][i];
    }
    Some(x)
}

/// Best feasible stationary point over every face of the box constraints.
fn exact_dual(xs: &[Vec<f64>], ys: &[i8], kernel: &Kernel, c: f64) -> f64 {
    let n = xs.len();
    let y: Vec<f64> = ys.iter().map(|&v| v as f64).collect();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel.eval(&xs[i], &xs[j]);
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let upper: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&st| if st == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut r = vec![0.0; m + 1];
            for (p, &i) in free.iter().enumerate() {
                for (t, &j) in free.iter().enumerate() {
                    a[p][t] = q(i, j);
                }
                a[p][m] = y[i];
                a[m][p] = y[i];
                r[p] = 1.0 - upper.iter().map(|&j| q(i, j) * c).sum::<f64>();
            }
            r[m] = -upper.iter().map(|&j| y[j] * c).sum::<f64>();
            let Some(sol) = solve_linear(a, r) else { continue };
            for (p, &i) in free.iter().enumerate() {
                alpha[i] = sol[p];
            }
        }
        let feasible = alpha.iter().all(|&a| (-1e-9..=c + 1e-9).contains(&a))
            && alpha.iter().zip(&y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9;
        if feasible {
            best = best.max(dual_objective(xs, ys, &alpha, kernel));
        }
    }
    best
}

/// Worst KKT residual over a model's machines, recomputed on the full pair data.
fn model_kkt(model: &MulticlassModel, data: &[(Vec<f64>, u32)]) -> f64 {
    let zs: Vec<(Vec<f64>, u32)> = data.iter().map(|(x, l)| (model.standardizer.apply(x), *l)).collect();
    let mut worst: f64 = 0.0;
    for m in &model.machines {
        let (xs, ys): (Vec<Vec<f64>>, Vec<i8>) = zs
            .iter()
            .filter(|(_, l)| *l == m.label_pos || *l == m.label_neg)
            .map(|(z, l)| (z.clone(), if *l == m.label_pos { 1 } else { -1 }))
            .unzip();
        let mut alpha = vec![0.0; xs.len()];
        let mut taken = vec![false; xs.len()];
        for (sv, coef) in m.support_vectors.iter().zip(&m.dual_coefs) {
            let Some(i) = (0..xs.len()).find(|&i| !taken[i] && xs[i] == *sv && ys[i] as f64 * coef > 0.0) else {
                return f64::INFINITY;
            };
            taken[i] = true;
            alpha[i] = coef.abs();
        }
        worst = worst.max(kkt_violation(&xs, &ys, &alpha, m.bias, &m.kernel, model.c));
    }
    worst
}

fn svm_correctness(trained: &Trained) -> Outcome {
    // (a) every machine of the corpus model, against its own training characters.
    let entries = read_manifest(&trained.manifest).unwrap();
    let (rows, _) = corpus_training_set(&trained.manifest, &entries, &Pipeline::default()).unwrap();
    let data: Vec<(Vec<f64>, u32)> = rows.iter().map(|(f, l)| (f.as_slice().to_vec(), *l)).collect();
    let model = MulticlassModel::load(&trained.model).unwrap();
    let kkt = model_kkt(&model, &data);

    // (b) SMO against the exact dual on tiny problems.
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut worst_rel: f64 = 0.0;
    for k in 0..50 {
        let n = rng.random_range(2..=6);
        let mut ys: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        ys[0] = 1;
        ys[1] = -1;
        let xs: Vec<Vec<f64>> = ys
            .iter()
            .map(|&y| {
                vec![
                    rng.random_range(-1.5..1.5) + y as f64 * 0.7,
                    rng.random_range(-1.5..1.5),
                ]
            })
            .collect();
        let kernel = Kernel::Rbf {
            gamma: rng.random_range(0.2..2.0),
        };
        let c = [0.5, 1.0, 10.0][k % 3];
        let sol = solve_dual(&xs, &ys, &kernel, c, KKT_TOL, 1000).unwrap();
        let smo = dual_objective(&xs, &ys, &sol.alpha, &kernel);
        let exact = exact_dual(&xs, &ys, &kernel, c);
        worst_rel = worst_rel.max((smo - exact).abs() / exact.abs().max(1.0));
    }

    // (c) machine counts.
    let blob = |classes: &[u32], rng: &mut ChaCha8Rng| -> Vec<(Vec<f64>, u32)> {
        classes
            .iter()
            .flat_map(|&c| (0..8).map(move |_| c))
            .map(|c| {
                (
                    vec![c as f64 + rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)],
                    c,
                )
            })
            .collect()
    };
    let five = train_multiclass(&blob(&[20, 40, 60, 80, 100], &mut rng), &TrainConfig::default()).unwrap();
    let two = train_multiclass(&blob(&[20, 40], &mut rng), &TrainConfig::default()).unwrap();
    let counts = (five.machines.len(), two.machines.len());

    outcome(
        kkt <= KKT_TOL && worst_rel <= DUAL_REL_TOL && counts == (10, 1),
        format!(
            "(a) {} machines on {} characters, worst KKT residual {kkt:.2e} (<= {KKT_TOL:.0e}); \
             (b) 50 problems, worst relative dual gap {worst_rel:.2e} (<= {DUAL_REL_TOL:.0e}); \
             (c) 5 classes -> {} machines, 2 classes -> {}",
            model.machines.len(),
            data.len(),
            counts.0,
            counts.1
        ),
    )
}

fn feature_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut worst: f64 = 0.0;
    let mut empty = 0;
    let mut empty_nonzero = 0;
    for _ in 0..500 {
        let mut g = BinaryImage::new(GLYPH_WIDTH, GLYPH_HEIGHT);
        for _ in 0..rng.random_range(0..6) {
            let (x0, y0) = (rng.random_range(0..GLYPH_WIDTH), rng.random_range(0..GLYPH_HEIGHT));
            let (x1, y1) = (
                (x0 + rng.random_range(1..15)).min(GLYPH_WIDTH),
                (y0 + rng.random_range(1..30)).min(GLYPH_HEIGHT),
            );
            for y in y0..y1 {
                for x in x0..x1 {
                    g.set(x, y, true);
                }
            }
        }
        for _ in 0..rng.random_range(0..40) {
            let (x, y) = (rng.random_range(0..GLYPH_WIDTH), rng.random_range(0..GLYPH_HEIGHT));
            g.set(x, y, !g.get(x, y));
        }
        let f = extract_glyph(&g);
        let on = |x: isize, y: isize| {
            x >= 0
                && y >= 0
                && (x as usize) < GLYPH_WIDTH
                && (y as usize) < GLYPH_HEIGHT
                && g.get(x as usize, y as usize)
        };
        for b in 0..NUM_BLOCKS {
            let (bx, by) = (b % (GLYPH_WIDTH / BLOCK), b / (GLYPH_WIDTH / BLOCK));
            let cell = |c: usize, r: usize| {
                let (x, y) = ((bx * BLOCK + c) as isize, (by * BLOCK + r) as isize);
                on(x, y) && !(on(x - 1, y) && on(x + 1, y) && on(x, y - 1) && on(x, y + 1))
            };
            let mut thetas = Vec::new();
            for r in 0..BLOCK {
                for c in 0..BLOCK {
                    if cell(c, r) {
                        thetas.push(((BLOCK - r) as f64 - 0.5).atan2(c as f64 + 0.5).to_degrees());
                    }
                }
            }
            let h: usize = (0..BLOCK)
                .map(|r| {
                    (0..BLOCK)
                        .filter(|&c| cell(c, r) && (c == 0 || !cell(c - 1, r)))
                        .count()
                })
                .sum();
            let v: usize = (0..BLOCK)
                .map(|c| {
                    (0..BLOCK)
                        .filter(|&r| cell(c, r) && (r == 0 || !cell(c, r - 1)))
                        .count()
                })
                .sum();
            let (angle, transit) = if thetas.is_empty() {
                (0.0, 0.0)
            } else {
                (thetas.iter().sum::<f64>() / thetas.len() as f64, h as f64 / v as f64)
            };
            worst = worst
                .max((f.angle()[b] - angle).abs())
                .max((f.transit()[b] - transit).abs());
            if thetas.is_empty() {
                empty += 1;
                empty_nonzero += usize::from(f.angle()[b] != 0.0 || f.transit()[b] != 0.0);
            }
        }
    }
    outcome(
        worst <= FEATURE_TOL && empty_nonzero == 0,
        format!(
            "500 random 60x30 glyphs: max deviation {worst:.2e} (<= {FEATURE_TOL:.0e}); \
             {empty} empty blocks, {empty_nonzero} nonzero"
        ),
    )
}

fn hsv_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let mut worst = 0;
    for code in 0..1u32 << 15 {
        let px = [0, 5, 10].map(|shift| (((code >> shift) & 31) * 8 + rng.random_range(0..8)) as u8);
        let back = hsv_to_rgb(rgb_to_hsv(px));
        worst = (0..3)
            .map(|c| (back[c] as i32 - px[c] as i32).abs())
            .fold(worst, i32::max);
    }
    let t = RedThresholds::default();
    let boundary = [0.8, 0.94].iter().all(|&h| t.is_red(&HsvPixel { h, s: 0.45, v: 0.5 }));
    outcome(
        worst <= 1 && boundary,
        format!("2^15 stratified pixels, worst channel error {worst} (<= 1); h in {{0.8, 0.94}}, s 0.45, v 0.5 red: {boundary}"),
    )
}

/// Every command twice with the same flags into separate directories; outputs must match byte for byte.
fn determinism(root: &Path, trained: &Trained) -> Outcome {
    let mut diffs = Vec::new();
    let mut outputs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for round in 0..2 {
        let dir = root.join(format!("repeat{round}"));
        let manifest = synth(
            &dir.join("corpus"),
            "13",
            "3",
            &["--noise", "6", "--background", "plain,gradient,clutter"],
        );
        let model = dir.join("model.json");
        let train_out = run(&["train", "--manifest", s(&manifest), "--out", s(&model)]);
        let image = dir.join("corpus").join("60_0000.png");
        let detect_out = run(&["detect", s(&image)]);
        let recognize_out = run(&["recognize", s(&image), "--model", s(&trained.model)]);
        let report = dir.join("report.json");
        run(&[
            "eval",
            "--manifest",
            s(&manifest),
            "--model",
            s(&trained.model),
            "--out",
            s(&report),
        ]);
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.join("corpus"))
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.sort();
        files.push(("model.json".into(), fs::read(&model).unwrap()));
        files.push(("train stdout".into(), train_out.stdout));
        files.push((
            "detect stdout".into(),
            String::from_utf8(detect_out.stdout)
                .unwrap()
                .replace(s(&dir), "")
                .into_bytes(),
        ));
        files.push(("recognize stdout".into(), recognize_out.stdout));
        files.push(("report.json".into(), fs::read(&report).unwrap()));
        outputs.push(files);
    }
    if outputs[0].len() != outputs[1].len() {
        diffs.push("file lists".to_string());
    }
    for ((name, a), (_, b)) in outputs[0].iter().zip(&outputs[1]) {
        if a != b {
            diffs.push(name.clone());
        }
    }
    outcome(
        diffs.is_empty(),
        format!(
            "synth, train, detect, recognize, eval run twice: {} outputs compared, differing: {diffs:?}",
            outputs[0].len()
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let (c1, trained) = clean_corpus(root);
    let results = [
        ("1 clean corpus", c1),
        ("2 radius degradation", degradation(root, &trained)),
        ("3 circularity band", shape_metrics()),
        ("4 labeling oracle", labeling_oracle()),
        ("5 morphology algebra", morphology_algebra()),
        ("6 svm correctness", svm_correctness(&trained)),
        ("7 feature oracle", feature_oracle()),
        ("8 hsv round trip", hsv_round_trip()),
        ("9 determinism", determinism(root, &trained)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
