//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use semrheo_core::document::{analyze_document, embed_sentences_avg, split_sentences, SplitMode};
use semrheo_core::embedding::{
    load_canonical, load_glove_text, load_word2vec_text, save_canonical, write_canonical_file,
};
use semrheo_core::msd::{
    analyze_curve, fit_power_law, msd, msd_to, step_lengths, tail_exponent, AnalysisOptions,
    MsdCurve, Provenance, Regime,
};
use semrheo_core::rng::SimRng;
use semrheo_core::synthetic::{expected_msd, generate, SyntheticKind, SyntheticSpec};
use semrheo_core::walker::{detect_absorption, free_walk, guided_walk, write_walk_json, WalkParams};
use semrheo_core::{EmbeddingSet, Trajectory};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn data_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data"))
}

fn random_trajectory(rng: &mut SimRng) -> Trajectory {
    let n = 2 + rng.uniform_index(99);
    let d = 1 + rng.uniform_index(16);
    let scale = 10f64.powf(4.0 * rng.uniform() - 2.0);
    let data = (0..n * d).map(|_| scale * rng.standard_normal()).collect();
    Trajectory::from_flat(data, d, Provenance::Synthetic).unwrap()
}

fn brute_force_msd(t: &Trajectory) -> Vec<f64> {
    let n = t.len();
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            let d2: f64 = t.point(j).iter().zip(t.point(i)).map(|(a, b)| (a - b).powi(2)).sum();
            sums[j - i] += d2;
            counts[j - i] += 1;
        }
    }
    (1..n).map(|k| sums[k] / counts[k] as f64).collect()
}

fn msd_oracle() -> Check {
    let start = Instant::now();
    let mut rng = SimRng::new(20_240_601);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = random_trajectory(&mut rng);
        let got = msd(&t);
        let want = brute_force_msd(&t);
        ensure(got.values().len() == want.len(), "curve length mismatch")?;
        for (g, w) in got.values().iter().zip(&want) {
            worst = worst.max((g - w).abs() / w.abs().max(f64::MIN_POSITIVE));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-12, format!("max relative error {worst:e}"))?;
    ensure(secs < 5.0, format!("took {secs:.2} s"))?;
    Ok(format!("max relative error {worst:.1e}, {secs:.3} s"))
}

fn exponent_recovery() -> Check {
    let mut worst = 0.0f64;
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        let values = (1..1000).map(|n| 3.7 * (n as f64).powf(alpha)).collect();
        let curve = MsdCurve::from_values(values).map_err(|e| e.to_string())?;
        let fit = fit_power_law(&curve, (1, 999)).map_err(|e| e.to_string())?;
        let err = (fit.alpha - alpha).abs();
        ensure(err < 1e-9, format!("alpha {alpha}: got {}", fit.alpha))?;
        worst = worst.max(err);
    }
    Ok(format!("max |alpha error| {worst:.1e}"))
}

fn brownian() -> Check {
    let start = Instant::now();
    let curves: Vec<MsdCurve> = (0..20)
        .map(|seed| {
            let spec = SyntheticSpec {
                kind: SyntheticKind::Brownian { step_std: 1.0 },
                dims: 16,
                steps: 10_000,
                seed,
            };
            msd_to(&generate(&spec).unwrap(), 100)
        })
        .collect();
    let opts = AnalysisOptions {
        window: Some((1, 100)),
        ..AnalysisOptions::default()
    };
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for (seed, c) in curves.iter().enumerate() {
        let report = analyze_curve(c, None, &opts).map_err(|e| e.to_string())?;
        let a = report.fit.alpha;
        range = (range.0.min(a), range.1.max(a));
        ensure((0.9..=1.1).contains(&a), format!("seed {seed}: alpha {a}"))?;
        ensure(report.regime == Regime::Diffusive, format!("seed {seed}: {}", report.regime))?;
    }
    let mean = MsdCurve::ensemble_mean(&curves).map_err(|e| e.to_string())?;
    let report = analyze_curve(&mean, None, &opts).map_err(|e| e.to_string())?;
    let a = report.fit.alpha;
    let secs = start.elapsed().as_secs_f64();
    ensure((0.9..=1.1).contains(&a), format!("ensemble alpha {a}"))?;
    ensure(report.regime == Regime::Diffusive, format!("ensemble regime {}", report.regime))?;
    ensure(secs < 30.0, format!("took {secs:.2} s"))?;
    Ok(format!(
        "ensemble alpha {a:.4}, per-seed [{:.4}, {:.4}], {secs:.2} s",
        range.0, range.1
    ))
}

fn ballistic() -> Check {
    let spec = SyntheticSpec {
        kind: SyntheticKind::Ballistic { velocity: vec![0.3, -1.2, 0.5, 2.0] },
        dims: 4,
        steps: 1000,
        seed: 0,
    };
    let t = generate(&spec).map_err(|e| e.to_string())?;
    let curve = msd(&t);
    let report = analyze_curve(&curve, None, &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    let a = report.fit.alpha;
    ensure((a - 2.0).abs() <= 1e-6, format!("alpha {a}"))?;
    ensure(report.regime == Regime::Ballistic, format!("regime {}", report.regime))?;
    Ok(format!("alpha {a:.9}"))
}

fn ou_confinement() -> Check {
    let spec = |seed| SyntheticSpec {
        kind: SyntheticKind::OuConfined { theta: 0.05, sigma: 1.0 },
        dims: 8,
        steps: 20_000,
        seed,
    };
    let curves: Vec<MsdCurve> = (0..20).map(|s| msd_to(&generate(&spec(s)).unwrap(), 1000)).collect();
    let mean = MsdCurve::ensemble_mean(&curves).map_err(|e| e.to_string())?;
    let expected = expected_msd(&spec(0), &mean.delays()[..100]).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (got, want) in mean.values()[..100].iter().zip(&expected) {
        worst = worst.max((got / want - 1.0).abs());
    }
    ensure(worst <= 0.1, format!("max relative deviation {worst:.3} for delay <= 100"))?;

    let opts = AnalysisOptions {
        window: Some((1, 1000)),
        ..AnalysisOptions::default()
    };
    let report = analyze_curve(&mean, None, &opts).map_err(|e| e.to_string())?;
    let level = report.plateau_level.ok_or("no plateau detected")?;
    ensure(report.regime == Regime::Confined, format!("regime {}", report.regime))?;
    let late = report.segments.last().ok_or("no segments")?;
    ensure(late.alpha < 0.2, format!("late segment alpha {}", late.alpha))?;
    Ok(format!(
        "max deviation {:.1}% (delay <= 100), plateau {level:.3} (2Dσ² = 16), late segment {:?} alpha {:.3}",
        100.0 * worst,
        late.window,
        late.alpha
    ))
}

fn levy_tail() -> Check {
    let spec = SyntheticSpec {
        kind: SyntheticKind::Levy { mu: 1.5, x_min: 1.0 },
        dims: 3,
        steps: 100_000,
        seed: 31,
    };
    let lengths = step_lengths(&generate(&spec).map_err(|e| e.to_string())?);
    let pareto = tail_exponent(&lengths, 0.1).map_err(|e| e.to_string())?;
    ensure((1.2..=1.8).contains(&pareto), format!("Pareto estimate {pareto}"))?;

    let mut rng = SimRng::new(32);
    let expo: Vec<f64> = (0..100_000).map(|_| -rng.uniform_open_closed().ln()).collect();
    let control = tail_exponent(&expo, 0.1).map_err(|e| e.to_string())?;
    ensure(control > 3.0, format!("exponential control estimate {control}"))?;
    Ok(format!("Pareto mu=1.5 -> {pareto:.3}, exponential -> {control:.3}"))
}

/// Three tight vectors around e1, six outsiders 40° off along ±e2, ±e3,
/// ±e4 and one 70° off between e2 and e3.
fn clique_set() -> EmbeddingSet {
    let mut rows = vec![
        vec![1.0, 0.01, 0.0, 0.0],
        vec![1.0, 0.0, 0.01, 0.0],
        vec![1.0, 0.0, 0.0, 0.01],
    ];
    let tilt = |deg: f64, u: [f64; 3]| {
        let (c, s) = (deg.to_radians().cos(), deg.to_radians().sin());
        vec![c, s * u[0], s * u[1], s * u[2]]
    };
    for u in [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ] {
        rows.push(tilt(40.0, u));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    rows.push(tilt(70.0, [h, h, 0.0]));
    let tokens = (0..3).map(|i| format!("k{i}")).chain((0..7).map(|i| format!("o{i}"))).collect();
    EmbeddingSet::from_rows(tokens, rows).unwrap()
}

fn gaussian_set(n: usize, d: usize, seed: u64) -> EmbeddingSet {
    let mut rng = SimRng::new(seed);
    let tokens = (0..n).map(|i| format!("w{i}")).collect();
    let matrix = (0..n * d).map(|_| rng.standard_normal()).collect();
    EmbeddingSet::new(tokens, matrix, d).unwrap()
}

fn cli_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn walk_determinism_and_closure() -> Check {
    // library: identical walks and identical serialized bytes
    let set = gaussian_set(300, 12, 5);
    let p = WalkParams::new(set.lookup("w7").map_err(|e| e.to_string())?, 8, 400, 99);
    let json = |w| {
        let mut buf = Vec::new();
        write_walk_json(&w, true, &mut buf).unwrap();
        buf
    };
    let a = json(free_walk(&set, &p).map_err(|e| e.to_string())?);
    let b = json(free_walk(&set, &p).map_err(|e| e.to_string())?);
    ensure(a == b, "repeated free walk differs")?;

    // CLI: an ensemble under --jobs 1 and --jobs 4 writes identical files
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let emb = tmp.path().join("set.semb");
    write_canonical_file(&set, &emb).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let out = tmp.path().join(format!("jobs{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_semrheo"))
            .args(["walk", "--start", "w3", "--top-n", "6", "--steps", "300", "--seed", "11"])
            .args(["--ensemble", "8", "--jobs", jobs])
            .arg("--embeddings")
            .arg(&emb)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), format!("CLI failed: {}", String::from_utf8_lossy(&status.stderr)))?;
        outputs.push(cli_outputs(&out));
    }
    ensure(outputs[0].len() == 8 * 6 + 2, format!("{} output files", outputs[0].len()))?;
    ensure(outputs[0] == outputs[1], "--jobs 1 and --jobs 4 outputs differ")?;

    // closure: every walk that enters the clique stays and is reported absorbed
    let set = clique_set();
    let mut walks = 0;
    for seed in 0..20 {
        for start in 3..10 {
            let p = WalkParams::new(set.token_ref(start).unwrap(), 3, 200, seed).with_self_exclusion(false);
            let w = free_walk(&set, &p).map_err(|e| e.to_string())?;
            let path = w.path_indices();
            let entry = path.iter().position(|&i| i < 3).ok_or("walk never reached the clique")?;
            ensure(path[entry..].iter().all(|&i| i < 3), format!("seed {seed} start {start} left the clique"))?;
            let report = detect_absorption(&w, 20, 3).map_err(|e| e.to_string())?;
            ensure(report.absorbed, format!("seed {seed} start {start} not reported absorbed"))?;
            // the onset can precede entry by a few steps, so outsiders seen
            // just before entry may join the cluster, but never after it
            let onset = report.onset_step.ok_or("absorbed without onset")?;
            ensure(onset <= entry, format!("seed {seed} start {start}: onset {onset} after entry {entry}"))?;
            let cluster: Vec<usize> = report.cluster.iter().map(|r| r.index).collect();
            ensure(
                path[entry..].iter().all(|i| cluster.contains(i))
                    && cluster.iter().all(|&c| c < 3 || !path[entry..].contains(&c)),
                format!("seed {seed} start {start}: cluster {cluster:?}"),
            )?;
            walks += 1;
        }
    }
    Ok(format!("{walks} clique walks absorbed; CLI ensemble identical for --jobs 1 and 4"))
}

fn guided_ordering() -> Check {
    let set = gaussian_set(500, 32, 2024);
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    let (mut guided_sum, mut free_sum) = (0.0, 0.0);
    for seed in 0..50u64 {
        let mut rng = SimRng::new(1000 + seed);
        let mut pick = Vec::new();
        while pick.len() < 3 {
            let i = rng.uniform_index(set.len());
            if !pick.contains(&i) {
                pick.push(i);
            }
        }
        let start = set.token_ref(pick[0]).unwrap();
        let free = WalkParams::new(start, 5, 200, seed);
        let guided = free
            .clone()
            .with_guides(vec![set.token_ref(pick[1]).unwrap(), set.token_ref(pick[2]).unwrap()]);
        let f = free_walk(&set, &free).map_err(|e| e.to_string())?;
        let g = guided_walk(&set, &guided).map_err(|e| e.to_string())?;
        let origin = set.row(pick[0]);
        free_sum += sq(set.row(f.path.last().unwrap().index), origin);
        guided_sum += sq(set.row(g.path.last().unwrap().index), origin);
    }
    let (g, f) = (guided_sum / 50.0, free_sum / 50.0);
    ensure(g <= f, format!("guided {g:.3} > free {f:.3}"))?;
    Ok(format!("mean final squared displacement guided {g:.3} <= free {f:.3}"))
}

fn format_round_trips() -> Check {
    let mut rng = SimRng::new(77);
    let tokens = (0..40).map(|i| format!("tok{i}")).collect();
    let matrix = (0..40 * 9).map(|_| rng.standard_normal() as f32 as f64).collect();
    let set = EmbeddingSet::new(tokens, matrix, 9).unwrap();
    let mut buf = Vec::new();
    save_canonical(&set, &mut buf).map_err(|e| e.to_string())?;
    let back = load_canonical(buf.as_slice()).map_err(|e| e.to_string())?;
    ensure(back == set, "canonical round trip differs")?;
    let mut again = Vec::new();
    save_canonical(&back, &mut again).map_err(|e| e.to_string())?;
    ensure(again == buf, "canonical re-save differs")?;

    let w2v = load_word2vec_text("2 3\nking 0.5 -1 2\nqueen 1e-3 0 -0.25\n".as_bytes())
        .map_err(|e| e.to_string())?;
    ensure(w2v.row(w2v.index_of("king").unwrap()) == [0.5, -1.0, 2.0], "word2vec king")?;
    ensure(w2v.row(1) == [0.001, 0.0, -0.25], "word2vec queen")?;
    let glove = load_glove_text("the 0.1 0.2\n, -3 4.5\n".as_bytes(), 2).map_err(|e| e.to_string())?;
    ensure(glove.row(0) == [0.1, 0.2] && glove.row(1) == [-3.0, 4.5], "glove rows")?;
    ensure(glove.token(1) == ",", "glove punctuation token")?;
    Ok(format!("canonical {} bytes bit-exact; text loaders match hand values", buf.len()))
}

fn document_shape() -> Check {
    let text = fs::read_to_string(data_dir().join("moby_dick_1-55.txt")).map_err(|e| e.to_string())?;
    let vectors = File::open(data_dir().join("moby_dick_vectors.txt")).map_err(|e| e.to_string())?;
    let words = load_glove_text(BufReader::new(vectors), 32).map_err(|e| e.to_string())?;
    let seq = split_sentences(&text, SplitMode::NaivePunct, "moby-dick").map_err(|e| e.to_string())?;
    ensure(seq.len() >= 3000, format!("only {} sentences", seq.len()))?;
    let doc = embed_sentences_avg(&seq, &words).map_err(|e| e.to_string())?;
    let (report, curve) =
        analyze_document(&doc.trajectory, &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.segments.len() == 3, format!("{} segments", report.segments.len()))?;
    let (a1, a2) = (report.segments[0].alpha, report.segments[1].alpha);
    ensure(a1 > 0.0, format!("phase-I slope {a1} is not rising"))?;
    ensure(a1 > a2, format!("phase-I slope {a1} <= phase-II slope {a2}"))?;

    // rising over the first decade: net increase, and no step down larger
    // than the standard error of the MSD estimate at that delay
    let t = &doc.trajectory;
    let std_err = |n: usize| {
        let sq: Vec<f64> = (0..t.len() - n)
            .map(|i| t.point(i + n).iter().zip(t.point(i)).map(|(a, b)| (a - b).powi(2)).sum())
            .collect();
        let m = sq.iter().sum::<f64>() / sq.len() as f64;
        let var = sq.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (sq.len() - 1) as f64;
        (var / sq.len() as f64).sqrt()
    };
    let v = curve.values();
    ensure(v[9] > v[0], "MSD(10) <= MSD(1)")?;
    let mut largest_dip = 0.0f64;
    for n in 1..10 {
        let drop = v[n - 1] - v[n];
        let se = std_err(n + 1);
        ensure(drop <= se, format!("MSD falls {drop:.2e} from delay {n} to {} (s.e. {se:.2e})", n + 1))?;
        largest_dip = largest_dip.max(drop / se);
    }
    Ok(format!(
        "{} sentences ({} dropped), MSD(10)/MSD(1) = {:.3}, largest dip {:.2} s.e., segment alphas {:.4} > {:.4} (third {:.4})",
        seq.len(),
        doc.dropped.len(),
        v[9] / v[0],
        largest_dip,
        a1,
        a2,
        report.segments[2].alpha
    ))
}

fn main() {
    let checks: &[Criterion] = &[
        ("MSD oracle equivalence", msd_oracle),
        ("exponent recovery, noiseless", exponent_recovery),
        ("Brownian", brownian),
        ("ballistic", ballistic),
        ("OU confinement", ou_confinement),
        ("Levy tail", levy_tail),
        ("walk determinism & closure", walk_determinism_and_closure),
        ("guided confinement ordering", guided_ordering),
        ("format round trips", format_round_trips),
        ("document pipeline shape", document_shape),
    ];
    let mut failed = 0;
    for &(name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
