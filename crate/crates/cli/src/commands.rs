use std::fs::{self, File};
use std::io::{BufReader, Write};

use rayon::prelude::*;
use serde::Serialize;

use semrheo_core::document::{
    analyze_document, embed_sentences_avg, load_sentence_embeddings, split_sentences,
};
use semrheo_core::embedding::{
    l2_normalize, load_glove_text, load_word2vec_text, read_canonical_file, write_canonical_file,
};
use semrheo_core::msd::{analyze, analyze_curve, MsdCurve};
use semrheo_core::synthetic::{expected_msd, generate, SyntheticKind, SyntheticSpec};
use semrheo_core::walker::{
    detect_absorption, run_ensemble, write_path_csv, write_walk_json, WalkParams,
};
use semrheo_core::{EmbeddingSet, Error, Result};

use crate::output::OutDir;
use crate::{ConvertArgs, DocArgs, KindArg, SimulateArgs, TextFormat, WalkArgs};

pub fn convert(a: &ConvertArgs) -> Result<()> {
    let reader = BufReader::new(File::open(&a.input)?);
    let set = match a.format {
        TextFormat::Word2vec => load_word2vec_text(reader)?,
        TextFormat::Glove => {
            let dims = a
                .dims
                .ok_or_else(|| Error::InvalidParam("--dims is required for glove input".into()))?;
            load_glove_text(reader, dims)?
        }
    };
    write_canonical_file(&set, &a.output)?;
    println!("{} {}", set.len(), set.dim());
    Ok(())
}

fn load_embeddings(path: &std::path::Path, normalize: bool) -> Result<EmbeddingSet> {
    let set = read_canonical_file(path)?;
    if normalize {
        l2_normalize(&set)
    } else {
        Ok(set)
    }
}

pub fn walk(a: &WalkArgs, guides: &[String]) -> Result<()> {
    let set = load_embeddings(&a.embeddings, a.normalize)?;
    let start = set.lookup(&a.start)?;
    let guides = guides.iter().map(|g| set.lookup(g)).collect::<Result<Vec<_>>>()?;
    let params = WalkParams::new(start, a.top_n, a.steps, a.seed)
        .with_guides(guides)
        .with_self_exclusion(!a.allow_self);
    params.validate(&set)?;
    if a.ensemble == 0 {
        return Err(Error::InvalidParam("ensemble must be at least 1".into()));
    }
    let window = a.absorption_window.unwrap_or(50.min(a.steps));
    let opts = a.analysis.options();
    let jobs = a.jobs.unwrap_or_else(rayon::current_num_threads);

    let walks = run_ensemble(&set, &params, a.ensemble, jobs)?;
    let analyses = walks
        .par_iter()
        .map(|w| {
            let traj = w.trajectory(&set)?;
            let (report, curve) = analyze(&traj, &opts)?;
            let absorption = detect_absorption(w, window, a.distinct_threshold)?;
            Ok((traj, report, curve, absorption))
        })
        .collect::<Result<Vec<_>>>()?;

    let out = OutDir::create(&a.out)?;
    for (i, (w, (traj, report, curve, absorption))) in walks.iter().zip(&analyses).enumerate() {
        let sfx = if a.ensemble == 1 { String::new() } else { format!("_{i:03}") };
        out.write_with(&format!("walk{sfx}.json"), |f| write_walk_json(w, !a.no_candidates, f))?;
        out.write_with(&format!("walk{sfx}.csv"), |f| write_path_csv(w, f))?;
        out.write_with(&format!("msd{sfx}.csv"), |f| curve.write_csv(f))?;
        out.write_json(&format!("report{sfx}.json"), report)?;
        out.write_json(&format!("absorption{sfx}.json"), absorption)?;
        out.write_projection(traj, &sfx)?;
        println!(
            "walk {i} seed {}: regime {} alpha {:.4} absorbed {}",
            w.params.seed, report.regime, report.fit.alpha, absorption.absorbed
        );
    }
    if a.ensemble > 1 {
        let curves: Vec<MsdCurve> = analyses.into_iter().map(|(_, _, c, _)| c).collect();
        let mean = MsdCurve::ensemble_mean(&curves)?;
        out.write_with("msd_mean.csv", |f| mean.write_csv(f))?;
        let report = analyze_curve(&mean, None, &opts)?;
        out.write_json("report_mean.json", &report)?;
        println!("ensemble mean: regime {} alpha {:.4}", report.regime, report.fit.alpha);
    }
    Ok(())
}

#[derive(Serialize)]
struct SentenceSummary {
    source: String,
    n_split: usize,
    used: Vec<usize>,
    dropped: Vec<usize>,
}

pub fn doc(a: &DocArgs) -> Result<()> {
    let (traj, summary) = match (&a.sentences, &a.text, &a.embeddings) {
        (Some(path), _, _) => {
            let traj = load_sentence_embeddings(BufReader::new(File::open(path)?))?;
            let n = traj.len();
            let summary = SentenceSummary {
                source: path.display().to_string(),
                n_split: n,
                used: (0..n).collect(),
                dropped: Vec::new(),
            };
            (traj, summary)
        }
        (None, Some(text_path), Some(emb_path)) => {
            let text = fs::read_to_string(text_path)?;
            let source = text_path.display().to_string();
            let seq = split_sentences(&text, a.split.into(), &source)?;
            let words = load_embeddings(emb_path, a.normalize)?;
            let doc = embed_sentences_avg(&seq, &words)?;
            let summary = SentenceSummary {
                source,
                n_split: seq.len(),
                used: doc.used,
                dropped: doc.dropped,
            };
            (doc.trajectory, summary)
        }
        _ => {
            return Err(Error::InvalidParam(
                "give either --sentences or both --text and --embeddings".into(),
            ))
        }
    };
    let (report, curve) = analyze_document(&traj, &a.analysis.options())?;

    let out = OutDir::create(&a.out)?;
    out.write_with("msd.csv", |f| curve.write_csv(f))?;
    out.write_json("report.json", &report)?;
    out.write_projection(&traj, "")?;
    out.write_json("sentences.json", &summary)?;
    println!(
        "{} sentences ({} dropped): regime {} alpha {:.4}, {} segments",
        summary.n_split,
        summary.dropped.len(),
        report.regime,
        report.fit.alpha,
        report.segments.len()
    );
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let kind = match a.kind {
        KindArg::Brownian => SyntheticKind::Brownian { step_std: a.step_std },
        KindArg::Ballistic => SyntheticKind::Ballistic {
            velocity: a.velocity.clone().unwrap_or_else(|| vec![1.0; a.dims]),
        },
        KindArg::Ou => SyntheticKind::OuConfined {
            theta: a.theta,
            sigma: a.sigma,
        },
        KindArg::Levy => SyntheticKind::Levy {
            mu: a.mu,
            x_min: a.x_min,
        },
    };
    let spec = SyntheticSpec {
        kind,
        dims: a.dims,
        steps: a.steps,
        seed: a.seed,
    };
    let traj = generate(&spec)?;
    let (report, curve) = analyze(&traj, &a.analysis.options())?;
    let expected = match expected_msd(&spec, curve.delays()) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };

    let out = OutDir::create(&a.out)?;
    out.write_with("trajectory.csv", |f| traj.write_csv(f))?;
    out.write_with("msd.csv", |f| curve.write_csv(f))?;
    if let Some(values) = expected {
        out.write_with("expected_msd.csv", |f| {
            writeln!(f, "delay,msd")?;
            for (d, v) in curve.delays().iter().zip(values) {
                writeln!(f, "{d},{v}")?;
            }
            Ok(())
        })?;
    }
    out.write_json("report.json", &report)?;
    println!("regime {} alpha {:.4}", report.regime, report.fit.alpha);
    Ok(())
}
