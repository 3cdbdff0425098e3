//! Files produced outside this crate: canonical bytes assembled by hand the
//! way an external exporter writes them, ordinal sentence files, and text
//! vector files pushed through the whole pipeline.

use semrheo_core::document::{analyze_document, load_sentence_embeddings};
use semrheo_core::embedding::{load_canonical, load_word2vec_text, save_canonical};
use semrheo_core::msd::{msd, AnalysisOptions};
use semrheo_core::similarity::top_k;
use semrheo_core::walker::{free_walk, WalkParams};
use semrheo_core::Error;

/// Canonical bytes written field by field, independent of `save_canonical`.
fn exporter_bytes(tokens: &[&str], rows: &[Vec<f32>], normalized: bool) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(b"SEMB");
    b.extend_from_slice(&1u32.to_le_bytes());
    b.extend_from_slice(&(normalized as u32).to_le_bytes());
    b.extend_from_slice(&(tokens.len() as u64).to_le_bytes());
    b.extend_from_slice(&(rows[0].len() as u32).to_le_bytes());
    for t in tokens {
        b.extend_from_slice(&(t.len() as u32).to_le_bytes());
        b.extend_from_slice(t.as_bytes());
    }
    for r in rows {
        for x in r {
            b.extend_from_slice(&x.to_le_bytes());
        }
    }
    b
}

#[test]
fn exporter_word_file_loads_and_resaves_identically() {
    let rows: Vec<Vec<f32>> = (0..100)
        .map(|i| (0..8).map(|k| ((i * 8 + k) as f32 * 0.37).sin()).collect())
        .collect();
    let names: Vec<String> = (0..100).map(|i| format!("w{i}")).collect();
    let tokens: Vec<&str> = names.iter().map(String::as_str).collect();
    let bytes = exporter_bytes(&tokens, &rows, false);
    let set = load_canonical(bytes.as_slice()).unwrap();
    assert_eq!(set.len(), 100);
    assert_eq!(set.dim(), 8);
    for (i, r) in rows.iter().enumerate() {
        let want: Vec<f64> = r.iter().map(|&x| x as f64).collect();
        assert_eq!(set.row(i), want.as_slice());
    }
    let mut again = Vec::new();
    save_canonical(&set, &mut again).unwrap();
    assert_eq!(again, bytes);
}

#[test]
fn single_token_export_has_no_candidates() {
    let bytes = exporter_bytes(&["solo"], &[vec![0.6, 0.8]], true);
    let set = load_canonical(bytes.as_slice()).unwrap();
    assert!(set.is_normalized());
    assert!(matches!(top_k(&set, set.row(0), 5, &[0]), Err(Error::EmptyPool)));
    let p = WalkParams::new(set.lookup("solo").unwrap(), 5, 10, 0);
    assert!(matches!(free_walk(&set, &p), Err(Error::EmptyPool)));
}

#[test]
fn normalized_flag_on_non_unit_rows_is_rejected() {
    let bytes = exporter_bytes(&["a", "b"], &[vec![1.0, 1.0], vec![0.0, 1.0]], true);
    assert!(load_canonical(bytes.as_slice()).is_err());
}

#[test]
fn sentence_export_drives_document_analysis() {
    let n = 50;
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|i| {
            let t = i as f32;
            vec![t.sqrt(), (t * 0.2).cos(), (t * 0.05).sin()]
        })
        .collect();
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let tokens: Vec<&str> = names.iter().map(String::as_str).collect();
    let traj = load_sentence_embeddings(exporter_bytes(&tokens, &rows, false).as_slice()).unwrap();
    assert_eq!(traj.len(), n);
    for (i, r) in rows.iter().enumerate() {
        let want: Vec<f64> = r.iter().map(|&x| x as f64).collect();
        assert_eq!(traj.point(i), want.as_slice());
    }
    let (_, curve) = analyze_document(&traj, &AnalysisOptions::default()).unwrap();
    assert_eq!(curve.len(), n - 1);
    assert_eq!(curve, msd(&traj));
}

#[test]
fn shuffled_ordinals_are_reordered() {
    let bytes = exporter_bytes(&["1", "2", "0"], &[vec![1.0], vec![2.0], vec![0.0]], false);
    let traj = load_sentence_embeddings(bytes.as_slice()).unwrap();
    assert_eq!(traj.to_rows(), vec![vec![0.0], vec![1.0], vec![2.0]]);

    let bytes = exporter_bytes(&["0", "2"], &[vec![1.0], vec![2.0]], false);
    assert!(matches!(load_sentence_embeddings(bytes.as_slice()), Err(Error::Format { .. })));
}

#[test]
fn text_file_to_walk_to_msd() {
    let mut text = String::from("30 4\n");
    for i in 0..30 {
        let a = i as f64 * 0.21;
        text.push_str(&format!("t{i} {} {} {} {}\n", a.cos(), a.sin(), (2.0 * a).cos(), 0.1 * i as f64));
    }
    let set = load_word2vec_text(text.as_bytes()).unwrap();
    let p = WalkParams::new(set.lookup("t0").unwrap(), 4, 120, 17);
    let walk = free_walk(&set, &p).unwrap();
    let traj = walk.trajectory(&set).unwrap();
    let curve = msd(&traj);
    assert_eq!(curve.len(), 120);
    assert!(curve.values().iter().all(|v| v.is_finite() && *v >= 0.0));
}
