//! TREC qrels and run interchange, plus the benchmark's corpus/query files.
//!
//! Formats:
//! * qrels:   `<query_id> 0 <doc_id> <grade>`, sorted by query then doc.
//! * run:     `<query_id> Q0 <doc_id> <rank> <score:.6> <tag>`.
//! * docs:    `<id>\t<space-joined term ids>` with a latent sidecar
//!            `<id>\t<comma-joined decimals, 9 significant digits>`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rankscale_core::bm25::{RankedRun, RunEntry};
use rankscale_core::synth::{Qrels, SynthDoc, SynthQuery, MAX_GRADE};

use crate::error::Error;
use crate::{format_sig9, Result};

fn open_reader(path: &Path) -> Result<BufReader<fs::File>> {
    Ok(BufReader::new(fs::File::open(path).map_err(|e| {
        Error::io(format!("opening {}", path.display()), e)
    })?))
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

// ── qrels ───────────────────────────────────────────────────────────────

/// Write qrels in TREC format, sorted by query id then doc id.
pub fn write_qrels(qrels: &Qrels, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    for (qid, did, grade) in qrels.iter() {
        writeln!(f, "{qid} 0 {did} {grade}")
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    Ok(())
}

/// Read TREC qrels. Rejects malformed lines (with their line number),
/// grades outside 0..=3, duplicate pairs, and queries without a positive.
pub fn read_qrels(path: &Path) -> Result<Qrels> {
    let reader = open_reader(path)?;
    let mut qrels = Qrels::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 4 fields `<query> 0 <doc> <grade>`, got {}", fields.len()),
            ));
        }
        let grade: u8 = fields[3].parse().map_err(|_| {
            Error::parse(path, lineno, format!("grade {:?} is not an integer in 0..=3", fields[3]))
        })?;
        if grade > MAX_GRADE {
            return Err(Error::parse(
                path,
                lineno,
                format!("grade {grade} out of range 0..={MAX_GRADE}"),
            ));
        }
        if qrels.judged(fields[0]).any(|(d, _)| d == fields[2]) {
            return Err(Error::parse(
                path,
                lineno,
                format!("duplicate judgment for ({}, {})", fields[0], fields[2]),
            ));
        }
        qrels.insert(fields[0], fields[2], grade)?;
    }
    qrels.validate()?;
    Ok(qrels)
}

// ── runs ────────────────────────────────────────────────────────────────

/// Write runs in TREC format with 6-decimal scores.
pub fn write_runs(runs: &[RankedRun], path: &Path, tag: &str) -> Result<()> {
    let mut f = create(path)?;
    for run in runs {
        for e in run.entries() {
            writeln!(f, "{} Q0 {} {} {:.6} {tag}", run.query_id, e.doc_id, e.rank, e.score)
                .map_err(|err| Error::io(format!("writing {}", path.display()), err))?;
        }
    }
    Ok(())
}

/// Read a TREC run file. Entries of one query must be contiguous and in
/// rank order; ranks must be consecutive from 1 and scores non-increasing.
pub fn read_runs(path: &Path) -> Result<Vec<RankedRun>> {
    let reader = open_reader(path)?;
    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Vec<RunEntry>> = BTreeMap::new();
    let mut last_query: Option<String> = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                lineno,
                format!(
                    "expected 6 fields `<query> Q0 <doc> <rank> <score> <tag>`, got {}",
                    fields.len()
                ),
            ));
        }
        if fields[1] != "Q0" {
            return Err(Error::parse(path, lineno, format!("expected literal Q0, got {:?}", fields[1])));
        }
        let rank: u32 = fields[3]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("rank {:?} is not an integer", fields[3])))?;
        let score: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("score {:?} is not a number", fields[4])))?;
        let qid = fields[0].to_string();
        if last_query.as_deref() != Some(&qid) {
            if grouped.contains_key(&qid) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("entries for query {qid} are not contiguous"),
                ));
            }
            order.push(qid.clone());
            last_query = Some(qid.clone());
        }
        grouped.entry(qid).or_default().push(RunEntry {
            doc_id: fields[2].to_string(),
            score,
            rank,
        });
    }
    let mut runs = Vec::with_capacity(order.len());
    for qid in order {
        let entries = grouped.remove(&qid).expect("grouped by construction");
        let run = RankedRun::new(qid, entries)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        runs.push(run);
    }
    Ok(runs)
}

// ── corpus / queries ────────────────────────────────────────────────────

fn write_records<'a>(
    path: &Path,
    latents_path: &Path,
    records: impl Iterator<Item = (&'a str, &'a [u32], &'a [f64])>,
) -> Result<()> {
    let mut tokens_f = create(path)?;
    let mut latents_f = create(latents_path)?;
    for (id, tokens, latent) in records {
        let toks: Vec<String> = tokens.iter().map(u32::to_string).collect();
        writeln!(tokens_f, "{id}\t{}", toks.join(" "))
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        let vals: Vec<String> = latent.iter().map(|v| format_sig9(*v)).collect();
        writeln!(latents_f, "{id}\t{}", vals.join(","))
            .map_err(|e| Error::io(format!("writing {}", latents_path.display()), e))?;
    }
    Ok(())
}

/// Write the corpus token file and its latent sidecar.
pub fn write_corpus(corpus: &[SynthDoc], path: &Path, latents_path: &Path) -> Result<()> {
    write_records(
        path,
        latents_path,
        corpus.iter().map(|d| (d.doc_id.as_str(), d.tokens.as_slice(), d.latent.as_slice())),
    )
}

/// Write the query token file and its latent sidecar.
pub fn write_queries(queries: &[SynthQuery], path: &Path, latents_path: &Path) -> Result<()> {
    write_records(
        path,
        latents_path,
        queries.iter().map(|q| (q.query_id.as_str(), q.tokens.as_slice(), q.latent.as_slice())),
    )
}

fn read_records(path: &Path, latents_path: &Path) -> Result<Vec<(String, Vec<u32>, Vec<f64>)>> {
    let reader = open_reader(path)?;
    let mut tokens: Vec<(String, Vec<u32>)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, rest)) = line.split_once('\t') else {
            return Err(Error::parse(path, lineno, "expected `<id>\\t<term ids>`"));
        };
        let toks = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::parse(path, lineno, format!("term id {t:?} is not an integer")))
            })
            .collect::<Result<Vec<u32>>>()?;
        if toks.is_empty() {
            return Err(Error::parse(path, lineno, "empty token list"));
        }
        tokens.push((id.to_string(), toks));
    }

    let reader = open_reader(latents_path)?;
    let mut latents: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", latents_path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, rest)) = line.split_once('\t') else {
            return Err(Error::parse(latents_path, lineno, "expected `<id>\\t<decimals>`"));
        };
        let vals = rest
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(latents_path, lineno, format!("latent value {v:?} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        latents.insert(id.to_string(), vals);
    }

    tokens
        .into_iter()
        .map(|(id, toks)| {
            let latent = latents.remove(&id).ok_or_else(|| {
                Error::Validation(format!("{}: no latent for id {id}", latents_path.display()))
            })?;
            Ok((id, toks, latent))
        })
        .collect()
}

pub fn read_corpus(path: &Path, latents_path: &Path) -> Result<Vec<SynthDoc>> {
    Ok(read_records(path, latents_path)?
        .into_iter()
        .map(|(doc_id, tokens, latent)| SynthDoc { doc_id, tokens, latent })
        .collect())
}

pub fn read_queries(path: &Path, latents_path: &Path) -> Result<Vec<SynthQuery>> {
    Ok(read_records(path, latents_path)?
        .into_iter()
        .map(|(query_id, tokens, latent)| SynthQuery { query_id, tokens, latent })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    #[test]
    fn qrels_line_parses() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("q.txt");
        std::fs::write(&path, "q1 0 d7 2\nq1 0 d8 0\n").unwrap();
        let qrels = read_qrels(&path).unwrap();
        assert_eq!(qrels.grade_of("q1", "d7"), 2);
        assert_eq!(qrels.grade_of("q1", "d8"), 0);
    }

    #[test]
    fn qrels_round_trip() {
        let mut qrels = Qrels::new();
        qrels.insert("q2", "d1", 3).unwrap();
        qrels.insert("q1", "d2", 1).unwrap();
        qrels.insert("q1", "d1", 0).unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("q.txt");
        write_qrels(&qrels, &path).unwrap();
        let back = read_qrels(&path).unwrap();
        assert_eq!(qrels, back);
        // Sorted output.
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "q1 0 d1 0\nq1 0 d2 1\nq2 0 d1 3\n");
    }

    #[test]
    fn qrels_bad_grade_reports_line() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("q.txt");
        std::fs::write(&path, "q1 0 d1 1\nq1 0 d2 5\n").unwrap();
        match read_qrels(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn run_line_parses() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("r.txt");
        std::fs::write(&path, "q1 Q0 d3 1 2.500000 toy\n").unwrap();
        let runs = read_runs(&path).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].entries()[0].doc_id, "d3");
        assert_eq!(runs[0].entries()[0].score, 2.5);
        assert_eq!(runs[0].entries()[0].rank, 1);
    }

    #[test]
    fn run_round_trip_preserves_six_decimals() {
        let entries = vec![
            RunEntry { doc_id: "a".into(), score: 1.234567, rank: 1 },
            RunEntry { doc_id: "b".into(), score: 0.000012, rank: 2 },
        ];
        let runs = vec![RankedRun::new("q1".into(), entries).unwrap()];
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("r.txt");
        write_runs(&runs, &path, "toy").unwrap();
        let back = read_runs(&path).unwrap();
        assert_eq!(runs, back);
        write_runs(&back, dir.path().join("r2.txt").as_path(), "toy").unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(dir.path().join("r2.txt")).unwrap()
        );
    }

    #[test]
    fn run_rank_gap_is_rejected() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("r.txt");
        std::fs::write(&path, "q1 Q0 d1 1 2.0 t\nq1 Q0 d2 3 1.0 t\n").unwrap();
        match read_runs(&path) {
            Err(Error::Validation(msg)) => assert!(msg.contains("q1"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn run_score_inversion_is_rejected() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("r.txt");
        std::fs::write(&path, "q1 Q0 d1 1 1.0 t\nq1 Q0 d2 2 2.0 t\n").unwrap();
        assert!(matches!(read_runs(&path), Err(Error::Validation(_))));
    }

    #[test]
    fn corpus_round_trip() {
        let corpus = vec![
            SynthDoc { doc_id: "d0".into(), tokens: vec![4, 4, 9], latent: vec![0.6, -0.8] },
            SynthDoc { doc_id: "d1".into(), tokens: vec![1], latent: vec![1.0, 0.0] },
        ];
        let dir = TempDir::new().unwrap();
        let toks = dir.path().join("c.tsv");
        let lats = dir.path().join("c_latents.tsv");
        write_corpus(&corpus, &toks, &lats).unwrap();
        let back = read_corpus(&toks, &lats).unwrap();
        assert_eq!(corpus, back);
    }
}
