//! Pair files, bundle manifests and the JSON-lines export.
//!
//! Pair files hold `ANCHOR_AUI|OTHER_AUI|LABEL|SIMCLASS|JACC` lines. JACC is
//! written with six decimals and left empty for positives. The first line is
//! a `#` header that records the corpus hash.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DatasetBundle, GenConfig, Label, LabeledPair, Shortfall, SimClass};
use crate::corpus::{AtomContext, Corpus};
use crate::error::{Error, Result};
use crate::lexsim::{jaccard_sorted, normalize};

pub const PAIR_HEADER: &str = "# ANCHOR_AUI|OTHER_AUI|LABEL|SIMCLASS|JACC";

/// Extracts `corpus=<hash>` from a header comment line.
pub fn header_hash(line: &str) -> Option<String> {
    line.strip_prefix('#')?
        .split_whitespace()
        .find_map(|field| field.strip_prefix("corpus="))
        .map(str::to_string)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairRecord {
    pub anchor: String,
    pub other: String,
    pub label: Label,
    pub simclass: SimClass,
    pub jacc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairFile {
    pub corpus_hash: Option<String>,
    pub records: Vec<PairRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub positives: usize,
    pub negatives: usize,
    pub total: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub release: String,
    pub corpus_hash: String,
    pub config: GenConfig,
    pub files: BTreeMap<String, FileEntry>,
    pub shortfalls: BTreeMap<String, Shortfall>,
    pub uncovered_anchors: usize,
}

fn pair_line(corpus: &Corpus, p: &LabeledPair) -> String {
    format!(
        "{}|{}|{}|{}|{}",
        corpus.aui(p.anchor),
        corpus.aui(p.other),
        p.label.as_str(),
        p.simclass.as_str(),
        p.jacc.map(|j| j.to_string()).unwrap_or_default()
    )
}

/// Renders a pair file into memory; used for hashing and writing.
pub fn render_pair_file(corpus: &Corpus, pairs: &[LabeledPair]) -> String {
    let mut out = format!("{PAIR_HEADER} corpus={}\n", corpus.hash());
    for p in pairs {
        out.push_str(&pair_line(corpus, p));
        out.push('\n');
    }
    out
}

pub fn write_pair_file(path: &Path, corpus: &Corpus, pairs: &[LabeledPair]) -> Result<FileEntry> {
    let body = render_pair_file(corpus, pairs);
    std::fs::write(path, &body).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    let positives = pairs.iter().filter(|p| p.label.is_positive()).count();
    Ok(FileEntry {
        file: path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        positives,
        negatives: pairs.len() - positives,
        total: pairs.len(),
        sha256: hex::encode(Sha256::digest(body.as_bytes())),
    })
}

pub fn read_pair_file(path: &Path) -> Result<PairFile> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut corpus_hash = None;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let line_no = i + 1;
        if line.starts_with('#') {
            if corpus_hash.is_none() {
                corpus_hash = header_hash(&line);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('|').collect();
        if f.len() != 5 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 5 fields, found {}", f.len()),
            ));
        }
        let bad = |m: String| Error::parse(path, line_no, m);
        let jacc = if f[4].is_empty() {
            None
        } else {
            Some(f[4].parse::<f64>().map_err(|e| bad(format!("JACC: {e}")))?)
        };
        records.push(PairRecord {
            anchor: f[0].to_string(),
            other: f[1].to_string(),
            label: f[2].parse().map_err(|e: Error| bad(e.to_string()))?,
            simclass: f[3].parse().map_err(|e: Error| bad(e.to_string()))?,
            jacc,
        });
    }
    Ok(PairFile {
        corpus_hash,
        records,
    })
}

pub fn bundle_file_name(release: &str, name: &super::DatasetName) -> String {
    format!("{release}_{name}.psv")
}

/// Writes the eight pair files and `manifest.json` into `dir`.
pub fn write_bundle(
    bundle: &DatasetBundle,
    corpus: &Corpus,
    dir: &Path,
    release: &str,
) -> Result<Manifest> {
    crate::error::ensure_same_corpus(corpus.hash(), &bundle.corpus_hash)?;
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut files = BTreeMap::new();
    for (name, pairs) in bundle.iter() {
        let path = dir.join(bundle_file_name(release, &name));
        files.insert(name.to_string(), write_pair_file(&path, corpus, pairs)?);
    }
    let manifest = Manifest {
        release: release.to_string(),
        corpus_hash: bundle.corpus_hash.clone(),
        config: bundle.config.clone(),
        files,
        shortfalls: bundle
            .shortfalls
            .iter()
            .map(|(v, s)| (v.to_string(), *s))
            .collect(),
        uncovered_anchors: bundle.uncovered_anchors,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Validation(format!("serializing manifest: {e}")))?;
    std::fs::write(&path, json + "\n")
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(manifest)
}

/// Maps pair records back onto atoms of `corpus`, recomputing JACC for
/// negatives. Unknown AUIs are [`Error::NotFound`]; a label that disagrees
/// with CUI membership is a validation error.
pub fn resolve_records(corpus: &Corpus, records: &[PairRecord]) -> Result<Vec<LabeledPair>> {
    records
        .iter()
        .map(|r| {
            let anchor = corpus.atom_id(&r.anchor)?;
            let other = corpus.atom_id(&r.other)?;
            if corpus.same_concept(anchor, other) != r.label.is_positive() {
                return Err(Error::Validation(format!(
                    "pair {}|{} is labeled {} but CUI membership disagrees",
                    r.anchor,
                    r.other,
                    r.label.as_str()
                )));
            }
            let jacc = match r.label {
                Label::Pos => None,
                Label::Neg => Some(jaccard_sorted(
                    normalize(&corpus.atom(anchor).term).tokens(),
                    normalize(&corpus.atom(other).term).tokens(),
                )),
            };
            Ok(LabeledPair {
                anchor,
                other,
                label: r.label,
                simclass: r.simclass,
                jacc,
            })
        })
        .collect()
}

/// Re-reads every file listed in `manifest` from `dir` and checks its SHA-256.
pub fn verify_bundle(dir: &Path, manifest: &Manifest) -> Result<()> {
    for entry in manifest.files.values() {
        let path = dir.join(&entry.file);
        let bytes = std::fs::read(&path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let found = hex::encode(Sha256::digest(&bytes));
        if found != entry.sha256 {
            return Err(Error::Validation(format!(
                "{} does not match its manifest checksum",
                path.display()
            )));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonContext<'a> {
    scui: Option<&'a str>,
    sg: &'a [String],
    parents: &'a [String],
}

impl<'a> From<&'a AtomContext> for JsonContext<'a> {
    fn from(c: &'a AtomContext) -> Self {
        JsonContext {
            scui: c.scui.as_deref(),
            sg: &c.sg,
            parents: &c.parents,
        }
    }
}

#[derive(Serialize)]
struct JsonPair<'a> {
    anchor: &'a str,
    other: &'a str,
    anchor_str: &'a str,
    other_str: &'a str,
    label: u8,
    simclass: &'a str,
    anchor_context: JsonContext<'a>,
    other_context: JsonContext<'a>,
}

/// One JSON object per pair with both terms and their context ids.
pub fn write_pairs_jsonl(path: &Path, corpus: &Corpus, pairs: &[LabeledPair]) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    for p in pairs {
        let (a, b) = (corpus.atom(p.anchor), corpus.atom(p.other));
        let ca = corpus.atom_context(&a.aui)?;
        let cb = corpus.atom_context(&b.aui)?;
        let rec = JsonPair {
            anchor: &a.aui,
            other: &b.aui,
            anchor_str: &a.term,
            other_str: &b.term,
            label: u8::from(p.label.is_positive()),
            simclass: p.simclass.as_str(),
            anchor_context: (&ca).into(),
            other_context: (&cb).into(),
        };
        serde_json::to_writer(&mut w, &rec)
            .map_err(|e| Error::io(ctx(), std::io::Error::other(e)))?;
        w.write_all(b"\n").map_err(|e| Error::io(ctx(), e))?;
    }
    w.flush().map_err(|e| Error::io(ctx(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testing::corpus_of;
    use crate::corpus::AtomId;
    use crate::lexsim::JaccardScore;

    #[test]
    fn pair_file_round_trip() {
        let corpus = corpus_of(&[("A1", "x y", "C1"), ("A2", "y", "C1"), ("A3", "y z", "C2")]);
        let pairs = vec![
            LabeledPair {
                anchor: AtomId(0),
                other: AtomId(1),
                label: Label::Pos,
                simclass: SimClass::NotApplicable,
                jacc: None,
            },
            LabeledPair {
                anchor: AtomId(0),
                other: AtomId(2),
                label: Label::Neg,
                simclass: SimClass::Sim,
                jacc: Some(JaccardScore::new(1, 3)),
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.psv");
        let entry = write_pair_file(&path, &corpus, &pairs).unwrap();
        assert_eq!((entry.positives, entry.negatives, entry.total), (1, 1, 2));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("A1|A2|POS|NA|\n"));
        assert!(text.contains("A1|A3|NEG|SIM|0.333333\n"));
        let back = read_pair_file(&path).unwrap();
        assert_eq!(back.corpus_hash.as_deref(), Some(corpus.hash()));
        assert_eq!(back.records.len(), 2);
        assert_eq!(back.records[1].simclass, SimClass::Sim);

        std::fs::write(&path, "A1|A2|POS\n").unwrap();
        assert!(matches!(
            read_pair_file(&path),
            Err(Error::Parse { line: 1, .. })
        ));
        std::fs::write(&path, "A1|A2|MAYBE|NA|\n").unwrap();
        assert!(matches!(read_pair_file(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn jsonl_records() {
        let corpus = corpus_of(&[("A1", "x", "C1"), ("A2", "y", "C2")]);
        let pairs = [LabeledPair {
            anchor: AtomId(0),
            other: AtomId(1),
            label: Label::Neg,
            simclass: SimClass::NoSim,
            jacc: Some(JaccardScore::new(0, 2)),
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        write_pairs_jsonl(&path, &corpus, &pairs).unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(v["anchor"], "A1");
        assert_eq!(v["other_str"], "y");
        assert_eq!(v["label"], 0);
        assert_eq!(v["anchor_context"]["sg"][0], "G");
        assert!(v["anchor_context"]["scui"].is_null());
    }

    #[test]
    fn header_hash_parsing() {
        assert_eq!(header_hash("# X|Y corpus=abc").as_deref(), Some("abc"));
        assert_eq!(header_hash("# no hash"), None);
        assert_eq!(header_hash("A|B"), None);
    }

    #[test]
    fn resolve_records_recomputes_jaccard() {
        let corpus = corpus_of(&[("A1", "x y", "C1"), ("A2", "y", "C1"), ("A3", "y z", "C2")]);
        let rec = |a: &str, b: &str, label: Label, simclass: SimClass| PairRecord {
            anchor: a.into(),
            other: b.into(),
            label,
            simclass,
            jacc: None,
        };
        let pairs = resolve_records(
            &corpus,
            &[
                rec("A1", "A2", Label::Pos, SimClass::NotApplicable),
                rec("A1", "A3", Label::Neg, SimClass::Sim),
            ],
        )
        .unwrap();
        assert_eq!(pairs[0].jacc, None);
        assert_eq!(pairs[1].jacc, Some(JaccardScore::new(1, 3)));
        assert!(matches!(
            resolve_records(&corpus, &[rec("A1", "A9", Label::Neg, SimClass::Sim)]),
            Err(Error::NotFound(_))
        ));
        assert!(matches!(
            resolve_records(
                &corpus,
                &[rec("A1", "A3", Label::Pos, SimClass::NotApplicable)]
            ),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn verify_detects_edited_file() {
        use crate::datagen::{generate_bundle, GenConfig};
        use crate::lexsim::SimIndex;
        let corpus = corpus_of(&[
            ("A1", "red cell", "C1"),
            ("A2", "red cells", "C1"),
            ("A3", "red blood", "C2"),
            ("A4", "blue sky", "C3"),
        ]);
        let index = SimIndex::build(&corpus);
        let bundle = generate_bundle(&corpus, &index, &GenConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_bundle(&bundle, &corpus, dir.path(), "T").unwrap();
        verify_bundle(dir.path(), &manifest).unwrap();
        let first = dir
            .path()
            .join(&manifest.files.values().next().unwrap().file);
        std::fs::write(&first, "# tampered\n").unwrap();
        assert!(matches!(
            verify_bundle(dir.path(), &manifest),
            Err(Error::Validation(_))
        ));
    }
}
