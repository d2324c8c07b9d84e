use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use uva_core::corpus::{load_corpus, synth_corpus, write_corpus, LoadOptions};
use uva_core::datagen::{
    bundle_file_name, export_conkg, generate_bundle, read_pair_file, resolve_records,
    verify_bundle, write_bundle, write_pairs_jsonl, write_triples, ConKgVariant, Manifest,
    PairFile,
};
use uva_core::error::ensure_same_corpus;
use uva_core::eval::{
    metrics, read_predictions, render_report, reports_to_csv, score_predictions, write_predictions,
    Prediction,
};
use uva_core::lexsim::{read_index, write_index, IndexOptions};
use uva_core::rba::RbaPredictor;
use uva_core::{
    Corpus, DatasetName, Error, MetricsReport, NegativeVariant, Result, RuleMode, SimIndex,
};

use crate::settings::Settings;

pub enum Run {
    Synth,
    Ingest,
    Index,
    Generate,
    Rba {
        pairs: Vec<PathBuf>,
    },
    Eval {
        pairs: Vec<PathBuf>,
        preds: Vec<PathBuf>,
    },
    ExportConkg {
        variants: Vec<String>,
    },
    ExportPairs {
        pairs: Vec<PathBuf>,
    },
}

pub fn execute(run: Run, s: &Settings) -> Result<()> {
    match run {
        Run::Synth => synth(s),
        Run::Ingest => ingest(s),
        Run::Index => index(s),
        Run::Generate => generate(s),
        Run::Rba { pairs } => rba(s, pairs),
        Run::Eval { pairs, preds } => eval(s, pairs, preds),
        Run::ExportConkg { variants } => export_conkg_cmd(s, variants),
        Run::ExportPairs { pairs } => export_pairs(s, pairs),
    }
}

const ATOMS_FILE: &str = "atoms.psv";
const HIERARCHY_FILE: &str = "hierarchy.psv";
const PRED_EXT: &str = "pred";

fn io_err(context: String) -> impl FnOnce(std::io::Error) -> Error {
    move |source| Error::Io { context, source }
}

fn load(s: &Settings) -> Result<Corpus> {
    let atoms = s.require_path("corpus")?;
    let options = LoadOptions {
        src_allow: s.list("src_allow").map(BTreeSet::from_iter),
    };
    load_corpus(&atoms, s.path("hierarchy").as_deref(), &options)
}

fn write_corpus_to(corpus: &Corpus, dir: &Path) -> Result<()> {
    write_corpus(corpus, &dir.join(ATOMS_FILE), &dir.join(HIERARCHY_FILE))?;
    println!(
        "wrote {} atoms, {} concepts, {} hierarchy edges to {} (corpus={})",
        corpus.len(),
        corpus.cuis().len(),
        corpus.edges().len(),
        dir.display(),
        corpus.hash()
    );
    Ok(())
}

fn synth(s: &Settings) -> Result<()> {
    let params = s.synth_params()?;
    let corpus = synth_corpus(&params, s.get_or("seed", 0u64)?)?;
    write_corpus_to(&corpus, &s.out_dir()?)
}

fn ingest(s: &Settings) -> Result<()> {
    let corpus = load(s)?;
    write_corpus_to(&corpus, &s.out_dir()?)
}

fn index_options(s: &Settings) -> Result<IndexOptions> {
    Ok(IndexOptions {
        df_cutoff: s.get("df_cutoff")?,
    })
}

fn index(s: &Settings) -> Result<()> {
    let corpus = load(s)?;
    let idx = SimIndex::build_with(&corpus, index_options(s)?);
    let path = match s.path("index") {
        Some(p) => p,
        None => s.out_dir()?.join("index.uvaidx"),
    };
    write_index(&idx, &path)?;
    println!(
        "wrote index of {} atoms and {} tokens to {} (corpus={})",
        idx.n_atoms(),
        idx.vocabulary().len(),
        path.display(),
        idx.corpus_hash()
    );
    Ok(())
}

fn generate(s: &Settings) -> Result<()> {
    let corpus = load(s)?;
    let config = s.gen_config()?;
    let idx = match s.path("index") {
        Some(p) => {
            let idx = read_index(&p)?;
            ensure_same_corpus(corpus.hash(), idx.corpus_hash())?;
            idx
        }
        None => SimIndex::build_with(&corpus, index_options(s)?),
    };
    let bundle = generate_bundle(&corpus, &idx, &config)?;
    let dir = s.out_dir()?;
    let release = s.raw("release").unwrap_or("UVA");
    let manifest = write_bundle(&bundle, &corpus, &dir, release)?;
    verify_bundle(&dir, &manifest)?;
    println!(
        "{:<20} {:>10} {:>10} {:>10}",
        "dataset", "positives", "negatives", "total"
    );
    for (name, entry) in &manifest.files {
        println!(
            "{name:<20} {:>10} {:>10} {:>10}",
            entry.positives, entry.negatives, entry.total
        );
    }
    for (variant, short) in &manifest.shortfalls {
        if short.pairs > 0 {
            println!(
                "shortfall {variant}: {} pairs over {} anchors",
                short.pairs, short.anchors
            );
        }
    }
    println!(
        "wrote {} (corpus={})",
        dir.join("manifest.json").display(),
        corpus.hash()
    );
    Ok(())
}

fn bundle_dir(s: &Settings) -> Result<PathBuf> {
    s.path("bundle_dir")
        .map_or_else(|| s.require_path("out_dir"), Ok)
}

/// Release from settings, or else from the bundle's manifest.
fn release(s: &Settings, dir: &Path) -> Result<String> {
    if let Some(r) = s.raw("release") {
        return Ok(r.to_string());
    }
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|_| {
        Error::NotFound(format!(
            "no release given and no manifest at {}",
            path.display()
        ))
    })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok(manifest.release)
}

fn bundle_files(s: &Settings, names: impl Iterator<Item = DatasetName>) -> Result<Vec<PathBuf>> {
    let dir = bundle_dir(s)?;
    let release = release(s, &dir)?;
    Ok(names
        .map(|n| dir.join(bundle_file_name(&release, &n)))
        .collect())
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// `20AA_GEN_ALL` becomes `GEN_ALL`; other names are kept whole.
fn dataset_label(stem: &str) -> String {
    DatasetName::all()
        .map(|n| n.to_string())
        .find(|n| stem == n || stem.ends_with(&format!("_{n}")))
        .unwrap_or_else(|| stem.to_string())
}

fn read_pairs_for(corpus_hash: Option<&str>, path: &Path) -> Result<PairFile> {
    let file = read_pair_file(path)?;
    if let (Some(expected), Some(found)) = (corpus_hash, file.corpus_hash.as_deref()) {
        ensure_same_corpus(expected, found)?;
    }
    Ok(file)
}

fn rba(s: &Settings, pairs: Vec<PathBuf>) -> Result<()> {
    let corpus = load(s)?;
    let mode: RuleMode = s.get_or("mode", RuleMode::SsLsScTrans)?;
    let files = if pairs.is_empty() {
        bundle_files(
            s,
            NegativeVariant::ALL_VARIANTS
                .into_iter()
                .map(DatasetName::gen),
        )?
    } else {
        pairs
    };
    let out = s.out_dir()?;
    let predictor = RbaPredictor::new(&corpus, mode);
    let name = format!("RBA-{}", mode.as_str());
    let mut reports = Vec::new();
    for path in &files {
        let file = read_pairs_for(Some(corpus.hash()), path)?;
        let preds = file
            .records
            .iter()
            .map(|r| {
                let a = corpus.atom_id(&r.anchor)?;
                let b = corpus.atom_id(&r.other)?;
                Ok(Prediction {
                    anchor: r.anchor.clone(),
                    other: r.other.clone(),
                    predicted: predictor.predict(a, b),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let stem = file_stem(path);
        let pred_path = out.join(format!("{stem}.{name}.{PRED_EXT}"));
        write_predictions(&pred_path, corpus.hash(), &preds)?;
        let cm = score_predictions(&file.records, &preds)?;
        reports.push(MetricsReport::new(
            &name,
            dataset_label(&stem),
            metrics(&cm)?,
        ));
        println!("wrote {}", pred_path.display());
    }
    let table = render_report(&reports);
    let summary = out.join(format!("{name}.summary.txt"));
    std::fs::write(&summary, &table).map_err(io_err(format!("writing {}", summary.display())))?;
    print!("{table}");
    Ok(())
}

/// `<dataset>.<predictor>.pred` split into its two parts.
fn split_pred_name(path: &Path) -> Option<(String, String)> {
    let name = path.file_name()?.to_str()?;
    let base = name.strip_suffix(&format!(".{PRED_EXT}"))?;
    let (stem, predictor) = base.split_once('.')?;
    Some((stem.to_string(), predictor.to_string()))
}

fn dataset_rank(label: &str) -> (usize, String) {
    let rank = DatasetName::all()
        .position(|n| n.to_string() == label)
        .unwrap_or(usize::MAX);
    (rank, label.to_string())
}

fn eval(s: &Settings, pairs: Vec<PathBuf>, preds: Vec<PathBuf>) -> Result<()> {
    let jobs: Vec<(PathBuf, PathBuf, String)> = if !pairs.is_empty() || !preds.is_empty() {
        if pairs.len() != preds.len() {
            return Err(Error::Param(format!(
                "{} --pairs but {} --preds; give one prediction file per pair file",
                pairs.len(),
                preds.len()
            )));
        }
        pairs
            .into_iter()
            .zip(preds)
            .map(|(pa, pr)| {
                let predictor = split_pred_name(&pr)
                    .map(|(_, p)| p)
                    .unwrap_or_else(|| file_stem(&pr));
                (pa, pr, predictor)
            })
            .collect()
    } else {
        let dir = s
            .path("pred_dir")
            .map_or_else(|| s.require_path("out_dir"), Ok)?;
        let bundle = bundle_dir(s)?;
        let mut found: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(io_err(format!("listing {}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == PRED_EXT))
            .collect();
        found.sort();
        if found.is_empty() {
            return Err(Error::NotFound(format!(
                "no .{PRED_EXT} files in {}",
                dir.display()
            )));
        }
        found
            .into_iter()
            .map(|pr| {
                let (stem, predictor) = split_pred_name(&pr).ok_or_else(|| {
                    Error::Param(format!(
                        "{} is not named <dataset>.<predictor>.{PRED_EXT}",
                        pr.display()
                    ))
                })?;
                Ok((bundle.join(format!("{stem}.psv")), pr, predictor))
            })
            .collect::<Result<_>>()?
    };

    let mut reports = Vec::new();
    for (pairs_path, pred_path, predictor) in jobs {
        let labels = read_pair_file(&pairs_path)?;
        let (pred_hash, predictions) = read_predictions(&pred_path)?;
        if let (Some(expected), Some(found)) = (labels.corpus_hash.as_deref(), pred_hash.as_deref())
        {
            ensure_same_corpus(expected, found)?;
        }
        let cm = score_predictions(&labels.records, &predictions).map_err(|e| match e {
            Error::Join(m) => Error::Join(format!(
                "{} vs {}: {m}",
                pred_path.display(),
                pairs_path.display()
            )),
            other => other,
        })?;
        reports.push(MetricsReport::new(
            predictor,
            dataset_label(&file_stem(&pairs_path)),
            metrics(&cm)?,
        ));
    }
    reports.sort_by(|a, b| {
        (&a.predictor, dataset_rank(&a.dataset)).cmp(&(&b.predictor, dataset_rank(&b.dataset)))
    });
    let out = s.out_dir()?;
    let table = render_report(&reports);
    for (file, body) in [
        ("report.txt", table.clone()),
        ("report.csv", reports_to_csv(&reports)?),
    ] {
        let path = out.join(file);
        std::fs::write(&path, body).map_err(io_err(format!("writing {}", path.display())))?;
    }
    print!("{table}");
    Ok(())
}

fn export_conkg_cmd(s: &Settings, variants: Vec<String>) -> Result<()> {
    let corpus = load(s)?;
    let variants = if variants.is_empty() {
        ConKgVariant::ALL.to_vec()
    } else {
        variants
            .iter()
            .map(|v| v.parse())
            .collect::<Result<Vec<ConKgVariant>>>()?
    };
    let out = s.out_dir()?;
    for v in variants {
        let triples = export_conkg(&corpus, v);
        let path = out.join(format!("{v}.triples.psv"));
        write_triples(&path, corpus.hash(), &triples)?;
        println!("wrote {} triples to {}", triples.len(), path.display());
    }
    Ok(())
}

fn export_pairs(s: &Settings, pairs: Vec<PathBuf>) -> Result<()> {
    let corpus = load(s)?;
    let files = if pairs.is_empty() {
        bundle_files(s, DatasetName::all())?
    } else {
        pairs
    };
    let out = s.out_dir()?;
    for path in files {
        let file = read_pairs_for(Some(corpus.hash()), &path)?;
        let resolved = resolve_records(&corpus, &file.records)?;
        let target = out.join(format!("{}.jsonl", file_stem(&path)));
        write_pairs_jsonl(&target, &corpus, &resolved)?;
        println!("wrote {} records to {}", resolved.len(), target.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(dataset_label("20AA_GEN_RAN_SIM"), "GEN_RAN_SIM");
        assert_eq!(dataset_label("GEN_ALL"), "GEN_ALL");
        assert_eq!(dataset_label("custom"), "custom");
        assert_eq!(
            split_pred_name(Path::new("d/20AA_GEN_ALL.RBA-SS.pred")),
            Some(("20AA_GEN_ALL".into(), "RBA-SS".into()))
        );
        assert_eq!(split_pred_name(Path::new("x.pred")), None);
        assert!(dataset_rank("GEN_ALL") < dataset_rank("GEN_RAN_NOSIM"));
    }
}
