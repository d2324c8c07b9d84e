//! Confusion matrices, metrics and per-variant reports.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{header_hash, PairRecord};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn new(true_pos: u64, false_pos: u64, false_neg: u64, true_neg: u64) -> Self {
        ConfusionMatrix {
            true_pos,
            false_pos,
            false_neg,
            true_neg,
        }
    }

    pub fn record(&mut self, actual: bool, predicted: bool) {
        match (actual, predicted) {
            (true, true) => self.true_pos += 1,
            (false, true) => self.false_pos += 1,
            (true, false) => self.false_neg += 1,
            (false, false) => self.true_neg += 1,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        ConfusionMatrix {
            true_pos: self.true_pos + other.true_pos,
            false_pos: self.false_pos + other.false_pos,
            false_neg: self.false_neg + other.false_neg,
            true_neg: self.true_neg + other.true_neg,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

/// Percentages rounded to two decimals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn percent2(fraction: f64) -> f64 {
    (fraction * 10_000.0).round() / 100.0
}

/// Accuracy, precision, recall and F1 as percentages.
///
/// Precision is 0 when nothing is predicted positive, recall is 0 when there
/// are no positives, and F1 is 0 when precision + recall is 0. F1 is computed
/// from the unrounded precision and recall.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.total() == 0 {
        return Err(Error::Validation(
            "cannot score an empty confusion matrix".into(),
        ));
    }
    let accuracy = ratio(cm.true_pos + cm.true_neg, cm.total());
    let precision = ratio(cm.true_pos, cm.true_pos + cm.false_pos);
    let recall = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy: percent2(accuracy),
        precision: percent2(precision),
        recall: percent2(recall),
        f1: percent2(f1),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub predictor: String,
    pub dataset: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricsReport {
    pub fn new(predictor: impl Into<String>, dataset: impl Into<String>, m: Metrics) -> Self {
        MetricsReport {
            predictor: predictor.into(),
            dataset: dataset.into(),
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
        }
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            accuracy: self.accuracy,
            precision: self.precision,
            recall: self.recall,
            f1: self.f1,
        }
    }
}

/// One line of a prediction file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub anchor: String,
    pub other: String,
    pub predicted: bool,
}

/// Joins predictions to labeled pairs on `(anchor, other)` and counts.
///
/// Every labeled pair needs exactly one prediction and every prediction must
/// match a labeled pair; the first offender is reported.
pub fn score_predictions(labels: &[PairRecord], preds: &[Prediction]) -> Result<ConfusionMatrix> {
    let mut by_key: HashMap<(&str, &str), bool> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_key
            .insert((p.anchor.as_str(), p.other.as_str()), p.predicted)
            .is_some()
        {
            return Err(Error::Join(format!(
                "duplicate prediction for {}|{}",
                p.anchor, p.other
            )));
        }
    }
    if let Some(i) = labels
        .par_iter()
        .position_first(|l| !by_key.contains_key(&(l.anchor.as_str(), l.other.as_str())))
    {
        return Err(Error::Join(format!(
            "no prediction for labeled pair {}|{}",
            labels[i].anchor, labels[i].other
        )));
    }
    let mut seen: HashSet<(&str, &str)> = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert((l.anchor.as_str(), l.other.as_str())) {
            return Err(Error::Join(format!(
                "labeled pair {}|{} appears twice",
                l.anchor, l.other
            )));
        }
    }
    if let Some(p) = preds
        .iter()
        .find(|p| !seen.contains(&(p.anchor.as_str(), p.other.as_str())))
    {
        return Err(Error::Join(format!(
            "prediction for {}|{} matches no labeled pair",
            p.anchor, p.other
        )));
    }
    Ok(labels
        .par_iter()
        .map(|l| {
            let mut cm = ConfusionMatrix::default();
            cm.record(
                l.label.is_positive(),
                by_key[&(l.anchor.as_str(), l.other.as_str())],
            );
            cm
        })
        .reduce(ConfusionMatrix::default, ConfusionMatrix::merge))
}

pub const PREDICTION_HEADER: &str = "# ANCHOR|OTHER|PRED";

pub fn write_predictions(path: &Path, corpus_hash: &str, preds: &[Prediction]) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{PREDICTION_HEADER} corpus={corpus_hash}").map_err(|e| Error::io(ctx(), e))?;
    for p in preds {
        writeln!(w, "{}|{}|{}", p.anchor, p.other, u8::from(p.predicted))
            .map_err(|e| Error::io(ctx(), e))?;
    }
    w.flush().map_err(|e| Error::io(ctx(), e))
}

/// Reads a prediction file; returns the corpus hash from its header, if any.
pub fn read_predictions(path: &Path) -> Result<(Option<String>, Vec<Prediction>)> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut hash = None;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.starts_with('#') {
            if hash.is_none() {
                hash = header_hash(&line);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let predicted = match line.split('|').collect::<Vec<_>>().as_slice() {
            [anchor, other, pred] => {
                let predicted = match *pred {
                    "1" => true,
                    "0" => false,
                    _ => {
                        return Err(Error::parse(
                            path,
                            i + 1,
                            format!("PRED must be 0 or 1, got {pred:?}"),
                        ))
                    }
                };
                Prediction {
                    anchor: anchor.to_string(),
                    other: other.to_string(),
                    predicted,
                }
            }
            fields => {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("expected 3 fields, found {}", fields.len()),
                ))
            }
        };
        out.push(predicted);
    }
    Ok((hash, out))
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

/// Aligned text table: one row per predictor, one column group of four
/// metrics per dataset, both in order of first appearance.
pub fn render_report(reports: &[MetricsReport]) -> String {
    const CELL: usize = 7;
    let predictors = first_seen(reports.iter().map(|r| r.predictor.as_str()));
    let datasets = first_seen(reports.iter().map(|r| r.dataset.as_str()));
    let name_width = predictors
        .iter()
        .map(|p| p.len())
        .chain(["predictor".len()])
        .max()
        .unwrap_or(0);
    let group_width = 4 * CELL + 3;

    let mut out = String::new();
    let _ = write!(out, "{:<name_width$}", "predictor");
    for d in &datasets {
        let _ = write!(out, " | {d:<group_width$}");
    }
    out.push('\n');
    let _ = write!(out, "{:<name_width$}", "");
    for _ in &datasets {
        let _ = write!(
            out,
            " | {:>CELL$} {:>CELL$} {:>CELL$} {:>CELL$}",
            "acc", "prec", "rec", "f1"
        );
    }
    out.push('\n');
    for p in &predictors {
        let _ = write!(out, "{p:<name_width$}");
        for d in &datasets {
            match reports
                .iter()
                .find(|r| r.predictor == *p && r.dataset == *d)
            {
                Some(r) => {
                    let _ = write!(
                        out,
                        " | {:>CELL$.2} {:>CELL$.2} {:>CELL$.2} {:>CELL$.2}",
                        r.accuracy, r.precision, r.recall, r.f1
                    );
                }
                None => {
                    let _ = write!(
                        out,
                        " | {:>CELL$} {:>CELL$} {:>CELL$} {:>CELL$}",
                        "-", "-", "-", "-"
                    );
                }
            }
        }
        out.push('\n');
    }
    out.lines()
        .map(|l| l.trim_end().to_string() + "\n")
        .collect()
}

pub const CSV_HEADER: [&str; 6] = [
    "predictor",
    "dataset",
    "accuracy",
    "precision",
    "recall",
    "f1",
];

/// `predictor,dataset,accuracy,precision,recall,f1` with two-decimal values.
pub fn reports_to_csv(reports: &[MetricsReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Validation(format!("writing CSV: {e}"));
    w.write_record(CSV_HEADER).map_err(fail)?;
    for r in reports {
        w.write_record([
            r.predictor.clone(),
            r.dataset.clone(),
            format!("{:.2}", r.accuracy),
            format!("{:.2}", r.precision),
            format!("{:.2}", r.recall),
            format!("{:.2}", r.f1),
        ])
        .map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("writing CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn reports_from_csv(text: &str) -> Result<Vec<MetricsReport>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r
        .headers()
        .map_err(|e| Error::Validation(format!("reading CSV: {e}")))?
        .clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Validation(format!(
            "unexpected CSV header {headers:?}"
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Validation(format!("reading CSV: {e}"))))
        .collect()
}
