//! Pipe-delimited atom and hierarchy files.
//!
//! Atoms: `AUI|STR|SRC|SCUI|CUI|SG1;SG2;...|SUI|LUI`, SCUI/SUI/LUI may be
//! empty. Hierarchy: `SCUI|PARENT_SCUI`. Lines starting with `#` and blank
//! lines are ignored.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{AtomInput, AtomRecord, Corpus, HierarchyEdge};
use crate::error::{Error, Result};

const ATOM_FIELDS: usize = 8;

#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    /// Keep only atoms whose SRC is listed. Hierarchy edges touching SCUIs
    /// that no longer occur are dropped.
    pub src_allow: Option<BTreeSet<String>>,
}

pub(crate) fn atom_line(a: &AtomRecord) -> String {
    format!(
        "{}|{}|{}|{}|{}|{}|{}|{}",
        a.aui,
        a.term,
        a.src,
        a.scui.as_deref().unwrap_or(""),
        a.cui,
        a.sg.join(";"),
        a.sui,
        a.lui
    )
}

pub(crate) fn edge_line(e: &HierarchyEdge) -> String {
    format!("{}|{}", e.child_scui, e.parent_scui)
}

fn data_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push((i + 1, line.to_string()));
    }
    Ok(out)
}

fn opt(field: &str) -> Option<String> {
    (!field.is_empty()).then(|| field.to_string())
}

fn parse_atom(path: &Path, line_no: usize, line: &str) -> Result<AtomInput> {
    let f: Vec<&str> = line.split('|').collect();
    if f.len() != ATOM_FIELDS {
        return Err(Error::parse(
            path,
            line_no,
            format!("expected {ATOM_FIELDS} fields, found {}", f.len()),
        ));
    }
    for (i, name) in [(0, "AUI"), (1, "STR"), (2, "SRC"), (4, "CUI")] {
        if f[i].is_empty() {
            return Err(Error::parse(path, line_no, format!("empty {name}")));
        }
    }
    Ok(AtomInput {
        aui: f[0].to_string(),
        term: f[1].to_string(),
        src: f[2].to_string(),
        scui: opt(f[3]),
        cui: f[4].to_string(),
        sg: f[5]
            .split(';')
            .filter(|g| !g.is_empty())
            .map(str::to_string)
            .collect(),
        sui: opt(f[6]),
        lui: opt(f[7]),
    })
}

fn parse_edge(path: &Path, line_no: usize, line: &str) -> Result<HierarchyEdge> {
    match line.split('|').collect::<Vec<_>>().as_slice() {
        [child, parent] if !child.is_empty() && !parent.is_empty() => Ok(HierarchyEdge {
            child_scui: child.to_string(),
            parent_scui: parent.to_string(),
        }),
        fields => Err(Error::parse(
            path,
            line_no,
            format!("expected 2 non-empty fields, found {}", fields.len()),
        )),
    }
}

/// Reads, validates and indexes a corpus.
pub fn load_corpus(
    atoms_path: &Path,
    hierarchy_path: Option<&Path>,
    options: &LoadOptions,
) -> Result<Corpus> {
    let mut atoms = Vec::new();
    for (no, line) in data_lines(atoms_path)? {
        let atom = parse_atom(atoms_path, no, &line)?;
        if options
            .src_allow
            .as_ref()
            .is_none_or(|allow| allow.contains(&atom.src))
        {
            atoms.push(atom);
        }
    }

    let mut edges = Vec::new();
    if let Some(path) = hierarchy_path {
        for (no, line) in data_lines(path)? {
            edges.push(parse_edge(path, no, &line)?);
        }
    }
    if options.src_allow.is_some() {
        let kept: HashSet<&str> = atoms.iter().filter_map(|a| a.scui.as_deref()).collect();
        edges.retain(|e| {
            kept.contains(e.child_scui.as_str()) && kept.contains(e.parent_scui.as_str())
        });
    }
    Corpus::build(atoms, edges)
}

/// Writes the canonical rendering of a corpus. The hierarchy file is always
/// written (possibly with only its header).
pub fn write_corpus(corpus: &Corpus, atoms_path: &Path, hierarchy_path: &Path) -> Result<()> {
    write_lines(
        atoms_path,
        &format!("# AUI|STR|SRC|SCUI|CUI|SG|SUI|LUI corpus={}", corpus.hash()),
        corpus.atoms().iter().map(atom_line),
    )?;
    write_lines(
        hierarchy_path,
        &format!("# SCUI|PARENT_SCUI corpus={}", corpus.hash()),
        corpus.edges().iter().map(edge_line),
    )
}

fn write_lines(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}").map_err(|e| Error::io(ctx(), e))?;
    for line in lines {
        writeln!(w, "{line}").map_err(|e| Error::io(ctx(), e))?;
    }
    w.flush().map_err(|e| Error::io(ctx(), e))
}
