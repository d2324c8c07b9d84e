//! Context knowledge-graph triples.
//!
//! - `ConSS`: `(aui, has_SCUI, scui)` for every atom with a source concept.
//! - `ConSG`: `(scui, has_SG, group)` for every group of every SCUI.
//! - `ConHR`: `(scui, has_parentSCUI, parent)` for every hierarchy edge.
//! - `ConAll`: the union of the three.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConKgVariant {
    ConSS,
    ConSG,
    ConHR,
    ConAll,
}

impl ConKgVariant {
    pub const ALL: [ConKgVariant; 4] = [
        ConKgVariant::ConSS,
        ConKgVariant::ConSG,
        ConKgVariant::ConHR,
        ConKgVariant::ConAll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConKgVariant::ConSS => "ConSS",
            ConKgVariant::ConSG => "ConSG",
            ConKgVariant::ConHR => "ConHR",
            ConKgVariant::ConAll => "ConAll",
        }
    }
}

impl fmt::Display for ConKgVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConKgVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Param(format!("unknown ConKG variant {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    HasScui,
    HasSg,
    HasParentScui,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::HasScui => "has_SCUI",
            Relation::HasSg => "has_SG",
            Relation::HasParentScui => "has_parentSCUI",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub head: String,
    pub relation: Relation,
    pub tail: String,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}|{}", self.head, self.relation.as_str(), self.tail)
    }
}

fn has_scui(corpus: &Corpus) -> impl Iterator<Item = Triple> + '_ {
    corpus.atoms().iter().filter_map(|a| {
        a.scui.as_ref().map(|s| Triple {
            head: a.aui.clone(),
            relation: Relation::HasScui,
            tail: s.clone(),
        })
    })
}

fn has_sg(corpus: &Corpus) -> impl Iterator<Item = Triple> + '_ {
    corpus.scuis().flat_map(move |s| {
        corpus.scui_groups(s).iter().map(move |g| Triple {
            head: s.to_string(),
            relation: Relation::HasSg,
            tail: g.clone(),
        })
    })
}

fn has_parent(corpus: &Corpus) -> impl Iterator<Item = Triple> + '_ {
    corpus.edges().iter().map(|e| Triple {
        head: e.child_scui.clone(),
        relation: Relation::HasParentScui,
        tail: e.parent_scui.clone(),
    })
}

/// Sorted, deduplicated triples of one variant.
pub fn export_conkg(corpus: &Corpus, variant: ConKgVariant) -> Vec<Triple> {
    let mut out: Vec<Triple> = match variant {
        ConKgVariant::ConSS => has_scui(corpus).collect(),
        ConKgVariant::ConSG => has_sg(corpus).collect(),
        ConKgVariant::ConHR => has_parent(corpus).collect(),
        ConKgVariant::ConAll => has_scui(corpus)
            .chain(has_sg(corpus))
            .chain(has_parent(corpus))
            .collect(),
    };
    out.sort_unstable();
    out.dedup();
    out
}

/// Writes `HEAD|RELATION|TAIL` lines under a header carrying the corpus hash.
pub fn write_triples(path: &Path, corpus_hash: &str, triples: &[Triple]) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# HEAD|RELATION|TAIL corpus={corpus_hash}").map_err(|e| Error::io(ctx(), e))?;
    for t in triples {
        writeln!(w, "{t}").map_err(|e| Error::io(ctx(), e))?;
    }
    w.flush().map_err(|e| Error::io(ctx(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AtomInput, HierarchyEdge};

    fn atom(aui: &str, scui: Option<&str>, sg: &[&str]) -> AtomInput {
        AtomInput {
            aui: aui.into(),
            term: format!("term {aui}"),
            src: "S".into(),
            scui: scui.map(String::from),
            cui: format!("C{aui}"),
            sg: sg.iter().map(|g| g.to_string()).collect(),
            ..Default::default()
        }
    }

    fn fixture() -> Corpus {
        Corpus::build(
            vec![
                atom("a1", Some("s1"), &["g1"]),
                atom("a2", Some("s1"), &["g2"]),
                atom("a3", Some("p1"), &["g1"]),
                atom("a4", None, &["g3"]),
            ],
            vec![HierarchyEdge {
                child_scui: "s1".into(),
                parent_scui: "p1".into(),
            }],
        )
        .unwrap()
    }

    #[test]
    fn variants() {
        let c = fixture();
        let ss = export_conkg(&c, ConKgVariant::ConSS);
        assert_eq!(ss.len(), 3);
        assert!(ss.contains(&Triple {
            head: "a1".into(),
            relation: Relation::HasScui,
            tail: "s1".into()
        }));
        let sg = export_conkg(&c, ConKgVariant::ConSG);
        assert_eq!(sg.iter().filter(|t| t.head == "s1").count(), 2);
        assert!(sg.iter().all(|t| t.tail != "g3"));
        let hr = export_conkg(&c, ConKgVariant::ConHR);
        assert_eq!(hr.len(), 1);
        assert_eq!(hr[0].to_string(), "s1|has_parentSCUI|p1");
        let all = export_conkg(&c, ConKgVariant::ConAll);
        assert_eq!(all.len(), ss.len() + sg.len() + hr.len());
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn variant_names_parse() {
        for v in ConKgVariant::ALL {
            assert_eq!(v.as_str().parse::<ConKgVariant>().unwrap(), v);
        }
        assert!("ConXX".parse::<ConKgVariant>().is_err());
    }
}
