//! `uva`: command-line driver for the synonymy dataset pipeline.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uva_core::Error;

use settings::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "uva",
    version,
    about = "Synonymy dataset generation, rule-based baseline and evaluation",
    after_help = "Settings are layered: defaults < --config file < UVA_THREADS/UVA_SEED < flags.\n\
                  Exit codes: 0 ok, 2 usage, 3 parse, 4 validation, 5 join, 6 not found, \
                  7 parameter, 8 I/O, 9 corpus hash mismatch."
)]
struct Cli {
    /// `key = value` settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for all parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for synthesis and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CorpusArgs {
    /// Atom file (`AUI|STR|SRC|SCUI|CUI|SG[|SUI|LUI]`).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Hierarchy file (`CHILD_SCUI|PARENT_SCUI`).
    #[arg(long)]
    hierarchy: Option<PathBuf>,
    /// Comma-separated source vocabularies to keep.
    #[arg(long)]
    src_allow: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded synthetic corpus (atoms.psv, hierarchy.psv).
    Synth {
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        n_cuis: Option<usize>,
        #[arg(long)]
        token_pool: Option<usize>,
        #[arg(long)]
        variant_rate: Option<f64>,
    },
    /// Validate a corpus and write its canonical form with derived SUI/LUI.
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Build and save the lexical similarity index.
    Index {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Drop tokens occurring in more than this many atoms.
        #[arg(long)]
        df_cutoff: Option<usize>,
        /// Output file; defaults to <out-dir>/index.uvaidx.
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate the eight TRAIN/GEN pair files and manifest.json.
    Generate {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Saved index to reuse; must match the corpus.
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        df_cutoff: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Release tag used in file names, e.g. 20AA.
        #[arg(long)]
        release: Option<String>,
        #[arg(long)]
        pos_split: Option<f64>,
        #[arg(long)]
        neg_split: Option<f64>,
    },
    /// Run the rule-based baseline over pair files.
    Rba {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// ss, lssc, ss-lssc or ss-lssc-trans.
        #[arg(long)]
        mode: Option<String>,
        /// Pair files to predict; defaults to the four GEN files of the bundle.
        #[arg(long)]
        pairs: Vec<PathBuf>,
        #[arg(long)]
        bundle_dir: Option<PathBuf>,
        #[arg(long)]
        release: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Score prediction files and write report.txt and report.csv.
    Eval {
        /// Pair file; repeat together with --preds.
        #[arg(long)]
        pairs: Vec<PathBuf>,
        /// Prediction file matching the --pairs at the same position.
        #[arg(long)]
        preds: Vec<PathBuf>,
        /// Directory holding the pair files named in prediction file names.
        #[arg(long)]
        bundle_dir: Option<PathBuf>,
        /// Directory scanned for `<dataset>.<predictor>.pred` files.
        #[arg(long)]
        pred_dir: Option<PathBuf>,
        #[arg(long)]
        release: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write context knowledge-graph triples.
    ExportConkg {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// ConSS, ConSG, ConHR or ConAll; all four when omitted.
        #[arg(long)]
        variant: Vec<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write pair files as JSON lines with terms and context ids.
    ExportPairs {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Pair files to export; defaults to all eight bundle files.
        #[arg(long)]
        pairs: Vec<PathBuf>,
        #[arg(long)]
        bundle_dir: Option<PathBuf>,
        #[arg(long)]
        release: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn exit_code(code: &str) -> u8 {
    match code {
        "E_USAGE" => 2,
        "E_PARSE" => 3,
        "E_VALIDATION" => 4,
        "E_JOIN" => 5,
        "E_NOT_FOUND" => 6,
        "E_PARAM" => 7,
        "E_IO" => 8,
        "E_HASH" => 9,
        _ => 1,
    }
}

fn fail(code: &str, message: &str) -> ExitCode {
    let one_line = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error[{code}]: {one_line}");
    ExitCode::from(exit_code(code))
}

impl CorpusArgs {
    fn apply(self, s: &mut Settings) {
        s.set("corpus", self.corpus.map(|p| p.display().to_string()));
        s.set("hierarchy", self.hierarchy.map(|p| p.display().to_string()));
        s.set("src_allow", self.src_allow);
    }
}

fn show(p: Option<PathBuf>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

/// Folds command flags into the settings and returns the command to run.
fn resolve(command: Command, s: &mut Settings) -> commands::Run {
    use commands::Run;
    match command {
        Command::Synth {
            out_dir,
            n_cuis,
            token_pool,
            variant_rate,
        } => {
            s.set("out_dir", show(out_dir));
            s.set("n_cuis", n_cuis);
            s.set("token_pool", token_pool);
            s.set("variant_rate", variant_rate);
            Run::Synth
        }
        Command::Ingest { corpus, out_dir } => {
            corpus.apply(s);
            s.set("out_dir", show(out_dir));
            Run::Ingest
        }
        Command::Index {
            corpus,
            df_cutoff,
            index,
            out_dir,
        } => {
            corpus.apply(s);
            s.set("df_cutoff", df_cutoff);
            s.set("index", show(index));
            s.set("out_dir", show(out_dir));
            Run::Index
        }
        Command::Generate {
            corpus,
            index,
            df_cutoff,
            out_dir,
            release,
            pos_split,
            neg_split,
        } => {
            corpus.apply(s);
            s.set("index", show(index));
            s.set("df_cutoff", df_cutoff);
            s.set("out_dir", show(out_dir));
            s.set("release", release);
            s.set("pos_split", pos_split);
            s.set("neg_split", neg_split);
            Run::Generate
        }
        Command::Rba {
            corpus,
            mode,
            pairs,
            bundle_dir,
            release,
            out_dir,
        } => {
            corpus.apply(s);
            s.set("mode", mode);
            s.set("bundle_dir", show(bundle_dir));
            s.set("release", release);
            s.set("out_dir", show(out_dir));
            Run::Rba { pairs }
        }
        Command::Eval {
            pairs,
            preds,
            bundle_dir,
            pred_dir,
            release,
            out_dir,
        } => {
            s.set("bundle_dir", show(bundle_dir));
            s.set("pred_dir", show(pred_dir));
            s.set("release", release);
            s.set("out_dir", show(out_dir));
            Run::Eval { pairs, preds }
        }
        Command::ExportConkg {
            corpus,
            variant,
            out_dir,
        } => {
            corpus.apply(s);
            s.set("out_dir", show(out_dir));
            Run::ExportConkg { variants: variant }
        }
        Command::ExportPairs {
            corpus,
            pairs,
            bundle_dir,
            release,
            out_dir,
        } => {
            corpus.apply(s);
            s.set("bundle_dir", show(bundle_dir));
            s.set("release", release);
            s.set("out_dir", show(out_dir));
            Run::ExportPairs { pairs }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    settings.set("threads", cli.threads);
    settings.set("seed", cli.seed);
    let command = resolve(cli.command, &mut settings);
    if let Some(n) = settings.threads()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Param(format!("thread pool: {e}")))?;
    }
    commands::execute(command, &settings)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return fail("E_USAGE", first.trim_start_matches("error: "));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.code(), &e.to_string()),
    }
}
