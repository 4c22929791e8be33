//! `sortacq`: signature generation, parsing, harvesting, filtering, mapping,
//! iteration, rule-file diffs and the editor server.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sortacq::evalmap::{map_rules, map_rules_with_closure};
use sortacq::grammar::{Grammar, Lexicon, NameSortTable};
use sortacq::harvest::{
    compute_probabilities, format_decimal, harvest_corpus, write_harvest, ExclusionList, Extractor,
    Family, Mode, RuleStats, DEFAULT_SAMPLE_CAP,
};
use sortacq::parser::{read_parse_results, write_parse_results, ParseResult, Parser as ChartParser, ParserConfig};
use sortacq::pipeline::{
    apply_filter, diff_rule_files, load_rules, read_file, run_pipeline, write_atomic, Domain, IterationConfig,
    ReferenceCurator, ThresholdFilter,
};
use sortacq::siggen::{generate_signatures, signature_stats};
use sortacq::sort::{parse_rules, rules_to_text, SortHierarchy, SortRule};

#[derive(Debug, Parser)]
#[command(name = "sortacq", version, about = "Semi-automatic acquisition of sortal rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the subcommands; each one checks for those it needs.
#[derive(Debug, Args)]
struct Inputs {
    #[arg(long)]
    hierarchy: Option<PathBuf>,
    #[arg(long)]
    grammar: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Active rule, signature or harvest file.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Harvest every analysis (lfs) or only the preferred one (plfs).
    #[arg(long, default_value = "plfs")]
    mode: Mode,
    /// Output directory; without it results go to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the initial signature file from the lexicon.
    Siggen {
        #[command(flatten)]
        inputs: Inputs,
        /// Name-sort table for proper names.
        #[arg(long)]
        names: PathBuf,
        /// Hand-written signatures merged after the generated ones.
        #[arg(long)]
        hand: Option<PathBuf>,
    },
    /// Parse the corpus under a rule file.
    Parse {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Harvest sort rules with their statistics.
    Harvest {
        #[command(flatten)]
        inputs: Inputs,
        /// Read analyses from a `parse` result file instead of parsing.
        #[arg(long)]
        parses: Option<PathBuf>,
        /// Only the first N sentences.
        #[arg(long)]
        limit: Option<usize>,
        /// Sample sentences kept per rule.
        #[arg(long, default_value_t = DEFAULT_SAMPLE_CAP)]
        samples: usize,
        /// Excluded predicates, one per line.
        #[arg(long)]
        excluded: Option<PathBuf>,
    },
    /// Recompute the three probability families from a harvest's counts.
    Probabilities {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Keep rules whose probability reaches a threshold.
    Filter {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        family: Family,
        #[arg(long)]
        threshold: String,
    },
    /// Map a rule file onto a reference rule file.
    Map {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        reference: PathBuf,
        /// Expand both sides one hierarchy level first.
        #[arg(long)]
        closure: bool,
    },
    /// Iterate parse, harvest and filter until the rule set is a fixpoint.
    Iterate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 5)]
        max_iterations: usize,
        #[arg(long, requires = "threshold")]
        family: Option<Family>,
        #[arg(long, requires = "family")]
        threshold: Option<String>,
        /// Keep only harvested rules this reference accepts (Exact or Subsumed-by).
        #[arg(long)]
        curate: Option<PathBuf>,
    },
    /// Rules added and removed between two rule files.
    Diff { a: PathBuf, b: PathBuf },
    /// Serve the editor API for a workspace directory.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        workspace: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Failure::Usage(format!("this subcommand needs --{flag}")))
}

fn data<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", path.display()))
}

fn hierarchy(inputs: &Inputs) -> Result<SortHierarchy> {
    let p = need(&inputs.hierarchy, "hierarchy")?;
    SortHierarchy::parse(&read_file(p)?).map_err(data(p))
}

fn rules(p: &Path) -> Result<Vec<SortRule>> {
    Ok(load_rules(p)?.into_iter().map(|s| s.rule).collect())
}

/// Writes `name` under `--out`, or prints it.
fn emit(inputs: &Inputs, name: &str, text: &str) -> Result<()> {
    match &inputs.out {
        Some(dir) => write_atomic(&dir.join(name), text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn domain(inputs: &Inputs) -> Result<Domain> {
    Ok(Domain::load(
        need(&inputs.hierarchy, "hierarchy")?,
        need(&inputs.grammar, "grammar")?,
        need(&inputs.lexicon, "lexicon")?,
        need(&inputs.corpus, "corpus")?,
    )?)
}

fn parse_all(inputs: &Inputs, d: &Domain) -> Result<Vec<ParseResult>> {
    let rp = need(&inputs.rules, "rules")?;
    let parser = ChartParser::new(&d.grammar, &d.lexicon, &rules(rp)?, &d.hierarchy, ParserConfig::default())
        .map_err(data(rp))?;
    Ok(parser.parse_corpus(&d.corpus))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Siggen { inputs, names, hand } => {
            let h = hierarchy(&inputs)?;
            let gp = need(&inputs.grammar, "grammar")?;
            let lp = need(&inputs.lexicon, "lexicon")?;
            let grammar = Grammar::parse(&read_file(gp)?).map_err(data(gp))?;
            let lexicon = Lexicon::parse(&read_file(lp)?).map_err(data(lp))?;
            let table = NameSortTable::parse(&read_file(&names)?).map_err(data(&names))?;
            let hand = match &hand {
                Some(p) => parse_rules(&read_file(p)?).map_err(data(p))?,
                None => Vec::new(),
            };
            let implicit = grammar.implicit_determiners();
            let sigs = generate_signatures(&lexicon, &table, &grammar.connectors(), &implicit, &hand, &h)?;
            let stats = signature_stats(&sigs.rules, &hand);
            emit(&inputs, "signatures.sig", &rules_to_text(&sigs.rules))?;
            if inputs.out.is_some() {
                emit(&inputs, "hierarchy.isa", &sigs.hierarchy.to_text())?;
                emit(&inputs, "signature_stats.txt", &stats.to_string())?;
            }
            eprint!("{stats}");
        }
        Command::Parse { inputs } => {
            let d = domain(&inputs)?;
            let results = parse_all(&inputs, &d)?;
            emit(&inputs, "parses.txt", &write_parse_results(&results))?;
            let parsed = results.iter().filter(|r| !r.analyses.is_empty()).count();
            eprintln!("parsed {parsed}/{}", results.len());
        }
        Command::Harvest { inputs, parses, limit, samples, excluded } => {
            let mut results = match &parses {
                Some(p) => read_parse_results(&read_file(p)?, &hierarchy(&inputs)?).map_err(data(p))?,
                None => parse_all(&inputs, &domain(&inputs)?)?,
            };
            if let Some(n) = limit {
                results.truncate(n);
            }
            let excluded = match &excluded {
                Some(p) => ExclusionList::parse(&read_file(p)?),
                None => ExclusionList::default(),
            };
            let stats = harvest_corpus(&results, inputs.mode, &Extractor::new(excluded), samples)?;
            let stats = compute_probabilities(stats);
            if stats.is_empty() {
                eprintln!("warning: nothing harvested");
            }
            emit(&inputs, "harvest.sor", &write_harvest(&stats))?;
        }
        Command::Probabilities { inputs } => {
            let p = need(&inputs.rules, "rules")?;
            let stats = compute_probabilities(load_rules(p)?);
            match &inputs.out {
                Some(_) => emit(&inputs, "harvest.sor", &write_harvest(&stats))?,
                None => print!("{}", probability_table(&stats)),
            }
        }
        Command::Filter { inputs, family, threshold } => {
            let f = ThresholdFilter::new(family, &threshold).map_err(Failure::Usage)?;
            let stats = load_rules(need(&inputs.rules, "rules")?)?;
            let kept = apply_filter(&stats, &f);
            eprintln!("kept {}/{}", kept.len(), stats.len());
            emit(&inputs, "filtered.sor", &write_harvest(&kept))?;
        }
        Command::Map { inputs, reference, closure } => {
            let h = hierarchy(&inputs)?;
            let corpus = rules(need(&inputs.rules, "rules")?)?;
            let refs = parse_rules(&read_file(&reference)?).map_err(data(&reference))?;
            let report =
                if closure { map_rules_with_closure(&corpus, &refs, &h) } else { map_rules(&corpus, &refs, &h) }?;
            print!("{}", report.table());
            if inputs.out.is_some() {
                emit(&inputs, "mapping.txt", &format!("{}\n{}", report.table(), report.records()))?;
            }
        }
        Command::Iterate { inputs, max_iterations, family, threshold, curate } => {
            let out = need(&inputs.out, "out")?.to_path_buf();
            let d = domain(&inputs)?;
            let filter = match (family, threshold) {
                (Some(f), Some(t)) => Some(ThresholdFilter::new(f, &t).map_err(Failure::Usage)?),
                _ => None,
            };
            let curator = match &curate {
                Some(p) => Some(ReferenceCurator { reference: parse_rules(&read_file(p)?).map_err(data(p))? }),
                None => None,
            };
            let config = IterationConfig { mode: inputs.mode, filter, curator, ..IterationConfig::default() };
            let history = run_pipeline(&d, need(&inputs.rules, "rules")?, &out, &config, max_iterations)?;
            for s in &history {
                for w in &s.warnings {
                    eprintln!("warning: {w}");
                }
            }
            print!("{}", fs::read_to_string(out.join("summary.tsv")).map_err(data(&out))?);
        }
        Command::Diff { a, b } => print!("{}", diff_rule_files(&a, &b)?.to_text()),
        Command::Serve { port, workspace } => {
            sortacq_editor::serve(&workspace, port).map_err(|e| Failure::Data(e.to_string()))?
        }
    }
    Ok(())
}

fn probability_table(stats: &[RuleStats]) -> String {
    let mut out = String::from("rule\ttheta\tlfs\tp\tp_pred\tp_arg\n");
    for s in stats {
        let p = [Family::Global, Family::Pred, Family::Arg1].map(|f| format_decimal(s.probability(f), 6));
        out.push_str(&format!("{}\t{}\t{}\t{}\n", s.rule, s.invocations, s.lf_count, p.join("\t")));
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
