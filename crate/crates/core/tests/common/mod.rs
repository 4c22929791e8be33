#![allow(dead_code)]

pub mod golden;
pub mod laws;
pub mod lfgen;
pub mod mapping;

use std::path::{Path, PathBuf};

use sortacq::grammar::{parse_corpus, Grammar, Lexicon, NameSortTable, Sentence};
use sortacq::parser::{ParseResult, Parser, ParserConfig};
use sortacq::pipeline::Domain;
use sortacq::siggen::{generate_signatures, Signatures};
use sortacq::sort::{parse_rules, rules_to_text, SortHierarchy, SortRule};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy")
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub struct Toy {
    pub base: SortHierarchy,
    pub grammar: Grammar,
    pub lexicon: Lexicon,
    pub names: NameSortTable,
    pub hand: Vec<SortRule>,
    pub corpus: Vec<Sentence>,
    pub reference: Vec<SortRule>,
    pub sigs: Signatures,
}

impl Toy {
    pub fn load() -> Toy {
        let base = SortHierarchy::parse(&read("hierarchy.isa")).unwrap();
        let grammar = Grammar::parse(&read("grammar.pl")).unwrap();
        let lexicon = Lexicon::parse(&read("lexicon.pl")).unwrap();
        let names = NameSortTable::parse(&read("names.pl")).unwrap();
        let hand = parse_rules(&read("hand.sig")).unwrap();
        let corpus = parse_corpus(&read("corpus.txt")).unwrap();
        let reference = parse_rules(&read("reference.sor")).unwrap();
        let implicit = grammar.implicit_determiners();
        let sigs = generate_signatures(&lexicon, &names, &grammar.connectors(), &implicit, &hand, &base).unwrap();
        Toy { base, grammar, lexicon, names, hand, corpus, reference, sigs }
    }

    pub fn h(&self) -> &SortHierarchy {
        &self.sigs.hierarchy
    }

    pub fn domain(&self) -> Domain {
        Domain {
            hierarchy: self.sigs.hierarchy.clone(),
            grammar: self.grammar.clone(),
            lexicon: self.lexicon.clone(),
            corpus: self.corpus.clone(),
        }
    }

    /// Writes the signature set into `dir` and returns its path.
    pub fn write_signatures(&self, dir: &Path) -> PathBuf {
        let p = dir.join("signatures.sig");
        std::fs::write(&p, rules_to_text(&self.sigs.rules)).unwrap();
        p
    }
}

/// Hand-laid-out logical form of "the morning flights flying to denver".
pub const MORNING_FLIGHTS_LF: &str = "qterm(the;[non_symmetric_determiner],
    A;[flight],
        [and,
          [flight,(A;[flight])],
          [n_n_rel,
              (B;[day_part]) [and,
                              [morning,
                              (B;[day_part])]]
            ;[[day_part]],[prop],
            A;[flight]],
          exists(C;[flight],
                        [and,
                          [fly,(C;[flight])],
                          [actor,(C;[flight]),
                                     (A;[flight])],
                          [has_aspect,
                                  (C;[flight]),
                                  (in_progress;[aspect])],
                          [to,(C;[flight]),
                                  ('DENVER';[city])]])])
;[flight]";


impl Toy {
    pub fn parser(&self, rules: &[SortRule]) -> Parser<'_> {
        Parser::new(&self.grammar, &self.lexicon, rules, self.h(), ParserConfig::default()).unwrap()
    }

    /// The whole corpus parsed under the generated signatures.
    pub fn parse_with_signatures(&self) -> Vec<ParseResult> {
        self.parser(&self.sigs.rules).parse_corpus(&self.corpus)
    }
}
