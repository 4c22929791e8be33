//! Acquisition of sortal rules: sort algebra, sort-annotated logical forms, a
//! chart parser that licenses predications against a rule set, harvesting with
//! probability estimates, mapping against a reference, and the iteration loop.

pub mod evalmap;
pub mod grammar;
pub mod harvest;
pub mod lf;
pub mod parser;
pub mod pipeline;
pub mod siggen;
pub mod sort;
pub mod syntax;
