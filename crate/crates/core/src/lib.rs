pub mod algebra;
pub mod axioms;
pub mod chart;
pub mod examples;
pub mod greedy;
pub mod multiturn;
pub mod oracle;
pub mod relations;
pub mod report;
pub mod words;
