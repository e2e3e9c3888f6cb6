//! Time every backend on a query suite and print the relative order.

use symphony::bench::{read_query_suite, run_bench, BenchOptions};
use symphony::ntriples::ParseMode;
use symphony::routing::default_policy;
use symphony::workspace::Workspace;

fn main() {
    let ws = Workspace::from_ntriples(include_str!("../data/mini_kg.nt"), ParseMode::Strict, default_policy()).unwrap();
    let suite = read_query_suite(include_str!("../data/mini_kg_queries.rq"));
    let opts = BenchOptions {
        repeat: 20,
        ..BenchOptions::default()
    };
    for line in run_bench(&ws, &suite, &opts).unwrap() {
        println!("{line}");
    }
}
