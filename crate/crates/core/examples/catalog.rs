//! The built-in metrics, their recorded properties, and spec file export.
//!
//! `cargo run --example catalog -- quartic2` prints that metric as a spec
//! file instead.

use mroot::catalog;
use mroot::spec_file;

pub fn main() {
    match std::env::args().nth(1) {
        Some(name) => export(&name),
        None => list(),
    }
}

pub fn export(name: &str) {
    match catalog::catalog_metric(name) {
        Ok(entry) => println!("{}", spec_file::to_json(&entry.spec)),
        Err(e) => eprintln!("{e}"),
    }
}

pub fn list() {
    for entry in catalog::all() {
        let s = &entry.spec;
        println!(
            "{} (n = {}, m = {}, {} coefficients)",
            entry.name,
            s.dimension(),
            s.degree(),
            s.coefficients().len()
        );
        for f in &entry.known_flags {
            println!(
                "    {:<24} {:<5}  {}",
                format!("{:?}", f.property),
                f.expected,
                f.provenance
            );
        }
        let text = spec_file::to_json(s);
        assert_eq!(&spec_file::parse_spec(&text).unwrap(), s);
    }
}
