//! Runs a pipeline manifest and prints the report table.

use infodemic_core::evaluate::{emit_report, ReportFormat};
use infodemic_core::pipeline::{run, RunManifest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).ok_or("usage: run_manifest MANIFEST")?;
    let summary = run(&RunManifest::load(path)?)?;
    print!("{}", emit_report(&summary.reports, ReportFormat::TableText)?);
    Ok(())
}
