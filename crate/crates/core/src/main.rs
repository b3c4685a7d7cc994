use clap::Parser;
use gibbslab::cli::{run, Args};

fn main() {
    let args = Args::parse();
    let report = run(&args);
    for f in &report.failures {
        eprintln!("check failed: {f}");
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    if let Some(m) = &report.manifest {
        eprintln!("{}: {} files in {:.1} s", m.command, m.outputs.len(), m.wall_seconds);
    }
    std::process::exit(report.exit_code);
}
