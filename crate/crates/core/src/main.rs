use clap::Parser;
use hodge_curves::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let report = run(&cli);
    match &report.error {
        Some(e) => eprintln!("{}: {} ({})", report.command, e.message, e.kind),
        None => {
            for b in &report.breaches {
                eprintln!("{}: {} = {:e} exceeds {:e}", report.command, b.field, b.value, b.limit);
            }
        }
    }
    println!("{} {:?} -> {}", report.command, report.status, cli.out.join(format!("{}.json", report.command)).display());
    std::process::exit(report.exit_code);
}
