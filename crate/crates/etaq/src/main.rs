use clap::Parser;

fn main() {
    if let Ok(raw) = std::env::var("ETAQ_THREADS") {
        match raw.parse::<usize>() {
            Ok(t) if t >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => eprintln!("warning: ignoring invalid ETAQ_THREADS value '{raw}'"),
        }
    }
    let cli = etaq::cli::Cli::parse();
    std::process::exit(etaq::cli::run(cli));
}
