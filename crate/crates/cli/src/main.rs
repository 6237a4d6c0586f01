use clap::Parser;

fn main() {
    // clap exits 2 on bad usage and 0 on --help/--version by itself
    let cli = fractal_spectra::Cli::parse();
    std::process::exit(fractal_spectra::run(cli));
}
