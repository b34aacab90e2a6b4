fn main() {
    std::process::exit(hawkes_diffusion::cli::run());
}
