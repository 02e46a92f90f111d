fn main() {
    // HYPPP_THREADS caps the rayon pool used for subset sums.
    if let Ok(raw) = std::env::var("HYPPP_THREADS") {
        match raw.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => {
                eprintln!("error: HYPPP_THREADS must be a positive integer, got {raw:?}");
                std::process::exit(2);
            }
        }
    }
    std::process::exit(hyppp::cli::run(std::env::args_os()));
}
