fn main() -> std::process::ExitCode {
    qkdv::cli::run()
}
