fn main() -> std::process::ExitCode {
    gp2s::cli::run()
}
