fn main() -> std::process::ExitCode {
    eckit::cli::main()
}
