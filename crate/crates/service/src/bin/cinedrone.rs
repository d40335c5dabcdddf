fn main() -> std::process::ExitCode {
    cinedrone_service::cli::main()
}
