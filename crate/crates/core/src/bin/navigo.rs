fn main() -> std::process::ExitCode {
    navigo::cli::main()
}
