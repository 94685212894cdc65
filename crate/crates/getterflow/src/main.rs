fn main() -> std::process::ExitCode {
    getterflow::cli::run_main()
}
