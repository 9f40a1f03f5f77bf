fn main() -> std::process::ExitCode {
    graze::cli::main()
}
