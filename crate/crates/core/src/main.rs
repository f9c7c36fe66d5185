fn main() -> std::process::ExitCode {
    lfgabor::cli::main()
}
