fn main() -> std::process::ExitCode {
    vradam::cli::main()
}
