fn main() -> std::process::ExitCode {
    klrfs::cli::main()
}
