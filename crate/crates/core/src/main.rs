fn main() -> std::process::ExitCode {
    uwoc_relay::cli::main()
}
