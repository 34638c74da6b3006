fn main() -> std::process::ExitCode {
    anthroquest::cli::main()
}
