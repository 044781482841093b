fn main() -> std::process::ExitCode {
    biortho::cli::run(std::env::args_os())
}
