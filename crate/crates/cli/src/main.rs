fn main() {
    std::process::exit(i32::from(relstring_cli::run()));
}
