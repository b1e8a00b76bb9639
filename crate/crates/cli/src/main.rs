fn main() {
    std::process::exit(tripsum_tool::run(std::env::args_os()));
}
