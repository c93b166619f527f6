fn main() {
    std::process::exit(capspec::run(std::env::args_os()));
}
