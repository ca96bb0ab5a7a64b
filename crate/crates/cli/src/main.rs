fn main() {
    std::process::exit(choquet_probit::run(std::env::args_os()));
}
