fn main() {
    std::process::exit(rounded_reach::cli::generate::gen_main());
}
