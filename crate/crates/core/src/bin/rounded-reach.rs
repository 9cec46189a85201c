fn main() {
    std::process::exit(rounded_reach::cli::main_entry());
}
