fn main() {
    std::process::exit(mhd_evans::cli::main_exit());
}
