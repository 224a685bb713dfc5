fn main() {
    std::process::exit(higgs_dt::cli::main_exit_code());
}
