fn main() {
    std::process::exit(twistcalc::cli::run());
}
