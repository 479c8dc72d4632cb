fn main() {
    std::process::exit(finger_reflex::cli::main());
}
