fn main() {
    std::process::exit(moment2d::run());
}
