fn main() {
    fractopo::cli::run();
}
