fn main() {
    operlab::cli::main();
}
