fn main() {
    ctxctr::cli::main()
}
