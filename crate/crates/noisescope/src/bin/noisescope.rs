fn main() {
    noisescope::cli::main()
}
