fn main() {
    // CLI wired up after the experiment harness lands.
}
