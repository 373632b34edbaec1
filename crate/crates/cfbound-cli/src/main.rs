fn main() {
    // subcommands wired up once the library surface is complete
}
