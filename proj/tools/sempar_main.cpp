// Placeholder entry point; subcommands land with the full CLI.
int main() { return 0; }
