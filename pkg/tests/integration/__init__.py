# Integration tests running small suites through the CLI
