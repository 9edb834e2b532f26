# CLI integration tests
