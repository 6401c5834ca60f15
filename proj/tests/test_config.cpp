int acceptance_placeholder_test_config() { return 0; }
