int acceptance_placeholder_test_experiments() { return 0; }
