int acceptance_placeholder_test_channel() { return 0; }
