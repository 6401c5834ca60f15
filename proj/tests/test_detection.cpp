int acceptance_placeholder_test_detection() { return 0; }
