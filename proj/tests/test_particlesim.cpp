int acceptance_placeholder_test_particlesim() { return 0; }
