"""Suite execution and graph generation."""
