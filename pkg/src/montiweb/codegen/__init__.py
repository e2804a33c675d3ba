"""Static site generation from linked models."""
