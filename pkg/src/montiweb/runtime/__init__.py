"""Object store, validation and activity interpreter."""
