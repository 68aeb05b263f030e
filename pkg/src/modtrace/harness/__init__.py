"""Experiment harness: configuration, validation, execution, health checks."""
