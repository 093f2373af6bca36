"""Built-in experiments, one module per family."""
