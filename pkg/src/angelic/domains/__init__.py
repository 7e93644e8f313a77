"""Concrete abstractions: explicit graphs, region navigation and door puzzles."""
