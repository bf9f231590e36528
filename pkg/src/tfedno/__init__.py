"""Dirichlet-Neumann operator on a cylinder by transformed field expansion."""
