"""Exact arithmetic, lattice series and cocycle evaluation for imaginary quadratic orders."""
