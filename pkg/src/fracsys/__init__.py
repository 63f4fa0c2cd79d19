"""Fractal calculus on Cantor-like sets and linear fractal differential systems."""
