"""Spectral-Galerkin solver for the free Schrödinger equation with discrete
transparent boundary maps on the two unbounded walls."""
