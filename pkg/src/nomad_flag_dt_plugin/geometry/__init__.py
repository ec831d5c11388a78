"""Exterior calculus and invariant gauge theory on SU(3)/T^2, free of nomad."""
