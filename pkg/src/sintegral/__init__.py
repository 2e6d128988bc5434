"""S-integral points on y^2 = x^3 + ax + b via elliptic logarithms and lattice reduction."""

__version__ = "0.1.0"
