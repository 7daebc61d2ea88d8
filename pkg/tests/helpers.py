"""Independent numerical oracles used across the tests."""
import math

import numpy as np


def cauchy_oracle(f, z0, n, radius=0.05, nodes=64):
    """n-th derivative of an analytic callable from the Cauchy integral on a
    small circle around z0 (spectrally accurate trapezoid rule)."""
    w = z0 + radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    vals = np.array([f(x) for x in w])
    return complex(math.factorial(n) * np.mean(vals / (w - z0) ** n))


def richardson_derivative(f, z0, h=1e-4):
    """First derivative by central differences with one Richardson step."""
    d1 = (f(z0 + h) - f(z0 - h)) / (2 * h)
    d2 = (f(z0 + h / 2) - f(z0 - h / 2)) / h
    return (4 * d2 - d1) / 3


def max_principal_angle_sin(X, Y):
    """sin of the largest principal angle between two column spans."""
    import scipy.linalg

    return float(np.sin(np.max(scipy.linalg.subspace_angles(X, Y))))
