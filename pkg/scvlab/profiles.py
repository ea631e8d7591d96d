"""Smoothstep profiles

Polynomial bridges from 0 (t <= 0) to 1 (t >= 1), used for cutoffs,
mollifier bumps and the extension-weight profile chi.
"""

import numpy as np


def smoothstep3(t):
    """3t^2 - 2t^3, C^1"""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3 - 2 * t)


def smoothstep3_slope(t):
    """Derivative of smoothstep3"""
    inside = (t > 0) & (t < 1)
    return np.where(inside, 6 * t * (1 - t), 0.0)


def smoothstep5(t):
    """6t^5 - 15t^4 + 10t^3, C^2"""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10 + t * (-15 + 6 * t))


def smoothstep5_slope(t):
    """Derivative of smoothstep5"""
    inside = (t > 0) & (t < 1)
    return np.where(inside, 30 * t * t * (1 - t) ** 2, 0.0)
