"""Published reference values (41-user corpus), used as renderer fixtures.

Not reproducible from the synthetic corpus; kept for layout and bookkeeping checks.
"""

from ..config import FULL_GRID, VARIANTS

# EER per (w, w_in); columns follow VARIANTS order.
PUBLISHED_EER: dict[tuple[int, int], tuple[float, ...]] = {
    (40, 30): (0.091, 0.186, 0.102, 0.169, 0.085, 0.074, 0.066, 0.073, 0.069, 0.060, 0.070, 0.060),
    (50, 30): (0.085, 0.184, 0.107, 0.159, 0.082, 0.063, 0.056, 0.054, 0.049, 0.042, 0.053, 0.047),
    (50, 40): (0.078, 0.182, 0.093, 0.144, 0.068, 0.067, 0.064, 0.062, 0.070, 0.059, 0.059, 0.055),
    (60, 40): (0.075, 0.172, 0.095, 0.136, 0.059, 0.053, 0.050, 0.048, 0.054, 0.046, 0.042, 0.044),
    (60, 50): (0.073, 0.168, 0.103, 0.120, 0.055, 0.061, 0.053, 0.054, 0.060, 0.052, 0.065, 0.051),
    (70, 40): (0.070, 0.160, 0.098, 0.132, 0.063, 0.045, 0.045, 0.042, 0.036, 0.038, 0.041, 0.030),
    (70, 50): (0.063, 0.154, 0.082, 0.119, 0.051, 0.043, 0.036, 0.036, 0.039, 0.040, 0.038, 0.040),
    (70, 60): (0.067, 0.158, 0.086, 0.116, 0.047, 0.071, 0.050, 0.055, 0.056, 0.051, 0.063, 0.054),
    (80, 50): (0.063, 0.150, 0.090, 0.111, 0.040, 0.035, 0.044, 0.039, 0.038, 0.036, 0.035, 0.036),
    (80, 60): (0.054, 0.160, 0.081, 0.104, 0.039, 0.038, 0.035, 0.031, 0.034, 0.029, 0.053, 0.026),
    (80, 70): (0.063, 0.170, 0.092, 0.089, 0.037, 0.052, 0.045, 0.047, 0.054, 0.067, 0.049, 0.050),
    (90, 50): (0.056, 0.146, 0.090, 0.116, 0.046, 0.038, 0.031, 0.041, 0.041, 0.035, 0.029, 0.026),
    (90, 60): (0.053, 0.130, 0.097, 0.094, 0.039, 0.030, 0.029, 0.040, 0.040, 0.028, 0.029, 0.025),
    (90, 70): (0.047, 0.140, 0.095, 0.087, 0.034, 0.042, 0.031, 0.027, 0.031, 0.041, 0.035, 0.037),
    (100, 60): (0.051, 0.143, 0.085, 0.096, 0.039, 0.031, 0.032, 0.028, 0.025, 0.027, 0.030, 0.030),
    (100, 70): (0.065, 0.130, 0.088, 0.086, 0.032, 0.029, 0.027, 0.032, 0.027, 0.031, 0.032, 0.035),
    (110, 60): (0.053, 0.127, 0.099, 0.103, 0.038, 0.028, 0.025, 0.030, 0.031, 0.027, 0.023, 0.026),
    (110, 70): (0.054, 0.149, 0.084, 0.094, 0.037, 0.023, 0.023, 0.034, 0.036, 0.034, 0.035, 0.031),
    (120, 70): (0.056, 0.126, 0.084, 0.097, 0.033, 0.036, 0.027, 0.036, 0.029, 0.044, 0.042, 0.037),
    (130, 70): (0.055, 0.137, 0.081, 0.092, 0.033, 0.048, 0.047, 0.062, 0.036, 0.045, 0.052, 0.038),
}
PUBLISHED_EER_AVG: tuple[float, ...] = (0.064, 0.154, 0.092, 0.113, 0.048, 0.045, 0.041, 0.044, 0.043, 0.042, 0.044, 0.039)

# Forecast MSE per 3Dfrom2D variant; columns follow FULL_GRID order.
PUBLISHED_MSE: dict[str, tuple[float, ...]] = {
    "3Dfrom2D_W": (0.38, 0.45, 0.38, 0.41, 0.38, 0.41, 0.41, 0.38, 0.40, 0.38, 0.37, 0.42, 0.39, 0.38, 0.40, 0.39, 0.39, 0.37, 0.37, 0.41),
    "3Dfrom2D_WES": (0.36, 0.40, 0.38, 0.39, 0.36, 0.39, 0.40, 0.34, 0.39, 0.35, 0.34, 0.40, 0.40, 0.37, 0.38, 0.37, 0.38, 0.37, 0.37, 0.43),
    "3Dfrom2D_WESH": (0.35, 0.38, 0.34, 0.36, 0.36, 0.38, 0.37, 0.34, 0.38, 0.36, 0.35, 0.39, 0.38, 0.35, 0.38, 0.37, 0.40, 0.38, 0.37, 0.38),
    "3Dfrom2D_WESK": (0.33, 0.38, 0.35, 0.38, 0.35, 0.40, 0.36, 0.34, 0.38, 0.36, 0.33, 0.39, 0.37, 0.35, 0.38, 0.38, 0.38, 0.38, 0.37, 0.36),
    "3Dfrom2D_WESA": (0.33, 0.38, 0.35, 0.38, 0.35, 0.40, 0.36, 0.34, 0.38, 0.36, 0.33, 0.39, 0.37, 0.35, 0.38, 0.38, 0.38, 0.38, 0.37, 0.36),
    "3Dfrom2D_WESHK": (0.35, 0.39, 0.34, 0.38, 0.35, 0.39, 0.38, 0.34, 0.38, 0.36, 0.34, 0.40, 0.38, 0.36, 0.38, 0.36, 0.40, 0.39, 0.38, 0.38),
    "3Dfrom2D_WESHA": (0.34, 0.38, 0.35, 0.36, 0.35, 0.40, 0.38, 0.33, 0.39, 0.37, 0.34, 0.39, 0.37, 0.36, 0.38, 0.37, 0.38, 0.37, 0.37, 0.37),
    "3Dfrom2D_WESKA": (0.33, 0.37, 0.34, 0.37, 0.34, 0.39, 0.38, 0.33, 0.39, 0.37, 0.34, 0.40, 0.38, 0.37, 0.38, 0.37, 0.41, 0.38, 0.36, 0.37),
    "3Dfrom2D_WESHKA": (0.32, 0.35, 0.33, 0.36, 0.34, 0.36, 0.35, 0.36, 0.37, 0.37, 0.32, 0.38, 0.35, 0.35, 0.36, 0.36, 0.37, 0.34, 0.35, 0.35),
}

assert tuple(PUBLISHED_EER) == FULL_GRID
assert all(len(v) == len(VARIANTS) for v in PUBLISHED_EER.values())
assert all(len(v) == len(FULL_GRID) for v in PUBLISHED_MSE.values())
