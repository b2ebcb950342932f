import numpy as np
from scipy.optimize import linear_sum_assignment


def multiset_distance(a, b) -> float:
    """Largest deviation under the best one-to-one matching of two point sets."""
    a, b = np.asarray(a), np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
