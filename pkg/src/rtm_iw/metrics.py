import numpy as np

from .tsetlin import InvalidInputError


def mae(predictions, targets) -> float:
    """Mean absolute error, in whatever units the inputs share."""
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise InvalidInputError(f"length mismatch: {p.shape} predictions vs {t.shape} targets")
    if p.size == 0:
        raise InvalidInputError("mae of an empty sequence")
    return float(np.mean(np.abs(p - t)))
