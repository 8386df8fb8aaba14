"""Re-evaluation of sequence files, kept apart from the synthesis code path.

Works on the raw parsed JSON: local layers are applied as in-place updates of
row pairs instead of block-diagonal matrix products.
"""

import numpy as np


def _partial_products(coupler, steps):
    # Partial products are updated in place; consume them one at a time.
    coupler = np.asarray(coupler, dtype=float)
    M = np.eye(coupler.shape[0])
    yield M
    for step in steps:
        if step["type"] == "coupler":
            M = coupler @ M
        else:
            for m, block in enumerate(step["blocks"]):
                (a, b), (c, d) = block
                q = M[2 * m].copy()
                p = M[2 * m + 1].copy()
                M[2 * m] = a * q + b * p
                M[2 * m + 1] = c * q + d * p
        yield M


def left_fold(coupler, steps):
    """Product of ``steps`` (parsed JSON dicts, first applied first) with ``coupler``."""
    for M in _partial_products(coupler, steps):
        pass
    return M


def running_scale(coupler, steps):
    """Largest max-abs entry over all partial products (at least 1)."""
    return max(float(np.max(np.abs(M))) for M in _partial_products(coupler, steps))


def relative_difference(A, B, scale=1.0):
    """Max-abs difference over the largest of ``scale``, ``max|A|``, ``max|B|`` and 1.

    Pass the running scale of a product: cancellation down from large partial
    products costs digits no matter how the product is evaluated.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    scale = max(1.0, scale, float(np.max(np.abs(A))), float(np.max(np.abs(B))))
    return float(np.max(np.abs(A - B))) / scale
