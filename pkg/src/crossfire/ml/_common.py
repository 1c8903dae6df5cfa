import numpy as np


def binary_targets(y):
    """``(classes, y01)`` with the second class as positive; rejects one-class input."""
    classes, y01 = np.unique(y, return_inverse=True)
    if classes.size != 2:
        raise ValueError(f"training needs exactly two classes, got {classes.size}")
    return classes, y01.astype(np.int64)
