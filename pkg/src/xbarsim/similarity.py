"""Linear centered kernel alignment between activation matrices.

cka(X, Y) = ||Yc^T Xc||_F^2 / (||Xc^T Xc||_F * ||Yc^T Yc||_F)

with Xc, Yc column-centered (features centered over samples). The
feature-space form avoids the t x t Gram matrices and is exact for
the linear kernel. Scores live in [0, 1]; 1 for identical inputs,
invariant to orthogonal transforms and isotropic scaling.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)


def cka_score(a: np.ndarray, b: np.ndarray) -> float:
    """Linear CKA between two (samples x features) activation matrices.

    Degenerate inputs with no variance score 0 (with a logged
    diagnostic) rather than raising: a constant activation carries no
    alignable structure.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("cka_score expects 2-D activation matrices")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"sample counts differ: {a.shape[0]} vs {b.shape[0]}")

    ac = a - a.mean(axis=0, keepdims=True)
    bc = b - b.mean(axis=0, keepdims=True)
    cross = np.linalg.norm(bc.T @ ac, "fro") ** 2
    norm_a = np.linalg.norm(ac.T @ ac, "fro")
    norm_b = np.linalg.norm(bc.T @ bc, "fro")
    if norm_a == 0.0 or norm_b == 0.0:
        logger.warning("cka_score: zero-variance input, returning 0")
        return 0.0
    return float(cross / (norm_a * norm_b))


def cka_matrix(activations: "list[np.ndarray]") -> np.ndarray:
    """Pairwise CKA over a list of activation matrices."""
    n = len(activations)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = cka_score(activations[i], activations[j])
    return out
