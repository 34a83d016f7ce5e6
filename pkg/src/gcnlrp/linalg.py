"""Dense float64 matrix kernel: products, reductions, elementwise ops and the
Adam update used by the classifier.

All operations take and return 2-D numpy arrays of dtype float64. Shapes are
validated eagerly and results are checked for NaN/Inf so numerical corruption
surfaces at the operation that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ShapeError",
    "AdamState",
    "as_matrix",
    "matmul",
    "relu",
    "softmax_cross_entropy",
    "adam_step",
    "clamp_nonnegative",
    "column_max_with_argmax",
]


class ShapeError(ValueError):
    """Operands with incompatible dimensions."""


def as_matrix(data) -> np.ndarray:
    """Coerce nested sequences or an array to a 2-D float64 matrix.

    1-D input becomes a single row.
    """
    a = np.array(data, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got {a.ndim} dimensions")
    return a


def _finite(op: str, a: np.ndarray) -> np.ndarray:
    if not np.isfinite(a).all():
        raise ValueError(f"{op}: result contains non-finite entries")
    return a


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b."""
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return _finite("matmul", a @ b)


def relu(a: np.ndarray) -> np.ndarray:
    """Entrywise max(0, x)."""
    return _finite("relu", np.maximum(a, 0.0))


def clamp_nonnegative(a: np.ndarray) -> np.ndarray:
    """Entrywise max(0, x); floors a weight matrix after an optimizer step."""
    return _finite("clamp_nonnegative", np.maximum(a, 0.0))


def softmax_cross_entropy(logits: np.ndarray, gold: int) -> tuple[float, np.ndarray]:
    """Stabilized softmax cross-entropy for a single 1 x C logit row.

    Returns (loss, gradient) where loss = -log p[gold] and the gradient is
    p - onehot(gold), shape 1 x C. The max is subtracted before
    exponentiation so large logits cannot overflow.
    """
    if logits.shape[0] != 1:
        raise ShapeError(f"softmax_cross_entropy: expected a 1 x C row, got {logits.shape}")
    n_classes = logits.shape[1]
    if not 0 <= gold < n_classes:
        raise IndexError(f"gold class {gold} out of range for {n_classes} classes")
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    total = exp.sum()
    loss = float(np.log(total) - shifted[0, gold])
    grad = exp / total
    grad[0, gold] -= 1.0
    _finite("softmax_cross_entropy", grad)
    if not np.isfinite(loss):
        raise ValueError("softmax_cross_entropy: non-finite loss")
    return loss, grad


@dataclass
class AdamState:
    """Adam moment estimates for one parameter matrix.

    Mutated in place by adam_step; owned by exactly one trainer.
    """

    first_moment: np.ndarray
    second_moment: np.ndarray
    step: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_param(
        cls,
        param: np.ndarray,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> "AdamState":
        return cls(
            first_moment=np.zeros_like(param),
            second_moment=np.zeros_like(param),
            step=0,
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState) -> np.ndarray:
    """One bias-corrected Adam update; returns the new parameter matrix.

    state.step and both moments are updated in place.
    """
    if param.shape != grad.shape:
        raise ShapeError(f"adam_step: param {param.shape} vs grad {grad.shape}")
    if state.first_moment.shape != param.shape:
        raise ShapeError(
            f"adam_step: moment shape {state.first_moment.shape} vs param {param.shape}"
        )
    state.step += 1
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad
    state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * (grad * grad)
    m_hat = state.first_moment / (1.0 - state.beta1**state.step)
    v_hat = state.second_moment / (1.0 - state.beta2**state.step)
    updated = param - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return _finite("adam_step", updated)


def column_max_with_argmax(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column maximum and the smallest row index attaining it.

    Returns (values 1 x f, argmax_rows length f). Ties break to the lowest
    row index so relevance unpooling has a single well-defined winner.
    """
    if a.shape[0] < 1 or a.size == 0:
        raise ShapeError(f"column_max_with_argmax: empty matrix {a.shape}")
    values = a.max(axis=0, keepdims=True)
    argmax_rows = a.argmax(axis=0)
    return values, argmax_rows
