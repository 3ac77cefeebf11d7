"""Minimal dense numeric kernel shared by all learning modules."""

from .gradcheck import gradient_check
from .matrix import MASK_SENTINEL, Matrix, ParamStore, as_array
from .ops import (adam_step, bce_loss, bce_loss_arr, matmul, row_softmax,
                  row_softmax_arr, sigmoid)

__all__ = [
    "MASK_SENTINEL", "Matrix", "ParamStore", "as_array",
    "matmul", "row_softmax", "row_softmax_arr", "sigmoid",
    "bce_loss", "bce_loss_arr", "adam_step", "gradient_check",
]
