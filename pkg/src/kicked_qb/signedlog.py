"""Overflow-safe products of signed reals.

Partition functions of a thousand-site chain at low temperature overflow
double precision by thousands of decades, and the parity-weighted traces of
self-modes may be negative or zero. Values are therefore carried as
``(log|x|, sign(x))`` with ``log|0| = -inf`` and ``sign(0) = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SignedLog", "to_signed_log", "leave_one_out", "signed_sum"]


@dataclass(frozen=True)
class SignedLog:
    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign == 0 or self.log_magnitude == -np.inf:
            object.__setattr__(self, "sign", 0)
            object.__setattr__(self, "log_magnitude", -np.inf)

    @classmethod
    def from_float(cls, x: float) -> "SignedLog":
        with np.errstate(divide="ignore"):
            return cls(float(np.log(abs(x))), int(np.sign(x)))

    @classmethod
    def product(cls, logs, signs) -> "SignedLog":
        signs = np.asarray(signs)
        if np.any(signs == 0):
            return cls(-np.inf, 0)
        return cls(float(np.sum(logs)), int(np.prod(signs)))

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        return SignedLog(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        if other.sign == 0:
            raise ZeroDivisionError("division by a signed-log zero")
        return SignedLog(self.log_magnitude - other.log_magnitude, self.sign * other.sign)

    def __float__(self) -> float:
        return float(self.sign * np.exp(self.log_magnitude)) if self.sign else 0.0


def to_signed_log(x):
    """Elementwise ``(log|x|, sign x)`` for an array."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x)), np.sign(x)


def leave_one_out(logs, signs):
    """Products over all entries but one, via prefix and suffix sums.

    Exact zeros are handled without division, so a single vanishing factor
    leaves its own leave-one-out product finite.
    """
    logs = np.asarray(logs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    n = len(logs)
    pre_log = np.zeros(n + 1)
    pre_sign = np.ones(n + 1)
    pre_log[1:] = np.cumsum(logs)
    pre_sign[1:] = np.cumprod(signs)
    suf_log = np.zeros(n + 1)
    suf_sign = np.ones(n + 1)
    suf_log[:-1] = np.cumsum(logs[::-1])[::-1]
    suf_sign[:-1] = np.cumprod(signs[::-1])[::-1]
    out_log = pre_log[:-1] + suf_log[1:]
    out_sign = pre_sign[:-1] * suf_sign[1:]
    out_log = np.where(out_sign == 0, -np.inf, out_log)
    return out_log, out_sign


def signed_sum(logs, signs) -> SignedLog:
    """``sum_i sign_i exp(logs_i)`` as a SignedLog."""
    logs = np.asarray(logs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    keep = signs != 0
    if not np.any(keep):
        return SignedLog(-np.inf, 0)
    # scipy's logsumexp(..., b=signs, return_sign=True) returns nan for some
    # mixed-sign inputs (scipy 1.15), so the shifted sum is done directly
    logs, signs = logs[keep], signs[keep]
    shift = float(np.max(logs))
    total = float(np.sum(signs * np.exp(logs - shift)))
    if total == 0.0:
        return SignedLog(-np.inf, 0)
    return SignedLog(shift + math.log(abs(total)), 1 if total > 0 else -1)
