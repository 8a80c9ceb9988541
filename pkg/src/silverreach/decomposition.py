"""Similarity transform that splits each plant into its two modes.

Per subsystem ``z_i = T_i @ zhat_i`` with

    T_i = [[1, 1], [pi_i, -pi_i]] / sqrt(1 + pi_i**2)

so ``zhat_i = (unstable, stable)``.  Stacking gives ``eta = (zhat_1, zhat_2)``;
the permutation regroups it as ``(eta1, eta3 | eta2, eta4)``, unstable
coordinates first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .systems import CoupledSystem, StateLike, as_state_array

#: ``grouped = stacked[PERMUTATION]``; the permutation is its own inverse.
PERMUTATION = (0, 2, 1, 3)


def subsystem_transform(pi: float) -> np.ndarray:
    return np.array([[1.0, 1.0], [pi, -pi]]) / math.sqrt(1.0 + pi * pi)


def subsystem_transform_inv(pi: float) -> np.ndarray:
    # closed-form inverse of subsystem_transform
    return np.array([[pi, 1.0], [pi, -1.0]]) * (math.sqrt(1.0 + pi * pi) / (2.0 * pi))


@dataclass(frozen=True, eq=False)
class ModalTransform:
    """Block transform ``diag(t1, t2)`` plus the grouping permutation."""

    t1: np.ndarray
    t2: np.ndarray
    t1_inv: np.ndarray
    t2_inv: np.ndarray
    perm: tuple[int, int, int, int] = PERMUTATION

    @property
    def block(self) -> np.ndarray:
        """``T = diag(t1, t2)``."""
        t = np.zeros((4, 4))
        t[:2, :2] = self.t1
        t[2:, 2:] = self.t2
        return t

    @property
    def block_inv(self) -> np.ndarray:
        t = np.zeros((4, 4))
        t[:2, :2] = self.t1_inv
        t[2:, 2:] = self.t2_inv
        return t

    @property
    def perm_matrix(self) -> np.ndarray:
        """``Pi`` with ``grouped = Pi @ stacked``."""
        return np.eye(4)[list(self.perm)]

    def det_t1(self) -> float:
        return float(np.linalg.det(self.t1))

    def det_t2(self) -> float:
        return float(np.linalg.det(self.t2))


def build_transform(sys: CoupledSystem) -> ModalTransform:
    return ModalTransform(
        t1=subsystem_transform(sys.pi1),
        t2=subsystem_transform(sys.pi2),
        t1_inv=subsystem_transform_inv(sys.pi1),
        t2_inv=subsystem_transform_inv(sys.pi2),
    )


def subsystem_det(pi: float) -> float:
    """Closed form of ``det(T_i) = -2 pi / (1 + pi**2)``."""
    return -2.0 * pi / (1.0 + pi * pi)


def to_modal(tf: ModalTransform, z: StateLike) -> np.ndarray:
    """Map a physical state to grouped modal coordinates ``Pi @ T^-1 @ z``.

    The result is ``(eta1, eta3, eta2, eta4)``: entries 0-1 are the unstable
    modes of plants 1 and 2, entries 2-3 the stable modes.
    """
    z = as_state_array(z)
    stacked = np.concatenate([tf.t1_inv @ z[:2], tf.t2_inv @ z[2:]])
    return stacked[list(tf.perm)]


def from_modal(tf: ModalTransform, eta) -> np.ndarray:
    """Inverse of :func:`to_modal`."""
    eta = np.asarray(eta, dtype=float).reshape(4)
    stacked = np.empty(4)
    stacked[list(tf.perm)] = eta
    return np.concatenate([tf.t1 @ stacked[:2], tf.t2 @ stacked[2:]])


def modal_input_column(pi: float, v: float = 1.0) -> np.ndarray:
    """Input column of ``zhat_i``: ``v sqrt(1 + pi**2) / 2 * (pi, -pi)``."""
    return v * math.sqrt(1.0 + pi * pi) / 2.0 * np.array([pi, -pi])
