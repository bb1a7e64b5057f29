"""Measured-first reordering of reduced models.

Permutes the reduced matrices so the measured channels come first,
followed by the unmeasured master DOFs and then the modal coordinates.
Block views of that ordering (measured/coupling/unmeasured) are what the
online identification stage consumes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MeasuredModalCoordinate, UnknownLabel
from .rom import ReducedModel


@dataclass(frozen=True)
class PartitionedModel:
    """Reduced matrices in measured-first order plus index maps.

    ``permutation[i]`` is the reduced-coordinate index that occupies
    position ``i`` of the measured-first ordering. ``labels`` names every
    coordinate; modal coordinates are labelled ``q0, q1, ...``.
    """

    m: np.ndarray
    c: np.ndarray
    k: np.ndarray
    n_measured: int
    labels: tuple
    permutation: np.ndarray

    def __post_init__(self):
        n = self.m.shape[0]
        if self.k.shape != (n, n) or self.c.shape != (n, n):
            raise DimensionMismatch("m, k, c must share one dimension")
        if not 1 <= self.n_measured <= n:
            raise ValueError(f"n_measured must be in [1, {n}]")
        if len(self.labels) != n or self.permutation.shape != (n,):
            raise DimensionMismatch("labels/permutation length must equal dimension")

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @property
    def measured_labels(self) -> tuple:
        return self.labels[: self.n_measured]

    # Block views: measured x measured, measured x unmeasured, unmeasured x unmeasured.
    def blocks(self, a: np.ndarray):
        nm = self.n_measured
        return a[:nm, :nm], a[:nm, nm:], a[nm:, nm:]

    @property
    def m_mm(self):
        return self.m[: self.n_measured, : self.n_measured]

    @property
    def k_mm(self):
        return self.k[: self.n_measured, : self.n_measured]

    @property
    def c_mm(self):
        return self.c[: self.n_measured, : self.n_measured]

    def to_reduced_order(self, a: np.ndarray) -> np.ndarray:
        """Apply the inverse permutation, recovering reduced-coordinate order."""
        inv = np.empty_like(self.permutation)
        inv[self.permutation] = np.arange(self.n)
        a = np.asarray(a)
        if a.ndim == 1:
            return a[inv]
        return a[np.ix_(inv, inv)]

    @classmethod
    def from_matrices(cls, m, c, k, n_measured: int, labels=None) -> "PartitionedModel":
        """Wrap explicit matrices already in measured-first order.

        Convenience for small hand-built systems where the first
        ``n_measured`` coordinates are the sensor channels.
        """
        m = np.asarray(m, dtype=float)
        c = np.asarray(c, dtype=float)
        k = np.asarray(k, dtype=float)
        n = m.shape[0]
        if labels is None:
            labels = tuple(f"{i}:x" for i in range(n))
        return cls(
            m=m,
            c=c,
            k=k,
            n_measured=n_measured,
            labels=tuple(labels),
            permutation=np.arange(n),
        )


def reorder(reduced: ReducedModel, measured_labels) -> PartitionedModel:
    """Permute a reduced model into measured-first ordering.

    Every measured label must name a master physical DOF of the reduced
    model; labels resolving to condensed (slave) DOFs raise
    MeasuredModalCoordinate. The unmeasured masters keep their original
    relative order, followed by the modal coordinates.
    """
    if len(measured_labels) == 0:
        raise ValueError("at least one measured label is required")
    master_labels = list(reduced.master_labels)
    measured_pos = []
    for lab in measured_labels:
        if lab in master_labels:
            pos = master_labels.index(lab)
            if pos in measured_pos:
                raise ValueError(f"measured label {lab!r} given twice")
            measured_pos.append(pos)
        elif lab in reduced.dof_labels:
            raise MeasuredModalCoordinate(
                f"label {lab!r} is a condensed slave DOF; measured channels "
                "must be master DOFs"
            )
        else:
            raise UnknownLabel(f"no DOF labelled {lab!r} in the reduced model")
    nm = reduced.n_master
    unmeasured_pos = [i for i in range(nm) if i not in measured_pos]
    perm = np.array(
        measured_pos + unmeasured_pos + list(range(nm, reduced.n_reduced)), dtype=int
    )
    labels = (
        list(measured_labels)
        + [master_labels[i] for i in unmeasured_pos]
        + [f"q{j}" for j in range(reduced.n_modes)]
    )
    ix = np.ix_(perm, perm)
    return PartitionedModel(
        m=reduced.m[ix],
        c=reduced.c[ix],
        k=reduced.k[ix],
        n_measured=len(measured_pos),
        labels=tuple(labels),
        permutation=perm,
    )
