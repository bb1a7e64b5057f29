"""Hybrid component-mode model reduction.

Splits a model into master DOFs (kept physically: every sensing and
loading point) and slave DOFs (condensed), and builds a reduced basis
from static constraint modes, a truncated set of slave eigenmodes and a
residual-flexibility correction. Master displacements are preserved
exactly in the reduced coordinates, which is what lets measured channels
plug straight into the reduced model.
"""
from __future__ import annotations

import io
import json
import os
import zipfile
from dataclasses import dataclass

import numpy as np
import scipy.io

from . import numerics
from .errors import NotPositiveDefinite, ParseError, SingularSlaveBlock, UnknownLabel
from .model import FullModel


@dataclass(frozen=True)
class Partition:
    """Ordered master/slave split of a model's DOF indices."""

    master: np.ndarray
    slave: np.ndarray

    def __post_init__(self):
        master = np.asarray(self.master, dtype=int)
        slave = np.asarray(self.slave, dtype=int)
        object.__setattr__(self, "master", master)
        object.__setattr__(self, "slave", slave)
        if master.size < 1:
            raise ValueError("at least one master DOF is required")
        combined = np.concatenate([master, slave])
        if np.unique(combined).size != combined.size:
            raise ValueError("master and slave index sets overlap or repeat")

    @property
    def n_master(self) -> int:
        return self.master.size

    @property
    def n_slave(self) -> int:
        return self.slave.size


def partition_by_labels(model: FullModel, master_labels) -> Partition:
    """Build a partition from master DOF labels; the rest become slaves."""
    master = []
    for lab in master_labels:
        try:
            master.append(model.label_index(lab))
        except KeyError:
            raise UnknownLabel(f"no DOF labelled {lab!r} in the model") from None
    master = np.asarray(master, dtype=int)
    slave = np.setdiff1d(np.arange(model.n), master)
    return Partition(master=master, slave=slave)


def constraint_modes(model: FullModel, part: Partition) -> np.ndarray:
    """Static slave response to unit master displacements.

    Solves ``K_ss Y = -K_sm``; each column is the slave deflection shape
    induced by holding one master DOF at unit displacement.
    """
    k_ss = model.k[np.ix_(part.slave, part.slave)]
    k_sm = model.k[np.ix_(part.slave, part.master)]
    if part.n_slave == 0:
        return np.zeros((0, part.n_master))
    try:
        fact = numerics.factorize(k_ss)
    except NotPositiveDefinite as exc:
        raise SingularSlaveBlock(str(exc)) from exc
    return -fact.solve(k_sm)


@dataclass(frozen=True)
class ReducedModel:
    """Reduced matrices plus the transformation back to physical DOFs.

    The reduced coordinate vector stacks the master physical displacements
    first, then the modal coordinates of the retained slave modes, so
    ``basis[:, :n_master]`` restricted to master rows is the identity.
    """

    m: np.ndarray
    c: np.ndarray
    k: np.ndarray
    basis: np.ndarray
    partition: Partition
    dof_labels: tuple
    constraint: np.ndarray
    slave_modes: np.ndarray
    slave_eigenvalues: np.ndarray
    damping_a: float
    damping_b: float

    @property
    def n_master(self) -> int:
        return self.partition.n_master

    @property
    def n_modes(self) -> int:
        return self.slave_eigenvalues.size

    @property
    def n_reduced(self) -> int:
        return self.m.shape[0]

    @property
    def master_labels(self) -> tuple:
        return tuple(self.dof_labels[i] for i in self.partition.master)


def reduce_model(
    model: FullModel,
    part: Partition,
    n_modes: int,
    damping_a: float = 0.0,
    damping_b: float = 0.0,
) -> ReducedModel:
    """Reduce a model to ``n_master + n_modes`` generalized coordinates.

    The basis combines constraint modes, the ``n_modes`` lowest
    mass-orthonormal slave eigenmodes and a residual-flexibility
    correction for the truncated slave dynamics. Damping is applied to
    the reduced matrices as ``C = a*M + b*K``.
    """
    ns = part.n_slave
    if not 1 <= n_modes <= ns:
        raise ValueError(f"n_modes must be in [1, {ns}], got {n_modes}")
    nm = part.n_master
    n = model.n
    m_idx, s_idx = part.master, part.slave

    k_ss = model.k[np.ix_(s_idx, s_idx)]
    m_ss = model.m[np.ix_(s_idx, s_idx)]
    m_sm = model.m[np.ix_(s_idx, m_idx)]

    upsilon = constraint_modes(model, part)
    gamma, psi = numerics.sym_generalized_eig(k_ss, m_ss, n_modes)

    nr = nm + n_modes
    t0 = np.zeros((n, nr))
    t0[m_idx, :nm] = np.eye(nm)
    t0[s_idx, :nm] = upsilon
    t0[s_idx, nm:] = psi

    m0 = numerics.symmetrize(t0.T @ model.m @ t0)
    k0 = numerics.symmetrize(t0.T @ model.k @ t0)

    # Residual flexibility: slave compliance not carried by the kept modes.
    try:
        kss_fact = numerics.factorize(k_ss)
    except NotPositiveDefinite as exc:
        raise SingularSlaveBlock(str(exc)) from exc
    f_rs = kss_fact.solve(np.eye(ns)) - psi @ ((1.0 / gamma)[:, None] * psi.T)
    f_rs = numerics.symmetrize(f_rs)

    coupling = f_rs @ (m_sm + m_ss @ upsilon)
    x = numerics.factorize(m0).solve(k0)
    basis = t0.copy()
    basis[s_idx, :] += coupling @ x[:nm, :]

    m_hat = numerics.symmetrize(basis.T @ model.m @ basis)
    k_hat = numerics.symmetrize(basis.T @ model.k @ basis)
    c_hat = damping_a * m_hat + damping_b * k_hat
    return ReducedModel(
        m=m_hat,
        c=c_hat,
        k=k_hat,
        basis=basis,
        partition=part,
        dof_labels=tuple(model.dof_labels),
        constraint=upsilon,
        slave_modes=psi,
        slave_eigenvalues=gamma,
        damping_a=damping_a,
        damping_b=damping_b,
    )


def eigenvalue_error(full: FullModel, reduced: ReducedModel, count: int) -> np.ndarray:
    """Percentage eigenvalue error of the reduced model per mode.

    ``100 * (lam_i - lam_red_i) / lam_i`` for the ``count`` lowest modes,
    with the full-model eigenvalues as reference.
    """
    if count > min(full.n, reduced.n_reduced):
        raise ValueError(
            f"count {count} exceeds available modes "
            f"({full.n} full, {reduced.n_reduced} reduced)"
        )
    lam_full = numerics.pencil_eigenvalues(full.k, full.m, count)
    lam_red = numerics.pencil_eigenvalues(reduced.k, reduced.m, count)
    return 100.0 * (lam_full - lam_red) / lam_full


def save_reduced(reduced: ReducedModel, path) -> None:
    """Serialize a reduced model to a single zip archive.

    Matrix Market blocks plus a JSON manifest holding dimensions, the
    partition indices, labels and damping coefficients, so the offline
    and online stages can run as separate processes.
    """
    manifest = {
        "n_master": reduced.n_master,
        "n_modes": reduced.n_modes,
        "master_dofs": reduced.partition.master.tolist(),
        "slave_dofs": reduced.partition.slave.tolist(),
        "dof_labels": list(reduced.dof_labels),
        "damping_a": reduced.damping_a,
        "damping_b": reduced.damping_b,
        "slave_eigenvalues": [float(g) for g in reduced.slave_eigenvalues],
    }
    blocks = {
        "m.mtx": reduced.m,
        "c.mtx": reduced.c,
        "k.mtx": reduced.k,
        "basis.mtx": reduced.basis,
        "constraint.mtx": reduced.constraint,
        "slave_modes.mtx": reduced.slave_modes,
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("manifest.json", json.dumps(manifest, indent=1))
        for name, block in blocks.items():
            buf = io.BytesIO()
            scipy.io.mmwrite(buf, np.atleast_2d(block), precision=17)
            zf.writestr(name, buf.getvalue())


def load_reduced(path) -> ReducedModel:
    """Read a reduced model archive written by :func:`save_reduced`."""
    if not os.path.exists(path):
        raise ParseError(f"no reduced-model archive at {path}")
    try:
        with zipfile.ZipFile(path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
            blocks = {}
            for name in ("m", "c", "k", "basis", "constraint", "slave_modes"):
                with zf.open(f"{name}.mtx") as fh:
                    blocks[name] = np.asarray(scipy.io.mmread(fh), dtype=float)
    except (KeyError, zipfile.BadZipFile, ValueError) as exc:
        raise ParseError(f"malformed reduced-model archive {path}: {exc}") from exc
    part = Partition(
        master=np.asarray(manifest["master_dofs"], dtype=int),
        slave=np.asarray(manifest["slave_dofs"], dtype=int),
    )
    n_master = manifest["n_master"]
    if blocks["m"].shape[0] != n_master + manifest["n_modes"]:
        raise ParseError("manifest dimensions disagree with matrix blocks")
    return ReducedModel(
        m=blocks["m"],
        c=blocks["c"],
        k=blocks["k"],
        basis=blocks["basis"],
        partition=part,
        dof_labels=tuple(manifest["dof_labels"]),
        constraint=blocks["constraint"].reshape(part.n_slave, n_master),
        slave_modes=blocks["slave_modes"].reshape(part.n_slave, manifest["n_modes"]),
        slave_eigenvalues=np.asarray(manifest["slave_eigenvalues"], dtype=float),
        damping_a=manifest["damping_a"],
        damping_b=manifest["damping_b"],
    )
