"""Desk-scale structural models.

Builds cantilever Euler-Bernoulli beams and spring-mass chains, imports
arbitrary mass/stiffness matrices from Matrix Market files, and applies
mass/stiffness-proportional (Rayleigh) damping. All models are dense and
immutable once assembled.

DOF labels are ``node:direction`` strings: the beam uses ``w`` (transverse
deflection) and ``r`` (rotation) per node, the chain uses ``x``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from . import mmarket
from .errors import AsymmetricInput, DimensionMismatch, InvalidSpec, ParseError

_MODEL_FILES = ("mass.mtx", "stiffness.mtx", "damping.mtx", "labels.txt", "meta.json")


@dataclass(frozen=True)
class BeamSpec:
    """Geometry and material of a rectangular cantilever beam.

    Defaults are a thin aluminum strip (170 x 13 x 1.2 mm, E = 69 GPa)
    that serves as the standard desk-scale testbed.
    """

    length: float = 0.170
    width: float = 0.013
    thickness: float = 0.0012
    youngs_modulus: float = 69e9
    density: float = 2700.0
    n_elements: int = 50
    clamped_node: int = 0

    def validate(self) -> None:
        for name in ("length", "width", "thickness", "youngs_modulus", "density"):
            if getattr(self, name) <= 0:
                raise InvalidSpec(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_elements < 1:
            raise InvalidSpec(f"n_elements must be >= 1, got {self.n_elements}")
        if not 0 <= self.clamped_node <= self.n_elements:
            raise InvalidSpec(
                f"clamped_node must be a node index in [0, {self.n_elements}]"
            )

    @property
    def area(self) -> float:
        return self.width * self.thickness

    @property
    def second_moment(self) -> float:
        return self.width * self.thickness**3 / 12.0


@dataclass(frozen=True)
class FullModel:
    """Assembled mass/damping/stiffness matrices with DOF bookkeeping.

    ``constrained_dofs`` lists the labels of DOFs already eliminated by
    boundary conditions; the matrices only cover the free DOFs.
    """

    m: np.ndarray
    k: np.ndarray
    c: np.ndarray
    dof_labels: tuple
    constrained_dofs: tuple = ()

    def __post_init__(self):
        n = self.m.shape[0]
        if self.k.shape != (n, n) or self.c.shape != (n, n):
            raise DimensionMismatch("m, k, c must share one dimension")
        if len(self.dof_labels) != n:
            raise DimensionMismatch(
                f"{len(self.dof_labels)} labels for {n} degrees of freedom"
            )

    @property
    def n(self) -> int:
        return self.m.shape[0]

    def label_index(self, label: str) -> int:
        try:
            return self.dof_labels.index(label)
        except ValueError:
            raise KeyError(label) from None


def _beam_element_matrices(ei: float, rho_a: float, le: float):
    l2 = le * le
    ke = (ei / le**3) * np.array(
        [
            [12.0, 6.0 * le, -12.0, 6.0 * le],
            [6.0 * le, 4.0 * l2, -6.0 * le, 2.0 * l2],
            [-12.0, -6.0 * le, 12.0, -6.0 * le],
            [6.0 * le, 2.0 * l2, -6.0 * le, 4.0 * l2],
        ]
    )
    me = (rho_a * le / 420.0) * np.array(
        [
            [156.0, 22.0 * le, 54.0, -13.0 * le],
            [22.0 * le, 4.0 * l2, 13.0 * le, -3.0 * l2],
            [54.0, 13.0 * le, 156.0, -22.0 * le],
            [-13.0 * le, -3.0 * l2, -22.0 * le, 4.0 * l2],
        ]
    )
    return ke, me


def build_cantilever_beam(spec: BeamSpec, clamp: bool = True) -> FullModel:
    """Assemble a consistent-mass Euler-Bernoulli cantilever beam.

    Two DOFs per node (transverse deflection ``w``, rotation ``r``); the
    clamped node's DOFs are eliminated by row/column deletion, which keeps
    the stiffness matrix positive definite. Pass ``clamp=False`` to get
    the unconstrained free-free beam.
    """
    spec.validate()
    n_nodes = spec.n_elements + 1
    ndof = 2 * n_nodes
    le = spec.length / spec.n_elements
    ke, me = _beam_element_matrices(
        spec.youngs_modulus * spec.second_moment, spec.density * spec.area, le
    )
    k = np.zeros((ndof, ndof))
    m = np.zeros((ndof, ndof))
    for e in range(spec.n_elements):
        sl = slice(2 * e, 2 * e + 4)
        k[sl, sl] += ke
        m[sl, sl] += me
    labels = []
    for node in range(n_nodes):
        labels.append(f"{node}:w")
        labels.append(f"{node}:r")
    if not clamp:
        return FullModel(m=m, k=k, c=np.zeros_like(m), dof_labels=tuple(labels))
    clamped = [2 * spec.clamped_node, 2 * spec.clamped_node + 1]
    keep = np.setdiff1d(np.arange(ndof), clamped)
    return FullModel(
        m=m[np.ix_(keep, keep)],
        k=k[np.ix_(keep, keep)],
        c=np.zeros((keep.size, keep.size)),
        dof_labels=tuple(labels[i] for i in keep),
        constrained_dofs=tuple(labels[i] for i in clamped),
    )


def build_spring_mass_chain(
    n_masses: int, mass: float = 1.0, stiffness: float = 1.0, fixed_ends: int = 1
) -> FullModel:
    """Assemble a lumped-mass chain of point masses joined by springs.

    ``fixed_ends`` anchors 0, 1 or 2 chain ends to ground. One anchored
    end gives the classic grounded chain with positive definite stiffness.
    """
    if n_masses < 1:
        raise InvalidSpec(f"n_masses must be >= 1, got {n_masses}")
    if mass <= 0 or stiffness <= 0:
        raise InvalidSpec("mass and stiffness must be positive")
    if fixed_ends not in (0, 1, 2):
        raise InvalidSpec("fixed_ends must be 0, 1 or 2")
    n = n_masses
    m = mass * np.eye(n)
    k = np.zeros((n, n))
    for i in range(n - 1):
        sl = slice(i, i + 2)
        k[sl, sl] += stiffness * np.array([[1.0, -1.0], [-1.0, 1.0]])
    if fixed_ends >= 1:
        k[0, 0] += stiffness
    if fixed_ends == 2:
        k[-1, -1] += stiffness
    labels = tuple(f"{i}:x" for i in range(n))
    return FullModel(m=m, k=k, c=np.zeros_like(m), dof_labels=labels)


def rayleigh_damping(model: FullModel, a: float, b: float) -> FullModel:
    """Return a copy of the model with damping ``c = a*m + b*k``."""
    if a < 0 or b < 0:
        raise InvalidSpec("damping coefficients must be nonnegative")
    return replace(model, c=a * model.m + b * model.k)


def import_matrices(m_path, k_path, labels_path=None) -> FullModel:
    """Build a FullModel from Matrix Market mass and stiffness files.

    Both matrices must be square, symmetric within 1e-9 relative and of
    equal dimension. Damping is zero; labels default to ``i:u`` when no
    label file is given (one ``node:direction`` string per line, line
    index = DOF index).
    """
    m = mmarket.read_matrix(m_path)
    k = mmarket.read_matrix(k_path)
    for name, a in (("mass", m), ("stiffness", k)):
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParseError(f"{name} matrix is not square: shape {a.shape}")
        scale = np.abs(a).max() or 1.0
        if np.abs(a - a.T).max() > 1e-9 * scale:
            raise AsymmetricInput(f"{name} matrix is not symmetric within 1e-9 relative")
    if m.shape != k.shape:
        raise DimensionMismatch(f"mass {m.shape} and stiffness {k.shape} differ")
    if labels_path is not None:
        with open(labels_path) as fh:
            labels = tuple(line.strip() for line in fh if line.strip())
        if len(labels) != m.shape[0]:
            raise DimensionMismatch(
                f"label file has {len(labels)} entries for {m.shape[0]} DOFs"
            )
    else:
        labels = tuple(f"{i}:u" for i in range(m.shape[0]))
    return FullModel(m=m, k=k, c=np.zeros_like(m), dof_labels=labels)


def save_model(model: FullModel, directory) -> None:
    """Write a model to a directory (Matrix Market blocks + label file)."""
    os.makedirs(directory, exist_ok=True)
    mmarket.write_matrix(os.path.join(directory, "mass.mtx"), model.m)
    mmarket.write_matrix(os.path.join(directory, "stiffness.mtx"), model.k)
    mmarket.write_matrix(os.path.join(directory, "damping.mtx"), model.c)
    with open(os.path.join(directory, "labels.txt"), "w") as fh:
        fh.writelines(f"{lab}\n" for lab in model.dof_labels)
    with open(os.path.join(directory, "meta.json"), "w") as fh:
        json.dump({"constrained_dofs": list(model.constrained_dofs)}, fh, indent=1)


def load_model(directory) -> FullModel:
    """Read a model written by :func:`save_model`."""
    for name in _MODEL_FILES[:4]:
        if not os.path.exists(os.path.join(directory, name)):
            raise ParseError(f"model directory {directory} is missing {name}")
    model = import_matrices(
        os.path.join(directory, "mass.mtx"),
        os.path.join(directory, "stiffness.mtx"),
        os.path.join(directory, "labels.txt"),
    )
    c = mmarket.read_matrix(os.path.join(directory, "damping.mtx"))
    meta_path = os.path.join(directory, "meta.json")
    constrained = ()
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            constrained = tuple(json.load(fh).get("constrained_dofs", ()))
    return replace(model, c=c, constrained_dofs=constrained)
