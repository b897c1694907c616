"""Exact quantum states, measurements and the state-dependent distance functionals.

States are plain numpy arrays: a state vector is a length-2^k complex vector,
a density matrix a 2^k x 2^k complex matrix. Measurements carry their outcome
labels alongside the operator elements.
"""
from __future__ import annotations

import itertools
import json
import math
from typing import Hashable, NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericInvariantError, PreconditionError

#: construction invariants (completeness, idempotence, squares-to-identity)
CONSTRUCT_TOL = 1e-9
#: equality assertions between computed quantities
EQUAL_TOL = 1e-10
#: comparisons against independent oracles
ORACLE_TOL = 1e-12
#: negative-eigenvalue clamp for numerically PSD inputs
EIG_CLAMP = 1e-12


def num_qubits(dim: int) -> int:
    k = int(round(math.log2(dim))) if dim > 0 else -1
    if k < 0 or 2**k != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return k


def density(psi: np.ndarray) -> np.ndarray:
    """Projector onto the state vector ``psi``."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def as_density(state: np.ndarray) -> np.ndarray:
    """Accept either a state vector or a density matrix and return a density matrix."""
    state = np.asarray(state)
    if state.ndim == 1:
        return density(state)
    return state.astype(complex, copy=False)


def check_density(rho: np.ndarray, tol: float = EQUAL_TOL) -> None:
    """Raise :class:`NumericInvariantError` unless ``rho`` is a valid density matrix."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError("density matrix must be square")
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise NumericInvariantError("density matrix is not Hermitian")
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if evals.min() < -tol:
        raise NumericInvariantError(f"density matrix has eigenvalue {evals.min():.3e} < 0")
    if abs(np.trace(rho).real - 1) > tol:
        raise NumericInvariantError(f"density matrix has trace {np.trace(rho).real}")


def epr_state(n: int) -> np.ndarray:
    """``|EPR>^n`` on 2n qubits; pair i spans qubits (i, n+i)."""
    if n < 1:
        raise PreconditionError("epr_state needs n >= 1")
    d = 2**n
    # sum_x |x>_A |x>_B with A the first n qubits
    return np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues below ``EIG_CLAMP`` in magnitude are rounding noise and are
    set to zero, so the roots of exact projectors stay exact.
    """
    evals, evecs = np.linalg.eigh((m + m.conj().T) / 2)
    if evals.min(initial=0.0) < -1e-8:
        raise NumericInvariantError(f"matrix has eigenvalue {evals.min():.3e}; not PSD")
    evals = np.where(evals < EIG_CLAMP, 0.0, evals)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def hermitian_abs(m: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh((m + m.conj().T) / 2)
    return (evecs * np.abs(evals)) @ evecs.conj().T


class Measurement:
    """A labelled POVM ``{M^a}``; ``kind`` is ``"projective"`` or ``"povm"``.

    The constructor validates positivity and completeness; for projective
    measurements it also checks idempotence of each element.
    """

    __slots__ = ("outcomes", "elements", "kind", "_basis")

    def __init__(self, outcomes: Sequence[Hashable], elements: Sequence[np.ndarray],
                 kind: str = "projective", tol: float = CONSTRUCT_TOL, validate: bool = True):
        if kind not in ("projective", "povm"):
            raise ValueError(f"unknown measurement kind {kind!r}")
        if len(outcomes) != len(elements) or not outcomes:
            raise DimensionError("need one element per outcome label")
        if len(set(outcomes)) != len(outcomes):
            raise PreconditionError("outcome labels must be distinct")
        self.outcomes = tuple(outcomes)
        self.elements = tuple(np.asarray(e, dtype=complex) for e in elements)
        self.kind = kind
        self._basis = None
        if validate:
            self.validate(tol)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.outcomes)

    def __getitem__(self, label):
        return self.elements[self.outcomes.index(label)]

    def validate(self, tol: float = CONSTRUCT_TOL) -> None:
        d = self.dim
        total = np.zeros((d, d), dtype=complex)
        for label, e in zip(self.outcomes, self.elements):
            if e.shape != (d, d):
                raise DimensionError("measurement elements differ in size")
            if not np.allclose(e, e.conj().T, atol=tol):
                raise NumericInvariantError(f"element {label!r} is not Hermitian")
            if np.linalg.eigvalsh((e + e.conj().T) / 2).min() < -tol:
                raise NumericInvariantError(f"element {label!r} is not PSD")
            if self.kind == "projective" and not np.allclose(e @ e, e, atol=tol):
                raise NumericInvariantError(f"element {label!r} is not a projector")
            total += e
        if not np.allclose(total, np.eye(d), atol=tol):
            raise NumericInvariantError("measurement elements do not sum to identity")

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        rho = as_density(rho)
        return np.array([np.trace(e @ rho).real for e in self.elements])

    def observable(self, value=lambda label: label) -> np.ndarray:
        """``sum_a value(a) M^a``; the identity map on +-1 labels gives the usual observable."""
        return sum(value(a) * e for a, e in zip(self.outcomes, self.elements))

    def eigenbasis(self) -> tuple[np.ndarray, np.ndarray]:
        """Unitary ``V`` whose columns span the elements, and a one-hot grouping matrix.

        Only defined for projective measurements. ``group[c, i] = 1`` when
        column ``c`` of ``V`` lies in the range of element ``i``, so a
        probability vector over columns ``p`` groups as ``p @ group``.
        """
        if self.kind != "projective":
            raise PreconditionError("eigenbasis needs a projective measurement")
        if self._basis is None:
            cols, owner = [], []
            for i, e in enumerate(self.elements):
                evals, evecs = np.linalg.eigh((e + e.conj().T) / 2)
                keep = evecs[:, evals > 0.5]
                cols.append(keep)
                owner.extend([i] * keep.shape[1])
            v = np.concatenate(cols, axis=1)
            if v.shape[1] != self.dim:
                raise NumericInvariantError("projector ranks do not add up to the dimension")
            group = np.zeros((self.dim, len(self.elements)))
            group[np.arange(self.dim), owner] = 1.0
            self._basis = (v, group)
        return self._basis

    def kron_identity(self, d_after: int = 1, d_before: int = 1) -> "Measurement":
        """The same measurement acting on ``I_before (x) . (x) I_after``."""
        elems = [np.kron(np.kron(np.eye(d_before), e), np.eye(d_after)) for e in self.elements]
        return Measurement(self.outcomes, elems, self.kind, validate=False)

    def conjugate(self, u: np.ndarray) -> "Measurement":
        """Elements ``u^dagger M^a u``."""
        elems = [u.conj().T @ e @ u for e in self.elements]
        return Measurement(self.outcomes, elems, self.kind, validate=False)

    def relabel(self, fn) -> "Measurement":
        return Measurement([fn(a) for a in self.outcomes], self.elements, self.kind, validate=False)


def observable_measurement(obs: np.ndarray) -> Measurement:
    """Two-outcome projective measurement ``{(I + s O)/2}`` for s = +1, -1."""
    d = obs.shape[0]
    eye = np.eye(d)
    return Measurement((1, -1), [(eye + obs) / 2, (eye - obs) / 2], validate=False)


def joint_measurement(observables: Sequence[np.ndarray]) -> Measurement:
    """Joint measurement of commuting observables with +-1 sign-tuple labels.

    Outcomes whose projector vanishes (e.g. contradicting a product relation)
    are kept as zero elements so the label set is always the full product.
    """
    d = observables[0].shape[0]
    eye = np.eye(d)
    halves = [((eye + o) / 2, (eye - o) / 2) for o in observables]
    labels, elems = [], []
    for signs in itertools.product((1, -1), repeat=len(observables)):
        e = eye.astype(complex)
        for s, (plus, minus) in zip(signs, halves):
            e = e @ (plus if s == 1 else minus)
        labels.append(signs)
        elems.append(e)
    return Measurement(labels, elems, validate=False)


def _check_pair(rho, s, t):
    if s.shape != t.shape or rho.shape != s.shape:
        raise DimensionError(f"shape mismatch: rho {rho.shape}, operators {s.shape} and {t.shape}")


def operator_distance(rho: np.ndarray, s: np.ndarray, t: np.ndarray) -> float:
    """``sqrt(Tr(rho (S-T)^dagger (S-T)))``, the distance used between POVM elements."""
    rho = as_density(rho)
    _check_pair(rho, s, t)
    diff = s - t
    val = np.einsum("ij,ij->", diff.conj(), diff @ rho).real
    return math.sqrt(max(val, 0.0))


def state_distance(rho: np.ndarray, s: np.ndarray, t: np.ndarray) -> float:
    """State-dependent distance between observables, ``sqrt(Tr(rho (S-T)^dagger (S-T)) / 2)``.

    For +-1 observables this equals the distance between the two-outcome
    projective measurements they define, so ``state_distance(rho, A, B)``
    matches ``povm_distance`` of the associated measurements.
    """
    return operator_distance(rho, s, t) / math.sqrt(2)


def _check_measurements(rho, m: Measurement, n: Measurement):
    if set(m.outcomes) != set(n.outcomes):
        raise PreconditionError("measurements have different outcome labels")
    if m.dim != n.dim or rho.shape[0] != m.dim:
        raise DimensionError("measurement and state dimensions differ")


def consistency(rho: np.ndarray, m: Measurement, n: Measurement) -> float:
    """``CON_rho(M, N) = Re sum_a Tr(rho M^a N^a)``."""
    rho = as_density(rho)
    _check_measurements(rho, m, n)
    terms = [np.einsum("ij,ji->", m[a] @ n[a], rho).real for a in m.outcomes]
    return math.fsum(terms)


def povm_distance(rho: np.ndarray, m: Measurement, n: Measurement) -> float:
    """``sqrt(sum_a D_rho(sqrt(M^a), sqrt(N^a))^2)`` with principal square roots."""
    rho = as_density(rho)
    _check_measurements(rho, m, n)
    terms = []
    for a in m.outcomes:
        terms.append(operator_distance(rho, psd_sqrt(m[a]), psd_sqrt(n[a])) ** 2)
    return math.sqrt(math.fsum(terms))


def sqrt_measurement(m: Measurement) -> Measurement:
    """The family ``{sqrt(M^a)}``; not a POVM in general, so validation is skipped."""
    return Measurement(m.outcomes, [psd_sqrt(e) for e in m.elements], "povm", validate=False)


def partial_trace(rho: np.ndarray, keep: Sequence[int], dims: Sequence[int] | None = None) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``; result ordered as ``keep``.

    ``dims`` lists subsystem dimensions; by default every subsystem is a qubit.
    """
    rho = as_density(rho)
    if dims is None:
        dims = [2] * num_qubits(rho.shape[0])
    dims = list(dims)
    k = len(dims)
    keep = list(keep)
    if len(set(keep)) != len(keep):
        raise PreconditionError("duplicate subsystem indices")
    if any(i < 0 or i >= k for i in keep):
        raise IndexError(f"subsystem index out of range for {k} subsystems")
    if int(np.prod(dims)) != rho.shape[0]:
        raise DimensionError("subsystem dimensions do not match the state")
    t = rho.reshape(dims + dims)
    traced = [i for i in range(k) if i not in keep]
    letters = [chr(ord("a") + i) for i in range(2 * k)]
    row = letters[:k]
    col = letters[k:2 * k]
    for i in traced:
        col[i] = row[i]
    out = [row[i] for i in keep] + [col[i] for i in keep]
    t = np.einsum("".join(row + col) + "->" + "".join(out), t)
    d = int(np.prod([dims[i] for i in keep]))
    return t.reshape(d, d)


def reduced_from_vector(psi: np.ndarray, keep: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state without forming the full projector."""
    dims = list(dims)
    t = np.asarray(psi).reshape(dims)
    keep = list(keep)
    rest = [i for i in range(len(dims)) if i not in keep]
    t = np.transpose(t, keep + rest)
    dk = int(np.prod([dims[i] for i in keep]))
    m = t.reshape(dk, -1)
    return m @ m.conj().T


class NaimarkDilation(NamedTuple):
    measurement: Measurement
    state: np.ndarray
    unitary: np.ndarray


def naimark_dilate(m: Measurement, rho: np.ndarray | None = None, tol: float = CONSTRUCT_TOL) -> NaimarkDilation:
    """Projective dilation of a POVM on ``system (x) ancilla`` with ancilla start ``|0...0>``.

    The isometry ``V|psi> = sum_i sqrt(M_i)|psi>|i>`` is completed to a unitary
    ``U``; the dilated projectors are ``P_i = U^dagger (I (x) |i><i|) U`` and
    satisfy ``Tr(P_i (rho (x) |0><0|)) = Tr(M_i rho)``. The ancilla holds
    ``ceil(log2(#outcomes))`` qubits; unused ancilla basis states are folded
    into the last outcome so the dilated projectors still sum to identity.
    """
    m.validate(tol)
    d = m.dim
    k = len(m)
    anc_qubits = max(1, math.ceil(math.log2(k))) if k > 1 else 1
    da = 2**anc_qubits
    big = d * da
    # isometry columns: system basis |j> maps to sum_i sqrt(M_i)|j> (x) |i>
    iso = np.zeros((big, d), dtype=complex)
    for i, e in enumerate(m.elements):
        root = psd_sqrt(e)
        iso[i::da, :] = root  # rows j*da + i
    # unitary U with U(|j> (x) |0>) = iso|j>: columns j*da of U are iso's columns
    comp = scipy.linalg.null_space(iso.conj().T)
    u = np.zeros((big, big), dtype=complex)
    start_cols = np.arange(d) * da
    u[:, start_cols] = iso
    other = np.setdiff1d(np.arange(big), start_cols)
    u[:, other] = comp
    projs = []
    for i in range(k):
        sel = np.zeros(da)
        sel[i] = 1.0
        if i == k - 1:
            sel[k:] = 1.0
        proj_anc = np.kron(np.eye(d), np.diag(sel))
        projs.append(u.conj().T @ proj_anc @ u)
    dil = Measurement(m.outcomes, projs, "projective", validate=False)
    state = None
    if rho is not None:
        anc0 = np.zeros((da, da))
        anc0[0, 0] = 1.0
        state = np.kron(as_density(rho), anc0)
    return NaimarkDilation(dil, state, u)


def joint_observable(rho: np.ndarray | None, a: np.ndarray, b: np.ndarray,
                     kernel_tol: float = 1e-9) -> np.ndarray:
    """``C = (AB + BA) / |AB + BA|`` with the kernel (|eigenvalue| <= kernel_tol) mapped to +1.

    ``rho`` only participates in the dimension check; the construction is
    state-independent.
    """
    if a.shape != b.shape or (rho is not None and as_density(rho).shape != a.shape):
        raise DimensionError("joint_observable dimension mismatch")
    s = a @ b + b @ a
    evals, evecs = np.linalg.eigh((s + s.conj().T) / 2)
    signs = np.where(np.abs(evals) <= kernel_tol, 1.0, np.sign(evals))
    return (evecs * signs) @ evecs.conj().T


def is_observable(o: np.ndarray, tol: float = CONSTRUCT_TOL) -> bool:
    return bool(np.allclose(o, o.conj().T, atol=tol) and np.allclose(o @ o, np.eye(o.shape[0]), atol=tol))


def to_json(m: np.ndarray) -> str:
    """Row-major JSON form ``{"shape": [...], "data": [[re, im], ...]}`` for debugging."""
    m = np.asarray(m, dtype=complex)
    data = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    return json.dumps({"shape": list(m.shape), "data": data})


def from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    flat = np.array([complex(re, im) for re, im in obj["data"]])
    return flat.reshape(obj["shape"])
