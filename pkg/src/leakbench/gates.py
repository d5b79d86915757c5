"""Ideal unitary channels on the full qutrit-register space.

Pauli strings are embedded per site as [[P, 0], [0, 1]] (identity on the
leakage level); two-qubit entangling gates act on the computational
subspace only and leave every other basis state fixed.  The basis order of
all 9x9 matrices is the big-endian trit order 00, 01, 02, 10, 11, 12, 20,
21, 22, which puts the -1 of CZ at |11>.

The iSWAP matrix here swaps |01> <-> |10> with unit amplitude; a
``physical_iswap`` variant with the conventional i phases is also
provided.  The two have identical condensed representations, so either
choice leaves every benchmarking quantity unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qspace
from .noise import KrausChannel

__all__ = [
    "GateChannel",
    "PAULI_CHARS",
    "embed_pauli",
    "pauli_label_from_index",
    "pauli_index_from_label",
    "two_qubit_gate",
    "gate_by_name",
    "noisy_gate",
]

PAULI_CHARS = "IXYZ"
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class GateChannel:
    """An ideal unitary on the full space, optionally tagged with noise."""

    unitary: np.ndarray
    name: str = ""
    noise: KrausChannel | None = None

    def __post_init__(self):
        U = np.asarray(self.unitary, dtype=complex)
        object.__setattr__(self, "unitary", U)
        d = U.shape[0]
        if U.shape != (d, d):
            raise ValueError("gate unitary must be square")
        dev = np.abs(U.conj().T @ U - np.eye(d)).max()
        if dev > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (deviation {dev:.2e})")

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.unitary @ rho @ self.unitary.conj().T


# ---------------------------------------------------------------------------
# Pauli embeddings
# ---------------------------------------------------------------------------

def pauli_label_from_index(idx: int, n: int) -> str:
    """Decode 0 .. 4^n - 1 into a Pauli string, site 1 most significant."""
    if not 0 <= idx < 4 ** n:
        raise ValueError(f"Pauli index {idx} out of range for n={n}")
    chars = []
    for _ in range(n):
        chars.append(PAULI_CHARS[idx % 4])
        idx //= 4
    return "".join(reversed(chars))


def pauli_index_from_label(label: str) -> int:
    idx = 0
    for c in label.upper():
        idx = 4 * idx + PAULI_CHARS.index(c)
    return idx


def embed_pauli(label: str) -> GateChannel:
    """Noiseless channel of a Pauli string embedded on the full space."""
    return GateChannel(unitary=qspace.embedded_pauli_matrix(label),
                       name=f"pauli:{label.upper()}")


# ---------------------------------------------------------------------------
# two-qubit gates
# ---------------------------------------------------------------------------

def _embed_computational(u4: np.ndarray) -> np.ndarray:
    """Lift a 4x4 computational unitary to 9x9, identity elsewhere."""
    comp = [qspace.trit_to_index(t) for t in ((0, 0), (0, 1), (1, 0), (1, 1))]
    U = np.eye(9, dtype=complex)
    for a, ia in enumerate(comp):
        for b, ib in enumerate(comp):
            U[ia, ib] = u4[a, b]
    return U


def _iswap4(phase: complex) -> np.ndarray:
    U = np.zeros((4, 4), dtype=complex)
    U[0, 0] = U[3, 3] = 1.0
    U[1, 2] = U[2, 1] = phase
    return U


def _sqisw4() -> np.ndarray:
    U = np.zeros((4, 4), dtype=complex)
    U[0, 0] = U[3, 3] = 1.0
    r = 1.0 / np.sqrt(2.0)
    U[1, 1] = U[2, 2] = r
    U[1, 2] = U[2, 1] = 1j * r
    return U


def two_qubit_gate(name: str) -> GateChannel:
    """iSWAP, SQiSW or CZ on a two-site register.

    ``iswap`` is the unit-amplitude swap variant; ``physical_iswap``
    carries the i phases (iSWAP = SQiSW^2).
    """
    key = name.lower()
    if key == "iswap":
        u4 = _iswap4(1.0)
    elif key == "physical_iswap":
        u4 = _iswap4(1j)
    elif key == "sqisw":
        u4 = _sqisw4()
    elif key == "cz":
        u4 = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    else:
        raise ValueError(f"unknown two-qubit gate {name!r}")
    return GateChannel(unitary=_embed_computational(u4), name=key)


def gate_by_name(name: str, n: int) -> GateChannel:
    """Resolve a gate name as accepted in run configs.

    ``"pauli:<string>"`` embeds a Pauli string; anything else must be one
    of the two-qubit gate names (n must then be 2).
    """
    if name.lower().startswith("pauli:"):
        label = name.split(":", 1)[1]
        if len(label) != n:
            raise ValueError(f"Pauli string {label!r} does not match n={n}")
        return embed_pauli(label)
    if n != 2:
        raise ValueError(f"gate {name!r} requires a two-site register")
    return two_qubit_gate(name)


def noisy_gate(gate: GateChannel, noise: KrausChannel,
               side: str = "right") -> KrausChannel:
    """Compose an ideal gate with a noise channel into one Kraus channel.

    side="right": noise acts first (Kraus ops U E_i), the noisy-gate
    convention used throughout; side="left": noise acts after the gate
    (Kraus ops E_i U).
    """
    if gate.dim != noise.dim:
        raise ValueError("gate and noise dimensions differ")
    U = gate.unitary
    if side == "right":
        ops = tuple(U @ E for E in noise.kraus_ops)
    elif side == "left":
        ops = tuple(E @ U for E in noise.kraus_ops)
    else:
        raise ValueError("side must be 'left' or 'right'")
    return KrausChannel(kraus_ops=ops, dim=gate.dim)
