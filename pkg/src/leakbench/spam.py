"""State-preparation and measurement noise models.

Preparation noise depolarizes a fraction of the ideal state into the
computational and leakage subspaces.  Measurement noise is a perfect
trit-level readout followed by independent classical confusion on each
site; in expectation that is a diagonal effect operator, and in shot mode
the recorded outcome is drawn through the same per-site transition
columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qspace
from .qspace import SubspaceLabel, TritString

__all__ = [
    "PrepSpec",
    "MeasConfusion",
    "noisy_initial_state",
    "computational_effect",
]


@dataclass(frozen=True)
class PrepSpec:
    """Depolarizing preparation noise around an ideal basis state.

    With probability p_c the register is replaced by the maximally mixed
    computational state, with probability p_l by the maximally mixed
    leaked state.
    """

    p_c: float = 0.0
    p_l: float = 0.0
    ideal: TritString | None = None

    def __post_init__(self):
        if not (0.0 <= self.p_c <= 1.0 and 0.0 <= self.p_l <= 1.0):
            raise ValueError("prep probabilities must lie in [0,1]")
        if self.p_c + self.p_l > 1.0 + 1e-12:
            raise ValueError(f"p_c + p_l = {self.p_c + self.p_l} exceeds 1")
        if self.ideal is not None and not isinstance(self.ideal, TritString):
            ideal = TritString.from_str(self.ideal) if isinstance(self.ideal, str) \
                else TritString(self.ideal)
            object.__setattr__(self, "ideal", ideal)


def noisy_initial_state(spec: PrepSpec, n: int) -> np.ndarray:
    """Density operator of the depolarized preparation on n sites."""
    d = 3 ** n
    ideal = spec.ideal if spec.ideal is not None else TritString((0,) * n)
    if ideal.n != n:
        raise ValueError(f"ideal state {ideal} does not match n={n}")
    comp = qspace.subspace_mask(SubspaceLabel.all_computational(n))
    dc = 2 ** n
    dl = d - dc
    diag = np.zeros(d)
    diag[ideal.index] += 1.0 - spec.p_c - spec.p_l
    diag[comp] += spec.p_c / dc
    diag[~comp] += spec.p_l / dl
    return np.diag(diag.astype(complex))


@dataclass(frozen=True)
class MeasConfusion:
    """Per-site 3x3 classical readout confusion.

    ``matrix[o, s]`` is the probability of recording trit o given the true
    trit s; columns sum to one.
    """

    matrix: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", M)
        if M.shape != (3, 3):
            raise ValueError("confusion matrix must be 3x3")
        if M.min() < -1e-12:
            raise ValueError("confusion entries must be nonnegative")
        if np.abs(M.sum(axis=0) - 1.0).max() > 1e-10:
            raise ValueError("confusion columns must sum to 1")

    @classmethod
    def from_rates(cls, eta0: float = 0.0, eta1: float = 0.0,
                   eta_l0: float = 0.0, eta_l1: float = 0.0,
                   eta_s0: float = 0.0, eta_s1: float = 0.0) -> "MeasConfusion":
        """Build from flip rates: eta0/eta1 are 0->1 and 1->0 flips,
        eta_l* record a computational trit as 2, eta_s* record a true 2 as
        0 or 1."""
        M = np.array([
            [1.0 - eta0 - eta_l0, eta1, eta_s0],
            [eta0, 1.0 - eta1 - eta_l1, eta_s1],
            [eta_l0, eta_l1, 1.0 - eta_s0 - eta_s1],
        ])
        return cls(matrix=M)

    @property
    def computational_probs(self) -> np.ndarray:
        """P(recorded trit in {0,1} | true trit s) for s = 0, 1, 2."""
        return self.matrix[0] + self.matrix[1]


def computational_effect(confusions) -> np.ndarray:
    """Diagonal effect whose expectation is the all-trits-in-{0,1} probability.

    The tensor product over sites of diag(column sums of the first two
    confusion rows); with identity confusion this is exactly the
    computational-subspace projector.
    """
    confusions = list(confusions)
    if not confusions:
        raise ValueError("need one confusion matrix per site")
    diag = confusions[0].computational_probs
    for conf in confusions[1:]:
        diag = np.kron(diag, conf.computational_probs)
    return np.diag(diag.astype(complex))
