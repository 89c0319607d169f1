"""Sampling Wigner-type matrices from (profile, law) pairs, and the OU matrix flow."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .entrylaws import EntryLaw, Gaussian
from .errors import EigFailure
from .profiles import VarianceProfile, wigner_profile


class SymmetryClass(str, Enum):
    REAL = "RealSymmetric"
    COMPLEX = "ComplexHermitian"


def row_generator(seed: int, row: int) -> np.random.Generator:
    """Independent stream for one matrix row, reproducible in isolation."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(row),))))


@dataclass
class RandomMatrix:
    n: int
    symmetry_class: SymmetryClass
    entries: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self._eigh = None
        self._eigvals = None

    def eigh(self):
        """Cached (eigenvalues, eigenvectors)."""
        if self._eigh is None:
            try:
                lam, u = np.linalg.eigh(self.entries)
            except np.linalg.LinAlgError as exc:
                raise EigFailure(str(exc)) from exc
            self._eigh = (lam, u)
            self._eigvals = lam
        return self._eigh

    def eigvalsh(self):
        if self._eigvals is None:
            try:
                self._eigvals = np.linalg.eigvalsh(self.entries)
            except np.linalg.LinAlgError as exc:
                raise EigFailure(str(exc)) from exc
        return self._eigvals

    def to_csv(self, path) -> None:
        """Real matrices as is; Hermitian ones with interleaved re/im columns."""
        h = self.entries
        if np.iscomplexobj(h):
            out = np.empty((self.n, 2 * self.n))
            out[:, 0::2] = h.real
            out[:, 1::2] = h.imag
        else:
            out = h
        np.savetxt(path, out, delimiter=",", fmt="%.17g")


def _as_class(cls) -> SymmetryClass:
    return cls if isinstance(cls, SymmetryClass) else SymmetryClass(cls)


def sample_matrix(profile: VarianceProfile, law: EntryLaw, cls, seed: int) -> RandomMatrix:
    """Row i of the upper triangle (j >= i) is drawn from its own substream.

    Off-diagonal entries are sigma_ij * v_ij with v_ij standardized; in the
    Hermitian class v_ij = (x + i y)/sqrt(2) with x, y i.i.d. from the law.
    Diagonal entries are sigma_ii * x, real.
    """
    cls = _as_class(cls)
    n = profile.n
    sigma = np.sqrt(profile.sigma2)
    cplx = cls is SymmetryClass.COMPLEX
    h = np.zeros((n, n), dtype=complex if cplx else float)
    for i in range(n):
        rng = row_generator(seed, i)
        x = law.sample(rng, n - i)
        if cplx:
            y = law.sample(rng, n - i - 1)
            row = np.empty(n - i, dtype=complex)
            row[0] = x[0]
            row[1:] = (x[1:] + 1j * y) / math.sqrt(2.0)
        else:
            row = x
        h[i, i:] = sigma[i, i:] * row
    upper = np.triu(h, 1)
    h = np.triu(h) + upper.conj().T
    prov = {"profile": profile.to_json(), "law": law.to_json(), "seed": int(seed), "t": 0.0}
    return RandomMatrix(n, cls, h, prov)


def gaussian_matrix(n: int, cls, seed: int) -> RandomMatrix:
    """GOE/GUE normalized to entry variance 1/N."""
    return sample_matrix(wigner_profile(n), Gaussian(), cls, seed)


def ou_evolve(h0: RandomMatrix, t: float, seed: int) -> RandomMatrix:
    """H_t = exp(-t/2) H_0 + sqrt(1 - exp(-t)) V, V an independent Gaussian ensemble."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    v = gaussian_matrix(h0.n, h0.symmetry_class, seed)
    a = math.exp(-t / 2)
    b = math.sqrt(-math.expm1(-t))
    ht = a * h0.entries + b * v.entries
    prov = dict(h0.provenance)
    prov.update({"t": float(h0.provenance.get("t", 0.0)) + float(t), "flow_seed": int(seed)})
    return RandomMatrix(h0.n, h0.symmetry_class, ht, prov)
