"""Multimode interferometer unitaries.

Covers Haar-random unitaries, planar chip layouts built from adjacent
directional couplers and static phase shifts, fabrication-noise
perturbation of layouts, and submatrix extraction for permanent-based
probabilities.  Mode indices are 1-based throughout the public API.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

UNITARITY_TOL = 1e-9


@dataclass(frozen=True)
class Coupler:
    """Directional coupler on adjacent modes (i, i+1) with transmittivity t^2."""
    modes: tuple[int, int]
    t2: float


@dataclass(frozen=True)
class Phase:
    """Static phase shift phi on a single mode."""
    mode: int
    phi: float


@dataclass
class CircuitLayout:
    m: int
    elements: list = field(default_factory=list)

    def validate(self) -> None:
        for el in self.elements:
            if isinstance(el, Coupler):
                a, b = el.modes
                if not (1 <= a <= self.m and 1 <= b <= self.m):
                    raise ValueError(f"coupler modes {el.modes} out of range [1, {self.m}]")
                if abs(a - b) != 1:
                    raise ValueError(f"coupler modes {el.modes} must be adjacent")
                if not (0.0 <= el.t2 <= 1.0):
                    raise ValueError(f"transmittivity t2 = {el.t2} outside [0, 1]")
            elif isinstance(el, Phase):
                if not (1 <= el.mode <= self.m):
                    raise ValueError(f"phase mode {el.mode} out of range [1, {self.m}]")
            else:
                raise TypeError(f"unknown layout element {el!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Fabrication-tolerance noise: Gaussian shifts on t^2 and phases."""
    sigma_t: float = 0.05
    sigma_phi: float = 0.1
    seed: int | None = None

    def __post_init__(self):
        if self.sigma_t < 0 or self.sigma_phi < 0:
            raise ValueError("noise std-devs must be >= 0")


def haar_random_unitary(m: int, seed=None) -> np.ndarray:
    """Haar-distributed m x m unitary via QR of a complex Ginibre matrix.

    The R diagonal is rephased to unit modulus, which makes the induced
    measure exactly Haar rather than merely unitary.
    """
    if m < 1:
        raise ValueError("mode count must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def compile_layout(layout: CircuitLayout) -> np.ndarray:
    """Multiply out the layout elements, first element applied first."""
    layout.validate()
    m = layout.m
    U = np.eye(m, dtype=np.complex128)
    for el in layout.elements:
        if isinstance(el, Coupler):
            a, b = el.modes[0] - 1, el.modes[1] - 1
            t = math.sqrt(el.t2)
            r = math.sqrt(1.0 - el.t2)
            rows = U[[a, b], :].copy()
            U[a, :] = t * rows[0] + 1j * r * rows[1]
            U[b, :] = 1j * r * rows[0] + t * rows[1]
        else:
            U[el.mode - 1, :] *= np.exp(1j * el.phi)
    return U


def random_chip_layout(m: int, depth: int | None = None, seed=None) -> CircuitLayout:
    """Brick-wall mesh of balanced couplers with random static phases.

    Each row alternates between couplers on (1,2),(3,4),... and
    (2,3),(4,5),...; all couplers are 50:50 and every mode picks up a
    uniform random phase after each row.  Default depth of m rows
    guarantees full input-output connectivity.
    """
    if m < 2:
        raise ValueError("chip layouts need m >= 2")
    if depth is None:
        depth = m
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = np.random.default_rng(seed)
    elements: list = []
    for row in range(depth):
        start = 1 if row % 2 == 0 else 2
        for a in range(start, m, 2):
            elements.append(Coupler(modes=(a, a + 1), t2=0.5))
        for mode in range(1, m + 1):
            elements.append(Phase(mode=mode, phi=float(rng.uniform(0.0, 2.0 * math.pi))))
    return CircuitLayout(m=m, elements=elements)


def perturb_layout(layout: CircuitLayout, noise: NoiseSpec) -> CircuitLayout:
    """Apply Gaussian fabrication noise; t^2 clamped to [0,1], phases wrapped."""
    layout.validate()
    rng = np.random.default_rng(noise.seed)
    elements: list = []
    for el in layout.elements:
        if isinstance(el, Coupler):
            t2 = el.t2
            if noise.sigma_t > 0:
                t2 = float(np.clip(t2 + rng.normal(0.0, noise.sigma_t), 0.0, 1.0))
            elements.append(Coupler(modes=el.modes, t2=t2))
        else:
            phi = el.phi
            if noise.sigma_phi > 0:
                phi = float((phi + rng.normal(0.0, noise.sigma_phi)) % (2.0 * math.pi))
            elements.append(Phase(mode=el.mode, phi=phi))
    return CircuitLayout(m=layout.m, elements=elements)


def unitarity_deviation(U: np.ndarray) -> float:
    """Max absolute entry of U^dagger U - I."""
    U = np.asarray(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("expected a square matrix")
    m = U.shape[0]
    return float(np.max(np.abs(U.conj().T @ U - np.eye(m))))


def submatrix(U: np.ndarray, inputs, occupation) -> np.ndarray:
    """n x n scattering submatrix for the given input modes and output occupation.

    Rows are selected by the (1-based) input modes; each output mode
    contributes as many copies of its column as its occupancy.
    """
    U = np.asarray(U, dtype=np.complex128)
    m = U.shape[0]
    inputs = list(inputs)
    occupation = list(occupation)
    if len(occupation) != m:
        raise ValueError(f"occupation must have length m = {m}")
    if len(set(inputs)) != len(inputs):
        raise ValueError("input modes must be distinct")
    for s in inputs:
        if not (1 <= s <= m):
            raise IndexError(f"input mode {s} out of range [1, {m}]")
    if any(o < 0 for o in occupation):
        raise ValueError("occupancies must be >= 0")
    n = sum(occupation)
    if len(inputs) != n:
        raise ValueError(f"input count {len(inputs)} != total occupation {n}")
    rows = [s - 1 for s in inputs]
    cols = [j for j, occ in enumerate(occupation) for _ in range(occ)]
    return U[np.ix_(rows, cols)]


# --- file formats -----------------------------------------------------------

def unitary_to_json(U: np.ndarray) -> dict:
    U = np.asarray(U, dtype=np.complex128)
    return {"m": int(U.shape[0]), "re": U.real.tolist(), "im": U.imag.tolist()}


def unitary_from_json(obj: dict) -> np.ndarray:
    U = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
    if U.shape != (obj["m"], obj["m"]):
        raise ValueError("unitary file shape inconsistent with declared m")
    return U


def save_unitary(U: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        json.dump(unitary_to_json(U), fh)


def load_unitary(path, max_deviation: float | None = None) -> np.ndarray:
    with open(path) as fh:
        U = unitary_from_json(json.load(fh))
    if max_deviation is not None:
        dev = unitarity_deviation(U)
        if dev > max_deviation:
            raise ValueError(f"loaded matrix fails unitarity check: deviation {dev:.3e}")
    return U


def layout_to_json(layout: CircuitLayout) -> list:
    out = []
    for el in layout.elements:
        if isinstance(el, Coupler):
            out.append({"type": "coupler", "modes": list(el.modes), "t2": el.t2})
        else:
            out.append({"type": "phase", "mode": el.mode, "phi": el.phi})
    return out


def layout_from_json(obj: list, m: int | None = None) -> CircuitLayout:
    elements: list = []
    max_mode = 1
    for item in obj:
        if item["type"] == "coupler":
            a, b = item["modes"]
            elements.append(Coupler(modes=(int(a), int(b)), t2=float(item["t2"])))
            max_mode = max(max_mode, int(a), int(b))
        elif item["type"] == "phase":
            elements.append(Phase(mode=int(item["mode"]), phi=float(item["phi"])))
            max_mode = max(max_mode, int(item["mode"]))
        else:
            raise ValueError(f"unknown layout element type {item.get('type')!r}")
    layout = CircuitLayout(m=m if m is not None else max_mode, elements=elements)
    layout.validate()
    return layout


def save_layout(layout: CircuitLayout, path) -> None:
    with open(path, "w") as fh:
        json.dump(layout_to_json(layout), fh)


def load_layout(path, m: int | None = None) -> CircuitLayout:
    with open(path) as fh:
        return layout_from_json(json.load(fh), m=m)
