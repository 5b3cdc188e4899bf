"""Planar-averaged 1D profiles shared by the pore-scale, REV-scale and interface code."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

COLUMNS = ("z", "U_superficial", "U_intrinsic", "epsilon", "U_normalized")
UNITS = {"z": "lu", "U_superficial": "lu/step", "U_intrinsic": "lu/step",
         "epsilon": "1", "U_normalized": "1"}


@dataclass
class ProfileData:
    """Stream-wise velocity and porosity per plane.

    ``u_superficial`` averages over every cell of a plane (solids count as
    zero), ``u_intrinsic`` over the fluid cells only.  Plane values are cell
    averages, so window means are plain arithmetic means.
    """

    z: np.ndarray
    u_superficial: np.ndarray
    u_intrinsic: np.ndarray | None = None
    epsilon: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        n = len(self.z)
        self.u_superficial = np.asarray(self.u_superficial, dtype=float)
        self.epsilon = np.ones(n) if self.epsilon is None else np.asarray(self.epsilon, dtype=float)
        if self.u_intrinsic is None:
            with np.errstate(divide="ignore", invalid="ignore"):
                self.u_intrinsic = np.where(self.epsilon > 0, self.u_superficial / self.epsilon, 0.0)
        else:
            self.u_intrinsic = np.asarray(self.u_intrinsic, dtype=float)
        for name in ("u_superficial", "u_intrinsic", "epsilon"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")

    def __len__(self):
        return len(self.z)

    @property
    def height(self) -> float:
        """Channel height used to normalize z; defaults to the extent of the cell grid."""
        if "height" in self.meta:
            return float(self.meta["height"])
        if len(self.z) > 1:
            return float(self.z[-1] - self.z[0] + (self.z[1] - self.z[0]))
        return 1.0

    @property
    def u_max(self) -> float:
        return float(self.u_superficial.max(initial=0.0))

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.u_superficial))

    @property
    def u_normalized(self) -> np.ndarray:
        m = self.u_max
        if m <= 0:
            return np.zeros_like(self.u_superficial)
        out = self.u_superficial / m
        out[self.argmax] = 1.0
        return out

    @property
    def z_normalized(self) -> np.ndarray:
        return self.z / self.height

    def window(self, z0=-np.inf, z1=np.inf) -> np.ndarray:
        return (self.z >= z0) & (self.z <= z1)

    def window_mean(self, z0=-np.inf, z1=np.inf, which="u_superficial") -> float:
        sel = self.window(z0, z1)
        if not sel.any():
            raise ValueError(f"window [{z0}, {z1}] contains no planes")
        return float(getattr(self, which)[sel].mean())

    def scaled(self, factor) -> "ProfileData":
        return ProfileData(self.z.copy(), self.u_superficial * factor,
                           self.u_intrinsic * factor, self.epsilon.copy(), dict(self.meta))

    # ------------------------------------------------------------------
    # CSV

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            for key, val in self.meta.items():
                fh.write(f"# {key} = {val}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"{c} [{UNITS[c]}]" for c in COLUMNS])
            for row in zip(self.z, self.u_superficial, self.u_intrinsic, self.epsilon,
                           self.u_normalized):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "ProfileData":
        """Read a profile CSV; a bare ``z, epsilon`` porosity file is accepted too."""
        meta = {}
        rows = []
        header = None
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                s = line.strip()
                if not s:
                    continue
                if s.startswith("#"):
                    if "=" in s:
                        k, v = s[1:].split("=", 1)
                        meta[k.strip()] = _meta_value(v.strip())
                    continue
                cells = next(csv.reader([s]))
                if header is None:
                    header = [c.split("[")[0].strip() for c in cells]
                    continue
                try:
                    rows.append([float(c) for c in cells])
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: non-numeric value in {s!r}") from None
        if header is None or "z" not in header:
            raise ValueError(f"{path}: missing header with a 'z' column")
        data = np.array(rows, dtype=float).reshape(-1, len(header))
        col = {name: data[:, i] for i, name in enumerate(header)}
        if "U_superficial" not in col and "epsilon" not in col:
            raise ValueError(f"{path}: need a U_superficial or epsilon column")
        u = col.get("U_superficial", np.zeros(len(data)))
        return cls(col["z"], u, col.get("U_intrinsic"), col.get("epsilon"), meta)


def _meta_value(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def planar_average(values: np.ndarray, fluid: np.ndarray):
    """Superficial and intrinsic plane averages of a field over the last axis."""
    n_plane = values.shape[0] * values.shape[1]
    total = np.where(fluid, values, 0.0).sum(axis=(0, 1))
    n_fluid = fluid.sum(axis=(0, 1))
    sup = total / n_plane
    intr = np.divide(total, n_fluid, out=np.zeros_like(total), where=n_fluid > 0)
    return sup, intr, n_fluid / n_plane


def l2_distance(a: ProfileData, b: ProfileData, n=200) -> float:
    """RMS difference of two normalized profiles on a common normalized-z grid."""
    s = (np.arange(n) + 0.5) / n
    ua = np.interp(s, a.z_normalized, a.u_normalized)
    ub = np.interp(s, b.z_normalized, b.u_normalized)
    return float(np.sqrt(np.mean((ua - ub) ** 2)))
