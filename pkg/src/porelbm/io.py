"""Output files: profile and comparison CSVs, legacy VTK fields, run reports."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import Scenario, echo
from .profiles import ProfileData


class OutputError(OSError):
    pass


@dataclass
class Results:
    """Everything a scenario run hands to :func:`emit_outputs`.

    ``profiles`` maps a tag to a profile (``"profile"`` for single-profile
    runs), ``comparisons`` maps a tag to ``{column: (values, unit)}`` with the
    first column being the shared z grid, ``fields`` holds ``(flags,
    velocity)`` pairs for VTK output.
    """

    profiles: dict = field(default_factory=dict)
    comparisons: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    converged: bool = True


def write_table(path, columns: dict, meta=None):
    """CSV with ``name [unit]`` headers; all columns share the row count."""
    names = list(columns)
    data = [np.asarray(columns[n][0], dtype=float) for n in names]
    n = len(data[0])
    if any(len(d) != n for d in data):
        raise ValueError("comparison columns differ in length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, val in (meta or {}).items():
            fh.write(f"# {key} = {val}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{name} [{columns[name][1]}]" for name in names])
        for row in zip(*data):
            w.writerow([repr(float(v)) for v in row])


def comparison_table(z, profiles: dict, extra=None) -> dict:
    """Columns for a comparison file: shared z, then one velocity column per profile."""
    cols = {"z": (np.asarray(z, dtype=float), "lu")}
    for name, prof in profiles.items():
        if len(prof.z) != len(cols["z"][0]) or not np.allclose(prof.z, cols["z"][0]):
            u = np.interp(cols["z"][0], prof.z, prof.u_superficial)
        else:
            u = prof.u_superficial
        cols[f"U_{name}"] = (u, "lu/step")
    for name, (vals, unit) in (extra or {}).items():
        cols[name] = (vals, unit)
    return cols


def write_vtk(path, flags, velocity=None, title="porelbm field"):
    """Legacy VTK ``STRUCTURED_POINTS`` file, binary big-endian.

    Point data: the cell flag as an int scalar and, when given, the velocity
    ``(3, nx, ny, nz)`` as a vector field.  Points sit at cell centres.
    """
    flags = np.asarray(flags)
    nx, ny, nz = flags.shape
    n = flags.size
    with open(path, "wb") as fh:
        head = ["# vtk DataFile Version 3.0", title, "BINARY", "DATASET STRUCTURED_POINTS",
                f"DIMENSIONS {nx} {ny} {nz}", "ORIGIN 0.5 0.5 0.5", "SPACING 1 1 1",
                f"POINT_DATA {n}", "SCALARS flags int 1", "LOOKUP_TABLE default"]
        fh.write(("\n".join(head) + "\n").encode("ascii"))
        # VTK runs x fastest
        fh.write(flags.astype(">i4").ravel(order="F").tobytes())
        if velocity is not None:
            v = np.asarray(velocity, dtype=float)
            fh.write(b"\nVECTORS velocity double\n")
            vec = np.stack([v[a].ravel(order="F") for a in range(3)], axis=1)
            fh.write(vec.astype(">f8").tobytes())
        fh.write(b"\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def write_report(path, scn: Scenario, report: dict):
    lines = [f"scenario = {scn.name}", f"kind = {scn.kind}", f"seed = {scn.seed}"]
    lines += [f"{k} = {_fmt(v)}" for k, v in report.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def output_dir(scn: Scenario) -> Path:
    return Path(scn.out) / scn.name


def emit_outputs(results: Results, scn: Scenario, vtk=False) -> list:
    """Write the run directory ``<out>/<name>/`` and return the written paths."""
    d = output_dir(scn)
    try:
        d.mkdir(parents=True, exist_ok=True)
        probe = d / ".write-test"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"cannot write to {d}: {exc.strerror or exc}") from None
    written = []

    def out(name):
        p = d / name
        written.append(p)
        return p

    (out("config.ini")).write_text(echo(scn), encoding="utf-8")
    for tag, prof in results.profiles.items():
        name = "profile.csv" if tag == "profile" else f"profile_{tag}.csv"
        prof.to_csv(out(name))
    for tag, cols in results.comparisons.items():
        name = "comparison.csv" if tag == "comparison" else f"comparison_{tag}.csv"
        write_table(out(name), cols)
    if vtk:
        for tag, (flags, vel) in results.fields.items():
            name = "field.vtk" if tag == "field" else f"field_{tag}.vtk"
            write_vtk(out(name), flags, vel)
    report = dict(results.report)
    report["converged"] = results.converged
    write_report(out("report.txt"), scn, report)
    return written


def read_profile(path) -> ProfileData:
    try:
        return ProfileData.from_csv(path)
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from None
