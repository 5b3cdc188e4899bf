import os

import numpy as np
import pytest

from porelbm.config import parse_text, with_overrides
from porelbm.io import (OutputError, Results, comparison_table, emit_outputs, read_profile,
                        write_table, write_vtk)
from porelbm.profiles import ProfileData
from porelbm.runner import run_scenario

POIS = "[scenario]\nkind = poiseuille\n[channel]\nheight = 16\n[run]\ntol = 1e-10\ncheck_interval = 500\n"


def _profile(n=8):
    z = np.arange(n) + 0.5
    eps = np.where(z < 4, 0.5, 1.0)
    u = 1e-4 * z
    return ProfileData(z, u, u / eps, eps, {"nu": 0.1, "G": 1e-6})


def test_profile_csv_header_and_round_trip(tmp_path):
    p = _profile()
    p.to_csv(tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    header = next(line for line in lines if not line.startswith("#"))
    assert header == ("z [lu],U_superficial [lu/step],U_intrinsic [lu/step],epsilon [1],"
                      "U_normalized [1]")
    back = read_profile(tmp_path / "p.csv")
    assert np.array_equal(back.z, p.z) and np.array_equal(back.u_superficial, p.u_superficial)
    assert np.array_equal(back.epsilon, p.epsilon)
    assert back.meta == p.meta


def test_read_missing_profile(tmp_path):
    with pytest.raises(OutputError):
        read_profile(tmp_path / "missing.csv")


def test_comparison_table_aligns_grids(tmp_path):
    a = _profile(8)
    coarse = ProfileData(np.array([0.0, 8.0]), np.array([0.0, 8e-4]))
    cols = comparison_table(a.z, {"dns": a, "model": coarse})
    assert np.allclose(cols["U_model"][0], 1e-4 * a.z)
    assert np.array_equal(cols["U_dns"][0], a.u_superficial)
    write_table(tmp_path / "c.csv", cols)
    rows = (tmp_path / "c.csv").read_text().splitlines()
    assert rows[0] == "z [lu],U_dns [lu/step],U_model [lu/step]"
    assert len(rows) == 9
    with pytest.raises(ValueError):
        write_table(tmp_path / "bad.csv", {"z": ([1, 2], "lu"), "u": ([1], "lu")})


def test_vtk_readable_by_meshio(tmp_path):
    meshio = pytest.importorskip("meshio")
    flags = np.zeros((4, 3, 2), dtype=np.uint8)
    flags[1, 2, 0] = 1
    vel = np.random.default_rng(0).normal(size=(3, 4, 3, 2))
    path = tmp_path / "f.vtk"
    write_vtk(path, flags, vel)
    head = path.read_bytes()[:200].decode("ascii", "replace")
    assert "DATASET STRUCTURED_POINTS" in head and "DIMENSIONS 4 3 2" in head
    mesh = meshio.read(path)
    assert len(mesh.points) == 24
    # meshio orders points x fastest
    pts = mesh.points
    assert np.allclose(pts[0], [0.5, 0.5, 0.5]) and np.allclose(pts[1], [1.5, 0.5, 0.5])
    f = np.asarray(mesh.point_data["flags"]).reshape(-1)
    v = np.asarray(mesh.point_data["velocity"])
    i = 1 + 4 * 2  # (1, 2, 0)
    assert f[i] == 1 and f.sum() == 1
    assert np.allclose(v[i], vel[:, 1, 2, 0])


def test_emit_outputs_files(tmp_path):
    scn = with_overrides(parse_text(POIS), out=str(tmp_path))
    res = run_scenario(scn)
    paths = emit_outputs(res, scn, vtk=True)
    names = sorted(p.name for p in paths)
    assert names == ["comparison.csv", "config.ini", "field.vtk", "profile.csv", "report.txt"]
    d = tmp_path / "poiseuille"
    assert parse_text((d / "config.ini").read_text()) == scn
    report = (d / "report.txt").read_text()
    assert "converged = True" in report and "np.float64" not in report
    cmp_rows = (d / "comparison.csv").read_text().splitlines()
    assert cmp_rows[0].startswith("z [lu],U_lbm [lu/step],U_analytic [lu/step]")
    assert len(cmp_rows) == 17


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_directory_permissions(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    scn = with_overrides(parse_text(POIS), out=str(locked))
    with pytest.raises(OutputError):
        emit_outputs(Results(), scn)


def test_output_path_blocked_by_file(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    scn = with_overrides(parse_text(POIS), out=str(blocker))
    with pytest.raises(OutputError, match="cannot write"):
        emit_outputs(Results(), scn)


def test_csv_outputs_byte_identical(tmp_path):
    texts = []
    for run in ("a", "b"):
        scn = with_overrides(parse_text(POIS), out=str(tmp_path / run))
        emit_outputs(run_scenario(scn), scn)
        d = tmp_path / run / "poiseuille"
        texts.append([(d / n).read_bytes() for n in ("profile.csv", "comparison.csv")])
    assert texts[0] == texts[1]
