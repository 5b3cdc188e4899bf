import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from porelbm.profiles import ProfileData, l2_distance, planar_average

finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(arrays(float, st.integers(2, 30), elements=st.floats(0.0, 1.0)))
def test_normalized_profile_peaks_at_exactly_one(u):
    prof = ProfileData(np.arange(len(u)) + 0.5, u)
    if prof.u_max > 0:
        assert prof.u_normalized[prof.argmax] == 1.0
        assert prof.u_normalized.max() == 1.0
    else:
        assert (prof.u_normalized == 0).all()


@given(arrays(float, st.integers(1, 20), elements=finite),
       arrays(float, st.integers(1, 20), elements=st.floats(0.05, 1.0)))
def test_csv_round_trip(tmp_path_factory, u, eps):
    n = min(len(u), len(eps))
    prof = ProfileData(np.arange(n) + 0.5, u[:n], None, eps[:n], {"nu": 0.1, "G": 1e-6, "tag": "x"})
    path = tmp_path_factory.mktemp("csv") / "p.csv"
    prof.to_csv(path)
    back = ProfileData.from_csv(path)
    assert np.array_equal(back.z, prof.z)
    assert np.array_equal(back.u_superficial, prof.u_superficial)
    assert np.array_equal(back.u_intrinsic, prof.u_intrinsic)
    assert np.array_equal(back.epsilon, prof.epsilon)
    assert back.meta == prof.meta


def test_csv_header_names_units(tmp_path):
    ProfileData([0.5, 1.5], [1.0, 2.0]).to_csv(tmp_path / "p.csv")
    header = [l for l in (tmp_path / "p.csv").read_text().splitlines() if not l.startswith("#")][0]
    assert header == ("z [lu],U_superficial [lu/step],U_intrinsic [lu/step],epsilon [1],"
                      "U_normalized [1]")


def test_porosity_only_file(tmp_path):
    (tmp_path / "eps.csv").write_text("z,epsilon\n0.5,0.4\n1.5,1.0\n")
    prof = ProfileData.from_csv(tmp_path / "eps.csv")
    assert prof.epsilon.tolist() == [0.4, 1.0]
    assert (prof.u_superficial == 0).all()


def test_bad_csv_reports_line(tmp_path):
    (tmp_path / "bad.csv").write_text("z,epsilon\n0.5,0.4\n1.5,oops\n")
    with pytest.raises(ValueError, match="bad.csv:3"):
        ProfileData.from_csv(tmp_path / "bad.csv")


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        ProfileData([0.5, 1.5], [1.0])


def test_planar_average():
    vals = np.zeros((2, 2, 3))
    vals[:, :, 1] = 2.0
    fluid = np.ones((2, 2, 3), dtype=bool)
    fluid[0, :, 1] = False
    sup, intr, eps = planar_average(vals, fluid)
    assert sup.tolist() == [0.0, 1.0, 0.0]
    assert intr.tolist() == [0.0, 2.0, 0.0]
    assert eps.tolist() == [1.0, 0.5, 1.0]
    # superficial = porosity x intrinsic
    assert np.allclose(sup, eps * intr)


def test_l2_distance():
    z = np.arange(20) + 0.5
    a = ProfileData(z, np.sin(np.pi * z / 20))
    assert l2_distance(a, a) == 0.0
    assert l2_distance(a, a.scaled(3.0)) == pytest.approx(0.0, abs=1e-15)
    b = ProfileData(z * 2, np.sin(np.pi * z / 20))  # same shape on a twice finer grid
    assert l2_distance(a, b) < 1e-2
    assert l2_distance(a, ProfileData(z, z)) > 0.1


def test_window_mean():
    prof = ProfileData(np.arange(10) + 0.5, np.arange(10.0))
    assert prof.window_mean(2, 5) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        prof.window_mean(20, 30)
