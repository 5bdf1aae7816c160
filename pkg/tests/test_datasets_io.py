"""Dataset generators, trajectory containers and the file formats."""

import numpy as np
import pytest

from trajmix import Gaussian, MixtureModel, TrajectorySet, make_trajectories
from trajmix.io import (
    dumps_json,
    format_coeffs_csv,
    format_trajectories_csv,
    load_model,
    model_from_dict,
    model_to_dict,
    read_coeffs_csv,
    read_trajectories_csv,
    save_model,
    write_trajectories_csv,
)


class TestGenerators:
    def test_noise_free_sine_is_exact(self):
        ts = make_trajectories("sine", 3, 50, dim=2, noise=0.0, seed=1)
        t = np.linspace(0, 1, 50)
        for demo in ts.values:
            np.testing.assert_allclose(demo[:, 0], np.sin(2 * np.pi * t),
                                       atol=1e-15)
            np.testing.assert_allclose(demo[:, 1],
                                       np.sin(2 * np.pi * t + np.pi / 2),
                                       atol=1e-15)

    def test_demo_count_and_ids(self):
        ts = make_trajectories("spiral", 4, 30, dim=2, noise=0.01, seed=2)
        assert ts.n_demos == 4
        text = format_trajectories_csv(ts)
        ids = {line.split(",")[0] for line in text.splitlines()[1:]}
        assert ids == {"0", "1", "2", "3"}

    def test_deterministic_under_seed(self):
        a = make_trajectories("loops", 3, 40, dim=2, noise=0.05, seed=7)
        b = make_trajectories("loops", 3, 40, dim=2, noise=0.05, seed=7)
        for x, y in zip(a.values, b.values):
            np.testing.assert_array_equal(x, y)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            make_trajectories("spiral", 2, 30, dim=3)
        with pytest.raises(ValueError):
            make_trajectories("unknown", 2, 30)


class TestTrajectorySet:
    def test_validation(self):
        t = np.linspace(0, 1, 10)
        with pytest.raises(ValueError):
            TrajectorySet((t,), (np.zeros((5, 2)),))  # length mismatch
        bad_t = t.copy()
        bad_t[5] = bad_t[4]  # not strictly increasing
        with pytest.raises(ValueError):
            TrajectorySet((bad_t,), (np.zeros((10, 2)),))

    def test_stacked_layout(self):
        ts = make_trajectories("sine", 2, 5, dim=1, seed=0)
        stacked = ts.stacked()
        assert stacked.shape == (10, 2)
        np.testing.assert_allclose(stacked[:5, 0], np.linspace(0, 1, 5))


class TestTrajectoryCsv:
    def test_round_trip(self, tmp_path):
        ts = make_trajectories("sine", 3, 20, dim=2, noise=0.1, seed=3)
        path = tmp_path / "demos.csv"
        write_trajectories_csv(ts, path)
        back = read_trajectories_csv(path)
        assert back.n_demos == 3 and back.dim == 2
        for a, b in zip(back.values, ts.values):
            np.testing.assert_array_equal(a, b)  # repr round-trips exactly

    def test_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValueError, match="line 1"):
            read_trajectories_csv(path)

    def test_field_count_with_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("traj_id,t,x1\n0,0.0,1.0\n0,0.5\n")
        with pytest.raises(ValueError, match="line 3"):
            read_trajectories_csv(path)

    def test_non_numeric_with_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("traj_id,t,x1\n0,0.0,oops\n")
        with pytest.raises(ValueError, match="line 2"):
            read_trajectories_csv(path)

    def test_decreasing_time_with_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("traj_id,t,x1\n0,0.0,1.0\n0,0.5,1.0\n0,0.2,1.0\n")
        with pytest.raises(ValueError, match="line 4"):
            read_trajectories_csv(path)

    def test_empty_handled_when_allowed(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("traj_id,t,x1\n")
        assert read_trajectories_csv(path, allow_empty=True) is None
        with pytest.raises(ValueError):
            read_trajectories_csv(path)


class TestCoeffsCsv:
    def test_round_trip(self, tmp_path):
        from trajmix import FourierDomain
        from trajmix.fourier import mixture_coeffs

        dom = FourierDomain(2.0, 2, 4)
        m = MixtureModel(
            (Gaussian([0.4, 0.6], np.diag([0.02, 0.03])),), np.array([1.0])
        )
        coeffs = mixture_coeffs(m, dom)
        text = format_coeffs_csv(coeffs, dom)
        path = tmp_path / "coeffs.csv"
        path.write_text(text)
        values, ks = read_coeffs_csv(path)
        np.testing.assert_array_equal(values, coeffs)
        np.testing.assert_array_equal(ks, dom.index_set())


class TestModelJson:
    def test_dispatch_round_trip(self, tmp_path):
        from trajmix import LWR, BezierCurve, ProMP

        rng = np.random.default_rng(4)
        t = np.linspace(0, 1, 40)
        models = [
            MixtureModel(
                (Gaussian(rng.normal(size=2), np.eye(2) * 0.3),), np.array([1.0])
            ),
            BezierCurve(rng.normal(size=(4, 2))),
            LWR(n_basis=4).fit(t, np.sin(t)),
            ProMP(basis="bernstein", n_basis=4).fit(
                [rng.normal(size=(30, 2)) for _ in range(3)]
            ),
        ]
        for i, model in enumerate(models):
            path = tmp_path / f"model{i}.json"
            save_model(model, path)
            back = load_model(path)
            assert model_to_dict(back) == model_to_dict(model)

    def test_unknown_version(self):
        with pytest.raises(ValueError):
            model_from_dict({"version": "mystery-v9"})

    def test_json_is_deterministic(self):
        m = MixtureModel((Gaussian([0.1], [[0.2]]),), np.array([1.0]))
        assert dumps_json(model_to_dict(m)) == dumps_json(model_to_dict(m))
