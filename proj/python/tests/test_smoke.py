# Copyright 2026 The degsde Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import degsde


def test_gen_path_is_deterministic():
    a = degsde.gen_path(7, 3, 1000, 1e-3)
    b = degsde.gen_path(7, 3, 1000, 1e-3)
    assert isinstance(a, np.ndarray)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, degsde.gen_path(7, 4, 1000, 1e-3))


def test_bridge_crossing_examples():
    assert degsde.bridge_crossing_prob(0.0, 2.0, 1.0, 1.0) == 1.0
    assert degsde.bridge_crossing_prob(1.0, 1.0, 1.0, 0.0) == pytest.approx(math.exp(-2.0), rel=1e-14)


def test_estimate():
    e = degsde.estimate([0.0, 1.0])
    assert e["mean"] == 0.5
    assert e["n"] == 2


def test_green_identities():
    for x in (0.1, 0.25, 0.5):
        assert degsde.green_additive_integral(x, 0.25) == pytest.approx(-2.0 * math.log(x), abs=1e-9)
    assert degsde.mean_exit_time(0.0, 1.0, 0.25) == pytest.approx(8.0 / 3.0, rel=1e-10)
    assert degsde.bessel3_hit_prob(0.5, 0.25) == pytest.approx(1.0 / 3.0)


def test_drift_and_errors():
    assert degsde.drift("q1", 0.25, 0.25) == pytest.approx(2.0)
    with pytest.raises(degsde.DomainError):
        degsde.drift("q1", 0.0, 0.25)
    with pytest.raises(degsde.Error):
        degsde.drift("q7", 0.5, 0.25)


def test_time_change_and_conditioned_paths():
    p = degsde.time_change_solution(1, 0, 0.3, 0.25, 0.1)
    assert p["times"][0] == 0.0
    assert p["times"][-1] == pytest.approx(0.1)
    q = degsde.simulate_conditioned("q1", 0.3, 0.25, 2, 0)
    assert q["values"][-1] == 1.0
    assert np.all(q["values"] > 0.0)


def test_coupled_equal_starts():
    s = degsde.euler_coupled(0.5, 0.5, 0.25, "plain", 3, 0, dt=1e-3)
    assert np.array_equal(s["x"], s["y"])
    assert s["r_identity_residual"] == 0.0


def test_skorokhod_and_scale():
    reflected, local = degsde.skorokhod_map([0.0, -1.0, 0.5])
    assert list(reflected) == [0.0, 0.0, 1.5]
    assert list(local) == [0.0, 1.0, 1.0]
    with pytest.raises(degsde.PreconditionError):
        degsde.skorokhod_map([-1.0])
    assert abs(degsde.scale_function(1.0, b0=1.0) - (1 - math.exp(-2.0)) / 2) < 1e-6
    assert degsde.scale_inverse(0.7) == pytest.approx(0.7)
    r = degsde.simulate_reflected(0.0, 1e-3, 1.0, 4, 0)
    assert np.all(r["x"] >= 0.0)
    assert np.all(np.diff(r["local_time"]) >= 0.0)


def test_experiments():
    names = [e["name"] for e in degsde.list_experiments()]
    assert len(names) == 16
    assert "oracle-hitting" in names
    csv, ok = degsde.run_experiment("scale-fn")
    assert ok
    assert csv.splitlines()[0] == "experiment,params,n,mean,stderr,oracle,z,verdict"
    assert degsde.run_experiment("scale-fn") == (csv, ok)
    with pytest.raises(degsde.ConfigError):
        degsde.run_experiment("scale-fn", {"x": "abc"})
