# Copyright 2026 The qpm Authors
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

import qpm


def haar_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def test_sic_vectors_are_equiangular():
    for d in (2, 3, 4):
        vs = qpm.sic_vectors(d)
        assert len(vs) == d * d
        gram = np.abs(np.array([[np.vdot(a, b) for b in vs] for a in vs])) ** 2
        off = gram[~np.eye(d * d, dtype=bool)]
        assert np.max(np.abs(off - 1 / (d + 1))) < 1e-8
        assert qpm.design_residual(d) < 1e-8


def test_unsupported_dimension_raises():
    with pytest.raises(ValueError):
        qpm.sic_vectors(5)


def test_universal_output_law():
    rng = np.random.default_rng(4)
    for _ in range(5):
        a, b = haar_qubit(rng), haar_qubit(rng)
        for y, psi in enumerate((a, b)):
            tau = qpm.universal_output(a, b, y)
            proj = np.outer(psi, psi.conj())
            expected = 5 / 6 * proj + 1 / 6 * (np.eye(2) - proj)
            assert np.max(np.abs(tau - expected)) < 1e-10


def test_universal_fidelity():
    f = qpm.universal_fidelity()
    assert f["F_avg"] == pytest.approx(5 / 6, abs=1e-12)
    assert f["F_worst"] == pytest.approx(5 / 6, abs=1e-12)


def test_closed_forms():
    assert qpm.mixed_input_fidelity(1.0) == pytest.approx(5 / 6)
    assert qpm.mixed_input_fidelity(0.5) == pytest.approx(1.0)
    assert qpm.swap_fidelity(math.pi / 4) == pytest.approx(0.75)
    assert qpm.noisy_resource_fidelity(0.5) == pytest.approx(2 / 3)
    assert qpm.rac_bound(2, 2) == pytest.approx((0.75, 5 / 6))


def test_box_composition_is_perfect():
    box = qpm.ns_box(2, 2)
    assert box.bell_value() == 1.0
    assert box.signaling_residual() == 0.0
    r = qpm.compose_fidelity("box", 2, 2)
    assert r["F_simulated"] == pytest.approx(1.0, abs=1e-12)
    r = qpm.compose_fidelity("random", 2, 2)
    assert r["F_simulated"] == pytest.approx(0.5, abs=1e-12)


def test_seesaw_reaches_five_sixths():
    r = qpm.seesaw(2, 2, restarts=2, seed=1)
    assert r["best"] >= 5 / 6 - 1e-4
    assert all(b >= a - 1e-7 for a, b in zip(r["trace"], r["trace"][1:]))


def test_cli_bridge():
    code, out, err = qpm.run_cli(["bounds", "--N-max", "2", "--d-max", "2"])
    assert code == 0
    assert "2,2,0.75,0.833333333333" in out
    code, _, _ = qpm.run_cli(["designs", "--d", "5"])
    assert code == 2
