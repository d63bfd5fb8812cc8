import math

import numpy as np
import pytest

import rgglab


def test_density_and_measures():
    g = rgglab.DensitySpec.gaussian(2)
    assert g.dimension == 2
    assert rgglab.tail_mass(g, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-10)
    assert rgglab.ball_mass(g, 0.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-10)
    assert rgglab.cube_mass(g, [-1, -1], [1, 1]) == pytest.approx(math.erf(1.0) ** 2, rel=1e-10)
    assert rgglab.DensitySpec.from_dict(g.to_dict()) == g
    assert rgglab.DensitySpec.parse(3, "heavy:4").label == "heavy:4"


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        rgglab.DensitySpec.heavy_tail(2, 1.0)
    with pytest.raises(ValueError):
        rgglab.run_sweep({"n_values": [10]})


def test_classify():
    rep = rgglab.classify(rgglab.DensitySpec.gaussian(2), 1e6, 0.05)
    assert {"r0", "r1", "prediction"} <= rep.keys()
    assert rgglab.tau(rgglab.DensitySpec.gaussian(2), 1e6) > 0


def test_sample_and_graph_match_brute_force():
    spec = rgglab.DensitySpec.heavy_tail(2, 4.0)
    pts = rgglab.sample(spec, 400.0, 3)
    assert pts.ndim == 2 and pts.shape[1] == 2
    assert np.array_equal(pts, rgglab.sample(spec, 400.0, 3))
    r = 0.4
    g = rgglab.Graph(spec, pts, r)
    diff = pts[:, None, :] - pts[None, :, :]
    adj = (diff**2).sum(-1) < r * r
    iu = np.argwhere(np.triu(adj, 1))
    assert np.array_equal(g.edges(), iu.astype(np.uint32))
    assert np.array_equal(g.isolated(), adj.sum(1) == 1)
    s = g.stats([1.0])
    assert s["num_components"] == g.num_components
    assert s["r_c"] <= s["r_max"]


def test_run_sweep_is_deterministic():
    cfg = {
        "spec": {"dimension": 2, "family": {"light_tail": {"v": 2}}},
        "n_values": [200, 400],
        "r_schedule": {"tau_multiple": 0.5},
        "trials": 3,
        "master_seed": 9,
    }
    a = rgglab.run_sweep(cfg, threads=1)
    b = rgglab.run_sweep(cfg, threads=2)
    assert a["results_csv"] == b["results_csv"]
    assert a["results_csv"].startswith("density,d,n,r,trials,p_disconnected")
    assert len(a["cells"]) == 2
    assert len(a["records"]) == 6
