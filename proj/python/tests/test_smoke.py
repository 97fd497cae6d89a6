# Copyright 2026 The LambdaNet Kernels Authors
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest

import lambdanet as ln


def small(**kwargs):
    args = dict(d_in=3, d_out=4, k=3, h=2, geometry="seq:5")
    args.update(kwargs)
    return ln.LambdaConfig(**args)


def inputs(config, b=2, seed=0):
    rng = np.random.default_rng(seed)
    n = int(config.geometry.split(":")[1])
    return rng.standard_normal((b, n, config.d_in))


def test_default_seed():
    assert ln.DEFAULT_SEED == 0x5EED1A3B


def test_contract_matches_numpy_einsum():
    rng = np.random.default_rng(1)
    k = rng.standard_normal((2, 5, 3))
    v = rng.standard_normal((2, 5, 4))
    np.testing.assert_allclose(ln.contract("bmk,bmv->bkv", k, v), np.einsum("bmk,bmv->bkv", k, v), rtol=1e-12)


def test_contract_rejects_bad_spec():
    with pytest.raises(ValueError):
        ln.contract("bmk,bmv->", np.zeros((1, 2)), np.zeros((1, 2, 3)))


@pytest.mark.parametrize("variant", ["global", "multihead", "content-only"])
def test_forward_matches_reference(variant):
    config = small()
    params = ln.init_params(variant, config)
    x = inputs(config)
    y = ln.forward(variant, x, x, params, config)
    assert y.shape == (2, 5, 4)
    np.testing.assert_allclose(y, ln.reference_forward(variant, x, x, params, config), rtol=1e-10, atol=1e-12)


def test_masked_forward_uses_causal_mask():
    config = small()
    params = ln.init_params("masked", config)
    x = inputs(config)
    mask = ln.causal_mask(5)
    assert mask.shape == (5, 5)
    y = ln.forward("masked", x, x, params, config, mask=mask)
    x2 = x.copy()
    x2[:, -1, :] += 1.0
    y2 = ln.forward("masked", x2, x2, params, config, mask=mask)
    np.testing.assert_array_equal(y[:, :-1], y2[:, :-1])


def test_conv_matches_einsum():
    a = small(scope="3")
    b = small(scope="3", impl="conv")
    params = ln.init_params("global", a)
    x = inputs(a)
    np.testing.assert_allclose(ln.forward("global", x, x, params, a), ln.forward("global", x, x, params, b),
                               rtol=1e-10, atol=1e-12)


def test_backward_shapes():
    config = small()
    params = ln.init_params("global", config)
    x = inputs(config)
    grads = ln.backward("global", x, x, params, config, np.ones((2, 5, 4)))
    assert grads["x"].shape == x.shape
    assert grads["r"].shape == params.r.shape


def test_gradient_check_passes():
    report = ln.gradient_check("global", small(geometry="seq:4"))
    assert report["max_rel_error"] < 1e-6
    assert report["entries"]


def test_relative_index_table():
    t = ln.relative_index_table("seq:3")
    np.testing.assert_array_equal(t, [[2, 3, 4], [1, 2, 3], [0, 1, 2]])
    t = ln.relative_index_table("seq:3", scope="1")
    np.testing.assert_array_equal(t, [[0, -1, -1], [-1, 0, -1], [-1, -1, 0]])


def test_time_cost():
    r = ln.time_cost("lambda", b=1, n=4, m=4, k=2, v=2, h=2)
    assert r["terms"]["content"] == 1 * 4 * 2 * 2
    assert r["terms"]["position"] == 1 * 4 * 4 * 2 * 2
    with pytest.raises(ValueError):
        ln.time_cost("lambda", q=1)


def test_memory_report():
    rows = {r["name"]: r["gib"] for r in ln.memory_report()}
    assert rows["lambda layer (k=8)"] == pytest.approx(rows["lambda layer (k=16)"] / 2)
    assert rows["lambda convolution (7x7)"] < rows["lambda layer (shared embeddings)"]


def test_run_suite():
    assert "oracle" in ln.suite_names()
    assert ln.run_suite("relpos")["passed"]
    with pytest.raises(ln.ConfigError):
        ln.run_suite("nope")


def test_config_errors():
    with pytest.raises(ln.ConfigError):
        ln.LambdaConfig(d_in=3, d_out=5, h=2)
    with pytest.raises(ValueError):
        small(boundary="mirror")


def test_params_round_trip():
    config = small()
    params = ln.init_params("global", config)
    w = params.w_q
    params.w_q = w * 2
    np.testing.assert_array_equal(params.w_q, w * 2)
    assert params.parameter_count() == w.size + params.w_k.size + params.w_v.size + params.r.size


def test_train_toy_short_run():
    report = ln.train_toy("full", steps=100)
    assert not report["diverged"]
    assert report["curve"]
