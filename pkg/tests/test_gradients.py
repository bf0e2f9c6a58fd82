"""End-to-end gradients through the solver, the vector fields and the loss."""

import numpy as np
import pytest

from stgncde.autodiff import Tape, absolute, backward, check_gradients, sum_all
from stgncde.training import l1_loss


def test_hidden_path_ignores_spatial_parameters(make_model, tiny_path):
    model = make_model("full")
    spatial = model.params.names_with_prefix("g_in", "g_out", "embedding", "w_spatial", "z0_fc")
    temporal = model.params.names_with_prefix("f_layers", "f_out", "h0_fc")

    with Tape():
        final = model.solve(tiny_path)
        grads = backward(sum_all(absolute(final.H)), wrt=model.params.parameters())

    for name in spatial:
        assert np.all(grads[model.params[name]] == 0.0), name
    assert any(np.any(grads[model.params[name]] != 0.0) for name in temporal)


def test_spatial_state_depends_on_temporal_parameters(make_model, tiny_path):
    model = make_model("full")
    with Tape():
        final = model.solve(tiny_path)
        grads = backward(sum_all(absolute(final.Z)), wrt=model.params.parameters())
    for name in model.params.names_with_prefix("f_layers", "f_out", "g_in", "g_out", "embedding", "w_spatial"):
        assert np.any(grads[model.params[name]] != 0.0), name


def test_output_head_unused_by_the_state(make_model, tiny_path):
    model = make_model("temporal_only")
    with Tape():
        final = model.solve(tiny_path)
        grads = backward(sum_all(final.H), wrt=model.params.parameters())
    assert np.all(grads[model.params["w_output"]] == 0.0)
    assert np.all(grads[model.params["b_output"]] == 0.0)


@pytest.mark.parametrize("variant,method", [
    ("full", "euler"),
    ("full", "rk4"),
    ("temporal_only", "euler"),
    ("spatial_only", "euler"),
])
def test_loss_gradient_matches_finite_differences(make_model, tiny_path, tiny_targets, variant, method):
    model = make_model(variant, method=method, seed=7)
    path = tiny_path[0:1]
    targets = tiny_targets[0:1]

    report = check_gradients(lambda: l1_loss(model(path), targets), model.params.parameters(),
                             eps=1e-5, rtol=1e-3, atol=1e-8)
    assert report.ok, report.failures
