"""Fast FD spot-checks; the acceptance suite runs the full 20-instance sweep."""

from redloco.harness.verify import check_ad_loss, check_op_loss, check_vp_loss
from redloco.nn.gradcheck import run_layer_suite

TOL = 1e-4


def test_every_layer_kind_passes_fd_spot_check():
    results = run_layer_suite(instances=3, seed=11)
    assert set(results) == {"linear", "elu", "tanh", "sigmoid", "conv2d", "deconv2d",
                            "gru_cell", "attention_1h", "flatten", "reshape"}
    for kind, err in results.items():
        assert err < TOL, f"{kind}: {err:.3e}"


def test_proprio_loss_gradients_flow_into_both_encoders():
    assert check_op_loss(0, "mlp") < TOL
    assert check_op_loss(1, "attention") < TOL


def test_vision_loss_gradients_cover_all_heads():
    assert check_vp_loss(0, "mlp") < TOL
    assert check_vp_loss(1, "attention") < TOL


def test_reconstruction_loss_gradients():
    assert check_ad_loss(0) < TOL
