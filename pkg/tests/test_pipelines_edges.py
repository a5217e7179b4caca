import numpy as np
import pytest

from mlgsp.convolution import ThresholdPolicy, WindowSpec
from mlgsp.errors import ShapeError
from mlgsp.pipelines.edges import PANEL_LABELS, edge_detect_pipeline


def test_constant_image_has_no_edges():
    panel = edge_detect_pipeline(np.full((12, 12, 3), 0.3))
    assert tuple(panel.maps) == PANEL_LABELS
    assert all(not r.edges.any() for r in panel.maps.values())


@pytest.mark.parametrize("k", [3, 5])
def test_step_within_one_pixel(k):
    img = np.zeros((16, 16, 3))
    img[:, 8:] = (0.9, 0.6, 0.3)
    panel = edge_detect_pipeline(img, WindowSpec(k))
    for label, res in panel.maps.items():
        cols = set(np.nonzero(res.edges)[1])
        assert cols, label
        assert cols <= {6, 7, 8, 9}, label


def test_primary_and_policy():
    img = np.random.default_rng(0).uniform(size=(10, 10, 3))
    panel = edge_detect_pipeline(img, variant="c2", policy=ThresholdPolicy("fixed", 0.05))
    assert panel.primary == "MLG-c2"
    assert all(r.threshold == 0.05 for r in panel.maps.values())


def test_rejects_non_rgb():
    with pytest.raises(ShapeError):
        edge_detect_pipeline(np.zeros((8, 8)))
    with pytest.raises(ShapeError):
        edge_detect_pipeline(np.zeros((8, 8, 4)))
