import numpy as np
import pytest

from superhedge import svgplot


def test_histogram_single_document(tmp_path):
    x = np.random.default_rng(3).normal(size=1000)
    svg = svgplot.plot("loss-histogram", {"a": x}, tmp_path / "h.svg")
    assert svg.count("<svg") == 1 and svg.rstrip().endswith("</svg>")
    assert (tmp_path / "h.svg").read_text() == svg


def test_fd_edges_cover_data():
    x = np.random.default_rng(0).exponential(size=500)
    e = svgplot.freedman_diaconis_edges(x)
    assert e[0] <= x.min() and e[-1] >= x.max()
    assert np.all(np.diff(e) > 0)


def test_price_process_polylines():
    U = np.cumsum(np.random.default_rng(1).normal(size=(80, 11)), axis=1)
    svg = svgplot.plot("price-process", U[:50])
    assert svg.count("<polyline") == 50
    assert svgplot.plot("price-process", U).count("<polyline") == 50


def test_deterministic_bytes():
    x = np.linspace(-1, 1, 300)
    assert svgplot.plot("loss-histogram", {"s": x}) == svgplot.plot("loss-histogram", {"s": x})


def test_lambda_curves():
    data = {"lambda": np.array([10.0, 100, 1000]), "price": np.array([1.6, 1.9, 2.1]), "alpha": np.array([0.3, 0.8, 0.99])}
    assert "<svg" in svgplot.plot("lambda-curves", data)


def test_empty_and_unknown():
    with pytest.raises(ValueError):
        svgplot.plot("loss-histogram", {"a": np.array([])})
    with pytest.raises(ValueError):
        svgplot.plot("price-process", np.zeros((0, 3)))
    with pytest.raises(ValueError):
        svgplot.plot("pie", {})
