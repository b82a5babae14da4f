import xml.etree.ElementTree as ET

import numpy as np
import pytest

from statboard.charts import (
    ChartError,
    render_bar_chart,
    render_chart_svg,
    render_control_chart,
    render_scatter,
    render_scree,
)
from statboard.descriptive import frequency_table
from statboard.pca import DataMatrix, pca
from statboard.spc import SubgroupData, xbar_r_chart


def assert_well_formed(svg: str):
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")


class TestBarChart:
    def test_one_bar_per_category(self):
        ft = frequency_table(["A", "A", "B"])
        svg = render_chart_svg("frequency", {"table": ft})["bars"]
        assert_well_formed(svg)
        assert svg.count('class="bar"') == 2

    def test_zero_counts_still_render_bars(self):
        svg = render_bar_chart(["1", "2", "3", "4", "5"], [0, 0, 2, 1, 0], "t")
        assert svg.count('class="bar"') == 5
        assert_well_formed(svg)

    def test_label_escaping(self):
        svg = render_bar_chart(["<b>&"], [1], 'x "quoted" <y>')
        assert_well_formed(svg)
        assert "<b>&" not in svg

    def test_deterministic_bytes(self):
        args = (["a", "b"], [3, 4], "same input")
        assert render_bar_chart(*args) == render_bar_chart(*args)


class TestControlChart:
    def _chart(self):
        rng = np.random.default_rng(1)
        rows = rng.normal(74, 0.01, size=(40, 4)).tolist()
        return xbar_r_chart(SubgroupData.from_rows(rows))

    def test_forty_markers_and_three_limit_lines_per_chart(self):
        charts = render_chart_svg("xbar_r", self._chart())
        assert set(charts) == {"xbar", "r"}
        for svg in charts.values():
            assert_well_formed(svg)
            assert svg.count('class="pt"') == 40
            assert svg.count('class="limit"') == 3

    def test_deterministic_bytes(self):
        result = self._chart()
        a = render_chart_svg("xbar_r", result)
        b = render_chart_svg("xbar_r", result)
        assert a == b

    def test_single_point_renders(self):
        svg = render_control_chart([1.0], 0.0, 1.0, 2.0, (), "one")
        assert svg.count('class="pt"') == 1
        assert_well_formed(svg)

    def test_empty_rejected(self):
        with pytest.raises(ChartError):
            render_control_chart([], 0.0, 1.0, 2.0, (), "none")


class TestPcaCharts:
    def test_scatter_and_scree(self):
        rng = np.random.default_rng(3)
        result = pca(DataMatrix.from_rows(list("abcd"), rng.normal(size=(21, 4))))
        charts = render_chart_svg("pca", result)
        assert set(charts) == {"scores", "scree"}
        assert charts["scores"].count('class="pt"') == 21
        assert charts["scree"].count('class="bar"') == 4
        for svg in charts.values():
            assert_well_formed(svg)

    def test_scree_direct(self):
        svg = render_scree([0.7, 0.2, 0.1], "scree")
        assert svg.count('class="bar"') == 3

    def test_scatter_mismatched_lengths(self):
        with pytest.raises(ChartError):
            render_scatter([1.0], [1.0, 2.0], "bad")


def test_unsupported_kind_rejected():
    with pytest.raises(ChartError, match="crosstab"):
        render_chart_svg("crosstab", {})
