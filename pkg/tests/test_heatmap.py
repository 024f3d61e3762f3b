"""SVG heatmap rendering of interference pattern CSVs."""

import math
import re

import numpy as np
import pytest

from gaugesim.heatmap import emit_heatmap, heatmap_svg, parse_pattern_csv


def make_csv(phases, times, fn):
    lines = ["phase,time_us,population"]
    for ph in phases:
        for t in times:
            lines.append("%r,%r,%r" % (ph, t, fn(ph, t)))
    return "\n".join(lines) + "\n"


class TestParse:
    def test_round_trip(self):
        phases = [0.0, 1.0, 2.0]
        times = [0.0, 0.5]
        text = make_csv(phases, times, lambda p, t: p + 10 * t)
        ph, ts, grid = parse_pattern_csv(text)
        assert list(ph) == phases
        assert list(ts) == times
        arr = np.asarray(grid)
        assert arr.shape == (3, 2)
        assert arr[2, 1] == 2.0 + 5.0

    def test_header_required(self):
        with pytest.raises(ValueError, match="header"):
            parse_pattern_csv("a,b,c\n1,2,3\n")

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError, match="no data"):
            parse_pattern_csv("phase,time_us,population\n")

    def test_malformed_row_rejected(self):
        with pytest.raises(ValueError, match="malformed"):
            parse_pattern_csv("phase,time_us,population\n0.0,1.0\n")

    def test_non_numeric_rejected(self):
        with pytest.raises(ValueError):
            parse_pattern_csv("phase,time_us,population\n0.0,x,1.0\n")

    def test_incomplete_grid_rejected(self):
        text = ("phase,time_us,population\n"
                "0.0,0.0,0.1\n0.0,1.0,0.2\n1.0,0.0,0.3\n")
        with pytest.raises(ValueError, match="complete"):
            parse_pattern_csv(text)


class TestRender:
    def test_deterministic(self):
        text = make_csv([0.0, 1.0], [0.0, 1.0], lambda p, t: 0.5)
        assert heatmap_svg(text) == heatmap_svg(text)

    def test_axes_labeled(self):
        svg = heatmap_svg(make_csv([0.0, 1.0], [0.0, 1.0],
                                   lambda p, t: 0.5))
        assert "time (us)" in svg
        assert "loop phase (rad)" in svg
        assert "<svg" in svg and svg.rstrip().endswith("</svg>")

    def test_cells_carry_data_values(self):
        svg = heatmap_svg(make_csv([0.0, 2.0], [0.0, 1.0],
                                   lambda p, t: p / 4.0 + t / 8.0))
        cells = re.findall(r'data-phase="([^"]+)" data-time="([^"]+)" '
                           r'data-value="([^"]+)"', svg)
        assert len(cells) == 4
        lookup = {(float(a), float(b)): float(c) for a, b, c in cells}
        assert lookup[(2.0, 1.0)] == pytest.approx(0.625)

    def test_caged_column_maps_to_dark_color(self):
        # bright transfer everywhere except a dead column at half-flux
        phases = [-math.pi, 0.0, math.pi]
        svg = heatmap_svg(make_csv(
            phases, [0.0, 0.5, 1.0],
            lambda p, t: 0.0 if abs(abs(p) - math.pi) < 1e-9 else 0.9))
        rects = re.findall(r'fill="(#[0-9a-f]{6})" data-phase="([^"]+)"',
                           svg)
        def lum(color):
            return sum(int(color[k:k + 2], 16) for k in (1, 3, 5))
        dark = [lum(c) for c, p in rects
                if abs(abs(float(p)) - math.pi) < 1e-9]
        bright = [lum(c) for c, p in rects if float(p) == 0.0]
        assert max(dark) < min(bright) - 200

    def test_all_zero_grid_renders(self):
        svg = heatmap_svg(make_csv([0.0, 1.0], [0.0, 1.0],
                                   lambda p, t: 0.0))
        assert "<svg" in svg


class TestEmit:
    def test_writes_file(self, tmp_path):
        src = tmp_path / "p.csv"
        src.write_text(make_csv([0.0, 1.0], [0.0, 1.0],
                                lambda p, t: p * t))
        out = tmp_path / "p.svg"
        emit_heatmap(str(src), str(out))
        assert out.read_text().startswith("<svg")

    def test_error_leaves_no_file(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("phase,time_us,population\n")
        out = tmp_path / "p.svg"
        with pytest.raises(ValueError):
            emit_heatmap(str(src), str(out))
        assert not out.exists()
