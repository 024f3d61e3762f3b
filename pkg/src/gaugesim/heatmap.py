"""Self-contained SVG heatmaps for interference patterns.

Renders a (loop phase) x (time) population grid from the CSV emitted by
the pattern writers.  No plotting library: the SVG is assembled from
rect elements with a fixed color table, so identical input bytes always
produce identical output bytes.  Every cell carries its coordinates and
value as data attributes, which makes the figures machine-checkable.
"""

# 20-stop perceptually uniform colormap, dark purple to yellow
_STOPS = [
    (68, 1, 84), (72, 21, 103), (72, 38, 119), (69, 55, 129),
    (64, 71, 136), (57, 86, 140), (51, 99, 141), (45, 112, 142),
    (40, 125, 142), (35, 138, 141), (31, 150, 139), (32, 163, 135),
    (41, 175, 127), (60, 187, 117), (85, 198, 103), (115, 208, 85),
    (149, 216, 64), (184, 222, 41), (220, 227, 25), (253, 231, 37),
]


def _color(t):
    if t != t:
        t = 0.0
    t = min(1.0, max(0.0, t))
    pos = t * (len(_STOPS) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(_STOPS) - 1)
    frac = pos - lo
    r = round(_STOPS[lo][0] + frac * (_STOPS[hi][0] - _STOPS[lo][0]))
    g = round(_STOPS[lo][1] + frac * (_STOPS[hi][1] - _STOPS[lo][1]))
    b = round(_STOPS[lo][2] + frac * (_STOPS[hi][2] - _STOPS[lo][2]))
    return "#%02x%02x%02x" % (r, g, b)


def parse_pattern_csv(text):
    """Pattern CSV back into (phases, times, value grid)."""
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines or lines[0].strip() != "phase,time_us,population":
        raise ValueError("expected a phase,time_us,population CSV header")
    if len(lines) == 1:
        raise ValueError("pattern CSV has no data rows")
    phases = []
    times = []
    cells = {}
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValueError("malformed CSV row: %r" % ln)
        try:
            ph, t, val = (float(x) for x in parts)
        except ValueError:
            raise ValueError("non-numeric CSV row: %r" % ln)
        if ph not in phases:
            phases.append(ph)
        if t not in times:
            times.append(t)
        cells[(ph, t)] = val
    if len(cells) != len(phases) * len(times):
        raise ValueError("pattern CSV is not a complete phase x time grid")
    grid = [[cells[(ph, t)] for t in times] for ph in phases]
    return phases, times, grid


def _fmt(x):
    return "%.10g" % x


def heatmap_svg(csv_text):
    """Render a pattern CSV as a standalone SVG heatmap string."""
    phases, times, grid = parse_pattern_csv(csv_text)
    nph, nt = len(phases), len(times)
    vmax = max(max(row) for row in grid)
    if vmax <= 0.0:
        vmax = 1.0

    ml, mt, mr, mb = 70, 30, 80, 50
    pw, phh = 480, 320
    width = ml + pw + mr
    height = mt + phh + mb
    cw = pw / nt
    ch = phh / nph

    out = []
    out.append('<svg xmlns="http://www.w3.org/2000/svg" width="%d" '
               'height="%d" viewBox="0 0 %d %d">' % (width, height,
                                                     width, height))
    out.append('<rect x="0" y="0" width="%d" height="%d" fill="white"/>'
               % (width, height))
    # first phase row at the bottom, time running right
    for i, ph in enumerate(phases):
        y = mt + phh - (i + 1) * ch
        for j, t in enumerate(times):
            v = grid[i][j]
            out.append(
                '<rect x="%.3f" y="%.3f" width="%.3f" height="%.3f" '
                'fill="%s" data-phase="%s" data-time="%s" data-value="%s"/>'
                % (ml + j * cw, y, cw + 0.05, ch + 0.05,
                   _color(v / vmax), _fmt(ph), _fmt(t), _fmt(v)))

    def ticks(lo, hi, n=5):
        return [lo + (hi - lo) * k / (n - 1) for k in range(n)]

    axis = ('<line x1="%.1f" y1="%.1f" x2="%.1f" y2="%.1f" '
            'stroke="black" stroke-width="1"/>')
    out.append(axis % (ml, mt + phh, ml + pw, mt + phh))
    out.append(axis % (ml, mt, ml, mt + phh))
    t_lo, t_hi = times[0], times[-1]
    p_lo, p_hi = phases[0], phases[-1]
    for tv in ticks(t_lo, t_hi):
        frac = 0.5 if t_hi == t_lo else (tv - t_lo) / (t_hi - t_lo)
        x = ml + frac * (pw - cw) + 0.5 * cw
        out.append(axis % (x, mt + phh, x, mt + phh + 5))
        out.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
                   'font-size="11" text-anchor="middle">%.3g</text>'
                   % (x, mt + phh + 18, tv))
    for pv in ticks(p_lo, p_hi):
        frac = 0.5 if p_hi == p_lo else (pv - p_lo) / (p_hi - p_lo)
        y = mt + phh - frac * (phh - ch) - 0.5 * ch
        out.append(axis % (ml - 5, y, ml, y))
        out.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
                   'font-size="11" text-anchor="end">%.3g</text>'
                   % (ml - 8, y + 4, pv))
    out.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
               'font-size="13" text-anchor="middle">time (us)</text>'
               % (ml + pw / 2, height - 12))
    out.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
               'font-size="13" text-anchor="middle" '
               'transform="rotate(-90 14 %.1f)">loop phase (rad)</text>'
               % (14.0, mt + phh / 2, mt + phh / 2))

    # colorbar
    cbx = ml + pw + 25
    nswatch = len(_STOPS)
    sh = phh / nswatch
    for k in range(nswatch):
        frac = k / (nswatch - 1)
        out.append('<rect x="%.1f" y="%.3f" width="16" height="%.3f" '
                   'fill="%s"/>' % (cbx, mt + phh - (k + 1) * sh,
                                    sh + 0.05, _color(frac)))
    out.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
               'font-size="11">%.3g</text>' % (cbx + 20, mt + phh, 0.0))
    out.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
               'font-size="11">%.3g</text>' % (cbx + 20, mt + 10, vmax))
    out.append('</svg>')
    return "\n".join(out) + "\n"


def emit_heatmap(csv_path, out_path):
    """Read a pattern CSV and write the SVG; no file on invalid input."""
    with open(csv_path) as fh:
        text = fh.read()
    svg = heatmap_svg(text)
    with open(out_path, "w", newline="") as fh:
        fh.write(svg)
