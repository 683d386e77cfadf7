"""Text formats: point files and saved curve fits.

Point files are UTF-8 text with one `x y` pair per line; `#` starts a
comment.  Coordinates are written with 17 significant digits so a
write/read round trip is exact.
"""

import numpy as np

from .geometry import BSplineCurve

CURVE_HEADER = "# splinefit-curve-v1"


def write_points(path, points):
    pts = np.asarray(points, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in pts:
            fh.write(f"{x:.17g} {y:.17g}\n")


def read_points(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'x y', got {line!r}")
            rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise ValueError(f"{path}: no points found")
    return np.array(rows, dtype=np.float64)


def write_curve(path, curve: BSplineCurve):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CURVE_HEADER + "\n")
        fh.write(f"degree {curve.degree}\n")
        fh.write(f"closed {int(curve.closed)}\n")
        fh.write("knots " + " ".join(f"{k:.17g}" for k in curve.knots) + "\n")
        fh.write(f"ctrl {curve.n_ctrl}\n")
        for x, y in curve.control_points:
            fh.write(f"{x:.17g} {y:.17g}\n")


def read_curve(path) -> BSplineCurve:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0].strip() != CURVE_HEADER:
        raise ValueError(f"{path}: not a splinefit curve file")
    fields = {}
    ctrl = []
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key == "ctrl":
            n = int(rest)
            while len(ctrl) < n and i < len(lines):
                x, y = lines[i].split()
                ctrl.append((float(x), float(y)))
                i += 1
            fields["n"] = n
        else:
            fields[key] = rest
    curve = BSplineCurve(
        degree=int(fields["degree"]),
        knots=np.array([float(v) for v in fields["knots"].split()]),
        control_points=np.array(ctrl, dtype=np.float64),
        closed=bool(int(fields["closed"])),
    )
    if curve.n_ctrl != fields.get("n", curve.n_ctrl):
        raise ValueError(f"{path}: control point count mismatch")
    return curve
