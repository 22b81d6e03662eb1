"""Text and JSON artifact formats.

Point sets travel as ``delone-v1``: a header line ``# delone-v1 d=2
denom=<k>`` followed by one ``x y`` numerator pair per line, sorted, UTF-8,
LF endings.  Maps travel as ``map-v1`` with header ``# map-v1 denom_src=<a>
denom_tgt=<b>`` and ``x y u v`` lines.  Writers are byte-deterministic.
"""

from __future__ import annotations

import json
from pathlib import Path

from .construction import Level, ScaleSchedule
from .density import Density, density_from_json, parse_rational, _rat_str
from .distortion import BijectionTable
from .errors import FormatError
from .geometry import Box, PointSet, Rect

rational_str = _rat_str


# ---------------------------------------------------------------------------
# delone-v1


def dumps_points(ps: PointSet) -> str:
    lines = [f"# delone-v1 d=2 denom={ps.denom}"]
    lines.extend(f"{x} {y}" for x, y in ps.numerators())
    return "\n".join(lines) + "\n"


def write_points(ps: PointSet, path) -> None:
    Path(path).write_bytes(dumps_points(ps).encode("utf-8"))


def loads_points(text: str) -> PointSet:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty point-set file")
    head = lines[0].split()
    if head[:3] != ["#", "delone-v1", "d=2"] or len(head) != 4 \
            or not head[3].startswith("denom="):
        raise FormatError(f"bad delone-v1 header: {lines[0]!r}")
    try:
        denom = int(head[3][len("denom="):])
    except ValueError:
        raise FormatError(f"bad denominator in header: {lines[0]!r}")
    if denom < 1:
        raise FormatError("denominator must be >= 1")
    nums = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"line {ln}: expected 'x y', got {line!r}")
        try:
            nums.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise FormatError(f"line {ln}: non-integer coordinates {line!r}")
    for a, b in zip(nums, nums[1:]):
        if a == b:
            raise FormatError(f"duplicate point {a}")
        if a > b:
            raise FormatError(f"points not sorted at {b}")
    return PointSet(nums, denom)


def read_points(path) -> PointSet:
    return loads_points(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# map-v1


def dumps_map(f: BijectionTable) -> str:
    lines = [f"# map-v1 denom_src={f.src_denom} denom_tgt={f.tgt_denom}"]
    for s in f.source_numerators():
        t = f.fwd[s]
        lines.append(f"{s[0]} {s[1]} {t[0]} {t[1]}")
    return "\n".join(lines) + "\n"


def write_map(f: BijectionTable, path) -> None:
    Path(path).write_bytes(dumps_map(f).encode("utf-8"))


def loads_map(text: str) -> BijectionTable:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty map file")
    head = lines[0].split()
    if head[:2] != ["#", "map-v1"] or len(head) != 4 \
            or not head[2].startswith("denom_src=") \
            or not head[3].startswith("denom_tgt="):
        raise FormatError(f"bad map-v1 header: {lines[0]!r}")
    try:
        src_denom = int(head[2][len("denom_src="):])
        tgt_denom = int(head[3][len("denom_tgt="):])
    except ValueError:
        raise FormatError(f"bad denominators in header: {lines[0]!r}")
    pairs = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"line {ln}: expected 'x y u v', got {line!r}")
        try:
            x, y, u, v = (int(p) for p in parts)
        except ValueError:
            raise FormatError(f"line {ln}: non-integer entries {line!r}")
        pairs.append(((x, y), (u, v)))
    try:
        return BijectionTable(pairs, src_denom, tgt_denom)
    except Exception as exc:
        raise FormatError(f"invalid map: {exc}") from exc


def read_map(path) -> BijectionTable:
    return loads_map(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# JSON configs


def schedule_from_json(obj) -> ScaleSchedule:
    try:
        levels = obj["levels"]
    except (TypeError, KeyError):
        raise FormatError("schedule spec missing 'levels'")
    out = []
    for i, lv in enumerate(levels):
        try:
            out.append(Level(int(lv["l"]), int(lv["m"]),
                             (int(lv["anchor"][0]), int(lv["anchor"][1]))))
        except (TypeError, KeyError, ValueError, IndexError) as exc:
            raise FormatError(f"bad schedule level {i}: {exc}") from exc
    return ScaleSchedule(tuple(out))


def schedule_to_json(s: ScaleSchedule) -> dict:
    return {"levels": [{"l": lv.l, "m": lv.m, "anchor": list(lv.anchor)}
                       for lv in s.levels]}


def window_from_json(obj) -> Rect:
    if not isinstance(obj, dict):
        raise FormatError("window must be an object")
    if "min" in obj and "max" in obj:
        x0, y0 = (parse_rational(v) for v in obj["min"])
        x1, y1 = (parse_rational(v) for v in obj["max"])
        return Rect(x0, x1, y0, y1)
    if "center" in obj and "radius" in obj:
        cx, cy = (parse_rational(v) for v in obj["center"])
        r = parse_rational(obj["radius"])
        return Rect.from_box(Box((cx, cy), r))
    raise FormatError("window needs min/max or center/radius")


def window_to_json(r: Rect) -> dict:
    return {"min": [rational_str(r.x0), rational_str(r.y0)],
            "max": [rational_str(r.x1), rational_str(r.y1)]}


def build_config_from_json(obj) -> tuple[Density, ScaleSchedule, Rect]:
    if not isinstance(obj, dict):
        raise FormatError("build config must be a JSON object")
    for key in ("density", "schedule", "window"):
        if key not in obj:
            raise FormatError(f"build config missing {key!r}")
    return (density_from_json(obj["density"]),
            schedule_from_json(obj["schedule"]),
            window_from_json(obj["window"]))


def load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
