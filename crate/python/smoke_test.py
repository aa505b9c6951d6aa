#!/usr/bin/env python3
"""Smoke test for the nullframe_py extension module.

Builds nothing itself: run `cargo build -p nullframe-py` first. The script
copies the cdylib next to a temp dir under the importable name and exercises
the main surface of the bindings.
"""

import json
import math
import pathlib
import shutil
import sys
import sysconfig
import tempfile

REPO = pathlib.Path(__file__).resolve().parent.parent


def locate_cdylib() -> pathlib.Path:
    candidates = []
    for profile in ("debug", "release"):
        for stem in ("libnullframe_py.so", "libnullframe_py.dylib", "nullframe_py.dll"):
            candidates.append(REPO / "target" / profile / stem)
    for c in candidates:
        if c.exists():
            return c
    sys.exit("nullframe_py cdylib not found; run `cargo build -p nullframe-py` first")


def main() -> None:
    cdylib = locate_cdylib()
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="nullframe_py_"))
    ext = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy2(cdylib, tmp / f"nullframe_py{ext}")
    sys.path.insert(0, str(tmp))

    import nullframe_py as nf

    names = nf.catalog_names()
    assert "light_cone_2d" in names, names

    # Expression round trip with exact gradient.
    e = nf.Expression("r*cos(th)", ["r", "th"])
    assert abs(e.eval([2.0, 0.5]) - 2.0 * math.cos(0.5)) < 1e-14
    g = e.gradient([2.0, 0.5])
    assert abs(g[0] - math.cos(0.5)) < 1e-14
    assert abs(g[1] + 2.0 * math.sin(0.5)) < 1e-14

    # Light cone: frame validity and the 1/r principal curvature.
    cone = nf.Surface.from_catalog("light_cone_2d")
    u = [2.0, 1.3]
    fr = cone.frame(u)
    assert fr["residual"] < 1e-9, fr["residual"]
    sh = cone.shape(u)
    assert abs(sh["h"] - 1.0 / 2.0) < 1e-6, sh["h"]
    assert abs(sh["tau"][0]) < 1e-8, sh["tau"]

    # Config JSON round trip and a driver run.
    cfg = json.loads(cone.config_json())
    cfg["grid"] = [5, 5]
    cone_small = nf.Surface.from_config(json.dumps(cfg))
    report = json.loads(cone_small.run(["validate_frame", "constant_angle"]))
    verdicts = {c["name"]: c["verdict"] for c in report["checks"]}
    assert verdicts == {"validate_frame": "pass", "constant_angle": "pass"}, verdicts

    # CSV export with sidecar schema.
    out = tmp / "cone.csv"
    cone_small.export_csv(str(out), ["validate_frame"])
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 1 + 25, len(rows)
    schema = json.loads((tmp / "cone.schema.json").read_text())
    assert schema["rows"] == 25

    # Error paths surface as Python exceptions.
    try:
        nf.Surface.from_catalog("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for unknown entry")

    print("smoke test passed")


if __name__ == "__main__":
    main()
