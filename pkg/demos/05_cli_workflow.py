#!/usr/bin/env python3
"""The config-driven workflow end to end.

Everything the library does is reachable through one JSON document and the
``finsec`` command.  This script writes the config for the oscillating
paired operator, runs all four modes in-process, and lists the artifacts.
The same configs live in demos/configs/ for direct command line use:

    finsec fsm      --config demos/configs/paired_oscillating.json --out out/
    finsec simulate --config demos/configs/paired_sign.json        --out out/
    finsec spectrum --config demos/configs/projections.json        --out out/
"""

import json
import pathlib

from finsec.cli_report import parse_config, run

HERE = pathlib.Path(__file__).parent
OUT = HERE / "output" / "cli"
OUT.mkdir(parents=True, exist_ok=True)

config = json.loads((HERE / "configs" / "paired_oscillating.json").read_text())

for mode in ("fsm", "analyze"):
    doc = dict(config)
    doc["mode"] = mode
    cfg = parse_config(json.dumps(doc))
    code = run(cfg, OUT / mode)
    print(f"mode {mode}: exit {code}")

sim = json.loads((HERE / "configs" / "paired_sign.json").read_text())
sim["mode"] = "simulate"
sim["tau_list"] = [5, 10, 20]
sim["grid"] = {"n": 256}
print("mode simulate: exit", run(parse_config(json.dumps(sim)), OUT / "simulate"))

cloud_cfg = json.loads((HERE / "configs" / "projections.json").read_text())
print("mode spectrum: exit", run(parse_config(json.dumps(cloud_cfg)), OUT / "spectrum"))

print("artifacts:")
for path in sorted(OUT.rglob("*")):
    if path.is_file():
        print("  ", path.relative_to(HERE))
