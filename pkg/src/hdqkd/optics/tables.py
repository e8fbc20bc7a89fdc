"""Built-in wave-plate settings and expected detector states for the analysers."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from hdqkd.optics.network import detector_projectors, is_complete_measurement, load_network, verify_table


def load_golden_tables(path=None) -> list[dict]:
    if path is None:
        text = resources.files("hdqkd.optics").joinpath("tables.json").read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


def verify_golden_tables(path=None, atol: float = 1e-10) -> list[dict]:
    """Check every angle row; one result dict per (table, basis) row."""
    results = []
    for table in load_golden_tables(path):
        net = load_network(table["network"])
        for row in table["rows"]:
            detectors = verify_table(net, row["angles"], row["detectors"], atol=atol)
            projectors = detector_projectors(net.with_angles(row["angles"]))
            complete = is_complete_measurement(projectors, net.d_in, atol=atol)
            results.append({
                "table": table["table"],
                "d": table["d"],
                "k": table["k"],
                "basis": row["basis"],
                "network": table["network"],
                "detectors": detectors,
                "complete": complete,
                "max_deviation": max(r["deviation"] for r in detectors.values()),
                "pass": complete and all(r["pass"] for r in detectors.values()),
            })
    return results
