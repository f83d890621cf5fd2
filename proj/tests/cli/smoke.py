# SPDX-License-Identifier: Apache-2.0
"""End-to-end run of the relight binary: manifest, evaluate, enhance, ablate, exit codes."""
import filecmp
import subprocess
import sys
import tempfile
from pathlib import Path

import cv2
import numpy as np

relight = sys.argv[1]


def run(expect, *args):
    p = subprocess.run([relight, *map(str, args)], capture_output=True, text=True)
    if p.returncode != expect:
        sys.exit(f"relight {' '.join(map(str, args))}: exit {p.returncode}, expected {expect}\n{p.stdout}\n{p.stderr}")
    return p.stdout


with tempfile.TemporaryDirectory() as tmp:
    w = Path(tmp)
    (w / "low").mkdir()
    (w / "high").mkdir()
    rng = np.random.default_rng(0)
    for i in [10, 2, 1]:
        hi = rng.uniform(60, 200, (32, 32, 3)).astype(np.uint8)
        cv2.imwrite(str(w / "high" / f"{i}.png"), hi)
        cv2.imwrite(str(w / "low" / f"{i}.png"), (hi * 0.1).astype(np.uint8))
    cv2.imwrite(str(w / "low" / "black.png"), np.zeros((16, 16, 3), np.uint8))
    (w / "run.cfg").write_text("steps = 10\n")

    run(0, "schedule", "--kind", "cosine", "--steps", "4")
    run(1, "schedule", "--kind", "karras")
    run(1, "manifest", "--input", w / "low", "--gt", w / "high", "--out", w / "m.csv")
    run(0, "manifest", "--input", w / "low", "--gt", w / "high", "--allow-unmatched", "--out", w / "m.csv")
    ids = [line.split(",")[0] for line in (w / "m.csv").read_text().splitlines()[1:]]
    assert ids == ["1", "2", "10"], ids

    for workers in (1, 3):
        run(0, "evaluate", "--manifest", w / "m.csv", "--config", w / "run.cfg", "--workers", workers, "--out", w / f"ev{workers}")
    for name in ["report.csv", "images/1.png", "images/2.png", "images/10.png"]:
        assert filecmp.cmp(w / "ev1" / name, w / "ev3" / name, shallow=False), name

    run(2, "enhance", "--input", w / "low", "--output", w / "enh", "--config", w / "run.cfg")
    assert sorted(p.name for p in (w / "enh").iterdir()) == ["1.png", "10.png", "2.png"]
    run(1, "enhance", "--input", w / "low" / "1.png", "--output", w / "enh", "--backend", "external")
    run(1, "evaluate", "--manifest", w / "m.csv", "--out", w / "bad", "--variant", "bogus")

    run(0, "ablate", "--manifest", w / "m.csv", "--config", w / "run.cfg", "--variants", "final,no-sa", "--out", w / "abl")
    assert (w / "abl" / "ablation.csv").read_text().startswith("variant,psnr,ssim,lpips\nfinal,")
    out = run(0, "channel-align", "--manifest", w / "m.csv", "--config", w / "run.cfg", "--modes", "ch0,full,none", "--out", w / "al")
    assert "full" in out and (w / "al" / "histograms.csv").exists()
print("cli smoke ok")
