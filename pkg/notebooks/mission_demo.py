"""Mission demo: fly the default closed loop and chart it.

Run with ``python3 notebooks/mission_demo.py [outdir]``. Takes about 20 s.
"""
import sys
from collections import Counter
from itertools import groupby
from pathlib import Path

import numpy as np

from windowingress import simworld as sw
from windowingress.config import RunConfig
from windowingress.nav import run_mission
from windowingress.svgplot import mission_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "mission")
out.mkdir(exist_ok=True)

# Default start: 8 units from the wall, 1 unit right, 15 degrees yaw error.
cfg = RunConfig()
log = run_mission(
    cfg.world, cfg.start.state(cfg.world), cfg.camera, cfg.detect, cfg.nav, cfg.limits,
    cfg.max_steps, cfg.seed, sw.reference_histogram(cfg.world, cfg.camera),
)
print("ingressed" if log.ingressed else "not ingressed", f"after {len(log.rows) - 1} frames")

# The phase timeline from first sighting to the plane crossing.
for phase, run in groupby(log.rows, key=lambda r: r.phase.value):
    run = list(run)
    print(f"  {phase:<10} steps {run[0].step:>3}-{run[-1].step:<3}")
print("frames per phase:", dict(Counter(r.phase.value for r in log.rows)))

# The relative angle converges as the UAV turns and slides toward the normal.
psi = np.array([r.est_psi_deg for r in log.rows])
seen = psi[np.isfinite(psi)]
print(f"estimated psi: first {seen[0]:.2f}, peak {np.abs(seen).max():.2f}, last {seen[-1]:.2f} deg")

csv = log.to_csv()
(out / "mission.csv").write_text(csv)
(out / "mission.svg").write_text(mission_svg(csv))
print(f"log and charts written to {out}/")
