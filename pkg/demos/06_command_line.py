"""
The command line front end
==========================

Everything above is also reachable as ``growthbound construct|certify|profile|demo``
with a TOML configuration.  Here the entry point is called in process.
"""

# %%
import io
from pathlib import Path
import tempfile

from growthbound.cli import run

work = Path(tempfile.mkdtemp())
cfg = work / "run.toml"
cfg.write_text(
    'mode = "growth"\n'
    "delta_max = 1e-6\n"
    'weight = { family = "exponential", c = 1.0, p = 1.0 }\n'
    'decay.family = "inverse-log"\n'
    "K_max = 1000\n"
)

# %% construct, then certify the stored tables
print("construct ->", run(["construct", "--config", str(cfg), "--out", str(work / "tables")]))
buf = io.StringIO()
code = run(["certify", "--from", str(work / "tables"), "--out", str(work / "tables"), "--grid-radial", "16"], stdout=buf)
print("certify   ->", code, "|", buf.getvalue().splitlines()[-1])
print(sorted(p.name for p in (work / "tables").iterdir()))

# %% Exponential weights need many segments; an envelope cut off by K_max is refused
cfg.write_text(cfg.read_text().replace("1e-6", "1e-12"))
print("truncated ->", run(["certify", "--config", str(cfg), "--out", str(work / "short")], stdout=io.StringIO()))

# %% A broken configuration points at its line
cfg.write_text('mode = "growth"\nh = 4\n')
print("bad h     ->", run(["construct", "--config", str(cfg)]))
