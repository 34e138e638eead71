"""Running experiments through the runner with an on-disk eigen-cache.

The second run of the same configuration reads every decomposition from the
cache and writes byte-identical CSV files.
"""
import json
import tempfile
from pathlib import Path

from dicke_ldos.runner import ExperimentConfig, execute

root = Path(tempfile.mkdtemp(prefix="dicke_demo_"))
for run in ("first", "second"):
    cfg = ExperimentConfig(kind="gamma-vs-delta", j=5, n_max=60, lambda0=0.8,
                           delta_range="1e-4:0.3:12", out=str(root / run),
                           cache=str(root / "cache"), workers=1)
    session = execute(cfg)
    manifest = json.loads((root / run / "manifest.json").read_text())
    print(f"{run}: {manifest['diagonalizations']} diagonalizations, "
          f"cache hits {manifest['cache']['hits']}, files {manifest['files']}")

a = (root / "first" / "gamma_vs_delta.csv").read_bytes()
b = (root / "second" / "gamma_vs_delta.csv").read_bytes()
print("identical output:", a == b)
print(a.decode().splitlines()[:4])
print("regime slopes:", manifest["summary"]["regime_slopes"])
