"""
Smoke run of every command against the shipped narrowband config.

Usage: python scripts/run_local_probe.py [output_dir]
"""

import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from biphoton.main import main  # noqa: E402


def probe(out_dir: Path) -> int:
    config = str(ROOT / "configs" / "narrowband.json")
    steps = [
        ["wavepacket", "--config", config, "--out", str(out_dir / "wavepacket.csv")],
        ["sweep", "--config", config, "--out", str(out_dir / "sweep.csv")],
        ["simulate", "--config", config, "--out", str(out_dir / "sim"), "--seed", "1"],
        ["analyze", str(out_dir / "sim" / "histogram.json"), "--out", str(out_dir / "report.json")],
        ["fit", str(out_dir / "sim" / "histogram.json"), "--free", "omega_c,amplitude,baseline",
         "--out", str(out_dir / "fit.json")],
    ]
    for argv in steps:
        code = main(argv)
        print(f"{argv[0]} -> exit {code}", file=sys.stderr)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="biphoton-probe-"))
    sys.exit(probe(target))
