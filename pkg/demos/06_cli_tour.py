"""Drive the command line in-process over the shipped configs: validation,
a simulation written to CSV, the theorem check suites, and expansion of a
connection config into a plain structure config.

Everything here can equally be run from a shell, for example

    affgebroid validate configs/oscillator.json
    affgebroid simulate configs/rigid_body.json --mode hamiltonian --out rb.csv
    affgebroid check configs/atiyah_magnetic.json
    affgebroid atiyah-expand configs/atiyah_magnetic.json --out expanded.json
"""

import tempfile
from pathlib import Path

from affgebroid.cli import main

configs = Path(__file__).resolve().parent.parent / "configs"
scratch = Path(tempfile.mkdtemp(prefix="affgebroid-demo-"))

print("== validate ==")
main(["validate", str(configs / "oscillator.json")])

print()
print("== simulate ==")
csv_path = scratch / "rigid_body.csv"
main(["simulate", str(configs / "rigid_body.json"), "--mode", "hamiltonian", "--out", str(csv_path)])
lines = csv_path.read_text().splitlines()
print(lines[0])
print(lines[1])
print(lines[-1])

print()
print("== check ==")
main(["check", str(configs / "atiyah_magnetic.json")])

print()
print("== atiyah-expand ==")
expanded = scratch / "expanded.json"
main(["atiyah-expand", str(configs / "atiyah_magnetic.json"), "--out", str(expanded)])
main(["validate", str(expanded)])
