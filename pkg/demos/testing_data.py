"""Run every test on one simulated dataset, from Python and from the command line.

Run: python3 demos/testing_data.py
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

from axialunif import (AxialModel, RngStream, bingham_q, rayleigh_stat, sample_axial,
                       scatter_matrix, t_minus, t_plus, t_pm, t_specified)
from axialunif.io import write_dataset

p, n, tau = 3, 500, 3.0
model = AxialModel.standard(p, tau * p / n ** 0.5)
sample = sample_axial(model, n, RngStream(7, 0))
spec = scatter_matrix(sample)  # eigen-decomposition shared by all tests

reports = [t_specified(spec, model.theta), bingham_q(spec), t_plus(spec), t_minus(spec),
           t_pm(spec), rayleigh_stat(sample)]
for r in reports:
    print(f"{r.test_name:16s} stat={r.statistic:8.3f}  p={r.p_value:.4f}  reject={r.reject}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "data.csv"
    write_dataset(sample, path)
    out = subprocess.run([sys.executable, "-m", "axialunif", "test", str(path),
                          "--tests", "bingham,t_pm"], capture_output=True, text=True, check=True)
    print("\nCLI:", [(d["test"], round(d["p_value"], 4)) for d in json.loads(out.stdout)])
