"""Draw Watson samples and compare the axial projection with its target law.

Run: python3 demos/sampling.py
"""
import numpy as np

from axialunif import AxialModel, RngStream, sample_axial
from axialunif.models import moment_integral

p, n = 3, 50_000
for kappa in (-4.0, 0.0, 4.0):
    model = AxialModel.standard(p, kappa)
    x = sample_axial(model, n, RngStream(1, 0)).points
    proj2 = x[:, 0] ** 2
    # E_kappa[(X'theta)^2] = E_0[z e^{kappa z}] / E_0[e^{kappa z}], z = (X'theta)^2
    if kappa:
        target = moment_integral(p, kappa, lambda u: u * np.exp(u)) / kappa
        target /= moment_integral(p, kappa, np.exp)
    else:
        target = 1.0 / p
    print(f"kappa={kappa:+.1f}  mean (X'theta)^2 = {proj2.mean():.4f}  "
          f"(quadrature {target:.4f})  |mean X| = {np.abs(x.mean(0)).max():.4f}")
