"""Regenerate the data (CSV + SVG) behind the four simulation figures at desk scale.

Run: python3 demos/figures.py [out_dir] [replicates]
"""
import sys

from axialunif.harness import replicate_figure

out_dir = sys.argv[1] if len(sys.argv) > 1 else "figures"
replicates = int(sys.argv[2]) if len(sys.argv) > 2 else 500
for fig in (1, 2, 3, 4):
    man = replicate_figure(fig, "desk", seed=fig, out_dir=f"{out_dir}/fig{fig}",
                           replicates=replicates)
    print(f"figure {fig}: {len(man['artifacts'])} files in {out_dir}/fig{fig}")
