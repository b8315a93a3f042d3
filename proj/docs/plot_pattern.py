#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Harmonic radiation patterns from `stcloc pattern` output (pattern.csv), in dB."""

import argparse

import matplotlib.pyplot as plt
import numpy as np

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("csv", help="pattern.csv")
parser.add_argument("-o", "--output", default="pattern.png")
parser.add_argument("--orders", type=int, nargs="*", help="harmonic orders to draw (default: n >= 0)")
parser.add_argument("--floor", type=float, default=-40.0, help="lowest dB level shown")
args = parser.parse_args()

data = np.genfromtxt(args.csv, delimiter=",", names=True, deletechars="")
angles = data["angle_deg"]
columns = [c for c in data.dtype.names if c.startswith("h")]
orders = args.orders if args.orders else [int(c[1:]) for c in columns if int(c[1:]) >= 0]

peak = max(np.max(data[f"h{n}"]) for n in orders)
fig, ax = plt.subplots(figsize=(8, 4.5))
for n in orders:
    level = 20 * np.log10(np.maximum(data[f"h{n}"] / peak, 1e-12))
    ax.plot(angles, level, label=f"n = {n}")
ax.set_ylim(args.floor, 1)
ax.set_xlim(angles[0], angles[-1])
ax.set_xlabel("angle (deg)")
ax.set_ylabel("normalized field (dB)")
ax.grid(alpha=0.3)
ax.legend(ncol=3, fontsize="small")
fig.tight_layout()
fig.savefig(args.output, dpi=150)
