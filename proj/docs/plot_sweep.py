#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Estimated vs. true angle from `stcloc sweep` (sweep.csv), one panel per SNR."""

import argparse
import csv
from collections import defaultdict

import matplotlib.pyplot as plt
import numpy as np

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("csv", help="sweep.csv")
parser.add_argument("-o", "--output", default="sweep.png")
parser.add_argument("--band", type=float, default=5.0, help="error band drawn around the diagonal (deg)")
args = parser.parse_args()

groups = defaultdict(lambda: ([], []))
with open(args.csv) as f:
    for row in csv.DictReader(f):
        if row["status"] != "ok":
            continue
        snr = row["snr_db"] or "noiseless"
        groups[snr][0].append(float(row["true_deg"]))
        groups[snr][1].append(float(row["est_deg"]))

fig, axes = plt.subplots(1, len(groups), figsize=(4 * len(groups), 4), squeeze=False, sharey=True)
for ax, (snr, (truth, est)) in zip(axes[0], groups.items()):
    truth, est = np.array(truth), np.array(est)
    lo, hi = truth.min() - 10, truth.max() + 10
    ax.fill_between([lo, hi], [lo - args.band, hi - args.band], [lo + args.band, hi + args.band], color="C0", alpha=0.15)
    ax.plot([lo, hi], [lo, hi], color="C0", lw=0.8)
    ax.plot(truth, est, ".", ms=3, alpha=0.4, color="C1")
    within = np.mean(np.abs(est - truth) <= args.band)
    title = snr if snr == "noiseless" else f"{snr} dB"
    ax.set_title(f"{title}: {100 * within:.1f}% within ±{args.band:g}°", fontsize="medium")
    ax.set_xlabel("true angle (deg)")
    ax.grid(alpha=0.3)
axes[0][0].set_ylabel("estimated angle (deg)")
fig.tight_layout()
fig.savefig(args.output, dpi=150)
