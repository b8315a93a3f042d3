#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Averaged spectrum from `stcloc simulate` or `estimate`, with the harmonic lines marked."""

import argparse
import os

import matplotlib.pyplot as plt
import numpy as np

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("dir", help="output directory holding spectrum.csv and harmonics.csv")
parser.add_argument("-o", "--output", default="spectrum.png")
args = parser.parse_args()

spec = np.genfromtxt(os.path.join(args.dir, "spectrum.csv"), delimiter=",", names=True)
lines = np.genfromtxt(os.path.join(args.dir, "harmonics.csv"), delimiter=",", names=True)

to_db = lambda m: 20 * np.log10(np.maximum(m, 1e-12))
fig, ax = plt.subplots(figsize=(8, 4))
ax.plot(spec["freq_hz"], to_db(spec["magnitude"]), lw=0.8, color="0.3")
kept = lines["excluded"] == 0
ax.plot(lines["freq_hz"][kept], to_db(lines["magnitude"][kept]), "o", ms=4, label="harmonic lines")
ax.plot(lines["freq_hz"][~kept], to_db(lines["magnitude"][~kept]), "x", ms=6, label="excluded")
for n, f, m in zip(lines["n"], lines["freq_hz"], lines["magnitude"]):
    ax.annotate(f"{int(n)}", (f, to_db(m)), textcoords="offset points", xytext=(0, 5), ha="center", fontsize=7)
span = 1.3 * np.max(np.abs(lines["freq_hz"]))
ax.set_xlim(-span, span)
ax.set_xlabel("offset from carrier (Hz)")
ax.set_ylabel("magnitude (dB)")
ax.grid(alpha=0.3)
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(args.output, dpi=150)
