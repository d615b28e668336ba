"""Generate the bundled 2,000-row forest-cover-shaped fixture.

The public CovType table is not redistributed here. This script produces a
seeded synthetic stand-in with the same layout: 10 continuous cartographic
columns, 4 one-hot wilderness columns, 40 one-hot soil columns and 7 cover
classes with a skewed prior.
"""
import csv
import sys

import numpy as np

ROWS = 2000
CLASSES = 7
PRIOR = np.array([0.365, 0.488, 0.062, 0.005, 0.016, 0.030, 0.034])


def main(path: str, seed: int = 20240611) -> None:
    rng = np.random.default_rng(seed)
    prior = PRIOR / PRIOR.sum()
    labels = rng.choice(CLASSES, size=ROWS, p=prior)
    cont_means = rng.normal(0.0, 1.0, size=(CLASSES, 10))
    cont_scale = np.array([280, 110, 7.5, 210, 58, 1560, 27, 20, 38, 1320])
    cont_offset = np.array([2960, 155, 14, 270, 46, 2350, 212, 223, 142, 1980])
    wild_logits = rng.normal(0.0, 1.5, size=(CLASSES, 4))
    soil_logits = rng.normal(0.0, 1.5, size=(CLASSES, 40))
    rows = []
    for y in labels:
        cont = cont_offset + cont_scale * (0.6 * cont_means[y] + rng.normal(0.0, 1.0, 10))
        wp = np.exp(wild_logits[y]); wp /= wp.sum()
        sp = np.exp(soil_logits[y]); sp /= sp.sum()
        wild = np.zeros(4); wild[rng.choice(4, p=wp)] = 1
        soil = np.zeros(40); soil[rng.choice(40, p=sp)] = 1
        rows.append([int(y) + 1] + [round(float(x), 3) for x in cont] + [int(x) for x in wild] + [int(x) for x in soil])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y"] + [f"x{i}" for i in range(1, 55)])
        w.writerows(rows)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/covtype_like_2000.csv")
