"""Synthetic 20-city workflow: one run per city, then a full comparison.

Generates random record files over a random base map, adds each city to a
fresh store, and prints the diversity table and the most similar pairs.

    python3 scripts/twenty_cities.py --out /tmp/twenty --classes 60 --seed 1
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

import numpy as np

from patfolio.cli import RunConfig, cmd_compare, cmd_run
from patfolio.diversity import round4
from patfolio.taxonomy import ClassSimilarityMap, write_basemap


def make_basemap(rng: np.random.Generator, n: int) -> ClassSimilarityMap:
    codes = tuple(f"{chr(65 + k % 8)}{k % 100:02d}{chr(65 + k // 100)}" for k in range(n))
    # cosines from random nonnegative profiles, so the map is a genuine cosine matrix
    profiles = rng.gamma(0.3, size=(n, 12))
    unit = profiles / np.linalg.norm(profiles, axis=1, keepdims=True)
    values = np.round(unit @ unit.T, 4)
    np.fill_diagonal(values, 1.0)
    coords = np.round(rng.normal(size=(n, 2)), 3)
    clusters = rng.integers(1, 7, size=n)
    return ClassSimilarityMap(codes, values, coords, clusters)


def write_city(rng: random.Random, path: Path, city: str, codes, n_patents: int, focus: list[str]):
    blocks = []
    for k in range(n_patents):
        pool = focus if rng.random() < 0.7 else codes
        symbols = rng.sample(list(pool), min(len(pool), rng.randint(1, 4)))
        blocks.append(
            f"PN {city[:3].upper()}{k:05d}\nISD 2014{rng.randint(1, 12):02d}15\nIC {city}||FR\n"
            + "".join(f"CL {s} 1/00\n" for s in symbols)
        )
    path.write_text("----\n".join(blocks), encoding="utf-8")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--classes", type=int, default=60)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    prng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    bm = make_basemap(rng, args.classes)
    write_basemap(bm, args.out / "basemap.tsv", args.out / "layout.tsv")

    store = args.out / "store"
    names = [f"city{k:02d}" for k in range(20)]
    print("name\tn_patents\tvariety\trao_delta\ttrue_diversity")
    for name in names:
        focus = prng.sample(list(bm.codes), prng.randint(3, 12))
        write_city(prng, args.out / f"{name}.txt", name, bm.codes, prng.randint(20, 200), focus)
        cfg = RunConfig(name, [args.out / f"{name}.txt"], args.out / "basemap.tsv", store,
                        layout4=args.out / "layout.tsv")
        r = cmd_run(cfg).record
        print(f"{r.name}\t{r.n_patents}\t{r.variety}\t{round4(r.rao_delta)}\t{round4(r.true_diversity)}")

    _, dm = cmd_compare(store, names)
    iu = np.triu_indices(len(names), 1)
    order = np.argsort(dm.d[iu], kind="stable")[:5]
    print("\nclosest pairs (1 - cosine):")
    for k in order:
        i, j = iu[0][k], iu[1][k]
        print(f"  {names[i]} {names[j]} {dm.d[i, j]:.3f}")
    print(f"\ndistance matrix: {store / 'compare' / 'distance.tsv'}")


if __name__ == "__main__":
    main()
