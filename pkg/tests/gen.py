"""Random fixture generators shared by the property and acceptance tests."""

from __future__ import annotations

import datetime as dt
import random

import numpy as np

from patfolio.ingest import Location, PatentRecord
from patfolio.network import SimilarityGraph
from patfolio.taxonomy import ClassSimilarityMap

CITIES = ["Toulouse", "Paris", "São Paulo", "Beer Sheva", "Zürich", "New York"]
REGIONS = [None, "MA", "NH", "Île-de-France"]
COUNTRIES = ["FR", "US", "BR", "IL", "CH"]
SYMBOLS = ["A01B 1/00", "B64C 27/00", "C07D 401/14", "G06F 17/30", "H01L 21/00", "H04L 12/28", "Y02E 10/50"]


def random_record(rng: random.Random, i: int) -> PatentRecord:
    locations = tuple(
        Location(rng.choice(CITIES), rng.choice(REGIONS), rng.choice(COUNTRIES)) for _ in range(rng.randint(1, 3))
    )
    symbols = tuple(rng.sample(SYMBOLS, rng.randint(1, 4)))
    date = dt.date(2010, 1, 1) + dt.timedelta(days=rng.randrange(3000))
    return PatentRecord(f"US{9000000 + i}", date, locations, symbols)


def random_graph(rng: np.random.Generator, n: int, p: float = 0.4) -> SimilarityGraph:
    w = np.where(rng.random((n, n)) < p, np.round(rng.random((n, n)), 6), 0.0)
    w = np.triu(w, 1)
    return SimilarityGraph(tuple(f"C{i:03d}" for i in range(n)), w + w.T)


def random_basemap(rng: np.random.Generator, n: int) -> ClassSimilarityMap:
    codes = tuple(f"{chr(65 + k % 8)}{k:02d}X" for k in range(n))
    v = np.triu(rng.random((n, n)), 1)
    v = v + v.T
    np.fill_diagonal(v, 1.0)
    coords = np.round(rng.normal(size=(n, 2)), 4)
    clusters = rng.integers(1, 6, size=n)
    return ClassSimilarityMap(codes, v, coords, clusters)
