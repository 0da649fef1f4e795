"""
Planted-dependency tables.

Every table holds one ambiguous column whose class belongs to an ambiguous
pair: ``capital``/``city`` share one pool of place names and
``author``/``player`` share one pool of person names, so no single-column
predictor can tell the two members apart. The partner column settles it:
capitals come with a ``country`` column, cities with ``population``,
authors with ``publisher`` and players with ``team``. Filler columns use
pools of their own.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import InvalidInputError
from ..graph import Column, LabelVocab, Table
from ..run_context import derive_rng

AMBIGUOUS_PAIRS = (("capital", "city"), ("author", "player"))
AMBIGUOUS_CLASSES = tuple(c for pair in AMBIGUOUS_PAIRS for c in pair)
PARTNER = {
    "capital": "country",
    "city": "population",
    "author": "publisher",
    "player": "team",
}
FILLER_CLASSES = ("year", "email", "price")
CLASSES = tuple(sorted({*AMBIGUOUS_CLASSES, *PARTNER.values(), *FILLER_CLASSES}))
MIN_TABLES = 20

PLACES = (
    "Paris", "Ottawa", "London", "Berlin", "Madrid", "Rome", "Vienna", "Lisbon",
    "Dublin", "Oslo", "Helsinki", "Warsaw", "Prague", "Athens", "Cairo", "Lima",
    "Toronto", "Sydney", "Lyon", "Marseille", "Munich", "Hamburg", "Barcelona",
    "Milan", "Porto", "Cork", "Bergen", "Krakow", "Brno", "Thessaloniki",
    "Alexandria", "Cusco", "Vancouver", "Melbourne", "Osaka", "Kyoto",
    "Manchester", "Seville", "Naples", "Geneva",
)
COUNTRIES = (
    "France", "Canada", "United Kingdom", "Germany", "Spain", "Italy",
    "Austria", "Portugal", "Ireland", "Norway", "Finland", "Poland",
    "Czech Republic", "Greece", "Egypt", "Peru", "Australia", "Japan",
    "Switzerland", "Netherlands", "Belgium", "Denmark", "Sweden", "Mexico",
)
FIRST_NAMES = (
    "Anna", "Ben", "Chloe", "David", "Emma", "Felix", "Grace", "Hugo", "Iris",
    "Jonas", "Klara", "Liam", "Mara", "Noah", "Olga", "Paul",
)
LAST_NAMES = (
    "Smith", "Meyer", "Rossi", "Novak", "Silva", "Dubois", "Larsen", "Kowalski",
    "Jensen", "Moreau", "Schmidt", "Costa",
)
PUBLISHERS = (
    "Penguin Books", "HarperCollins", "Vintage Press", "Faber & Faber",
    "Gallimard", "Suhrkamp Verlag", "Random House", "Bloomsbury",
    "Macmillan", "Hachette Livre",
)
TEAMS = (
    "FC Porto", "Ajax", "Celtic FC", "Bayern Munich", "Real Madrid",
    "Juventus", "Benfica", "Olympiacos", "Galatasaray", "Rapid Wien",
)
DOMAINS = ("example.com", "mail.org", "corp.net")


def _pick(pool: tuple[str, ...], rows: int, rng: np.random.Generator) -> tuple[str, ...]:
    return tuple(str(v) for v in rng.choice(pool, size=rows))


def _values(cls: str, rows: int, rng: np.random.Generator) -> tuple[str, ...]:
    if cls in ("capital", "city"):
        return _pick(PLACES, rows, rng)
    if cls == "country":
        return _pick(COUNTRIES, rows, rng)
    if cls == "publisher":
        return _pick(PUBLISHERS, rows, rng)
    if cls == "team":
        return _pick(TEAMS, rows, rng)
    if cls == "population":
        return tuple(f"{int(v):,}" for v in rng.integers(10_000, 20_000_000, size=rows))
    if cls == "year":
        return tuple(str(int(v)) for v in rng.integers(1900, 2025, size=rows))
    if cls == "price":
        return tuple(f"${v:.2f}" for v in rng.uniform(1.0, 500.0, size=rows))
    first = rng.choice(FIRST_NAMES, size=rows)
    last = rng.choice(LAST_NAMES, size=rows)
    if cls in ("author", "player"):
        return tuple(f"{f} {l}" for f, l in zip(first, last))
    domains = rng.choice(DOMAINS, size=rows)
    return tuple(f"{f.lower()}.{l.lower()}@{d}" for f, l, d in zip(first, last, domains))


def filler_weights(imbalance: float) -> np.ndarray:
    """Filler-class probabilities, each (1 + imbalance) times rarer than the last."""
    weights = (1.0 + imbalance) ** -np.arange(len(FILLER_CLASSES), dtype=np.float64)
    return weights / weights.sum()


def synthesize_dependency_dataset(
    num_tables: int,
    seed: int = 0,
    imbalance: float = 0.0,
    filler_columns: tuple[int, int] = (0, 2),
) -> tuple[list[Table], LabelVocab]:
    """Seeded planted-dependency dataset and its fixed vocabulary.

    Each table has one ambiguous column, its partner and between
    ``filler_columns[0]`` and ``filler_columns[1]`` fillers, in shuffled
    column order.
    """
    if num_tables < MIN_TABLES:
        raise InvalidInputError(
            f"Need at least {MIN_TABLES} tables",
            details={"num_tables": num_tables},
        )
    if imbalance < 0:
        raise InvalidInputError("imbalance must be non-negative", details={"imbalance": imbalance})
    low, high = filler_columns
    if not 0 <= low <= high:
        raise InvalidInputError("Invalid filler column range", details={"filler_columns": filler_columns})

    rng = derive_rng(seed, "synth")
    weights = filler_weights(imbalance)
    tables = []
    for i in range(num_tables):
        rows = int(rng.integers(5, 13))
        ambiguous = AMBIGUOUS_CLASSES[int(rng.integers(len(AMBIGUOUS_CLASSES)))]
        labels = [ambiguous, PARTNER[ambiguous]]
        n_fillers = int(rng.integers(low, high + 1))
        labels.extend(rng.choice(FILLER_CLASSES, size=n_fillers, p=weights).tolist())
        order = rng.permutation(len(labels))
        columns = tuple(
            Column(_values(labels[j], rows, rng), labels[j]) for j in order
        )
        tables.append(Table(f"synth-{i:04d}", columns))
    return tables, LabelVocab(CLASSES)
