"""Seeded heavy-tailed datasets with adversarial corruption, plus CSV I/O."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Union

import numpy as np

MASK64 = (1 << 64) - 1


def mix_seed(seed: int, index: int) -> int:
    """Derive a child seed from (seed, index) with the splitmix64 finaliser."""
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class ParetoCoords:
    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("Pareto shape alpha must exceed 1 for a finite mean")
        if not self.scale > 0:
            raise ValueError("Pareto scale must be positive")


@dataclass(frozen=True)
class StudentComponent:
    weight: float
    mean: tuple[float, ...] | float
    dof: float


@dataclass(frozen=True)
class StudentMixture:
    components: tuple[StudentComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("mixture needs at least one component")
        w = np.array([c.weight for c in self.components])
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be positive and sum to 1")
        if any(not c.dof > 1 for c in self.components):
            raise ValueError("degrees of freedom must exceed 1 for a finite mean")


Generator = Union[ParetoCoords, StudentMixture]


@dataclass(frozen=True)
class ConstantVector:
    c: tuple[float, ...]


@dataclass(frozen=True)
class ScaledOnes:
    scale: float


@dataclass(frozen=True)
class CorruptionSpec:
    count: int
    strategy: ConstantVector | ScaledOnes


@dataclass(frozen=True)
class DatasetSpec:
    generator: Generator
    n: int
    d: int
    corruption: CorruptionSpec | None = None
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")
        c = self.corruption
        if c is not None:
            if c.count < 0:
                raise ValueError("corruption count must be >= 0")
            if not 2 * c.count < self.n:
                raise ValueError("outliers must be fewer than inliers (count < n/2)")
            if isinstance(c.strategy, ConstantVector) and len(c.strategy.c) != self.d:
                raise ValueError("corruption vector length must equal d")

    def with_seed(self, seed: int) -> "DatasetSpec":
        return DatasetSpec(self.generator, self.n, self.d, self.corruption, seed, self.label)


@dataclass
class Dataset:
    X: np.ndarray
    true_mean: np.ndarray
    outlier_indices: list[int]
    spec: DatasetSpec

    @property
    def epsilon(self) -> float:
        return len(self.outlier_indices) / self.X.shape[0]


def _component_mean(c: StudentComponent, d: int) -> np.ndarray:
    m = np.asarray(c.mean, dtype=float)
    if m.ndim == 0:
        return np.full(d, float(m))
    if m.shape != (d,):
        raise ValueError("component mean length must equal d")
    return m


def true_mean(gen: Generator, d: int) -> np.ndarray:
    if isinstance(gen, ParetoCoords):
        return np.full(d, gen.scale * gen.alpha / (gen.alpha - 1.0))
    return sum(c.weight * _component_mean(c, d) for c in gen.components)


def sample_inliers(gen: Generator, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(gen, ParetoCoords):
        u = 1.0 - rng.random((n, d))  # in (0, 1]
        return gen.scale * u ** (-1.0 / gen.alpha)
    comps = gen.components
    weights = np.array([c.weight for c in comps])
    idx = rng.choice(len(comps), size=n, p=weights)
    means = np.stack([_component_mean(c, d) for c in comps])
    dofs = np.array([c.dof for c in comps], dtype=float)[idx]
    z = rng.standard_normal((n, d))
    w = rng.chisquare(dofs)
    return means[idx] + z * np.sqrt(dofs / w)[:, None]


def generate(spec: DatasetSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    X = sample_inliers(spec.generator, spec.n, spec.d, rng)
    outliers: list[int] = []
    c = spec.corruption
    if c is not None and c.count > 0:
        outliers = list(range(c.count))
        if isinstance(c.strategy, ScaledOnes):
            X[: c.count] = c.strategy.scale
        else:
            X[: c.count] = np.asarray(c.strategy.c, dtype=float)
    return Dataset(X, true_mean(spec.generator, spec.d), outliers, spec)


def dataset_presets(n: int = 1000, d: int = 100, seed: int = 0) -> list[DatasetSpec]:
    """The four heavy-tailed configurations of the comparison experiment."""
    two_out = CorruptionSpec(2, ScaledOnes(300.0))

    def mixture(dof):
        return StudentMixture((StudentComponent(0.4, 0.0, dof), StudentComponent(0.6, 2.0, dof)))

    return [
        DatasetSpec(ParetoCoords(2.1, 1.0), n, d, two_out, seed, "dataset1"),
        DatasetSpec(ParetoCoords(3.0, 1.0), n, d, None, seed, "dataset2"),
        DatasetSpec(mixture(2.1), n, d, two_out, seed, "dataset3"),
        DatasetSpec(mixture(3.0), n, d, None, seed, "dataset4"),
    ]


# -- serialisation -----------------------------------------------------------


def spec_to_dict(spec: DatasetSpec) -> dict:
    g = spec.generator
    if isinstance(g, ParetoCoords):
        gen = {"type": "pareto", "alpha": g.alpha, "scale": g.scale}
    else:
        gen = {
            "type": "student_mixture",
            "components": [
                {
                    "weight": c.weight,
                    "mean": float(c.mean) if np.ndim(c.mean) == 0 else [float(v) for v in c.mean],
                    "dof": c.dof,
                }
                for c in g.components
            ],
        }
    out = {"label": spec.label, "generator": gen, "n": spec.n, "d": spec.d, "seed": spec.seed, "corruption": None}
    c = spec.corruption
    if c is not None:
        if isinstance(c.strategy, ScaledOnes):
            strat = {"type": "scaled_ones", "scale": c.strategy.scale}
        else:
            strat = {"type": "constant", "c": list(c.strategy.c)}
        out["corruption"] = {"count": c.count, "strategy": strat}
    return out


def spec_from_dict(obj: dict) -> DatasetSpec:
    g = obj["generator"]
    if g["type"] == "pareto":
        gen = ParetoCoords(float(g["alpha"]), float(g.get("scale", 1.0)))
    elif g["type"] == "student_mixture":
        comps = []
        for c in g["components"]:
            mean = c["mean"]
            mean = tuple(float(v) for v in mean) if isinstance(mean, (list, tuple)) else float(mean)
            comps.append(StudentComponent(float(c["weight"]), mean, float(c["dof"])))
        gen = StudentMixture(tuple(comps))
    else:
        raise ValueError(f"unknown generator type {g['type']!r}")
    corr = None
    c = obj.get("corruption")
    if c:
        s = c["strategy"]
        if s["type"] == "scaled_ones":
            strat = ScaledOnes(float(s["scale"]))
        elif s["type"] == "constant":
            strat = ConstantVector(tuple(float(v) for v in s["c"]))
        else:
            raise ValueError(f"unknown corruption strategy {s['type']!r}")
        corr = CorruptionSpec(int(c["count"]), strat)
    return DatasetSpec(gen, int(obj["n"]), int(obj["d"]), corr, int(obj.get("seed", 0)), obj.get("label", ""))


class CSVFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def format_csv(X) -> str:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in X)


def parse_csv(text: str) -> np.ndarray:
    """Parse headerless numeric CSV; blank lines are skipped."""
    rows: list[list[float]] = []
    width = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            vals = [float(cell) for cell in row]
        except ValueError:
            raise CSVFormatError(lineno, f"non-numeric field in {row!r}") from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise CSVFormatError(lineno, f"expected {width} fields, found {len(vals)}")
        rows.append(vals)
    if not rows:
        raise CSVFormatError(1, "no data rows")
    return np.array(rows, dtype=float)


def read_csv(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read())
