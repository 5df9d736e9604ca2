"""Per-round run records shared by the centralized and distributed learners.

A trace row exists for every (round, sensor) pair. The centralized learner is
recorded as a single sensor with id 0, which makes a 1-sensor distributed run
produce a byte-identical CSV: same columns, same values, and the consensus
diameter is empty in both cases (a max over an empty set of sensor pairs).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = (
    "k",
    "sensor_id",
    "alpha",
    "omega",
    "norm1_G",
    "fro_err_to_Gstar",
    "consensus_diameter",
)


def _fmt(value) -> str:
    """Shortest round-trip decimal form; empty string for missing values."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class RunTrace:
    """Round-by-round metrics of one learning run.

    norm1 is the entrywise 1-norm of each sensor's estimate, fro_err the
    Frobenius distance to the oracle G* (when known), and the consensus
    diameter is max_{i<j} ||G_i - G_j||_F (None when fewer than 2 sensors).
    mean_history keeps the averaged iterate per round so runs can be compared
    and the final controller extracted.
    """

    kind: str
    n_sensors: int
    G_star: np.ndarray | None = None
    alphas: list[float] = field(default_factory=list)
    omegas: list[list[float]] = field(default_factory=list)
    norm1: list[list[float]] = field(default_factory=list)
    fro_err: list[list[float]] | None = None
    diameters: list[float | None] = field(default_factory=list)
    mean_history: list[np.ndarray] = field(default_factory=list)
    mean_err: list[float] | None = None
    max_fro_norm: float = 0.0

    def __post_init__(self):
        if self.kind not in ("centralized", "distributed"):
            raise ValueError(f"unknown trace kind {self.kind!r}")
        if self.G_star is not None:
            self.fro_err = []
            self.mean_err = []

    @property
    def n_rounds(self) -> int:
        return len(self.alphas)

    def record_round(
        self, alpha: float, omegas: list[float], mats: list[np.ndarray]
    ) -> None:
        """Append the post-update metrics of one round."""
        if len(omegas) != self.n_sensors or len(mats) != self.n_sensors:
            raise ValueError("one omega and one estimate per sensor expected")
        self.alphas.append(float(alpha))
        self.omegas.append([float(w) for w in omegas])
        self.norm1.append([float(np.abs(g).sum()) for g in mats])

        fro_norms = [float(np.linalg.norm(g)) for g in mats]
        self.max_fro_norm = max(self.max_fro_norm, max(fro_norms))

        if self.n_sensors >= 2:
            diameter = max(
                float(np.linalg.norm(mats[i] - mats[j]))
                for i in range(self.n_sensors)
                for j in range(i + 1, self.n_sensors)
            )
        else:
            diameter = None
        self.diameters.append(diameter)

        mean = mats[0] if self.n_sensors == 1 else np.mean(mats, axis=0)
        self.mean_history.append(mean)

        if self.G_star is not None:
            self.fro_err.append(
                [float(np.linalg.norm(g - self.G_star)) for g in mats]
            )
            self.mean_err.append(float(np.linalg.norm(mean - self.G_star)))

    def final_mean(self) -> np.ndarray:
        if not self.mean_history:
            raise ValueError("empty trace")
        return self.mean_history[-1]

    def csv_rows(self):
        """Yield formatted CSV rows, one per (round, sensor)."""
        for r in range(self.n_rounds):
            for s in range(self.n_sensors):
                err = self.fro_err[r][s] if self.fro_err is not None else None
                yield (
                    _fmt(r + 1),
                    _fmt(s),
                    _fmt(self.alphas[r]),
                    _fmt(self.omegas[r][s]),
                    _fmt(self.norm1[r][s]),
                    _fmt(err),
                    _fmt(self.diameters[r]),
                )

    def write_csv(self, path) -> None:
        """Deterministic CSV: header then one line per (round, sensor)."""
        lines = [",".join(CSV_COLUMNS)]
        lines.extend(",".join(row) for row in self.csv_rows())
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
