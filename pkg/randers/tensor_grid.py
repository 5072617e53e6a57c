from dataclasses import dataclass

import numpy as np

UPPER = "upper"
LOWER = "lower"
SYMMETRY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class TensorGrid:
    """Dense 3-dimensional tensor with recorded index variance and declared slot symmetries."""

    values: np.ndarray
    variance: tuple[str, ...]
    symmetries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "variance", tuple(self.variance))
        object.__setattr__(self, "symmetries", tuple(tuple(pair) for pair in self.symmetries))

        if values.shape != (3,) * len(self.variance):
            raise ValueError(f"values of shape {values.shape} do not match variance {self.variance}")
        bad = [v for v in self.variance if v not in (UPPER, LOWER)]
        if bad:
            raise ValueError(f"variance entries must be {UPPER!r} or {LOWER!r}, got {bad}")

        scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
        for a, b in self.symmetries:
            if self.variance[a] != self.variance[b]:
                raise ValueError(f"slots {a} and {b} have different variance and cannot be symmetric")
            asymmetry = float(np.max(np.abs(values - np.swapaxes(values, a, b))))
            if asymmetry > SYMMETRY_TOLERANCE * scale:
                raise ValueError(f"declared symmetry in slots ({a}, {b}) violated by {asymmetry:.3e}")

    @property
    def rank(self) -> int:
        return len(self.variance)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __getitem__(self, index):
        return self.values[index]

    @staticmethod
    def identity() -> "TensorGrid":
        return TensorGrid(np.eye(3), (UPPER, LOWER))

    def to_dict(self) -> dict:
        return {
            "variance": list(self.variance),
            "symmetries": [list(pair) for pair in self.symmetries],
            "values": self.values.tolist(),
        }
