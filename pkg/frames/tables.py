import json
from typing import Callable, Sequence

import numpy as np

from frames.connection import connection_forms, riemann_frame, structure_constants
from frames.killing import curvature_target, killing_cov_deriv, second_derivative_target, solve_ys
from frames.spray import (
    e_correction,
    riemann_spray_frame,
    tau_frame,
    zeta_frame,
    zeta_hcov,
    zeta_partials,
)

DEFAULT_FRAME_VECTOR = (1.0, 0.0, 0.0)


def _clean(value: float) -> float:
    # -0.0 prints differently from 0.0
    return float(value) + 0.0


def format_number(value: float) -> str:
    return f"{_clean(value):.15g}"


class FrameTables:
    """Registry of every named frame table for one (K, sign, frame vector)."""

    def __init__(self, K: float, sign: int = 1, frame_y: Sequence[float] = DEFAULT_FRAME_VECTOR):
        self.K = float(K)
        self.sign = sign
        self.frame_y = tuple(float(t) for t in frame_y)
        self.epsilon, self.lam = solve_ys(self.K, sign)

        killing = lambda: killing_cov_deriv(self.lam, self.epsilon)  # noqa: E731
        y, K, s = self.frame_y, self.K, self.sign
        self.registry: dict[str, tuple[str, Callable[[], np.ndarray]]] = {
            "connection": ("omega_q^p = c[q,p,r] omega^r", lambda: connection_forms(self.epsilon).coefficients),
            "structure": ("d omega^p = 1/2 C[p,r,s] omega^r ^ omega^s", lambda: structure_constants(self.epsilon)),
            "riemann": ("R[q,p,r,s], independent components", lambda: riemann_frame(self.epsilon).components),
            "killing-b": ("b_p", lambda: killing().b),
            "killing": ("b_{p|q}", lambda: killing().b1),
            "killing-second": ("b_{p|q|r}", lambda: killing().b2),
            "T": ("T[p,q,r] = K(a_pr b_q - a_qr b_p)", lambda: second_derivative_target(K, killing().b)),
            "calT": ("curvature target [q,p,r,s], independent components", lambda: curvature_target(K, killing())),
            "ktilde": ("K~^p_r", lambda: riemann_spray_frame(y, K)),
            "zeta": ("zeta^p", lambda: zeta_frame(y, K, s)),
            "zeta-first": ("(zeta^p)_{y^q}", lambda: zeta_partials(y, K, s).first),
            "zeta-second": ("(zeta^p)_{y^q y^t}", lambda: zeta_partials(y, K, s).second),
            "hcov": ("zeta^p_{|r}", lambda: zeta_hcov(y, K, s).values),
            "hcov-partials": ("(zeta^p_{|r})_{y^t}", lambda: zeta_hcov(y, K, s).partials),
            "E": ("E^p_r", lambda: e_correction(y, K, s)),
            "ktau": ("K tau^p_r", lambda: tau_frame(y, K, s)),
        }

    @staticmethod
    def names() -> list[str]:
        return list(FrameTables(1.0).registry)

    def get(self, name: str) -> np.ndarray:
        if name not in self.registry:
            raise ValueError(f"unknown table {name!r}; valid tables: {', '.join(self.registry)}")
        return np.asarray(self.registry[name][1](), dtype=float)

    def _text_lines(self, name: str, values: np.ndarray) -> list[str]:
        if values.ndim == 1:
            return [f"{name} = ({', '.join(format_number(x) for x in values)})"]
        if values.ndim == 2:
            return ["  ".join(format_number(x) for x in row) for row in values]
        lines = []
        if values.ndim == 4:
            pairs = [(q, p) for q in range(3) for p in range(q + 1, 3)]
            for i, (q, p) in enumerate(pairs):
                for r, s in pairs[i:]:
                    label = ",".join(str(k + 1) for k in (q, p, r, s))
                    lines.append(f"{name}[{label}] = {format_number(values[q, p, r, s])}")
            return lines
        for index in zip(*np.nonzero(values)):
            label = ",".join(str(int(k) + 1) for k in index)
            lines.append(f"{name}[{label}] = {format_number(values[index])}")
        return lines or [f"{name} = 0"]

    def render(self, name: str, fmt: str = "text") -> str:
        values = self.get(name)
        description = self.registry[name][0]
        if fmt == "json":
            data = {
                "table": name,
                "description": description,
                "K": self.K,
                "sign": self.sign,
                "frame_vector": list(self.frame_y),
                "values": np.vectorize(_clean)(values).tolist(),
            }
            return json.dumps(data, indent=2, sort_keys=True)
        if fmt != "text":
            raise ValueError(f"unsupported table format {fmt!r}")
        header = f"# {name}: {description} (K={format_number(self.K)}, sign={'+' if self.sign > 0 else '-'}, y=({', '.join(format_number(t) for t in self.frame_y)}))"
        return "\n".join([header] + self._text_lines(name, values))


def render_table(name: str, K: float, sign: int = 1, frame_y: Sequence[float] = DEFAULT_FRAME_VECTOR, fmt: str = "text") -> str:
    return FrameTables(K, sign, frame_y).render(name, fmt)
