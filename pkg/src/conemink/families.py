"""Closed-form atom families ``k -> (theta_k, w_k)`` given as small expressions.

Expressions use the integer index ``k``, the cone half-angle ``beta0``,
user parameters, numbers, ``+ - * / ^`` (``^`` is a power) and parentheses.
A handful of elementary functions (``sqrt``, ``log``, ``exp``, ``sin``,
``cos``) are accepted as well.  Everything else is rejected at parse time.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field

import numpy as np

_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}
_UNOPS = {ast.USub: np.negative, ast.UAdd: np.positive}
_FUNCS = {"sqrt": np.sqrt, "log": np.log, "exp": np.exp, "sin": np.sin, "cos": np.cos}


class Expression:
    """A parsed arithmetic expression in ``k`` evaluated with numpy."""

    def __init__(self, text: str, names: set[str]):
        self.text = text
        src = text.replace("^", "**")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"malformed expression {text!r}: {exc.msg}") from None
        self._check(tree.body, names | {"k"})
        self._tree = tree.body

    def _check(self, node, names):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            self._check(node.left, names)
            self._check(node.right, names)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            self._check(node.operand, names)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            pass
        elif isinstance(node, ast.Name):
            if node.id not in names:
                raise ValueError(f"unknown name {node.id!r} in {self.text!r}")
        elif (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
              and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            self._check(node.args[0], names)
        else:
            raise ValueError(f"unsupported syntax in {self.text!r}")

    def __call__(self, k: np.ndarray, env: dict) -> np.ndarray:
        return np.asarray(self._eval(self._tree, dict(env, k=np.asarray(k, dtype=float))), dtype=float)

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNOPS[type(node.op)](self._eval(node.operand, env))
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id]
        return _FUNCS[node.func.id](self._eval(node.args[0], env))


@dataclass(frozen=True)
class TailFamily:
    """Atoms ``(theta_k, w_k)`` for ``k = start, start + 1, ...`` with ``|theta_k| -> beta0``."""

    theta: str
    w: str
    beta0: float
    params: dict = field(default_factory=dict)
    start: int = 1

    def __post_init__(self):
        names = set(self.params) | {"beta0"}
        object.__setattr__(self, "_theta", Expression(self.theta, names))
        object.__setattr__(self, "_w", Expression(self.w, names))

    @property
    def env(self) -> dict:
        return dict(self.params, beta0=self.beta0)

    def atoms(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """The first ``count`` atoms as arrays ``(theta, w)``."""
        k = np.arange(self.start, self.start + count, dtype=float)
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            th = np.broadcast_to(self._theta(k, self.env), k.shape).astype(float)
            w = np.broadcast_to(self._w(k, self.env), k.shape).astype(float)
        return th, w

    def deltas(self, count: int) -> np.ndarray:
        th, _ = self.atoms(count)
        return self.beta0 - np.abs(th)

    def truncation_size(self, alpha: float, cap: int = 10 ** 6) -> int:
        """Number of leading atoms with ``delta >= alpha`` (deltas decrease in ``k``)."""
        n = 16
        while True:
            d = self.deltas(n)
            below = np.flatnonzero(d < alpha)
            if len(below):
                return int(below[0])
            if n >= cap:
                return cap
            n = min(cap, 4 * n)

    def to_dict(self) -> dict:
        return {"theta": self.theta, "w": self.w, "beta0": self.beta0,
                "params": dict(self.params), "start": self.start}

    @classmethod
    def from_dict(cls, d: dict) -> "TailFamily":
        return cls(d["theta"], d["w"], float(d["beta0"]), dict(d.get("params", {})), int(d.get("start", 1)))


@dataclass(frozen=True)
class LayerFamily:
    """Layers ``k -> (delta_k, mass_k)`` of a measure concentrated on the circles ``delta = delta_k``."""

    delta: str
    mass: str
    params: dict = field(default_factory=dict)
    start: int = 1

    def __post_init__(self):
        names = set(self.params)
        object.__setattr__(self, "_delta", Expression(self.delta, names))
        object.__setattr__(self, "_mass", Expression(self.mass, names))

    def layers(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        k = np.arange(self.start, self.start + count, dtype=float)
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            d = np.broadcast_to(self._delta(k, self.params), k.shape).astype(float)
            m = np.broadcast_to(self._mass(k, self.params), k.shape).astype(float)
        return d, m

    def to_dict(self) -> dict:
        return {"delta": self.delta, "mass": self.mass, "params": dict(self.params), "start": self.start}

    @classmethod
    def from_dict(cls, d: dict) -> "LayerFamily":
        return cls(d["delta"], d["mass"], dict(d.get("params", {})), int(d.get("start", 1)))


DEPTHS = tuple(10 ** j for j in range(1, 7))


def doubling_verdict(partial, n_max: int, threshold: float = 1.05, doublings: int = 3) -> dict:
    """Divergence verdict from partial sums at ``n_max / 2^j``.

    ``partial(n)`` must return the partial sum over the first ``n`` terms.
    The sums are called diverging when every one of the last ``doublings``
    ratios is at least ``threshold``.
    """
    ns = [max(1, n_max // 2 ** j) for j in range(doublings, -1, -1)]
    sums = [partial(n) for n in ns]
    ratios = [b / a if a > 0 else math.inf for a, b in zip(sums, sums[1:])]
    diverging = all(r >= threshold for r in ratios)
    return {"n": ns, "sums": sums, "ratios": ratios, "diverging": bool(diverging)}
