"""Vertex-domain sampling/interpolation and spectral-domain lossy sampling.

Spectral sampling follows the usual transform-coding recipe: transform the
signal with an MLG basis, reorder rows/columns of the coefficient array so
that energy gathers top-left, keep a prefix of coefficients according to a
direction, zero the rest, undo the permutation and invert the transform.

Directions (on the permuted coefficient array):

``block``
    keep the top-left ``P x Q`` block.
``layer``
    keep the first ``K`` entries in row-major order, i.e. drop whole layers
    from the bottom up and, inside the partial layer, from right to left.
``entity``
    keep the first ``K`` entries in column-major order, i.e. drop columns
    from right to left and, inside the partial column, from bottom to top.

Permutations and indices are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .errors import InvalidParameterError, ShapeError
from .spectra import SpectralBasis, imgft, mgft
from .tensor import as_signal, n_mode_product_signal

Direction = Literal["layer", "entity", "block"]
Ordering = Literal["energy", "value"]

DIRECTIONS = ("layer", "entity", "block")
ORDERINGS = ("energy", "value")


# --------------------------------------------------------------------------
# vertex domain

@dataclass(frozen=True)
class SelectionPair:
    layers: tuple[int, ...]
    entities: tuple[int, ...]

    def __post_init__(self):
        for name in ("layers", "entities"):
            idx = tuple(int(k) for k in getattr(self, name))
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise InvalidParameterError(f"{name} must be strictly increasing: {idx}")
            object.__setattr__(self, name, idx)

    def check(self, M: int, N: int) -> None:
        for name, idx, bound in (("layer", self.layers, M), ("entity", self.entities, N)):
            if idx and (idx[0] < 0 or idx[-1] >= bound):
                raise InvalidParameterError(f"{name} index out of range 0..{bound - 1}: {idx}")

    def operators(self, M: int, N: int) -> tuple[np.ndarray, np.ndarray]:
        """The 0/1 selection matrices ``S_P`` (P x M) and ``S_Q`` (Q x N)."""
        self.check(M, N)
        SP = np.zeros((len(self.layers), M))
        SP[np.arange(len(self.layers)), self.layers] = 1.0
        SQ = np.zeros((len(self.entities), N))
        SQ[np.arange(len(self.entities)), self.entities] = 1.0
        return SP, SQ


class InterpolationPair(NamedTuple):
    layer: np.ndarray   # T_M, M x P
    entity: np.ndarray  # T_N, N x Q

    @classmethod
    def zero_fill(cls, sel: SelectionPair, M: int, N: int) -> "InterpolationPair":
        SP, SQ = sel.operators(M, N)
        return cls(SP.T, SQ.T)


def vertex_sample(s, sel: SelectionPair) -> np.ndarray:
    """``s x1 S_P x2 S_Q``: entry ``(a, b)`` is ``s[p_a, q_b]``."""
    s = as_signal(s)
    SP, SQ = sel.operators(*s.shape)
    return n_mode_product_signal(n_mode_product_signal(s, SP, 1), SQ, 2)


def vertex_interpolate(s_d, ip: InterpolationPair) -> np.ndarray:
    """``s_D x1 T_M x2 T_N``."""
    s_d = as_signal(s_d)
    TM, TN = np.atleast_2d(ip.layer), np.atleast_2d(ip.entity)
    if TM.shape[1] != s_d.shape[0] or TN.shape[1] != s_d.shape[1]:
        raise ShapeError(
            f"interpolators {TM.shape}, {TN.shape} do not conform to sampled signal {s_d.shape}"
        )
    return n_mode_product_signal(n_mode_product_signal(s_d, TM, 1), TN, 2)


# --------------------------------------------------------------------------
# spectral domain

@dataclass(frozen=True)
class SamplingPlan:
    """How many transformed coefficients to keep and in which pattern.

    ``keep_count`` applies to the layer/entity directions, ``keep_layers`` /
    ``keep_entities`` to the block direction.  ``row_perm`` / ``col_perm``
    may be left ``None`` and are then derived from the coefficients by
    :func:`order_coefficients`.
    """

    direction: Direction = "block"
    ordering: Ordering = "energy"
    keep_count: int | None = None
    keep_layers: int | None = None
    keep_entities: int | None = None
    row_perm: tuple[int, ...] | None = None
    col_perm: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise InvalidParameterError(f"unknown direction {self.direction!r}")
        if self.ordering not in ORDERINGS:
            raise InvalidParameterError(f"unknown ordering {self.ordering!r}")
        if self.direction == "block":
            if self.keep_layers is None or self.keep_entities is None:
                raise InvalidParameterError("block plans need keep_layers and keep_entities")
        elif self.keep_count is None:
            raise InvalidParameterError(f"{self.direction} plans need keep_count")
        for name in ("row_perm", "col_perm"):
            p = getattr(self, name)
            if p is not None:
                object.__setattr__(self, name, tuple(int(k) for k in p))

    def kept(self, M: int, N: int) -> int:
        if self.direction == "block":
            return self.keep_layers * self.keep_entities
        return self.keep_count

    def validate(self, M: int, N: int) -> None:
        if self.direction == "block":
            if not (0 <= self.keep_layers <= M and 0 <= self.keep_entities <= N):
                raise InvalidParameterError(
                    f"block {self.keep_layers}x{self.keep_entities} exceeds signal {M}x{N}"
                )
        elif not 0 <= self.keep_count <= M * N:
            raise InvalidParameterError(f"keep_count {self.keep_count} exceeds {M * N} coefficients")
        for p, n, name in ((self.row_perm, M, "row_perm"), (self.col_perm, N, "col_perm")):
            if p is not None and sorted(p) != list(range(n)):
                raise InvalidParameterError(f"{name} is not a permutation of 0..{n - 1}")

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "ordering": self.ordering,
            "keep_count": self.keep_count,
            "keep_layers": self.keep_layers,
            "keep_entities": self.keep_entities,
            "row_perm": list(self.row_perm) if self.row_perm is not None else None,
            "col_perm": list(self.col_perm) if self.col_perm is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPlan":
        return cls(**{k: d.get(k) for k in (
            "direction", "ordering", "keep_count", "keep_layers", "keep_entities",
            "row_perm", "col_perm")})


def plan_for_fraction(M: int, N: int, fraction: float, direction: Direction = "block",
                      ordering: Ordering = "energy", layers: int | None = None) -> SamplingPlan:
    """Plan keeping ``round(fraction * M * N)`` coefficients.

    For block plans ``layers`` fixes ``P`` (default ``M``) and ``Q`` is the
    remaining budget per layer, capped at ``N``.
    """
    if not 0.0 <= fraction <= 1.0:
        raise InvalidParameterError(f"fraction must lie in [0, 1], got {fraction}")
    K = int(round(fraction * M * N))
    if direction != "block":
        return SamplingPlan(direction, ordering, keep_count=K)
    P = M if layers is None else int(layers)
    if not 1 <= P <= M:
        raise InvalidParameterError(f"block layers must lie in 1..{M}, got {P}")
    Q = min(N, int(round(K / P)))
    return SamplingPlan("block", ordering, keep_layers=P, keep_entities=Q)


def _stable_desc(x: np.ndarray) -> np.ndarray:
    return np.argsort(-x, kind="stable")


def order_coefficients(s_hat, basis: SpectralBasis | None = None,
                       strategy: Ordering = "energy") -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Row and column permutations that move large coefficients top-left.

    ``energy`` sorts rows/columns of ``s_hat`` by their L2 norm; ``value``
    sorts by the magnitude of the basis values.  Ties keep original order.
    """
    s_hat = as_signal(s_hat)
    if strategy == "energy":
        rows = _stable_desc(np.sqrt(np.sum(s_hat * s_hat, axis=1)))
        cols = _stable_desc(np.sqrt(np.sum(s_hat * s_hat, axis=0)))
    elif strategy == "value":
        if basis is None:
            raise InvalidParameterError("value ordering needs the spectral basis")
        rows = _stable_desc(np.abs(basis.layer_values))
        cols = _stable_desc(np.abs(basis.entity_values))
    else:
        raise InvalidParameterError(f"unknown ordering {strategy!r}")
    return tuple(int(k) for k in rows), tuple(int(k) for k in cols)


def permuted_mask(plan: SamplingPlan, M: int, N: int) -> np.ndarray:
    """Boolean mask of kept positions in the permuted coefficient array."""
    plan.validate(M, N)
    mask = np.zeros((M, N), dtype=bool)
    if plan.direction == "block":
        mask[: plan.keep_layers, : plan.keep_entities] = True
    elif plan.direction == "layer":
        mask.reshape(-1)[: plan.keep_count] = True
    else:
        flat = np.zeros(M * N, dtype=bool)
        flat[: plan.keep_count] = True
        mask = flat.reshape(N, M).T.copy()
    return mask


def kept_mask(plan: SamplingPlan, M: int, N: int) -> np.ndarray:
    """Mask of kept positions in the original (unpermuted) coefficient array."""
    if plan.row_perm is None or plan.col_perm is None:
        raise InvalidParameterError("plan permutations are unresolved")
    pm = permuted_mask(plan, M, N)
    mask = np.zeros_like(pm)
    mask[np.ix_(plan.row_perm, plan.col_perm)] = pm
    return mask


def resolve_plan(s_hat: np.ndarray, basis: SpectralBasis, plan: SamplingPlan) -> SamplingPlan:
    if plan.row_perm is not None and plan.col_perm is not None:
        return plan
    rows, cols = order_coefficients(s_hat, basis, plan.ordering)
    return replace(plan, row_perm=plan.row_perm or rows, col_perm=plan.col_perm or cols)


class SampleResult(NamedTuple):
    coefficients: np.ndarray  # permuted coefficients with dropped entries zeroed
    recovered: np.ndarray
    error: float              # ||s - s_R||_F / ||s||_F
    plan: SamplingPlan        # with permutations resolved
    mask: np.ndarray          # kept positions in the original coefficient layout

    @property
    def kept_values(self) -> np.ndarray:
        """Kept coefficients in traversal order of the plan's direction."""
        pm = permuted_mask(self.plan, *self.mask.shape)
        c = self.coefficients
        if self.plan.direction == "block":
            return c[: self.plan.keep_layers, : self.plan.keep_entities].copy()
        if self.plan.direction == "layer":
            return c.reshape(-1)[pm.reshape(-1)]
        return c.T.reshape(-1)[pm.T.reshape(-1)]


def relative_error(s: np.ndarray, s_r: np.ndarray) -> float:
    ns = float(np.linalg.norm(s))
    diff = float(np.linalg.norm(s - s_r))
    return diff / ns if ns > 0 else diff


def spectral_sample(s, basis: SpectralBasis, plan: SamplingPlan) -> SampleResult:
    """Lossy spectral sampling and zero-fill recovery of ``s``."""
    s = as_signal(s, basis.shape)
    M, N = s.shape
    s_hat = mgft(s, basis)
    plan = resolve_plan(s_hat, basis, plan)
    plan.validate(M, N)
    mask = kept_mask(plan, M, N)
    kept = np.where(mask, s_hat, 0.0)
    s_r = imgft(kept, basis)
    coeffs = kept[np.ix_(plan.row_perm, plan.col_perm)]
    return SampleResult(coeffs, s_r, relative_error(s, s_r), plan, mask)


def recover(coefficients: np.ndarray, basis: SpectralBasis, plan: SamplingPlan) -> np.ndarray:
    """Recover a signal from permuted, zero-filled coefficients and a resolved plan."""
    M, N = basis.shape
    s_hat = np.zeros((M, N))
    s_hat[np.ix_(plan.row_perm, plan.col_perm)] = coefficients
    return imgft(s_hat, basis)


def sampling_fraction(plan: SamplingPlan, M: int, N: int) -> float:
    """Kept coefficients divided by ``M * N``."""
    return plan.kept(M, N) / float(M * N)


def nested_plans(M: int, N: int, fractions: Sequence[float], direction: Direction = "block",
                 ordering: Ordering = "energy", layers: int | None = None) -> list[SamplingPlan]:
    return [plan_for_fraction(M, N, f, direction, ordering, layers) for f in fractions]
