"""Uniform quantizers: symmetric with clipping, asymmetric per-group.

The symmetric scale is ``clip_ratio * max|X| / L`` with two choices of
level count ``L``:

* ``"full"``: ``L = 2**bits - 1`` (the reference scale formula; combined
  with the symmetric clamp to ``[-L, L]`` this yields more codes than a
  two's-complement grid of the same nominal width);
* ``"signed"``: ``L = 2**(bits-1) - 1``, the conventional signed grid.

Rounding is half-away-from-zero everywhere; half-integer ties do occur in
the tests and the convention matters.  All-zero inputs quantize to zero
codes with scale 1 instead of raising, because clipping-ratio searches
can transiently produce them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ArgumentError, DataError, ShapeError

_SCHEMES = ("symmetric", "asymmetric")
_GRANULARITIES = ("per_tensor", "per_token")
_LEVEL_FORMULAS = ("full", "signed")


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest with halves moving away from zero."""
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


@dataclass(frozen=True)
class QuantizerSpec:
    bits: int = 4
    clip_ratio: float = 1.0
    scheme: str = "symmetric"
    granularity: str = "per_tensor"
    group_size: Optional[int] = None
    level_formula: str = "full"

    def __post_init__(self):
        if self.bits < 2:
            raise ArgumentError(f"bits must be >= 2, got {self.bits}")
        if not 0.0 < self.clip_ratio <= 1.0:
            raise ArgumentError(f"clip_ratio must be in (0, 1], got {self.clip_ratio}")
        if self.scheme not in _SCHEMES:
            raise ArgumentError(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")
        if self.granularity not in _GRANULARITIES:
            raise ArgumentError(
                f"granularity must be one of {_GRANULARITIES}, got {self.granularity!r}"
            )
        if self.level_formula not in _LEVEL_FORMULAS:
            raise ArgumentError(
                f"level_formula must be one of {_LEVEL_FORMULAS}, got {self.level_formula!r}"
            )
        if self.group_size is not None:
            if self.scheme != "asymmetric":
                raise ArgumentError("group_size applies to the asymmetric scheme only")
            if self.group_size < 1:
                raise ArgumentError(f"group_size must be positive, got {self.group_size}")

    @property
    def levels(self) -> int:
        if self.level_formula == "full":
            return 2**self.bits - 1
        return 2 ** (self.bits - 1) - 1

    def with_clip(self, clip_ratio: float) -> "QuantizerSpec":
        return QuantizerSpec(
            bits=self.bits,
            clip_ratio=clip_ratio,
            scheme=self.scheme,
            granularity=self.granularity,
            group_size=self.group_size,
            level_formula=self.level_formula,
        )


@dataclass(frozen=True, eq=False)
class QuantizedTensor:
    """Integer codes plus whatever scale/zero-point state restores them."""

    codes: np.ndarray
    scale: np.ndarray
    zero_point: Optional[np.ndarray]
    shape: tuple
    spec: QuantizerSpec

    def dequantize(self) -> np.ndarray:
        return dequantize(self)


def _as_clean_float(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0:
        raise DataError("cannot quantize an empty tensor")
    if not np.all(np.isfinite(arr)):
        raise DataError("input contains non-finite values")
    return arr


def quantize_symmetric(x, spec: QuantizerSpec) -> QuantizedTensor:
    """Scale by clip_ratio * max|X| / L, round, clamp codes to [-L, L].

    Per-token granularity computes one scale per leading-axis row; rows
    that are entirely zero get scale 1 (degenerate convention).
    """
    if spec.scheme != "symmetric":
        raise ArgumentError("quantize_symmetric requires a symmetric spec")
    arr = _as_clean_float(x)
    levels = spec.levels
    if spec.granularity == "per_tensor":
        peak = np.abs(arr).max()
        scale = np.float64(spec.clip_ratio * peak / levels) if peak > 0 else np.float64(1.0)
        scale_arr = np.asarray(scale)
        scaled = arr / scale
    else:
        if arr.ndim < 1:
            raise ShapeError("per_token quantization needs at least one axis")
        flat = arr.reshape(arr.shape[0], -1)
        peak = np.abs(flat).max(axis=1)
        scale_arr = np.where(peak > 0, spec.clip_ratio * peak / levels, 1.0)
        scaled = arr / scale_arr.reshape((-1,) + (1,) * (arr.ndim - 1))
    codes = np.clip(round_half_away(scaled), -levels, levels).astype(np.int64)
    return QuantizedTensor(
        codes=codes, scale=scale_arr, zero_point=None, shape=arr.shape, spec=spec
    )


def quantize_asymmetric_grouped(x, bits: int, group_size: int) -> QuantizedTensor:
    """Min/max asymmetric quantization over last-axis groups.

    Per group: scale (max - min) / (2**bits - 1), integer zero point, codes
    in [0, 2**bits - 1].  Constant groups use scale 1 with the negated
    minimum as zero point, which round-trips them exactly.
    """
    spec = QuantizerSpec(
        bits=bits, scheme="asymmetric", granularity="per_tensor", group_size=group_size
    )
    arr = _as_clean_float(x)
    if arr.ndim < 1 or arr.shape[-1] % group_size:
        raise ShapeError(
            f"last axis ({arr.shape[-1] if arr.ndim else 0}) not divisible by "
            f"group size {group_size}"
        )
    levels = 2**bits - 1
    grouped = arr.reshape(arr.shape[:-1] + (arr.shape[-1] // group_size, group_size))
    lo = grouped.min(axis=-1)
    hi = grouped.max(axis=-1)
    spread = hi - lo
    degenerate = spread == 0
    scale = np.where(degenerate, 1.0, spread / levels)
    zero = np.where(degenerate, -lo, round_half_away(-lo / scale))
    codes = np.where(
        degenerate[..., None],
        0.0,
        np.clip(round_half_away(grouped / scale[..., None]) + zero[..., None], 0, levels),
    ).astype(np.int64)
    return QuantizedTensor(
        codes=codes.reshape(arr.shape),
        scale=scale,
        zero_point=zero,
        shape=arr.shape,
        spec=spec,
    )


def dequantize(q: QuantizedTensor) -> np.ndarray:
    """Map codes back to real values; restores the original shape."""
    if q.spec.scheme == "symmetric":
        if q.spec.granularity == "per_tensor":
            return (q.codes * q.scale).reshape(q.shape)
        scale = q.scale.reshape((-1,) + (1,) * (len(q.shape) - 1))
        return (q.codes * scale).reshape(q.shape)
    g = q.spec.group_size
    grouped = q.codes.reshape(q.shape[:-1] + (q.shape[-1] // g, g))
    out = (grouped - q.zero_point[..., None]) * q.scale[..., None]
    return out.reshape(q.shape)


def fake_quantize_symmetric(x, spec: QuantizerSpec) -> np.ndarray:
    """quantize -> dequantize in one call (the float simulation path)."""
    return dequantize(quantize_symmetric(x, spec))


def fake_quantize_asymmetric_grouped(x, bits: int, group_size: int) -> np.ndarray:
    return dequantize(quantize_asymmetric_grouped(x, bits, group_size))


class QuantizationError(NamedTuple):
    max_abs_err: float
    mse: float


def quantization_error(x, q: QuantizedTensor) -> QuantizationError:
    """Elementwise reconstruction error diagnostics."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != q.shape:
        raise ShapeError(f"shape mismatch: {arr.shape} vs {q.shape}")
    diff = arr - dequantize(q)
    return QuantizationError(
        max_abs_err=float(np.abs(diff).max()), mse=float(np.mean(diff**2))
    )
