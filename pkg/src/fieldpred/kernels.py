"""Distance kernels and lead certification.

Every kernel is defined on the matching distance d in [0, total_weight]
and maps it to a positive, strictly decreasing entry transform score.
Working on the distance (complement) side keeps large tables out of
overflow territory: the perfect-match value is the largest one a kernel
ever produces.

Kinds
-----
=====================  ====================================================
pow_2                  2^(-d)
pow_e                  e^(-d)
gauss                  e^(-d^2)
bridge                 mld^(-d)
spliced                base(d) for d > 0, lifted to mld * base(1) at d = 0
adj_pow_2              1 / (2^d + adrez), adrez = -(mld - 2)/(mld - 1)
inv_additive_residue   1 / (adrez + grow(d)) for a named growth function,
                       adrez chosen so the perfect/almost-perfect ratio
                       equals mld
newton                 1 / (1/mld + d^2)
decay_a                mld^(-H(d)),  H(d) = 1/1 + 1/2 + ... + 1/d
decay_b                mld^(-Q(d)),  Q(d) = 1/1 + 1/4 + ... + 1/d^2
=====================  ====================================================

H and Q extend to non-integer d by linear interpolation between integer
arguments. ``mld`` defaults to the number of training entries, which is
exactly the lead a kernel needs so one extra perfect match outweighs
every almost-perfect entry combined (see ``certify_lead``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import KernelError

KERNEL_KINDS = (
    "pow_2",
    "pow_e",
    "gauss",
    "bridge",
    "spliced",
    "inv_additive_residue",
    "adj_pow_2",
    "newton",
    "decay_a",
    "decay_b",
)

GROWTH_KINDS = ("pow_2", "pow_e", "square", "linear")

#: Kinds whose lead is set directly by mld; these require mld > 1.
_LEAD_KINDS = frozenset({"bridge", "spliced", "adj_pow_2", "inv_additive_residue", "decay_a", "decay_b"})

KERNEL_FORMULAS = {
    "pow_2": "2^(-d)",
    "pow_e": "e^(-d)",
    "gauss": "e^(-d^2)",
    "bridge": "mld^(-d)",
    "spliced": "base(d) for d > 0, mld*base(1) at d = 0",
    "inv_additive_residue": "1/(adrez + grow(d))",
    "adj_pow_2": "1/(2^d + adrez), adrez = -(mld-2)/(mld-1)",
    "newton": "1/(1/mld + d^2)",
    "decay_a": "mld^(-(1/1 + 1/2 + ... + 1/d))",
    "decay_b": "mld^(-(1/1 + 1/4 + ... + 1/d^2))",
}


@lru_cache(maxsize=None)
def _recip_power_cumsum(n: int, power: int) -> np.ndarray:
    """[0, sum_{i<=1} 1/i^p, sum_{i<=2} 1/i^p, ...] up to i = n."""
    i = np.arange(1, n + 1, dtype=np.float64)
    return np.concatenate(([0.0], np.cumsum(1.0 / i**power)))


def _fading_exponent(d: np.ndarray, power: int, table_size: int) -> np.ndarray:
    """H(d) (power=1) or Q(d) (power=2), linearly interpolated between integers."""
    table = _recip_power_cumsum(table_size, power)
    base = np.floor(d)
    idx = base.astype(np.int64)
    return table[idx] + (d - base) / (idx + 1.0) ** power


def _grow(kind: str, d: np.ndarray) -> np.ndarray:
    if kind == "pow_2":
        return np.exp2(d)
    if kind == "pow_e":
        return np.exp(d)
    if kind == "square":
        return d * d
    if kind == "linear":
        return np.asarray(d, dtype=np.float64)
    raise KernelError(f"unknown growth function {kind!r}")


@dataclass(frozen=True)
class Kernel:
    """A distance kernel plus the table geometry it was built for."""

    kind: str
    n_entries: int
    total_weight: float
    mld: float
    adrez: float | None = None
    grow_kind: str | None = None
    base: "Kernel | None" = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        if self.n_entries < 1:
            raise KernelError("kernel needs n_entries >= 1")
        if self.total_weight <= 0:
            raise KernelError("kernel needs total_weight > 0")
        if self.scale <= 0:
            raise KernelError("kernel scale must be positive")
        if self.kind in _LEAD_KINDS and self.mld <= 1:
            raise KernelError(f"{self.kind} needs mld > 1, got {self.mld}")
        if self.kind == "spliced" and self.base is None:
            raise KernelError("spliced kernel needs a base kernel")
        if self.kind in ("adj_pow_2", "inv_additive_residue") and self.adrez is None:
            raise KernelError(f"{self.kind} kernel needs adrez")
        if self.kind == "inv_additive_residue" and self.grow_kind not in GROWTH_KINDS:
            raise KernelError(f"unknown growth function {self.grow_kind!r}")

    def evaluate(self, d):
        """Kernel value at distance d (scalar or ndarray). No domain check."""
        d = np.asarray(d, dtype=np.float64)
        kind = self.kind
        if kind == "pow_2":
            out = np.exp2(-d)
        elif kind == "pow_e":
            out = np.exp(-d)
        elif kind == "gauss":
            out = np.exp(-(d * d))
        elif kind == "bridge":
            out = np.power(self.mld, -d)
        elif kind == "spliced":
            lifted = self.mld * self.base.evaluate(1.0)
            out = np.where(d == 0.0, lifted, self.base.evaluate(d))
        elif kind == "adj_pow_2":
            out = 1.0 / (np.exp2(d) + self.adrez)
        elif kind == "inv_additive_residue":
            out = 1.0 / (self.adrez + _grow(self.grow_kind, d))
        elif kind == "newton":
            out = 1.0 / (1.0 / self.mld + d * d)
        elif kind == "decay_a":
            out = np.power(self.mld, -_fading_exponent(d, 1, self._table_size()))
        elif kind == "decay_b":
            out = np.power(self.mld, -_fading_exponent(d, 2, self._table_size()))
        else:  # pragma: no cover - guarded by __post_init__
            raise KernelError(f"unknown kernel kind {kind!r}")
        return out * self.scale

    def _table_size(self) -> int:
        return int(np.ceil(self.total_weight)) + 2


@dataclass(frozen=True)
class LeadCertificate:
    """Perfect-match score, almost-perfect score, and the adversarial bound.

    ``certified`` means sepm strictly exceeds maxsap = (n_entries - 1) * seap:
    a single extra perfect match then outvotes every almost-perfect entry the
    rest of the table could possibly contribute.
    """

    sepm: float
    seap: float
    maxsap: float
    certified: bool

    def __post_init__(self):
        if not (self.sepm >= self.seap > 0.0):
            raise KernelError("certificate requires sepm >= seap > 0")


def make_kernel(kind: str, n_entries: int, total_weight: float, mld_override: float | None = None) -> Kernel:
    """Build a kernel for a table of ``n_entries`` rows and the given weight span.

    ``mld_override`` replaces the default lead (the entry count) for the
    kinds that consume it; it must exceed 1.
    """
    if kind not in KERNEL_KINDS:
        raise KernelError(f"unknown kernel kind {kind!r}")
    if not isinstance(n_entries, (int, np.integer)) or n_entries < 1:
        raise KernelError("n_entries must be a positive integer")
    if total_weight <= 0:
        raise KernelError("total_weight must be positive")
    if mld_override is not None and mld_override <= 1:
        raise KernelError(f"mld_override must exceed 1, got {mld_override}")

    if kind in ("adj_pow_2", "inv_additive_residue"):
        mld = float(mld_override) if mld_override is not None else float(n_entries)
        if mld <= 1:
            raise KernelError(f"{kind} is degenerate for a single-entry table (lead {mld} <= 1)")
        if kind == "adj_pow_2":
            adrez = -(mld - 2.0) / (mld - 1.0)
            return Kernel(kind, int(n_entries), float(total_weight), mld, adrez=adrez)
        return inverse_additive_residue("pow_2", mld, int(n_entries), float(total_weight))

    if kind in ("bridge", "decay_a", "decay_b", "spliced"):
        if mld_override is not None:
            mld = float(mld_override)
        else:
            # mld = 1 would flatten the kernel; a 1-row table still gets a
            # strictly decreasing one.
            mld = float(n_entries) if n_entries >= 2 else 2.0
        if kind == "spliced":
            return splice(make_kernel("pow_2", n_entries, total_weight), mld)
        return Kernel(kind, int(n_entries), float(total_weight), mld)

    # pow_2 / pow_e / gauss / newton: evaluation driven by the formula
    # (newton reads its residue from mld, defaulting to the entry count).
    mld = float(mld_override) if mld_override is not None else float(n_entries)
    return Kernel(kind, int(n_entries), float(total_weight), mld)


def splice(base: Kernel, mld: float) -> Kernel:
    """Lift a kernel's perfect-match value to mld * base(1), leave d > 0 alone.

    This grafts a convergence-grade lead onto any base shape: the spliced
    perfect/almost-perfect ratio is exactly mld.
    """
    if mld is None or mld <= 1:
        raise KernelError(f"splice needs mld > 1, got {mld}")
    return Kernel(
        "spliced",
        base.n_entries,
        base.total_weight,
        float(mld),
        base=base,
    )


def inverse_additive_residue(grow_kind: str, mld: float, n_entries: int, total_weight: float) -> Kernel:
    """Kernel 1/(adrez + grow(d)) with adrez solved so the lead equals mld.

    Setting eval(0)/eval(1) = mld gives
    adrez = (grow(1)/mld - grow(0)) / (1 - 1/mld).
    """
    if grow_kind not in GROWTH_KINDS:
        raise KernelError(f"unknown growth function {grow_kind!r}")
    if mld is None or mld <= 1:
        raise KernelError(f"inverse_additive_residue needs mld > 1, got {mld}")
    g0 = float(_grow(grow_kind, np.float64(0.0)))
    g1 = float(_grow(grow_kind, np.float64(1.0)))
    adrez = (g1 / mld - g0) / (1.0 - 1.0 / mld)
    # grow is increasing, so the denominator is smallest at d = 0.
    if adrez + g0 <= 0.0:
        raise KernelError("residual drives denominator nonpositive on the distance domain")
    return Kernel(
        "inv_additive_residue",
        int(n_entries),
        float(total_weight),
        float(mld),
        adrez=adrez,
        grow_kind=grow_kind,
    )


def eval_on_distance(kernel: Kernel, d):
    """Public evaluation with the domain check 0 <= d <= total_weight."""
    arr = np.asarray(d, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > kernel.total_weight):
        raise KernelError(
            f"distance out of range: expected 0 <= d <= {kernel.total_weight}, got {d!r}"
        )
    out = kernel.evaluate(arr)
    if np.ndim(d) == 0:
        return float(out)
    return out


def certify_lead(kernel: Kernel, n_entries: int) -> LeadCertificate:
    """Check sepm > (n_entries - 1) * seap, the worst-case lead condition."""
    if not isinstance(n_entries, (int, np.integer)) or n_entries < 1:
        raise KernelError("n_entries must be a positive integer")
    sepm = float(kernel.evaluate(0.0))
    seap = float(kernel.evaluate(1.0))
    maxsap = (n_entries - 1) * seap
    return LeadCertificate(sepm=sepm, seap=seap, maxsap=maxsap, certified=sepm > maxsap)


def with_scale(kernel: Kernel, factor: float) -> Kernel:
    """A copy of the kernel scaled by a positive constant.

    Scaling never changes winners or likelihoods; it exists to demonstrate
    and test that invariance.
    """
    if factor <= 0:
        raise KernelError("scale factor must be positive")
    return replace(kernel, scale=kernel.scale * factor)


def kernel_to_dict(kernel: Kernel) -> dict:
    payload: dict = {"kind": kernel.kind, "mld": kernel.mld}
    if kernel.adrez is not None:
        payload["adrez"] = kernel.adrez
    if kernel.grow_kind is not None:
        payload["grow_kind"] = kernel.grow_kind
    if kernel.base is not None:
        payload["base"] = kernel_to_dict(kernel.base)
    if kernel.scale != 1.0:
        payload["scale"] = kernel.scale
    return payload


def kernel_from_dict(payload: dict, n_entries: int, total_weight: float) -> Kernel:
    """Rebuild a kernel from its descriptor. No refit: stored values are final."""
    if not isinstance(payload, dict) or "kind" not in payload:
        raise KernelError("kernel descriptor must be an object with a 'kind'")
    base = None
    if payload.get("base") is not None:
        base = kernel_from_dict(payload["base"], n_entries, total_weight)
    return Kernel(
        kind=payload["kind"],
        n_entries=int(n_entries),
        total_weight=float(total_weight),
        mld=float(payload["mld"]),
        adrez=payload.get("adrez"),
        grow_kind=payload.get("grow_kind"),
        base=base,
        scale=float(payload.get("scale", 1.0)),
    )
