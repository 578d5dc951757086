"""Check records shared by the verification suites."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Check", "residual_check", "all_passed"]


@dataclass
class Check:
    name: str
    passed: bool
    tag: str = ""
    kind: str = "exact"  # "exact" or "numeric"
    max_residual: float | None = None
    mean_residual: float | None = None
    tolerance: float | None = None
    samples: int | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        for k in ("max_residual", "mean_residual", "tolerance"):
            v = getattr(self, k)
            if v is not None:
                setattr(self, k, float(v))

    @classmethod
    def exact(cls, name, ok, tag="", detail=None):
        return cls(name=name, passed=bool(ok), tag=tag, kind="exact", detail=detail or {})

    def as_dict(self) -> dict:
        d = {"name": self.name, "tag": self.tag, "kind": self.kind, "passed": self.passed}
        if self.kind == "numeric":
            d.update(
                max_residual=self.max_residual,
                mean_residual=self.mean_residual,
                tolerance=self.tolerance,
                samples=self.samples,
            )
        if self.detail:
            d["detail"] = self.detail
        return d

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.kind == "numeric":
            return f"[{status}] {self.name} ({self.tag}): max {self.max_residual:.3e} < {self.tolerance:g}"
        return f"[{status}] {self.name} ({self.tag})"


def residual_check(name, residual, tol, tag="", samples=None, detail=None) -> Check:
    """Numeric check from an array whose leading axis indexes sample points."""
    r = np.abs(np.asarray(residual))
    if r.size == 0:
        mx = mean = 0.0
    else:
        per_point = r.reshape(r.shape[0], -1).max(axis=1) if r.ndim > 1 else r
        mx, mean = float(per_point.max()), float(per_point.mean())
    if samples is None and r.ndim >= 1 and r.size:
        samples = int(r.shape[0])
    return Check(
        name=name,
        passed=bool(mx < tol) and np.isfinite(mx),
        tag=tag,
        kind="numeric",
        max_residual=mx,
        mean_residual=mean,
        tolerance=tol,
        samples=samples,
        detail=detail or {},
    )


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)
