from typing import Optional, Sequence, Tuple, Union

import numpy as np

ArrayLike = Union[float, Sequence[float], np.ndarray]

CLASS_CLAIMS = ("regular", "mhr", "general")


class DistributionWarning(BaseException):
    pass


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _scalar_or_array(out: np.ndarray, scalar: bool) -> Union[float, np.ndarray]:
    if scalar:
        return float(out.reshape(-1)[0])
    return out


class Distribution:
    """
    Super-class of all value distributions a buyer can be drawn from.

    The CDF convention is strict, F(v) = Pr[value < v], so that a sale at
    price p happens with probability q(p) = Pr[value >= p] and atoms at
    the posted price sell.

    Attributes:
        family: name of the family in the JSON schema
        support_lo: lowest value with positive probability
        support_hi: highest value with positive probability
        class_claim: one of regular, mhr, general
        source: JSON document the instance was built from, if any

    Methods:
        cdf:
        quantile_prob:
        revenue:
        inverse_survival:
        revenue_in_quantile:
        sample:
        density:
        virtual_value:
        hazard_rate:
        breakpoints:
        mean:
        to_dict:
    """

    family = "abstract"
    has_density = False

    def __init__(
        self,
        support_lo: float,
        support_hi: float,
        class_claim: str,
        source: Optional[dict] = None,
    ):
        if class_claim not in CLASS_CLAIMS:
            raise DistributionWarning(
                f"class_claim={class_claim} is not one of {CLASS_CLAIMS}"
            )
        if not (np.isfinite(support_lo) and np.isfinite(support_hi)):
            raise DistributionWarning("support must be bounded")
        if not 0 <= support_lo <= support_hi:
            raise DistributionWarning(
                f"invalid support [{support_lo}, {support_hi}]"
            )
        self._support = (float(support_lo), float(support_hi))
        self._class_claim = class_claim
        self._source = source

    @property
    def support_lo(self) -> float:
        return self._support[0]

    @property
    def support_hi(self) -> float:
        return self._support[1]

    @property
    def class_claim(self) -> str:
        return self._class_claim

    @property
    def source(self) -> Optional[dict]:
        return self._source

    def _quantile_prob(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inverse_survival(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def quantile_prob(self, p: ArrayLike) -> Union[float, np.ndarray]:
        """Sale probability q(p) = Pr[value >= p]."""
        scalar = np.ndim(p) == 0
        p = np.atleast_1d(np.asarray(p, dtype=float))
        return _scalar_or_array(self._quantile_prob(p), scalar)

    def cdf(self, v: ArrayLike) -> Union[float, np.ndarray]:
        """Pr[value < v]; equal to 1 - quantile_prob(v) by construction."""
        scalar = np.ndim(v) == 0
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return _scalar_or_array(1.0 - self._quantile_prob(v), scalar)

    def revenue(self, p: ArrayLike) -> Union[float, np.ndarray]:
        scalar = np.ndim(p) == 0
        p = np.atleast_1d(np.asarray(p, dtype=float))
        return _scalar_or_array(p * self._quantile_prob(p), scalar)

    def inverse_survival(self, u: ArrayLike) -> Union[float, np.ndarray]:
        """
        Value at quantile u, v(u) = sup{p : q(p) >= u}, for u in (0, 1].
        """
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any((u <= 0) | (u > 1)):
            raise DistributionWarning("quantile must lie in (0, 1]")
        return _scalar_or_array(self._inverse_survival(u), scalar)

    def revenue_in_quantile(self, u: ArrayLike) -> Union[float, np.ndarray]:
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return _scalar_or_array(u * self.inverse_survival(u), scalar)

    def sample(
        self, rng: np.random.Generator, size: Optional[int] = None,
    ) -> Union[float, np.ndarray]:
        """
        Draw values by inverse transform of a uniform on (0, 1].

        Args:
            rng: generator owned by the caller; it is advanced.
            size: number of draws, or None for a single float.
        """
        n = 1 if size is None else int(size)
        # 1 - U(0,1] keeps u away from zero
        u = 1.0 - rng.random(n)
        values = self._inverse_survival(u)
        if size is None:
            return float(values[0])
        return values

    def breakpoints(self) -> np.ndarray:
        """Prices where q is not smooth: piece boundaries and atoms."""
        return np.array([self.support_lo, self.support_hi])

    def density(self, v: ArrayLike) -> Union[float, np.ndarray]:
        """
        Density on the continuous part. Only families with has_density
        provide one, in closed form.
        """
        raise DistributionWarning(f"{self.family} has no density")

    def virtual_value(self, v: ArrayLike) -> Union[float, np.ndarray]:
        """phi(v) = v - q(v) / f(v)"""
        v = np.asarray(v, dtype=float)
        return v - self.quantile_prob(v) / self.density(v)

    def hazard_rate(self, v: ArrayLike) -> Union[float, np.ndarray]:
        """h(v) = f(v) / q(v)"""
        v = np.asarray(v, dtype=float)
        return self.density(v) / self.quantile_prob(v)

    def mean(self) -> float:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        if self._source is not None:
            return self._source
        return {"family": self.family, "params": self.params()}

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(support=[{self.support_lo:g}, "
            f"{self.support_hi:g}], class_claim={self.class_claim})"
        )


class PiecewiseCdf(Distribution):
    """
    Continuous distribution on [breaks[0], breaks[-1]] with a possible atom
    at the top of the support. On piece k, [breaks[k], breaks[k+1]), the
    sale probability is the rational function

        q(v) = (a + b v) / (c + d v),    (a, b, c, d) = coefs[k].

    Both the linear densities of the MHR constructions (d = 0) and the
    equal-revenue-like pieces of the regular constructions (b = 0) fit this
    form, so q is exact to machine precision.
    """

    family = "piecewise-cdf"
    has_density = True

    def __init__(
        self,
        breaks: Sequence[float],
        coefs: Sequence[Tuple[float, float, float, float]],
        top_atom: float = 0.0,
        class_claim: str = "general",
        source: Optional[dict] = None,
        rtol: float = 1e-9,
    ):
        breaks = np.asarray(breaks, dtype=float)
        coefs = np.asarray(coefs, dtype=float).reshape(-1, 4)
        if len(breaks) != len(coefs) + 1:
            raise DistributionWarning(
                "need exactly one more breakpoint than pieces"
            )
        if np.any(np.diff(breaks) <= 0):
            raise DistributionWarning("breakpoints must be increasing")
        if not 0 <= top_atom < 1:
            raise DistributionWarning(f"top_atom={top_atom} not in [0, 1)")
        super().__init__(breaks[0], breaks[-1], class_claim, source)
        self._breaks = _readonly(breaks)
        self._coefs = _readonly(coefs)
        self._top_atom = float(top_atom)

        a, b, c, d = self._coefs.T
        if np.any(a * d - b * c <= 0):
            raise DistributionWarning("every piece must have q decreasing")
        left = (a + b * breaks[:-1]) / (c + d * breaks[:-1])
        right = (a + b * breaks[1:]) / (c + d * breaks[1:])
        if abs(left[0] - 1.0) > rtol:
            raise DistributionWarning(
                f"q(support_lo) = {left[0]} but must be 1"
            )
        if np.any(np.abs(right[:-1] - left[1:]) > rtol):
            raise DistributionWarning("q must be continuous between pieces")
        if abs(right[-1] - self._top_atom) > rtol:
            raise DistributionWarning(
                f"q(support_hi^-) = {right[-1]} differs from the top atom "
                f"{self._top_atom}"
            )
        # q at each left breakpoint, decreasing
        self._q_breaks = _readonly(np.append(left, self._top_atom))

    @property
    def top_atom(self) -> float:
        return self._top_atom

    def _piece_index(self, v: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._breaks, v, side="right") - 1
        return np.clip(idx, 0, len(self._coefs) - 1)

    def _quantile_prob(self, p: np.ndarray) -> np.ndarray:
        a, b, c, d = self._coefs[self._piece_index(p)].T
        with np.errstate(divide="ignore", invalid="ignore"):
            q = (a + b * p) / (c + d * p)
        q = np.where(p <= self.support_lo, 1.0, q)
        q = np.where(p == self.support_hi, self._top_atom, q)
        q = np.where(p > self.support_hi, 0.0, q)
        return np.clip(q, 0.0, 1.0)

    def _inverse_survival(self, u: np.ndarray) -> np.ndarray:
        # piece k covers u in (q_breaks[k+1], q_breaks[k]]
        idx = np.searchsorted(-self._q_breaks, -u, side="left") - 1
        idx = np.clip(idx, 0, len(self._coefs) - 1)
        a, b, c, d = self._coefs[idx].T
        v = (a - u * c) / (u * d - b)
        v = np.clip(v, self._breaks[idx], self._breaks[idx + 1])
        return np.where(u <= self._top_atom, self.support_hi, v)

    def density(self, v: ArrayLike) -> Union[float, np.ndarray]:
        scalar = np.ndim(v) == 0
        v = np.atleast_1d(np.asarray(v, dtype=float))
        a, b, c, d = self._coefs[self._piece_index(v)].T
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = (a * d - b * c) / (c + d * v) ** 2
        inside = (v >= self.support_lo) & (v < self.support_hi)
        return _scalar_or_array(np.where(inside, dens, 0.0), scalar)

    def breakpoints(self) -> np.ndarray:
        return np.array(self._breaks)

    def mean(self) -> float:
        # E[v] = support_lo + int_{lo}^{hi} q(p) dp, the atom included
        total = self.support_lo
        for (a, b, c, d), x0, x1 in zip(
            self._coefs, self._breaks[:-1], self._breaks[1:]
        ):
            if d == 0:
                total += (a * (x1 - x0) + 0.5 * b * (x1 ** 2 - x0 ** 2)) / c
            else:
                slope = b / d
                rest = (a - b * c / d) / d
                total += slope * (x1 - x0) + rest * np.log(
                    (c + d * x1) / (c + d * x0)
                )
        return float(total)

    def params(self) -> dict:
        return {
            "breaks": self._breaks.tolist(),
            "coefs": self._coefs.tolist(),
            "top_atom": self._top_atom,
            "class_claim": self.class_claim,
        }


class DiscreteAtoms(Distribution):
    """
    Finitely many values with positive probability. Sampling is a table
    lookup of a uniform draw in the cumulative probabilities.
    """

    family = "discrete-atoms"

    def __init__(
        self,
        values: Sequence[float],
        probs: Sequence[float],
        class_claim: str = "general",
        source: Optional[dict] = None,
        atol: float = 1e-9,
    ):
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if values.shape != probs.shape or values.size == 0:
            raise DistributionWarning("values and probs must match in size")
        if np.any(np.diff(values) <= 0):
            raise DistributionWarning("atom values must be increasing")
        if np.any(probs <= 0):
            raise DistributionWarning("atom probabilities must be positive")
        if abs(probs.sum() - 1.0) > atol:
            raise DistributionWarning(
                f"atom probabilities sum to {probs.sum()}, not 1"
            )
        super().__init__(values[0], values[-1], class_claim, source)
        self._values = _readonly(values)
        self._probs = _readonly(probs)
        tail = np.cumsum(probs[::-1])[::-1]
        tail[0] = 1.0
        # tail[j] = q(values[j]); padded so that q = 0 above the support
        self._tail = _readonly(np.append(tail, 0.0))
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        self._cum = _readonly(cum)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    def _quantile_prob(self, p: np.ndarray) -> np.ndarray:
        return self._tail[np.searchsorted(self._values, p, side="left")]

    def _inverse_survival(self, u: np.ndarray) -> np.ndarray:
        # number of atoms j with tail[j] >= u
        count = np.searchsorted(-self._tail[:-1], -u, side="right")
        return self._values[np.clip(count - 1, 0, len(self._values) - 1)]

    def sample(
        self, rng: np.random.Generator, size: Optional[int] = None,
    ) -> Union[float, np.ndarray]:
        n = 1 if size is None else int(size)
        idx = np.searchsorted(self._cum, rng.random(n), side="right")
        values = self._values[np.minimum(idx, len(self._values) - 1)]
        if size is None:
            return float(values[0])
        return values

    def breakpoints(self) -> np.ndarray:
        return np.array(self._values)

    def mean(self) -> float:
        return float(np.dot(self._values, self._probs))

    def params(self) -> dict:
        return {
            "values": self._values.tolist(),
            "probs": self._probs.tolist(),
            "class_claim": self.class_claim,
        }


class PointMass(DiscreteAtoms):
    """Degenerate distribution; counted as MHR."""

    family = "point-mass"

    def __init__(self, value: float, source: Optional[dict] = None):
        super().__init__([value], [1.0], class_claim="mhr", source=source)

    def params(self) -> dict:
        return {"value": float(self.values[0])}


class TruncatedExponential(Distribution):
    """
    Shifted exponential with rate theta on [1, H]; the tail beyond H is
    collapsed into an atom at H, so q(p) = exp(-theta (p - 1)) on [1, H].
    Constant hazard rate makes it a smooth MHR fixture.
    """

    family = "truncated-exponential"
    has_density = True

    def __init__(
        self, theta: float, H: float, source: Optional[dict] = None,
    ):
        if theta <= 0:
            raise DistributionWarning(f"theta={theta} must be positive")
        if H <= 1:
            raise DistributionWarning(f"H={H} must exceed 1")
        super().__init__(1.0, H, "mhr", source)
        self.theta = float(theta)
        self.H = float(H)
        self._top_atom = float(np.exp(-self.theta * (self.H - 1.0)))

    @property
    def top_atom(self) -> float:
        return self._top_atom

    def _quantile_prob(self, p: np.ndarray) -> np.ndarray:
        q = np.exp(-self.theta * (np.maximum(p, 1.0) - 1.0))
        return np.where(p > self.H, 0.0, q)

    def _inverse_survival(self, u: np.ndarray) -> np.ndarray:
        v = 1.0 - np.log(u) / self.theta
        return np.where(u <= self._top_atom, self.H, np.minimum(v, self.H))

    def density(self, v: ArrayLike) -> Union[float, np.ndarray]:
        scalar = np.ndim(v) == 0
        v = np.atleast_1d(np.asarray(v, dtype=float))
        dens = self.theta * np.exp(-self.theta * (v - 1.0))
        inside = (v >= 1.0) & (v < self.H)
        return _scalar_or_array(np.where(inside, dens, 0.0), scalar)

    def mean(self) -> float:
        return float(1.0 + (1.0 - self._top_atom) / self.theta)

    def params(self) -> dict:
        return {"theta": self.theta, "H": self.H}
