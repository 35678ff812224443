"""Fitting the mixture-component families to a single observed graph."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .generators import Family, block_count, logit
from .graph import Graph

FITTABLE = (Family.BERNOULLI, Family.OFFSET_BERNOULLI, Family.HIER_BERNOULLI)


@dataclass
class FittedParams:
    family: Family
    values: dict[str, float]
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"family": self.family.value, "values": dict(self.values), "diagnostics": self.diagnostics}

    @classmethod
    def from_json(cls, d: Mapping[str, Any]) -> FittedParams:
        return cls(Family(d["family"]), {k: float(v) for k, v in d["values"].items()},
                   dict(d.get("diagnostics", {})))


@dataclass(frozen=True)
class GibbsConfig:
    sweeps: int = 2000
    burn_in_sweeps: int = 500
    k_max_rule: str | int = "n/5"
    beta_prior: tuple[float, float] = (1.0, 1.0)
    concentration: float = 10.0

    def __post_init__(self) -> None:
        if not self.sweeps > self.burn_in_sweeps >= 0:
            raise ValueError("need sweeps > burn_in_sweeps >= 0")
        a, b = self.beta_prior
        if a <= 0 or b <= 0:
            raise ValueError("beta prior parameters must be positive")
        if self.concentration <= 0:
            raise ValueError("concentration must be positive")


def _clamped_density(g: Graph) -> tuple[float, bool]:
    if g.n < 2:
        raise ValueError("fitting needs at least two nodes")
    dyads = g.n * (g.n - 1) // 2
    edges = g.edge_count
    if edges == 0:
        return 1.0 / (2 * dyads), True
    if edges == dyads:
        return 1.0 - 1.0 / (2 * dyads), True
    return edges / dyads, False


def fit_bernoulli(g: Graph) -> FittedParams:
    """Maximum-likelihood tie log-odds; empty and complete graphs are pulled in by half a dyad."""
    p, clamped = _clamped_density(g)
    return FittedParams(Family.BERNOULLI, {"p": p, "theta_edge": logit(p)},
                        {"n": g.n, "edges": g.edge_count, "clamped": clamped})


def fit_offset_bernoulli(g: Graph) -> FittedParams:
    p, clamped = _clamped_density(g)
    return FittedParams(Family.OFFSET_BERNOULLI, {"theta_deg": logit(p) + math.log(g.n)},
                        {"n": g.n, "edges": g.edge_count, "clamped": clamped})


class _Collapsed:
    """Beta-Bernoulli marginal likelihood over (within, between) dyad totals."""

    def __init__(self, n_edges: int, n_dyads: int, a: float, b: float):
        from math import lgamma

        x = np.arange(n_dyads + 1)
        self.la = np.array([lgamma(a + v) for v in x])
        self.lb = np.array([lgamma(b + v) for v in x])
        self.lab = np.array([lgamma(a + b + v) for v in x])
        self.const = 2.0 * (lgamma(a + b) - lgamma(a) - lgamma(b))
        self.E = n_edges
        self.D = n_dyads

    def __call__(self, ew, dw):
        eb = self.E - ew
        db = self.D - dw
        return (self.la[ew] + self.lb[dw - ew] - self.lab[dw]
                + self.la[eb] + self.lb[db - eb] - self.lab[db] + self.const)


def _stick_log_prior(sizes: np.ndarray, concentration: float) -> float:
    # Truncated stick-breaking with the weights integrated out.
    from math import lgamma

    def lbeta(x: float, y: float) -> float:
        return lgamma(x) + lgamma(y) - lgamma(x + y)

    k = sizes.size
    tail = np.cumsum(sizes[::-1])[::-1]
    total = 0.0
    for j in range(k - 1):
        total += lbeta(1.0 + sizes[j], concentration + tail[j + 1]) - lbeta(1.0, concentration)
    return total


def _within_totals(adj: np.ndarray, z: np.ndarray) -> tuple[int, int]:
    same = z[:, None] == z[None, :]
    ew = int(np.triu(adj & same, 1).sum())
    sizes = np.bincount(z)
    dw = int((sizes * (sizes - 1) // 2).sum())
    return ew, dw


def hier_bernoulli_log_posterior(g: Graph, z: np.ndarray, cfg: GibbsConfig = GibbsConfig()) -> float:
    """Log p(z, y) up to a constant, with tie probabilities and block weights integrated out."""
    z = np.asarray(z, dtype=np.int64)
    k_max = block_count(g.n, cfg.k_max_rule)
    a, b = cfg.beta_prior
    dyads = g.n * (g.n - 1) // 2
    model = _Collapsed(g.edge_count, dyads, a, b)
    ew, dw = _within_totals(g.adjacency, z)
    return float(model(ew, dw)) + _stick_log_prior(np.bincount(z, minlength=k_max), cfg.concentration)


def fit_hier_bernoulli(g: Graph, cfg: GibbsConfig, rng: np.random.Generator) -> FittedParams:
    """Hierarchical Bernoulli fit by Gibbs sampling over block memberships.

    Within- and between-block tie probabilities get conjugate Beta priors and
    are integrated out of each membership update.  Block weights follow a
    stick-breaking prior truncated at ``k_max`` blocks and are resampled after
    every sweep.  Point estimates are posterior means of the two tie
    probabilities and the posterior mode of the occupied-block count.
    """
    n = g.n
    if n < 2:
        raise ValueError("fitting needs at least two nodes")
    adj = g.adjacency
    k_max = block_count(n, cfg.k_max_rule)
    a, b = cfg.beta_prior
    alpha = cfg.concentration
    dyads = n * (n - 1) // 2
    n_edges = g.edge_count
    model = _Collapsed(n_edges, dyads, a, b)
    nbrs = [np.flatnonzero(adj[i]) for i in range(n)]

    z = rng.integers(0, k_max, size=n)
    sizes = np.bincount(z, minlength=k_max)
    ew, dw = _within_totals(adj, z)
    initial_lp = hier_bernoulli_log_posterior(g, z, cfg)
    log_pi = np.full(k_max, -math.log(k_max))

    kept = cfg.sweeps - cfg.burn_in_sweeps
    ew_trace = np.empty(kept, dtype=np.int64)
    dw_trace = np.empty(kept, dtype=np.int64)
    occupancy = np.empty(cfg.sweeps, dtype=np.int64)
    best_lp, best_z = -math.inf, z.copy()

    for sweep in range(cfg.sweeps):
        u = rng.random(n)
        for i in range(n):
            zi = z[i]
            nb = np.bincount(z[nbrs[i]], minlength=k_max)
            sizes[zi] -= 1
            ew -= nb[zi]
            dw -= sizes[zi]
            logp = model(ew + nb, dw + sizes) + log_pi
            w = np.exp(logp - logp.max())
            c = np.cumsum(w)
            k = min(int(np.searchsorted(c, u[i] * c[-1], side="right")), k_max - 1)
            z[i] = k
            ew += nb[k]
            dw += sizes[k]
            sizes[k] += 1
        # Stick weights given memberships.
        if k_max > 1:
            tail = np.cumsum(sizes[::-1])[::-1]
            v = rng.beta(1.0 + sizes[:-1], alpha + tail[1:])
            v = np.clip(v, 1e-300, 1.0 - 1e-16)
            log_rest = np.concatenate(([0.0], np.cumsum(np.log1p(-v))))
            log_pi = np.concatenate((np.log(v), [0.0])) + log_rest
        occupancy[sweep] = int(np.count_nonzero(sizes))
        if sweep >= cfg.burn_in_sweeps:
            t = sweep - cfg.burn_in_sweeps
            ew_trace[t] = ew
            dw_trace[t] = dw
            lp = float(model(ew, dw)) + _stick_log_prior(sizes, alpha)
            if lp > best_lp:
                best_lp, best_z = lp, z.copy()

    p_within_draws = (a + ew_trace) / (a + b + dw_trace)
    p_btw_draws = (a + n_edges - ew_trace) / (a + b + dyads - dw_trace)
    kept_occ = occupancy[cfg.burn_in_sweeps:]
    counts = np.bincount(kept_occ)
    k_hat = int(np.argmax(counts))
    theta_draws = rng.beta(a + ew_trace, b + dw_trace - ew_trace)
    theta_draws = np.clip(theta_draws, 1e-12, 1 - 1e-12)
    theta_sd = float(np.std(np.log(theta_draws / (1 - theta_draws)), ddof=1)) if kept > 1 else 0.0
    p_within = float(p_within_draws.mean())
    values = {
        "p_within": p_within,
        "p_btw": float(p_btw_draws.mean()),
        "k": float(k_hat),
        "mu_within": logit(min(max(p_within, 1e-12), 1 - 1e-12)),
        "theta_within_sd": theta_sd,
    }
    diagnostics = {
        "n": n,
        "k_max": k_max,
        "sweeps": cfg.sweeps,
        "burn_in_sweeps": cfg.burn_in_sweeps,
        "prior": f"beta({a:g},{b:g}) collapsed; stick-breaking concentration {alpha:g}",
        "occupancy_trace": occupancy.tolist(),
        "initial_log_posterior": initial_lp,
        "map_log_posterior": best_lp,
        "map_assignment": best_z.tolist(),
    }
    return FittedParams(Family.HIER_BERNOULLI, values, diagnostics)


def fit(family: Family, g: Graph, rng: np.random.Generator | None = None,
        gibbs: GibbsConfig | None = None) -> FittedParams:
    family = Family(family)
    if family is Family.BERNOULLI:
        return fit_bernoulli(g)
    if family is Family.OFFSET_BERNOULLI:
        return fit_offset_bernoulli(g)
    if family is Family.HIER_BERNOULLI:
        if rng is None:
            raise ValueError("hier_bernoulli fitting needs a random stream")
        return fit_hier_bernoulli(g, gibbs or GibbsConfig(), rng)
    raise ValueError(f"{family.value} is not a fittable mixture-component family")
