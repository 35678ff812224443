"""Random graph generators: Bernoulli family, Markov ERGM and hierarchical block models.

All samplers take a :class:`numpy.random.Generator` and consume it in a fixed
order, so a given ``(spec, n, stream)`` always produces the same graph.
Markov ERGMs are sampled with a Metropolis tie-toggle chain driven purely by
change statistics; the normalizing constant is never evaluated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

import numpy as np

from .graph import Graph, Membership


class Family(str, Enum):
    ERDOS_RENYI = "erdos_renyi"
    BERNOULLI = "bernoulli"
    OFFSET_BERNOULLI = "offset_bernoulli"
    MARKOV_ERGM = "markov_ergm"
    HIER_BERNOULLI = "hier_bernoulli"
    HIER_MARKOV = "hier_markov"


class InitialState(str, Enum):
    EMPTY = "empty"
    BERNOULLI_MATCH = "bernoulli_match"


class ThetaDraw(str, Enum):
    """How hierarchical models obtain their within-block parameters."""

    NETWORK = "network"  # fresh draw from the normal prior for every graph
    FIXED = "fixed"  # use the prior mean exactly


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def logit(p: float) -> float:
    return math.log(p / (1.0 - p))


@dataclass(frozen=True)
class McmcConfig:
    """Tie-toggle chain settings; ``None`` selects the size-scaled defaults."""

    burn_in: int | None = None
    spacing: int | None = None
    initial_state: InitialState = InitialState.BERNOULLI_MATCH

    def __post_init__(self) -> None:
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.spacing is not None and self.spacing < 1:
            raise ValueError("spacing must be >= 1")
        object.__setattr__(self, "initial_state", InitialState(self.initial_state))

    def burn_in_for(self, n: int) -> int:
        return 20 * n * n if self.burn_in is None else self.burn_in

    def spacing_for(self, n: int) -> int:
        return max(1, n * n) if self.spacing is None else self.spacing


_REQUIRED = {
    Family.ERDOS_RENYI: (),
    Family.BERNOULLI: ("p",),
    Family.OFFSET_BERNOULLI: ("theta_deg",),
    Family.MARKOV_ERGM: ("theta_edge", "theta_2star", "theta_triangle"),
    Family.HIER_BERNOULLI: (),
    Family.HIER_MARKOV: ("mu_edge", "mu_2star", "mu_triangle"),
}


@dataclass(frozen=True)
class ModelSpec:
    """A generative family plus its named parameters.

    Hierarchical families take the between-block tie probability as ``p_btw``
    (or its log-odds ``theta_btw``).  Hierarchical Bernoulli takes the within
    log-odds mean ``mu_within`` (or ``p_within``) and its prior sd
    ``theta_within_sd``; hierarchical Markov takes ``mu_edge``, ``mu_2star``,
    ``mu_triangle`` and ``theta_sd``.  Both prior sds default to 1.
    ``k_rule`` is ``"n/5"`` or a fixed block count.
    """

    family: Family
    params: Mapping[str, float] = field(default_factory=dict)
    k_rule: str | int = "n/5"
    alpha: float = 10.0
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    theta_draw: ThetaDraw = ThetaDraw.NETWORK

    def __post_init__(self) -> None:
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "theta_draw", ThetaDraw(self.theta_draw))
        params = {k: float(v) for k, v in self.params.items()}
        object.__setattr__(self, "params", params)
        missing = [k for k in _REQUIRED[family] if k not in params]
        if missing:
            raise ValueError(f"{family.value} needs parameters {missing}")
        if family is Family.BERNOULLI and not 0.0 <= params["p"] <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if family in (Family.HIER_BERNOULLI, Family.HIER_MARKOV):
            if "p_btw" not in params and "theta_btw" not in params:
                raise ValueError(f"{family.value} needs p_btw or theta_btw")
            if family is Family.HIER_BERNOULLI and "mu_within" not in params and "p_within" not in params:
                raise ValueError("hier_bernoulli needs mu_within or p_within")
            if self.alpha <= 0:
                raise ValueError("alpha must be positive")
        if not all(math.isfinite(v) for v in params.values()):
            raise ValueError("parameters must be finite")

    @property
    def p_btw(self) -> float:
        if "p_btw" in self.params:
            return self.params["p_btw"]
        return logistic(self.params["theta_btw"])

    @property
    def mu_within(self) -> float:
        if "mu_within" in self.params:
            return self.params["mu_within"]
        return logit(self.params["p_within"])

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "params": dict(self.params),
            "k_rule": self.k_rule,
            "alpha": self.alpha,
            "theta_draw": self.theta_draw.value,
            "mcmc": {
                "burn_in": self.mcmc.burn_in,
                "spacing": self.mcmc.spacing,
                "initial_state": self.mcmc.initial_state.value,
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ModelSpec:
        mcmc = d.get("mcmc") or {}
        k_rule = d.get("k_rule", "n/5")
        if isinstance(k_rule, str) and k_rule.strip().isdigit():
            k_rule = int(k_rule)
        return cls(
            family=Family(d["family"]),
            params=dict(d.get("params", {})),
            k_rule=k_rule,
            alpha=float(d.get("alpha", 10.0)),
            mcmc=McmcConfig(
                burn_in=None if mcmc.get("burn_in") is None else int(mcmc["burn_in"]),
                spacing=None if mcmc.get("spacing") is None else int(mcmc["spacing"]),
                initial_state=InitialState(mcmc.get("initial_state", InitialState.BERNOULLI_MATCH.value)),
            ),
            theta_draw=ThetaDraw(d.get("theta_draw", ThetaDraw.NETWORK.value)),
        )


# ---------------------------------------------------------------------------
# Dyad-independent models


def _upper_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def _from_upper(n: int, present: np.ndarray) -> Graph:
    adj = np.zeros((n, n), dtype=bool)
    iu, ju = _upper_pairs(n)
    adj[iu, ju] = present
    return Graph(adj | adj.T)


def gen_bernoulli(n: int, p: float, rng: np.random.Generator) -> Graph:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return _from_upper(n, rng.random(n * (n - 1) // 2) < p)


def gen_erdos_renyi(n: int, rng: np.random.Generator) -> Graph:
    return gen_bernoulli(n, 0.5, rng)


def offset_tie_probability(n: int, theta_deg: float) -> float:
    """Tie probability with log-odds ``theta_deg + log(1/n)``."""
    return logistic(theta_deg - math.log(n))


def gen_offset_bernoulli(n: int, theta_deg: float, rng: np.random.Generator) -> Graph:
    return gen_bernoulli(n, offset_tie_probability(n, theta_deg), rng)


# ---------------------------------------------------------------------------
# Markov ERGM


def ergm_change_stats(g: Graph, i: int, j: int) -> tuple[int, int, int]:
    """Signed change in (edges, 2-stars, triangles) from toggling dyad ``{i, j}``."""
    if i == j:
        raise ValueError("a dyad needs two distinct nodes")
    adj = g.adjacency
    common = int(np.count_nonzero(adj[i] & adj[j]))
    di, dj = int(adj[i].sum()), int(adj[j].sum())
    if adj[i, j]:
        return -1, -((di - 1) + (dj - 1)), -common
    return 1, di + dj, common


def _rows_from_adjacency(adj: np.ndarray) -> list[int]:
    rows = []
    for r in adj:
        packed = np.packbits(r, bitorder="little").tobytes()
        rows.append(int.from_bytes(packed, "little"))
    return rows


def _adjacency_from_rows(rows: Sequence[int], n: int) -> np.ndarray:
    nbytes = (n + 7) // 8
    buf = b"".join(r.to_bytes(nbytes, "little") for r in rows)
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little")
    return bits.reshape(n, nbytes * 8)[:, :n].astype(bool)


_CHUNK = 1 << 16


def _toggle_chain(
    rows: list[int], deg: list[int], n: int, theta: Sequence[float], steps: int, rng: np.random.Generator
) -> int:
    """Run ``steps`` Metropolis proposals in place; return the number accepted."""
    te, ts, tt = (float(t) for t in theta)
    iu, ju = _upper_pairs(n)
    n_pairs = iu.size
    if n_pairs == 0 or steps == 0:
        return 0
    accepted = 0
    remaining = steps
    while remaining:
        m = min(remaining, _CHUNK)
        remaining -= m
        picks = rng.integers(0, n_pairs, size=m)
        pi = iu[picks].tolist()
        pj = ju[picks].tolist()
        with np.errstate(divide="ignore"):
            logu = np.log(rng.random(m)).tolist()
        for i, j, lu in zip(pi, pj, logu):
            ri = rows[i]
            rj = rows[j]
            common = (ri & rj).bit_count()
            if (ri >> j) & 1:
                delta = -(te + ts * (deg[i] + deg[j] - 2) + tt * common)
                if delta >= 0.0 or lu < delta:
                    rows[i] = ri ^ (1 << j)
                    rows[j] = rj ^ (1 << i)
                    deg[i] -= 1
                    deg[j] -= 1
                    accepted += 1
            else:
                delta = te + ts * (deg[i] + deg[j]) + tt * common
                if delta >= 0.0 or lu < delta:
                    rows[i] = ri | (1 << j)
                    rows[j] = rj | (1 << i)
                    deg[i] += 1
                    deg[j] += 1
                    accepted += 1
    return accepted


def _initial_rows(n: int, theta_edge: float, cfg: McmcConfig, rng: np.random.Generator) -> list[int]:
    if cfg.initial_state is InitialState.EMPTY:
        return [0] * n
    return _rows_from_adjacency(gen_bernoulli(n, logistic(theta_edge), rng).adjacency)


def markov_ergm_chain(
    n: int,
    theta: Sequence[float],
    n_draws: int,
    rng: np.random.Generator,
    cfg: McmcConfig | None = None,
) -> list[Graph]:
    """``n_draws`` states of one chain: first after burn-in, then every ``spacing`` proposals."""
    if len(theta) != 3:
        raise ValueError("theta must be (edge, 2-star, triangle)")
    if not all(math.isfinite(t) for t in theta):
        raise ValueError("theta must be finite")
    cfg = cfg or McmcConfig()
    rows = _initial_rows(n, theta[0], cfg, rng)
    deg = [r.bit_count() for r in rows]
    draws = []
    _toggle_chain(rows, deg, n, theta, cfg.burn_in_for(n), rng)
    for k in range(n_draws):
        if k:
            _toggle_chain(rows, deg, n, theta, cfg.spacing_for(n), rng)
        draws.append(Graph(_adjacency_from_rows(rows, n)))
    return draws


def gen_markov_ergm(
    n: int, theta: Sequence[float], rng: np.random.Generator, cfg: McmcConfig | None = None
) -> Graph:
    return markov_ergm_chain(n, theta, 1, rng, cfg)[0]


# ---------------------------------------------------------------------------
# Hierarchical models


def block_count(n: int, k_rule: str | int = "n/5") -> int:
    if isinstance(k_rule, int):
        if k_rule < 1:
            raise ValueError("a fixed block count must be >= 1")
        return k_rule
    if k_rule.replace(" ", "") != "n/5":
        raise ValueError(f"unknown k_rule {k_rule!r}")
    return max(1, math.floor(n / 5 + 0.5))


def sample_membership(n: int, k: int, alpha: float, rng: np.random.Generator) -> Membership:
    """Draw block weights from a symmetric Dirichlet(alpha), then i.i.d. node labels."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if k == 1:
        return Membership(np.zeros(n, dtype=np.int64), 1)
    pi = rng.dirichlet(np.full(k, float(alpha)))
    return Membership(rng.choice(k, size=n, p=pi), k)


def _between_block_edges(n: int, same: np.ndarray, p_btw: float, rng: np.random.Generator) -> np.ndarray:
    iu, ju = _upper_pairs(n)
    u = rng.random(iu.size)
    adj = np.zeros((n, n), dtype=bool)
    btw = ~same[iu, ju]
    adj[iu[btw], ju[btw]] = u[btw] < p_btw
    return adj


def gen_hier_bernoulli(
    n: int, spec: ModelSpec, rng: np.random.Generator, membership: Membership | None = None
) -> Graph:
    """Hierarchical Bernoulli graph.

    Draws a membership (unless one is supplied), a within-block log-odds from
    ``Normal(mu_within, theta_within_sd**2)``, then independent within-block
    ties at ``logistic(theta_W)`` and between-block ties at ``p_btw``.
    """
    if spec.family is not Family.HIER_BERNOULLI:
        raise ValueError("model is not hier_bernoulli")
    if membership is None:
        membership = sample_membership(n, block_count(n, spec.k_rule), spec.alpha, rng)
    mu = spec.mu_within
    if spec.theta_draw is ThetaDraw.NETWORK:
        theta_w = rng.normal(mu, spec.params.get("theta_within_sd", 1.0))
    else:
        theta_w = mu
    p_within = logistic(theta_w)
    same = membership.same_block()
    iu, ju = _upper_pairs(n)
    u = rng.random(iu.size)
    p = np.where(same[iu, ju], p_within, spec.p_btw)
    adj = np.zeros((n, n), dtype=bool)
    adj[iu, ju] = u < p
    return Graph(adj | adj.T)


def gen_hier_markov(
    n: int, spec: ModelSpec, rng: np.random.Generator, membership: Membership | None = None
) -> Graph:
    if spec.family is not Family.HIER_MARKOV:
        raise ValueError("model is not hier_markov")
    if membership is None:
        membership = sample_membership(n, block_count(n, spec.k_rule), spec.alpha, rng)
    mu = np.array([spec.params["mu_edge"], spec.params["mu_2star"], spec.params["mu_triangle"]])
    if spec.theta_draw is ThetaDraw.NETWORK:
        theta_w = rng.normal(mu, spec.params.get("theta_sd", 1.0))
    else:
        theta_w = mu
    adj = _between_block_edges(n, membership.same_block(), spec.p_btw, rng)
    adj = adj | adj.T
    for members in membership.blocks():
        if members.size < 2:
            continue
        block = gen_markov_ergm(members.size, theta_w.tolist(), rng, spec.mcmc)
        adj[np.ix_(members, members)] = block.adjacency
    return Graph(adj)


def simulate(spec: ModelSpec, n: int, rng: np.random.Generator) -> Graph:
    """One draw of size ``n`` from any family."""
    f = spec.family
    if f is Family.ERDOS_RENYI:
        return gen_erdos_renyi(n, rng)
    if f is Family.BERNOULLI:
        return gen_bernoulli(n, spec.params["p"], rng)
    if f is Family.OFFSET_BERNOULLI:
        return gen_offset_bernoulli(n, spec.params["theta_deg"], rng)
    if f is Family.MARKOV_ERGM:
        theta = (spec.params["theta_edge"], spec.params["theta_2star"], spec.params["theta_triangle"])
        return gen_markov_ergm(n, theta, rng, spec.mcmc)
    if f is Family.HIER_BERNOULLI:
        return gen_hier_bernoulli(n, spec, rng)
    return gen_hier_markov(n, spec, rng)


MARKOV_THETA = (-1.55, -0.05, 0.25)


def study_models() -> dict[str, ModelSpec]:
    """The six simulated datasets of the size-dependence study."""
    te, ts, tt = MARKOV_THETA
    return {
        "erdos_renyi": ModelSpec(Family.ERDOS_RENYI),
        "bernoulli": ModelSpec(Family.BERNOULLI, {"p": 0.20}),
        "offset_bernoulli": ModelSpec(Family.OFFSET_BERNOULLI, {"theta_deg": math.log(3.0)}),
        "markov": ModelSpec(Family.MARKOV_ERGM, {"theta_edge": te, "theta_2star": ts, "theta_triangle": tt}),
        "hier_bernoulli": ModelSpec(Family.HIER_BERNOULLI, {"mu_within": logit(0.20), "p_btw": 0.10}),
        "hier_markov": ModelSpec(
            Family.HIER_MARKOV, {"mu_edge": te, "mu_2star": ts, "mu_triangle": tt, "p_btw": 0.25}
        ),
    }
