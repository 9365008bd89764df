"""Tier-2 intensity planning.

The tier-2 interference transform is a product of negative exponentials
in the cell intensities, so every outage cap becomes one linear
constraint on mu: the tier-1 cap for UE type j reads
``sum_i A_ij mu_i <= B_j`` with ``A_ij = C_i(T/P_j)`` and
``B_j = -log((1-target_j) / L_I1(T/P_j))``; tier-2 caps follow the same
pattern with the placement-averaged tier-1 term and the intra-cell term
moved into B.  Operator income ``sum_i U_i(mu_i)`` with concave
nondecreasing U is then maximised over the resulting polytope by a
log-barrier Newton method (deterministic, no external solver), with a
lexicographic LP polish when affine utilities allow ties.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .analytic import (
    coeff_C,
    _effective,
    laplace_tier2_intra,
    tier1_placement_average,
    tier1_total_laplace,
)
from .model import NetworkConfig
from .quadrature import DEFAULT_SPEC, QuadratureSpec


class InfeasibleError(ValueError):
    """A target outage cap cannot be met even with no tier-2 deployment."""


class UnboundedError(ValueError):
    """No constraint limits a strictly profitable intensity."""


@dataclass(frozen=True)
class UtilitySpec:
    """Operator income per BS type: a*ln(1 + b*mu) or the affine a*mu."""

    kind: str          # "log" | "affine"
    a: float
    b: float = 0.0

    @staticmethod
    def scaled_log(a: float, b: float) -> "UtilitySpec":
        return UtilitySpec("log", a, b)

    @staticmethod
    def affine(c: float) -> "UtilitySpec":
        return UtilitySpec("affine", c)

    def __post_init__(self):
        if self.kind not in ("log", "affine"):
            raise ValueError(f"unknown utility kind {self.kind!r}")
        if self.a < 0 or self.b < 0:
            raise ValueError("utility coefficients must be nonnegative")

    def value(self, mu: float) -> float:
        if self.kind == "log":
            return self.a * math.log1p(self.b * mu)
        return self.a * mu

    def grad(self, mu: float) -> float:
        if self.kind == "log":
            return self.a * self.b / (1.0 + self.b * mu)
        return self.a

    def hess(self, mu: float) -> float:
        if self.kind == "log":
            return -self.a * self.b**2 / (1.0 + self.b * mu) ** 2
        return 0.0

    @property
    def strictly_increasing(self) -> bool:
        return self.a > 0 and (self.kind == "affine" or self.b > 0)


@dataclass(frozen=True)
class TradeoffSystem:
    """Linear intensity-tradeoff coefficients of the planning problem."""

    a_tier1: np.ndarray        # (N, M): A[i, j] = C_i(T/P_j)
    b_tier1: np.ndarray        # (M,)
    a_tier2: np.ndarray        # (N, N, K): A'[i, l, k] = C_i(T/Q_lk)
    b_tier2: np.ndarray        # (N, K); +inf marks "no cap"
    sir_threshold: float
    infeasible_at_zero: tuple  # labels of constraints violated at mu = 0

    @property
    def n_types(self) -> int:
        return self.a_tier1.shape[0]

    def stacked(self):
        """(G, h, labels) with one row per finite constraint: G mu <= h."""
        rows, bounds, labels = [], [], []
        for j in range(self.a_tier1.shape[1]):
            if math.isfinite(self.b_tier1[j]):
                rows.append(self.a_tier1[:, j])
                bounds.append(self.b_tier1[j])
                labels.append(f"tier1[{j}]")
        n, _, kmax = self.a_tier2.shape
        for l in range(n):
            for k in range(kmax):
                if math.isfinite(self.b_tier2[l, k]):
                    rows.append(self.a_tier2[:, l, k])
                    bounds.append(self.b_tier2[l, k])
                    labels.append(f"tier2[{l},{k}]")
        if rows:
            return np.array(rows), np.array(bounds), labels
        return np.zeros((0, self.n_types)), np.zeros(0), labels


def build_tradeoff(config: NetworkConfig, sir_threshold: float,
                   targets_tier1, targets_tier2=None,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> TradeoffSystem:
    """Convert outage caps into the linear system A mu <= B.

    ``targets_tier1[j]`` caps type-j tier-1 outage; ``targets_tier2[l][k]``
    caps class-k outage in type-l cells (None, or a 1.0 entry, means no
    cap).  Exclusion regions break the mu-independent factorisation and
    are rejected.
    """
    if config.exclusion.mode != "none":
        raise ValueError("the linear tradeoff requires a config without "
                         "exclusion regions")
    cfg = _effective(config)
    T = float(sir_threshold)
    M, N = len(cfg.tier1), len(cfg.tier2)
    kmax = max((len(bs.ue_classes) for bs in cfg.tier2), default=0)

    targets_tier1 = list(targets_tier1)
    if len(targets_tier1) != M:
        raise ValueError("need one tier-1 target per UE type")

    a1 = np.zeros((N, M))
    b1 = np.zeros(M)
    l_i1 = tier1_total_laplace(cfg, spec)
    infeasible = []
    for j, t1 in enumerate(cfg.tier1):
        s = T / t1.target_power
        for i in range(N):
            a1[i, j] = coeff_C(cfg, i, s, spec=spec)
        tgt = targets_tier1[j]
        if tgt >= 1.0:
            b1[j] = math.inf
        else:
            b1[j] = -math.log((1.0 - tgt) / l_i1(s))
            if b1[j] < -1e-12:
                infeasible.append(f"tier1[{j}]")

    a2 = np.zeros((N, N, kmax))
    b2 = np.full((N, kmax), math.inf)
    lbar1 = tier1_placement_average(cfg, spec)
    for l, bs in enumerate(cfg.tier2):
        intra = laplace_tier2_intra(cfg, l, spec=spec)
        for k, cls in enumerate(bs.ue_classes):
            s = T / cls.target_power
            for i in range(N):
                a2[i, l, k] = coeff_C(cfg, i, s, spec=spec)
            tgt = 1.0 if targets_tier2 is None else targets_tier2[l][k]
            if tgt >= 1.0:
                continue
            mu_free = lbar1(s) * (intra(s) if not cfg.drop_tier2_intracell else 1.0)
            b2[l, k] = -math.log((1.0 - tgt) / mu_free)
            if b2[l, k] < -1e-12:
                infeasible.append(f"tier2[{l},{k}]")

    return TradeoffSystem(a1, b1, a2, b2, T, tuple(infeasible))


@dataclass(frozen=True)
class PlanResult:
    mu: np.ndarray
    utility: float
    active: tuple               # labels of binding constraints
    multipliers: np.ndarray     # one per stacked constraint row
    kkt_stationarity: float
    kkt_feasibility: float
    kkt_complementarity: float


def _barrier_newton(G, h, utilities, t, mu):
    """Inner Newton loop for min -t*sum U + barrier, feasible start."""
    n = len(mu)
    for _ in range(200):
        slack = h - G @ mu
        grad = -t * np.array([u.grad(m) for u, m in zip(utilities, mu)])
        grad += G.T @ (1.0 / slack) if len(h) else 0.0
        grad -= 1.0 / mu
        H = np.diag(-t * np.array([u.hess(m) for u, m in zip(utilities, mu)])
                    + 1.0 / mu**2)
        if len(h):
            H += (G.T / slack**2) @ G
        try:
            step = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            step = -grad / np.diag(H)
        decrement = float(-grad @ step)
        if decrement / 2.0 < 1e-16:
            return mu
        # near the optimum the objective change is below fp resolution of the
        # (huge) barrier value, so only feasibility is checked there
        check_value = decrement > 1e-8
        alpha = 1.0
        while True:
            cand = mu + alpha * step
            if np.all(cand > 0) and (not len(h) or np.all(G @ cand < h)):
                if not check_value:
                    break
                val0 = (-t * sum(u.value(m) for u, m in zip(utilities, mu))
                        - np.log(slack).sum() - np.log(mu).sum())
                val1 = (-t * sum(u.value(m) for u, m in zip(utilities, cand))
                        - np.log(h - G @ cand).sum() - np.log(cand).sum())
                if val1 <= val0 - 0.25 * alpha * decrement:
                    break
            alpha *= 0.5
            if alpha < 1e-14:
                return mu
        mu = mu + alpha * step
    return mu


def _lexicographic_polish(G, h, utilities, mu, tol=1e-9):
    """Among optimal points (possible with affine utilities), return the
    lexicographically smallest mu, holding strictly-concave coordinates."""
    affine = [i for i, u in enumerate(utilities) if u.kind == "affine"]
    if not affine:
        return mu
    from scipy.optimize import linprog

    n = len(mu)
    fixed_mask = np.ones(n, dtype=bool)
    fixed_mask[affine] = False
    c_aff = np.array([utilities[i].a for i in affine])
    base = mu.copy()
    # restrict to the affine coordinates; keep total affine income optimal
    G_aff = G[:, affine] if len(h) else np.zeros((0, len(affine)))
    h_res = h - (G[:, fixed_mask] @ mu[fixed_mask]) if len(h) else h
    best_val = float(c_aff @ mu[affine])
    rows = [-c_aff]
    rhs = [-(best_val - tol)]
    if len(h):
        rows = [G_aff] + rows
        rhs = [h_res] + rhs
        A_ub = np.vstack(rows)
        b_ub = np.concatenate([np.atleast_1d(r) for r in rhs])
    else:
        A_ub = np.atleast_2d(rows[0])
        b_ub = np.atleast_1d(rhs[0])
    sol = mu[affine].copy()
    for pos in range(len(affine)):
        obj = np.zeros(len(affine))
        obj[pos] = 1.0
        eqs = np.zeros((pos, len(affine)))
        for p in range(pos):
            eqs[p, p] = 1.0
        res = linprog(obj, A_ub=A_ub, b_ub=b_ub,
                      A_eq=eqs if pos else None,
                      b_eq=sol[:pos] if pos else None,
                      bounds=[(0, None)] * len(affine), method="highs")
        if res.status == 0:
            sol[pos] = max(res.x[pos], 0.0)
        else:
            break
    base[affine] = sol
    return base


def solve(system: TradeoffSystem, utilities) -> PlanResult:
    """Maximise total income subject to the linear intensity tradeoff."""
    n = system.n_types
    utilities = list(utilities)
    if len(utilities) != n:
        raise ValueError("need one utility per tier-2 BS type")
    if system.infeasible_at_zero:
        raise InfeasibleError(
            "outage caps unreachable even with no tier-2 deployment: "
            + ", ".join(system.infeasible_at_zero))
    G, h, labels = system.stacked()

    # variables pinned to zero by zero-slack constraints
    fixed_zero = np.zeros(n, dtype=bool)
    changed = True
    while changed:
        changed = False
        for r in range(len(h)):
            if h[r] - G[r] @ (np.zeros(n)) <= 1e-12:
                for i in range(n):
                    if G[r, i] > 0 and not fixed_zero[i]:
                        fixed_zero[i] = True
                        changed = True
    free = ~fixed_zero
    for i in np.nonzero(free)[0]:
        col = G[:, i] if len(h) else np.zeros(0)
        if (not len(h) or np.all(col <= 0)) and utilities[i].strictly_increasing:
            raise UnboundedError(
                f"mu[{i}] is unconstrained but strictly profitable")
        if not utilities[i].strictly_increasing and (
                not len(h) or np.all(col <= 0)):
            # indifferent and unconstrained: lexicographic choice is 0
            free[i] = False
            fixed_zero[i] = True

    mu = np.zeros(n)
    if free.any():
        Gf = G[:, free] if len(h) else np.zeros((0, int(free.sum())))
        uf = [u for u, fl in zip(utilities, free) if fl]
        nf = int(free.sum())
        rowsum = Gf @ np.ones(nf) if len(h) else np.zeros(0)
        eps = 1.0
        for r in range(len(h)):
            if rowsum[r] > 0:
                eps = min(eps, 0.5 * h[r] / rowsum[r])
        x = np.full(nf, max(eps, 1e-9))
        m_total = len(h) + nf
        t = 1.0
        while m_total / t > 1e-9:
            x = _barrier_newton(Gf, h, uf, t, x)
            t *= 10.0
        x = _barrier_newton(Gf, h, uf, t, x)
        x = _lexicographic_polish(Gf, h, uf, x, tol=1e-9)
        mu[free] = x
    else:
        t = 1e12

    slack = h - G @ mu if len(h) else np.zeros(0)
    grad_u = np.array([u.grad(m) for u, m in zip(utilities, mu)])
    # certify with least-squares multipliers on the active set (the raw
    # barrier multipliers 1/(t*slack) carry O(1/sqrt(t)) stationarity noise)
    lam = np.zeros(len(h))
    act_rows = np.nonzero(slack <= 1e-8 * np.maximum(1.0, np.abs(h)))[0] \
        if len(h) else np.array([], dtype=int)
    loose_mu = mu > 1e-10
    if act_rows.size and loose_mu.any():
        from scipy.optimize import nnls

        lam_act, _ = nnls(G[np.ix_(act_rows, np.nonzero(loose_mu)[0])].T,
                          grad_u[loose_mu])
        lam[act_rows] = lam_act
    eta = np.maximum((G.T @ lam if len(h) else 0.0) - grad_u, 0.0)
    eta[loose_mu] = 0.0
    stationarity = grad_u - (G.T @ lam if len(h) else 0.0) + eta
    kkt_stat = float(np.max(np.abs(stationarity))) if n else 0.0
    kkt_feas = float(max(np.max(G @ mu - h, initial=0.0), np.max(-mu, initial=0.0))) \
        if len(h) else float(np.max(-mu, initial=0.0))
    kkt_comp = float(np.max(lam * slack, initial=0.0)) if len(h) else 0.0
    active = tuple(labels[r] for r in range(len(h))
                   if slack[r] <= 1e-6 * max(1.0, abs(h[r])))
    utility = float(sum(u.value(m) for u, m in zip(utilities, mu)))
    return PlanResult(mu, utility, active, lam, kkt_stat, kkt_feas, kkt_comp)


def max_mu2_given_mu1(system: TradeoffSystem, mu1_grid) -> np.ndarray:
    """Feasibility frontier: the largest mu_2 for each mu_1 (N = 2 only)."""
    if system.n_types != 2:
        raise ValueError("the frontier needs exactly two tier-2 types")
    G, h, _ = system.stacked()
    out = np.empty(len(mu1_grid))
    for m, mu1 in enumerate(mu1_grid):
        best = math.inf
        feasible = True
        for r in range(len(h)):
            rem = h[r] - G[r, 0] * mu1
            if G[r, 1] > 0:
                best = min(best, rem / G[r, 1])
            elif rem < 0:
                feasible = False
        out[m] = max(best, 0.0) if feasible else 0.0
        if not math.isfinite(out[m]):
            out[m] = math.inf
    return out


# --------------------------------------------------------------------------
# emitters

def system_to_csv(system: TradeoffSystem) -> str:
    buf = io.StringIO()
    n = system.n_types
    head = ",".join(f"coef_mu{i + 1}" for i in range(n))
    buf.write(f"# twotier tradeoff v1, T={system.sir_threshold}\n")
    buf.write(f"constraint,{head},bound\n")
    G, h, labels = system.stacked()
    for r, label in enumerate(labels):
        coefs = ",".join(repr(float(c)) for c in G[r])
        buf.write(f"{label},{coefs},{h[r]!r}\n")
    return buf.getvalue()


def solution_report(result: PlanResult, system: TradeoffSystem) -> str:
    lines = ["intensity plan"]
    for i, m in enumerate(result.mu):
        lines.append(f"  mu[{i}] = {m:.6f} /km^2")
    lines.append(f"  total income U = {result.utility:.6f}")
    if result.active:
        lines.append("  binding constraints: " + ", ".join(result.active))
    else:
        lines.append("  no constraint binds (caps are loose)")
    lines.append(
        "  KKT residuals: stationarity %.2e, feasibility %.2e, "
        "complementarity %.2e" % (result.kkt_stationarity,
                                  result.kkt_feasibility,
                                  result.kkt_complementarity))
    return "\n".join(lines) + "\n"
