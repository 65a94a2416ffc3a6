"""The iterative algorithms behind one stepping interface.

Solvers expose ``step() -> StepResult`` where the result carries the
iterates to feed the averaging accumulators (half-step iterates for the
extragradient family, the played strategies for the regret and mirror
methods) plus an optional epoch index for epoch-weighted averaging. Every
solver tracks its cumulative cost in sampled-evaluation units.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from . import sets
from .averaging import AveragingAccumulator
from .metrics import GapTrace, duality_gap_at, natural_residual, dist_theta
from .oracles import (CostModel, SnapshotCache, default_components, oracle_for,
                      variance_reduced_estimate)
from .rng import StableRng

StepResult = namedtuple("StepResult", ["iterates", "epoch"])


class NumericalDivergence(RuntimeError):
    """Raised when an iterate or operator value turns non-finite."""

    def __init__(self, algorithm, iteration):
        super().__init__(f"non-finite value in {algorithm} at iteration {iteration}")
        self.algorithm = algorithm
        self.iteration = iteration


@dataclass(frozen=True)
class SvrgParams:
    """Parameters of the variance-reduced extragradient solvers.

    The step size is tau_scale * gamma * sqrt(1 - alpha) / L; at the default
    tau_scale = 1 this is the theoretically safe step. L is the mean-square
    Lipschitz constant of the oracle (the Frobenius norm of the payoff for
    sampled games). K is the inner-loop length of the double-loop variant.
    """

    p: float
    alpha: float
    gamma: float
    L: float
    tau_scale: float = 1.0
    K: int | None = None

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError("snapshot probability p must lie in (0, 1]")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.L <= 0.0:
            raise ValueError("L must be positive")
        if self.tau_scale <= 0.0:
            raise ValueError("tau_scale must be positive")
        if self.K is not None and self.K < 1:
            raise ValueError("inner length K must be at least 1")

    @property
    def tau(self):
        return self.tau_scale * self.gamma * np.sqrt(1.0 - self.alpha) / self.L

    @classmethod
    def suggested(cls, N, L, tau_scale=1.0, gamma=0.99, p=None, alpha=None):
        """p = 2/N, alpha = 1 - 2/N, K = N/2 (clamped to valid ranges)."""
        N = int(N)
        p = min(1.0, 2.0 / N) if p is None else p
        alpha = max(0.0, 1.0 - 2.0 / N) if alpha is None else alpha
        return cls(p=p, alpha=alpha, gamma=gamma, L=L, tau_scale=tau_scale,
                   K=max(1, N // 2))


class _SolverBase:
    name = "?"

    def __init__(self, problem, cost, seed=0, z0=None):
        self.problem = problem
        self.cost = cost
        self.rng = StableRng(seed)
        start = problem.set.center() if z0 is None else np.asarray(z0, dtype=np.float64)
        self.z = problem.set.project(start)
        self.evals = 0
        self.iteration = 0

    @property
    def theta(self):
        return 1.0

    @property
    def w_point(self):
        return self.z

    def _proj(self, v):
        if not np.all(np.isfinite(v)):
            raise NumericalDivergence(self.name, self.iteration)
        return self.problem.set.project(v)

    def step(self):
        raise NotImplementedError


class LooplessSvrgEG(_SolverBase):
    """Variance-reduced extragradient with Bernoulli snapshot refreshes.

    One iteration: anchor zbar = alpha z + (1 - alpha) w, take the half step
    with the cached full operator at w (already paid for), form the
    variance-reduced estimate at the half point on one fresh sample, take the
    full step, then refresh the snapshot with probability p. The snapshot
    coin is drawn after the sample index so runs are reproducible.
    """

    name = "svrg-eg"

    def __init__(self, problem, params, cost, seed=0, z0=None, oracle=None):
        super().__init__(problem, cost, seed, z0)
        self.params = params
        self.oracle = oracle_for(problem) if oracle is None else oracle
        self.cache = SnapshotCache.at(problem, self.z)
        self.evals += cost.N  # full operator at the initial snapshot

    @property
    def theta(self):
        a, p = self.params.alpha, self.params.p
        return a / (a + (1.0 - a) / p)

    @property
    def w_point(self):
        return self.cache.w

    @property
    def tau(self):
        return self.params.tau

    def step(self):
        prm = self.params
        zbar = prm.alpha * self.z + (1.0 - prm.alpha) * self.cache.w
        z_half = self._proj(zbar - prm.tau * self.cache.Fw)
        sample = self.oracle.draw(self.rng)
        fhat = variance_reduced_estimate(self.oracle, self.cache, sample, z_half)
        self.z = self._proj(zbar - prm.tau * fhat)
        updated = bool(self.rng.uniform() < prm.p)
        if updated:
            self.cache = SnapshotCache.at(self.problem, self.z)
        self.evals += self.cost.charge(self.name, snapshot_updated=updated)
        self.iteration += 1
        return StepResult([z_half], None)


class DoubleLoopSvrgEG(_SolverBase):
    """Epoch-structured variance reduction: K inner extragradient steps
    against a fixed snapshot, then the snapshot moves to the average of the
    K inner iterates and the full operator is recomputed there."""

    name = "dl-svrg-eg"

    def __init__(self, problem, params, cost, seed=0, z0=None, oracle=None):
        super().__init__(problem, cost, seed, z0)
        if params.K is None:
            raise ValueError("double-loop solver needs the inner length K")
        self.params = params
        self.oracle = oracle_for(problem) if oracle is None else oracle
        self.cache = SnapshotCache.at(problem, self.z)
        self.evals += cost.N
        self.epoch = 0

    @property
    def theta(self):
        a, K = self.params.alpha, self.params.K
        return a / (a + K * (1.0 - a))

    @property
    def w_point(self):
        return self.cache.w

    @property
    def tau(self):
        return self.params.tau

    def step(self):
        prm = self.params
        halves = []
        inner_sum = np.zeros_like(self.z)
        for _ in range(prm.K):
            zbar = prm.alpha * self.z + (1.0 - prm.alpha) * self.cache.w
            z_half = self._proj(zbar - prm.tau * self.cache.Fw)
            sample = self.oracle.draw(self.rng)
            fhat = variance_reduced_estimate(self.oracle, self.cache, sample, z_half)
            self.z = self._proj(zbar - prm.tau * fhat)
            halves.append(z_half)
            inner_sum += self.z
            self.iteration += 1
        self.cache = SnapshotCache.at(self.problem, inner_sum / prm.K)
        self.evals += self.cost.charge(self.name, K=prm.K)
        this_epoch = self.epoch
        self.epoch += 1
        return StepResult(halves, this_epoch)


class Extragradient(_SolverBase):
    """Two projected steps per iteration with the fresh full operator."""

    name = "eg"

    def __init__(self, problem, tau, cost, seed=0, z0=None):
        super().__init__(problem, cost, seed, z0)
        self.tau = float(tau)

    def step(self):
        z_half = self._proj(self.z - self.tau * self.problem.operator(self.z))
        self.z = self._proj(self.z - self.tau * self.problem.operator(z_half))
        self.evals += self.cost.charge(self.name)
        self.iteration += 1
        return StepResult([z_half], None)


class PrimalDual(_SolverBase):
    """Primal-dual splitting with primal extrapolation parameter 1 and equal
    step sizes on both sides."""

    name = "pda"

    def __init__(self, problem, tau, cost, seed=0, z0=None):
        if problem.structure is None:
            raise ValueError("the primal-dual solver needs a bilinear problem")
        super().__init__(problem, cost, seed, z0)
        self.tau = float(tau)
        self.primal_set, self.dual_set = problem.set.parts
        self.x, self.y = (b.copy() for b in problem.split(self.z))
        self.x_bar = self.x.copy()

    def _guard(self, v):
        if not np.all(np.isfinite(v)):
            raise NumericalDivergence(self.name, self.iteration)
        return v

    def step(self):
        s = self.problem.structure
        self.y = self.dual_set.project(self._guard(self.y + self.tau * (s.A.T @ self.x_bar + s.by)))
        x_new = self.primal_set.project(self._guard(self.x - self.tau * (s.A @ self.y + s.bx)))
        self.x_bar = 2.0 * x_new - self.x
        self.x = x_new
        self.z = np.concatenate([self.x, self.y])
        self.evals += self.cost.charge(self.name)
        self.iteration += 1
        return StepResult([self.z.copy()], None)


class OptimisticMDL2(_SolverBase):
    """Optimistic mirror descent in the Euclidean geometry, one operator
    evaluation per iteration: the played point uses the previous operator
    value as prediction, the ledger point uses the fresh one."""

    name = "oomd-l2"

    def __init__(self, problem, eta, cost, seed=0, z0=None):
        super().__init__(problem, cost, seed, z0)
        self.eta = float(eta)
        self.tau = self.eta
        self.ledger = self.z.copy()
        self.g_prev = problem.operator(self.z)
        self.evals += cost.N  # prediction for the first step

    def step(self):
        self.z = self._proj(self.ledger - self.eta * self.g_prev)
        g = self.problem.operator(self.z)
        self.ledger = self._proj(self.ledger - self.eta * g)
        self.g_prev = g
        self.evals += self.cost.charge(self.name)
        self.iteration += 1
        return StepResult([self.z.copy()], None)


def _simplex_slices(feasible):
    """Slices of the independent simplex blocks, or None when the set has
    any non-simplex part."""
    if isinstance(feasible, sets.Simplex):
        return [slice(0, feasible.dim)]
    if isinstance(feasible, sets.SimplexProduct):
        offs = feasible._offsets
        return [slice(int(offs[i]), int(offs[i + 1])) for i in range(len(feasible.block_dims))]
    if isinstance(feasible, sets.Product):
        out, base = [], 0
        for part in feasible.parts:
            inner = _simplex_slices(part)
            if inner is None:
                return None
            out.extend(slice(base + s.start, base + s.stop) for s in inner)
            base += part.dim
        return out
    return None


class OptimisticMDEntropy(_SolverBase):
    """Optimistic mirror descent with the entropy mirror map on every
    simplex block (multiplicative updates). Strategies are floored at
    1e-300 before logarithms so boundary points never produce -inf."""

    name = "oomd-entropy"

    def __init__(self, problem, eta, cost, seed=0, z0=None):
        super().__init__(problem, cost, seed, z0)
        self.blocks = _simplex_slices(problem.set)
        if self.blocks is None:
            raise ValueError("entropy mirror descent needs simplex strategy sets")
        self.eta = float(eta)
        self.tau = self.eta
        self.ledger = self.z.copy()
        self.g_prev = problem.operator(self.z)
        self.evals += cost.N

    def _mirror(self, base, g):
        out = np.empty_like(base)
        for sl in self.blocks:
            u = np.log(np.maximum(base[sl], 1e-300)) - self.eta * g[sl]
            u -= u.max()
            e = np.exp(u)
            out[sl] = e / e.sum()
        if not np.all(np.isfinite(out)):
            raise NumericalDivergence(self.name, self.iteration)
        return out

    def step(self):
        self.z = self._mirror(self.ledger, self.g_prev)
        g = self.problem.operator(self.z)
        self.ledger = self._mirror(self.ledger, g)
        self.g_prev = g
        self.evals += self.cost.charge(self.name)
        self.iteration += 1
        return StepResult([self.z.copy()], None)


class RegretMatchingPlus(_SolverBase):
    """Regret matching with nonnegative clipped regrets and alternation:
    the maximizer responds to the already-updated minimizer strategy. A
    block with zero accumulated regret keeps its current strategy."""

    name = "rm+"

    def __init__(self, problem, cost, seed=0, z0=None):
        if problem.structure is None:
            raise ValueError("regret matching needs a bilinear problem")
        super().__init__(problem, cost, seed, z0)
        n = problem.structure.primal_dim
        self.primal_blocks = _simplex_slices(problem.set.parts[0])
        dual_blocks = _simplex_slices(problem.set.parts[1])
        if self.primal_blocks is None or dual_blocks is None:
            raise ValueError("regret matching needs simplex strategy sets")
        self.dual_blocks = [slice(s.start + n, s.stop + n) for s in dual_blocks]
        self.regrets = {}
        for sl in self.primal_blocks + self.dual_blocks:
            self.regrets[(sl.start, sl.stop)] = np.zeros(sl.stop - sl.start)

    def _update_block(self, sl, instant):
        R = self.regrets[(sl.start, sl.stop)]
        np.maximum(R + instant, 0.0, out=R)
        total = R.sum()
        if total > 0.0:
            self.z[sl] = R / total

    def step(self):
        s = self.problem.structure
        n = s.primal_dim
        x, y = self.z[:n], self.z[n:]
        loss_x = s.A @ y + s.bx
        if not np.all(np.isfinite(loss_x)):
            raise NumericalDivergence(self.name, self.iteration)
        for sl in self.primal_blocks:
            self._update_block(sl, float(self.z[sl] @ loss_x[sl]) - loss_x[sl])
        x = self.z[:n]
        gain_y = s.A.T @ x + s.by
        for sl in self.dual_blocks:
            local = gain_y[sl.start - n:sl.stop - n]
            self._update_block(sl, local - float(self.z[sl] @ local))
        self.evals += self.cost.charge(self.name)
        self.iteration += 1
        return StepResult([self.z.copy()], None)


ALGORITHMS = ("svrg-eg", "dl-svrg-eg", "eg", "pda", "oomd-l2", "oomd-entropy", "rm+")

_SIMPLEX_ONLY = ("oomd-entropy", "rm+")


def requires_simplex_strategies(algorithm):
    return algorithm in _SIMPLEX_ONLY


def applicable(problem, algorithm):
    """Whether the algorithm can run on the instance's feasible sets."""
    if algorithm in ("pda", "rm+") and problem.structure is None:
        return False
    if algorithm in _SIMPLEX_ONLY:
        return problem.structure is not None and _simplex_slices(problem.set) is not None
    return True


def make_solver(problem, algorithm, seed=0, *, params=None, tau_scale=1.0,
                stepsize=None, cost_N=None, z0=None, oracle=None):
    """Build a solver with the suggested parameters of its algorithm.

    Baseline step sizes: 0.99/||A||_2 for the extragradient and primal-dual
    solvers, 0.5/||A||_2 for Euclidean optimistic mirror descent, 1 for the
    entropy variant; tau_scale multiplies whichever baseline applies.
    """
    N = default_components(problem) if cost_N is None else int(cost_N)
    cost = CostModel(N)
    if not applicable(problem, algorithm):
        constraint = ("simplex strategy sets" if algorithm in _SIMPLEX_ONLY
                      else "a bilinear saddle-point structure")
        raise ValueError(f"{algorithm} requires {constraint}; "
                         f"instance has {problem.set.descriptor()}")
    if algorithm in ("svrg-eg", "dl-svrg-eg"):
        if params is None:
            params = SvrgParams.suggested(N, problem.lipschitz_bound(), tau_scale=tau_scale)
        if algorithm == "svrg-eg":
            return LooplessSvrgEG(problem, params, cost, seed, z0, oracle)
        return DoubleLoopSvrgEG(problem, params, cost, seed, z0, oracle)
    if algorithm == "eg":
        tau = (0.99 / problem.spectral_norm()) * tau_scale if stepsize is None else stepsize
        return Extragradient(problem, tau, cost, seed, z0)
    if algorithm == "pda":
        tau = (0.99 / problem.spectral_norm()) * tau_scale if stepsize is None else stepsize
        return PrimalDual(problem, tau, cost, seed, z0)
    if algorithm == "oomd-l2":
        eta = (0.5 / problem.spectral_norm()) * tau_scale if stepsize is None else stepsize
        return OptimisticMDL2(problem, eta, cost, seed, z0)
    if algorithm == "oomd-entropy":
        eta = 1.0 * tau_scale if stepsize is None else stepsize
        return OptimisticMDEntropy(problem, eta, cost, seed, z0)
    if algorithm == "rm+":
        return RegretMatchingPlus(problem, cost, seed, z0)
    raise ValueError(f"unknown algorithm tag {algorithm!r}")


def run(problem, algorithm, budget_evals, seed, eval_every, *, params=None,
        tau_scale=1.0, stepsize=None, known=None, cost_N=None, z0=None,
        oracle=None, stop_when_gap_below=None):
    """Drive a solver until the cumulative charge reaches the budget.

    Records a row at the first step whose cumulative charge meets each
    cadence multiple; the stored ``evals`` is the actual cumulative charge.
    Each row holds the convergence measure of the last iterate and of the
    uniform, linear, and quadratic running averages of the half-step
    iterates (the last iterate stands in while an average is still
    undefined), plus the weighted squared distance to the solution set when
    one is known. For bilinear instances the measure is the closed-form
    duality gap; otherwise it is the proximal residual at the solver's own
    step size. Measurement is diagnostic and never charged to the budget.
    """
    budget_evals = int(budget_evals)
    eval_every = int(eval_every)
    N = default_components(problem) if cost_N is None else int(cost_N)
    if budget_evals < N:
        raise ValueError(f"budget {budget_evals} is below one full evaluation ({N})")
    if eval_every < 1:
        raise ValueError("evaluation cadence must be at least 1")
    solver = make_solver(problem, algorithm, seed, params=params, tau_scale=tau_scale,
                         stepsize=stepsize, cost_N=N, z0=z0, oracle=oracle)

    if problem.structure is not None:
        measure = lambda z: duality_gap_at(problem, z)
    else:
        res_tau = getattr(solver, "tau", 1.0)
        measure = lambda z: natural_residual(problem, z, res_tau)

    accumulators = {q: AveragingAccumulator(q) for q in (0, 1, 2)}
    rows = {name: [] for name in ("evals", "gap_last", "gap_uniform",
                                  "gap_linear", "gap_quadratic", "dist_theta")}
    next_mark = eval_every
    while solver.evals < budget_evals:
        result = solver.step()
        for z_half in result.iterates:
            for q, acc in accumulators.items():
                weight = None if result.epoch is None else float(result.epoch) ** q
                acc.push(z_half, weight=weight)
        if solver.evals < next_mark:
            continue
        gap_last = measure(solver.z)
        rows["evals"].append(solver.evals)
        rows["gap_last"].append(gap_last)
        for q, name in ((0, "gap_uniform"), (1, "gap_linear"), (2, "gap_quadratic")):
            avg = accumulators[q].current()
            rows[name].append(gap_last if avg is None else measure(avg))
        if known is not None:
            rows["dist_theta"].append(dist_theta(known, solver.z, solver.w_point, solver.theta))
        next_mark = eval_every * (solver.evals // eval_every + 1)
        if stop_when_gap_below is not None and gap_last <= stop_when_gap_below:
            break
    return GapTrace(
        evals=np.array(rows["evals"], dtype=np.int64),
        gap_last=np.array(rows["gap_last"]),
        gap_uniform=np.array(rows["gap_uniform"]),
        gap_linear=np.array(rows["gap_linear"]),
        gap_quadratic=np.array(rows["gap_quadratic"]),
        dist_theta=np.array(rows["dist_theta"]) if known is not None else None,
        meta={"algorithm": algorithm, "seed": seed, "budget": budget_evals,
              "eval_every": eval_every, "N": N},
    )
