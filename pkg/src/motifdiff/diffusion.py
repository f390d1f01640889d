"""Discrete-state diffusion over typed graphs.

Forward noising is a continuous-time Markov chain on each node and each
off-diagonal edge slot independently, with a shared exponential-growth rate
schedule.  The reverse chain plugs a learned posterior into the Bayes form
of the reverse rates; generative log-probability is estimated as a Jensen
lower bound averaged over sampled noising paths.  A discrete-time variant
(cosine schedule pulling toward dataset marginals) shares the interface.

Self-loop slots never exist in the data, so the diagonal is excluded from
noising, reverse rates, priors, and path log-probabilities throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Marginals
from .errors import NumericalInstabilityError, ValidationError
from .graphs import TypedDigraph

__all__ = [
    "EPS",
    "NoiseSchedule",
    "TransitionKernel",
    "DigressSchedule",
    "LogProbEstimate",
    "beta",
    "cum_rate",
    "forward_component_matrix",
    "sample_forward_step",
    "reverse_rate_node",
    "reverse_rate_rows",
    "reverse_component_prob",
    "prior_log_prob",
    "mc_log_prob",
    "digress_forward",
    "digress_reverse_component",
    "mc_log_prob_digress",
]

EPS = 1e-12  # probability floor for every log / ratio


@dataclass(frozen=True)
class NoiseSchedule:
    """Rate schedule beta(t) = alpha * gamma^t * log(gamma) on [0, T]."""

    alpha: float = 0.8
    gamma: float = 2.0
    T: float = 1.0
    steps: int = 100

    def __post_init__(self):
        if self.alpha <= 0 or self.gamma <= 1 or self.steps < 1 or self.T <= 0:
            raise ValidationError("need alpha > 0, gamma > 1, T > 0, steps >= 1")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    def grid(self) -> np.ndarray:
        """The per-trial time grid dt, 2*dt, ..., T."""
        return np.arange(1, self.steps + 1) * self.dt


@dataclass(frozen=True)
class TransitionKernel:
    """Constant component rate matrices: all-ones minus (size x identity)."""

    a: int
    b: int
    rate_x: np.ndarray = field(init=False, repr=False)
    rate_e: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.a < 1 or self.b < 1:
            raise ValidationError("alphabet sizes must be positive")
        object.__setattr__(self, "rate_x", _uniform_rate(self.a))
        object.__setattr__(self, "rate_e", _uniform_rate(self.b))


def _uniform_rate(m: int) -> np.ndarray:
    r = np.ones((m, m)) - m * np.eye(m)
    r.setflags(write=False)
    return r


def beta(sched: NoiseSchedule, t: float) -> float:
    """Instantaneous noise rate at time t."""
    return sched.alpha * sched.gamma**t * math.log(sched.gamma)


def cum_rate(sched: NoiseSchedule, s: float, t: float) -> float:
    """Integral of beta over [s, t]: alpha * (gamma^t - gamma^s)."""
    if s > t:
        raise ValidationError(f"cum_rate needs s <= t, got s={s}, t={t}")
    return sched.alpha * (sched.gamma**t - sched.gamma**s)


def forward_component_matrix(m: int, c: float) -> np.ndarray:
    """exp(c * (ones - m*I)) in closed form; rows sum to 1.

    Diagonal (1 + (m-1) e^{-mc}) / m, off-diagonal (1 - e^{-mc}) / m.
    """
    if c < 0:
        raise ValidationError("cumulative rate must be nonnegative")
    decay = math.exp(-m * c)
    off = (1.0 - decay) / m
    diag = (1.0 + (m - 1) * decay) / m
    return np.full((m, m), off) + (diag - off) * np.eye(m)


def _offdiag_mask(k: int) -> np.ndarray:
    return ~np.eye(k, dtype=bool)


def _sample_rows(matrix: np.ndarray, cur: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    """Sample one categorical step per component from its matrix row.

    Returns (next classes, log prob of each realized transition)."""
    probs = matrix[cur]  # (..., m)
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(cur.shape) * cdf[..., -1]  # guards against cdf < 1 rounding
    nxt = (cdf > u[..., None]).argmax(axis=-1)
    logp = np.log(np.maximum(np.take_along_axis(probs, nxt[..., None], -1)[..., 0], EPS))
    return nxt.astype(np.int64), logp


def sample_forward_step(
    graph: TypedDigraph,
    s: float,
    t: float,
    kernel: TransitionKernel,
    sched: NoiseSchedule,
    rng,
) -> tuple[TypedDigraph, float]:
    """Noise every node and off-diagonal edge slot from time s to t.

    Returns the noised graph and the log-probability of the realized joint
    transition (diagonal slots stay 0 and contribute nothing)."""
    if t <= s:
        raise ValidationError("forward step needs t > s")
    c = cum_rate(sched, s, t)
    px = forward_component_matrix(kernel.a, c)
    pe = forward_component_matrix(kernel.b, c)
    k = graph.num_nodes
    nt, logp_n = _sample_rows(px, graph.node_types.astype(np.int64), rng)
    log_f = float(logp_n.sum())
    et = np.zeros((k, k), dtype=np.int64)
    if k > 1:
        mask = _offdiag_mask(k)
        cur_e = graph.edge_types.astype(np.int64)[mask]
        new_e, logp_e = _sample_rows(pe, cur_e, rng)
        et[mask] = new_e
        log_f += float(logp_e.sum())
    return TypedDigraph(nt, et, graph.alphabet), log_f


def reverse_rate_rows(
    cur: np.ndarray,
    t: float,
    posteriors: np.ndarray,
    m: int,
    sched: NoiseSchedule,
) -> np.ndarray:
    """Reverse rate row for every component in ``cur``.

    cur: integer classes, any shape S.  posteriors: shape S + (m,), the
    denoiser's clean-class distribution per component.  Returns S + (m,)
    rows whose off-diagonal entries are the Bayes reverse rates and whose
    diagonal entry is minus their sum.
    """
    c0t = cum_rate(sched, 0.0, t)
    pt = forward_component_matrix(m, c0t)
    rate = beta(sched, t)
    denom = np.maximum(pt.T[cur], EPS)  # (..., m0): p_{t|0}(cur | x0)
    weighted = posteriors / denom  # (..., m0)
    rows = rate * (weighted @ pt)  # (..., m): sum_x0 post * p(target|x0)/p(cur|x0)
    np.put_along_axis(rows, cur[..., None], 0.0, axis=-1)
    diag = -rows.sum(axis=-1)
    np.put_along_axis(rows, cur[..., None], diag[..., None], axis=-1)
    return rows


def reverse_rate_node(
    graph: TypedDigraph,
    i: int,
    target: int,
    t: float,
    posterior: np.ndarray,
    kernel: TransitionKernel,
    sched: NoiseSchedule,
) -> float:
    """Reverse rate of node i jumping to ``target``; the diagonal entry
    (target == current class) is minus the total exit rate."""
    cur = np.asarray([int(graph.node_types[i])])
    rows = reverse_rate_rows(cur, t, np.asarray(posterior)[None, :], kernel.a, sched)
    return float(rows[0, target])


def reverse_component_prob(
    current: int, candidate: int, dt: float, rate_row: np.ndarray
) -> float:
    """One-component reverse transition probability over a small step.

    Stay probability exp(dt * row[current]); jumps split the remaining mass
    proportionally to their rates, so the full row sums to exactly 1.
    """
    if dt <= 0:
        raise ValidationError("dt must be positive")
    row_cur = float(rate_row[current])
    if abs(row_cur) < EPS:
        return 1.0 if candidate == current else 0.0
    stay = math.exp(dt * row_cur)
    if candidate == current:
        return stay
    return (stay - 1.0) * float(rate_row[candidate]) / row_cur


def _reverse_prob_vec(
    cur: np.ndarray, prev: np.ndarray, dt: float, rows: np.ndarray
) -> np.ndarray:
    """Vectorized reverse_component_prob over matching-shaped class arrays."""
    row_cur = np.take_along_axis(rows, cur[..., None], -1)[..., 0]
    stay = np.exp(dt * row_cur)
    row_prev = np.take_along_axis(rows, prev[..., None], -1)[..., 0]
    zero_rate = np.abs(row_cur) < EPS
    same = prev == cur
    with np.errstate(divide="ignore", invalid="ignore"):
        jump = (stay - 1.0) * row_prev / row_cur
    return np.where(zero_rate, same.astype(float), np.where(same, stay, jump))


def prior_log_prob(graph: TypedDigraph, kernel: TransitionKernel) -> float:
    """Log-probability of a fully noised graph under the uniform limit."""
    k = graph.num_nodes
    return k * math.log(1.0 / kernel.a) + k * (k - 1) * math.log(1.0 / kernel.b)


@dataclass
class LogProbEstimate:
    """Monte Carlo lower-bound estimate of log generative probability."""

    mean_log_prob: float
    per_trial: np.ndarray
    trials: int
    aborted: int = 0


def mc_log_prob(
    graph: TypedDigraph,
    posterior_fn,
    kernel: TransitionKernel,
    sched: NoiseSchedule,
    trials: int,
    rng,
) -> LogProbEstimate:
    """Jensen lower bound on log p(graph), averaged over noising paths.

    Every trial simulates the forward chain on the uniform grid, scores each
    step as log(reverse) - log(forward) with the reverse rates built from
    ``posterior_fn``, and closes with the uniform prior term.  All trials
    run as one batch.

    posterior_fn(node_classes (B,k), edge_classes (B,k,k), t) must return
    (node posteriors (B,k,a), edge posteriors (B,k,k,b)).
    """
    if trials < 1:
        raise ValidationError("need at least one trial")
    a, b = kernel.a, kernel.b
    k = graph.num_nodes
    mask = _offdiag_mask(k)
    dt = sched.dt

    max_rounds = 4
    collected: list[np.ndarray] = []
    aborted = 0
    need = trials
    for _ in range(max_rounds):
        ls = _mc_trials_batch(graph, posterior_fn, kernel, sched, need, rng, mask, dt)
        finite = np.isfinite(ls)
        aborted += int((~finite).sum())
        collected.append(ls[finite])
        need = trials - sum(len(c) for c in collected)
        if need <= 0:
            break
    total_attempts = trials + aborted
    if need > 0 or aborted > 0.1 * total_attempts:
        raise NumericalInstabilityError(
            f"{aborted} of {total_attempts} trials aborted on non-finite values")
    per_trial = np.concatenate(collected)[:trials]
    return LogProbEstimate(float(per_trial.mean()), per_trial, trials, aborted)


def _mc_trials_batch(graph, posterior_fn, kernel, sched, batch, rng, mask, dt):
    k = graph.num_nodes
    a, b = kernel.a, kernel.b
    nodes = np.tile(graph.node_types.astype(np.int64), (batch, 1))  # (B, k)
    edges = np.tile(graph.edge_types.astype(np.int64), (batch, 1, 1))  # (B, k, k)
    ls = np.zeros(batch)
    n_off = int(mask.sum())
    for step in range(1, sched.steps + 1):
        s, t = (step - 1) * dt, step * dt
        c = cum_rate(sched, s, t)
        px = forward_component_matrix(a, c)
        pe = forward_component_matrix(b, c)

        prev_nodes, prev_edges = nodes, edges
        nodes, logf_n = _sample_rows(px, nodes, rng)
        ls -= logf_n.sum(axis=1)
        if n_off:
            cur_e = edges[:, mask]  # (B, n_off)
            new_e, logf_e = _sample_rows(pe, cur_e, rng)
            edges = edges.copy()
            edges[:, mask] = new_e
            ls -= logf_e.sum(axis=1)

        node_post, edge_post = posterior_fn(nodes, edges, t)
        rows_n = reverse_rate_rows(nodes, t, node_post, a, sched)
        r_n = _reverse_prob_vec(nodes, prev_nodes, dt, rows_n)
        ls += np.log(np.maximum(r_n, EPS)).sum(axis=1)
        if n_off:
            post_e = edge_post[:, mask]  # (B, n_off, b)
            rows_e = reverse_rate_rows(edges[:, mask], t, post_e, b, sched)
            r_e = _reverse_prob_vec(edges[:, mask], prev_edges[:, mask], dt, rows_e)
            ls += np.log(np.maximum(r_e, EPS)).sum(axis=1)
    ls += prior_log_prob(graph, kernel)
    return ls


# ---------------------------------------------------------------------------
# discrete-time variant (cosine schedule toward dataset marginals)


@dataclass(frozen=True)
class DigressSchedule:
    """Cosine cumulative schedule over T_steps discrete steps.

    alpha_bar(t) = cos(0.5*pi*(t/T + s)/(1 + s))^2, normalized so that
    alpha_bar(0) == 1; then the cumulative transition matrix is exactly the
    product of the per-step ones.
    """

    T_steps: int
    marginals: Marginals
    s: float = 0.008

    def __post_init__(self):
        if self.T_steps < 1:
            raise ValidationError("T_steps must be >= 1")

    def alpha_bar(self, t: int) -> float:
        raw = math.cos(0.5 * math.pi * (t / self.T_steps + self.s) / (1 + self.s)) ** 2
        norm = math.cos(0.5 * math.pi * self.s / (1 + self.s)) ** 2
        return raw / norm

    def alpha(self, t: int) -> float:
        return self.alpha_bar(t) / self.alpha_bar(t - 1)

    def q_matrix(self, t: int, m_vec: np.ndarray) -> np.ndarray:
        """One-step transition matrix at step t."""
        al = self.alpha(t)
        return al * np.eye(len(m_vec)) + (1 - al) * np.outer(
            np.ones(len(m_vec)), m_vec)

    def q_bar_matrix(self, t: int, m_vec: np.ndarray) -> np.ndarray:
        """Cumulative transition matrix from step 0 to t."""
        al = self.alpha_bar(t)
        return al * np.eye(len(m_vec)) + (1 - al) * np.outer(
            np.ones(len(m_vec)), m_vec)


def digress_forward(coef: float, m_vec: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Apply a (cumulative) transition with mixing coefficient ``coef`` to a
    class distribution or one-hot state."""
    state = np.asarray(state, dtype=np.float64)
    return coef * state + (1 - coef) * np.asarray(m_vec, dtype=np.float64)


def digress_reverse_component(
    x_t: int, t: int, posterior: np.ndarray, schedule: DigressSchedule,
    m_vec: np.ndarray,
) -> np.ndarray:
    """Distribution of the step-(t-1) class given the step-t class.

    Bayes over the clean class: for each candidate z,
    q(x_t | z) * sum_x0 posterior[x0] * q_bar_{t-1}(z | x0) / q_bar_t(x_t | x0),
    renormalized to sum to one.
    """
    if t < 1:
        raise ValidationError("reverse step needs t >= 1")
    m_vec = np.asarray(m_vec, dtype=np.float64)
    q_t = schedule.q_matrix(t, m_vec)
    qb_prev = schedule.q_bar_matrix(t - 1, m_vec)
    qb_t = schedule.q_bar_matrix(t, m_vec)
    posterior = np.asarray(posterior, dtype=np.float64)
    denom = np.maximum(qb_t[:, x_t], EPS)  # per x0
    mix = (posterior / denom) @ qb_prev  # (m,): sum_x0 post*qb_prev[x0, z]/denom
    out = q_t[:, x_t] * mix
    out = np.maximum(out, EPS)
    return out / out.sum()


def _digress_reverse_vec(cur, prev, t, post, schedule, m_vec):
    """Vectorized digress reverse prob of realized prev given cur."""
    m_vec = np.asarray(m_vec, dtype=np.float64)
    q_t = schedule.q_matrix(t, m_vec)
    qb_prev = schedule.q_bar_matrix(t - 1, m_vec)
    qb_t = schedule.q_bar_matrix(t, m_vec)
    denom = np.maximum(qb_t.T[cur], EPS)  # (..., m0)
    mix = (post / denom) @ qb_prev  # (..., m)
    out = np.maximum(q_t.T[cur] * mix, EPS)
    out = out / out.sum(axis=-1, keepdims=True)
    return np.take_along_axis(out, prev[..., None], -1)[..., 0]


def digress_prior_log_prob(graph: TypedDigraph, marginals: Marginals) -> float:
    """Log-probability of a fully noised graph under the marginal prior."""
    k = graph.num_nodes
    logp = float(
        np.log(np.maximum(marginals.node_marginal[graph.node_types], EPS)).sum())
    if k > 1:
        mask = _offdiag_mask(k)
        logp += float(
            np.log(np.maximum(
                marginals.edge_marginal[graph.edge_types[mask]], EPS)).sum())
    return logp


def mc_log_prob_digress(
    graph: TypedDigraph,
    posterior_fn,
    schedule: DigressSchedule,
    trials: int,
    rng,
) -> LogProbEstimate:
    """Discrete-time analogue of mc_log_prob with marginal-prior noising."""
    if trials < 1:
        raise ValidationError("need at least one trial")
    mx = schedule.marginals.node_marginal
    me = schedule.marginals.edge_marginal
    k = graph.num_nodes
    mask = _offdiag_mask(k)
    n_off = int(mask.sum())
    nodes = np.tile(graph.node_types.astype(np.int64), (trials, 1))
    edges = np.tile(graph.edge_types.astype(np.int64), (trials, 1, 1))
    ls = np.zeros(trials)
    for t in range(1, schedule.T_steps + 1):
        qx = schedule.q_matrix(t, mx)
        qe = schedule.q_matrix(t, me)
        prev_nodes, prev_edges = nodes, edges
        nodes, logf_n = _sample_rows(qx, nodes, rng)
        ls -= logf_n.sum(axis=1)
        if n_off:
            new_e, logf_e = _sample_rows(qe, edges[:, mask], rng)
            edges = edges.copy()
            edges[:, mask] = new_e
            ls -= logf_e.sum(axis=1)
        node_post, edge_post = posterior_fn(nodes, edges, t / schedule.T_steps)
        r_n = _digress_reverse_vec(nodes, prev_nodes, t, node_post, schedule, mx)
        ls += np.log(np.maximum(r_n, EPS)).sum(axis=1)
        if n_off:
            r_e = _digress_reverse_vec(
                edges[:, mask], prev_edges[:, mask], t, edge_post[:, mask],
                schedule, me)
            ls += np.log(np.maximum(r_e, EPS)).sum(axis=1)
    ls += np.log(np.maximum(mx[nodes], EPS)).sum(axis=1)
    if n_off:
        ls += np.log(np.maximum(me[edges[:, mask]], EPS)).sum(axis=1)
    if not np.all(np.isfinite(ls)):
        bad = int((~np.isfinite(ls)).sum())
        raise NumericalInstabilityError(f"{bad} of {trials} trials non-finite")
    return LogProbEstimate(float(ls.mean()), ls, trials, 0)


@dataclass(frozen=True)
class DiscoContext:
    """Continuous-time estimator bundle (kernel + schedule)."""

    kernel: TransitionKernel
    sched: NoiseSchedule

    def log_prob(self, graph, posterior_fn, trials, rng) -> LogProbEstimate:
        return mc_log_prob(graph, posterior_fn, self.kernel, self.sched, trials, rng)


@dataclass(frozen=True)
class DigressContext:
    """Discrete-time estimator bundle (cosine schedule + marginals)."""

    schedule: DigressSchedule

    def log_prob(self, graph, posterior_fn, trials, rng) -> LogProbEstimate:
        return mc_log_prob_digress(graph, posterior_fn, self.schedule, trials, rng)
