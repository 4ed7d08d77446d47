"""Exact posterior over output strings, for validating the particle filter.

The automaton-plus-dwell process is expanded into a finite Markov chain:
with geometric dwell each node is one state with a self-loop, and with a
bounded explicit pmf each (node, frames-remaining) pair is a state. A
forward recursion over chain states annotated with the word-completion
sequence then yields the exact filtered distribution over strings, the same
quantity the particle filter estimates by summing weights per string.

Mass on strings longer than max_completions, and classes below a pruning
floor, are not silently dropped: they merge into one aggregate state vector
that keeps propagating through the same transition and likelihood updates,
so the reported residual is the exact posterior mass of all truncated
histories. If it ever exceeds overflow_tol the recursion raises; otherwise
the returned posterior is exact to within the reported residual.
"""

import math
from dataclasses import dataclass

import numpy as np

from .automaton import PrefixAutomaton
from .dwell import DwellSpec
from .emissions import EmissionStream
from .errors import OracleError
from .phonemes import SIL

MAX_STATES = 1000


@dataclass
class ExpandedChain:
    n_states: int
    emit_idx: np.ndarray      # state -> inventory index
    init: np.ndarray          # distribution over states at frame 0
    plain: np.ndarray         # (S, S) transitions that do not complete a word
    completions: list         # (word, per-state one-step completion probability)
    root_entry: np.ndarray    # entry distribution over states after a completion
    inventory: object


def expand(pa: PrefixAutomaton, dwell: DwellSpec) -> ExpandedChain:
    if dwell.family == "negative_binomial":
        raise OracleError(
            "negative-binomial dwell has unbounded support; use geometric or pmf"
        )
    if dwell.family == "geometric":
        return _expand_geometric(pa, dwell)
    return _expand_pmf(pa, dwell)


def _leave_edges(pa, node_id):
    """(successor node, probability, completed word or None) on dwell expiry."""
    node = pa.node(node_id)
    word = pa.best_homophone(node_id) if node.word_total else None
    out = []
    for succ, _, p in pa.transition_distribution(node_id):
        if succ == pa.root_id and word is not None:
            out.append((succ, p, word))
        else:
            out.append((succ, p, None))
    return out


def _expand_geometric(pa, dwell):
    inv = pa.inventory
    n = len(pa)
    if n > MAX_STATES:
        raise OracleError(f"{n} states exceeds the oracle limit of {MAX_STATES}")
    emit_idx = np.array([inv.index(pa.node(i).emitted()) for i in range(n)], dtype=np.int64)
    leave = np.array([1.0 / dwell.mean_for(pa.node(i).emitted()) for i in range(n)])
    plain = np.zeros((n, n))
    comp = {}
    for i in range(n):
        plain[i, i] = 1.0 - leave[i]
        for succ, p, word in _leave_edges(pa, i):
            if word is None:
                plain[i, succ] += leave[i] * p
            else:
                comp.setdefault(word, np.zeros(n))[i] += leave[i] * p
    init = np.zeros(n)
    init[pa.root_id] = 1.0
    root_entry = init.copy()
    return ExpandedChain(n, emit_idx, init, plain, sorted(comp.items()), root_entry, inv)


def _expand_pmf(pa, dwell):
    inv = pa.inventory
    pmfs = [dwell.pmf_for(pa.node(i).emitted()) for i in range(len(pa))]
    states = []  # (node, remaining)
    index = {}
    for i, pmf in enumerate(pmfs):
        for k in range(1, pmf.size + 1):
            index[(i, k)] = len(states)
            states.append((i, k))
    n = len(states)
    if n > MAX_STATES:
        raise OracleError(f"{n} expanded states exceeds the oracle limit of {MAX_STATES}")

    def entry(node):
        vec = np.zeros(n)
        for k, p in enumerate(pmfs[node], start=1):
            vec[index[(node, k)]] = p
        return vec

    emit_idx = np.zeros(n, dtype=np.int64)
    for (node, _), s in index.items():
        emit_idx[s] = inv.index(pa.node(node).emitted())
    plain = np.zeros((n, n))
    comp = {}
    entries = [entry(i) for i in range(len(pa))]
    for (node, k), s in index.items():
        if k > 1:
            plain[s, index[(node, k - 1)]] = 1.0
            continue
        for succ, p, word in _leave_edges(pa, node):
            if word is None:
                plain[s] += p * entries[succ]
            else:
                comp.setdefault(word, np.zeros(n))[s] += p
    root_entry = entries[pa.root_id]
    return ExpandedChain(n, emit_idx, root_entry.copy(), plain, sorted(comp.items()), root_entry, inv)


@dataclass
class OraclePosterior:
    probs: dict           # word tuple -> probability, sums to 1
    residual: float       # exact posterior mass of truncated histories
    log_normalizer: float

    def top(self):
        return max(self.probs.items(), key=lambda kv: kv[1])[0]


def exact_posterior(
    chain: ExpandedChain,
    stream: EmissionStream,
    max_completions=3,
    overflow_tol=1e-6,
    prune_tol=1e-15,
) -> OraclePosterior:
    if max_completions < 1:
        raise OracleError("max_completions must be >= 1")
    if len(stream.inventory) != len(chain.inventory) or stream.inventory != chain.inventory:
        raise OracleError("stream inventory does not match the chain")
    lik_all = stream.probs[:, chain.emit_idx]  # (T, S)

    alpha = {(): chain.init * lik_all[0]}
    # aggregate state vector of every truncated history; once here, stays here
    resid = np.zeros(chain.n_states)
    log_norm = 0.0
    for t in range(len(stream)):
        if t > 0:
            lik = lik_all[t]
            new = {}
            nres = resid @ chain.plain
            for _, cvec in chain.completions:
                m = float(resid @ cvec)
                if m:
                    nres = nres + m * chain.root_entry
            for cls, vec in alpha.items():
                _acc(new, cls, vec @ chain.plain)
                extended = len(cls) >= max_completions
                for word, cvec in chain.completions:
                    m = float(vec @ cvec)
                    if m == 0.0:
                        continue
                    if extended:
                        nres = nres + m * chain.root_entry
                    else:
                        _acc(new, cls + (word,), m * chain.root_entry)
            alpha = {cls: vec * lik for cls, vec in new.items()}
            resid = nres * lik
        z = sum(float(vec.sum()) for vec in alpha.values()) + float(resid.sum())
        if z <= 0:
            raise OracleError("all forward mass vanished; emissions contradict the model")
        for cls in list(alpha):
            if float(alpha[cls].sum()) < prune_tol * z:
                resid = resid + alpha.pop(cls)
        alpha = {cls: vec / z for cls, vec in alpha.items()}
        resid = resid / z
        log_norm += math.log(z)
        if float(resid.sum()) > overflow_tol:
            raise OracleError(
                f"history-space overflow: truncated mass {resid.sum():.3g} "
                f"exceeds {overflow_tol:.3g} at frame {t}"
            )

    totals = {cls: float(vec.sum()) for cls, vec in alpha.items()}
    z = sum(totals.values())
    if z <= 0:
        raise OracleError("no tracked history mass left")
    probs = {cls: v / z for cls, v in totals.items()}
    return OraclePosterior(probs, float(resid.sum()), log_norm)


def _acc(table, cls, vec):
    if cls in table:
        table[cls] = table[cls] + vec
    else:
        table[cls] = vec


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
