"""Symmetric seesaw: alternating encoder/decoder optimization with blockwise
power iteration, entirely inside the permutation-invariant subspace.

One outer round composes the channel's tensor power with the current
encoder, improves the decoder by sandwich-and-renormalize power steps on the
output-side blocks, reshuffles the optimized decoder into coefficient form,
composes the other way, and improves the encoder the same way on the
input-side blocks with the globally aggregated normalization.  The loop
stops when the two half-step values agree to the configured threshold, and
the whole thing restarts from several random seeds.

Both half steps apply to flagged channels unchanged: the output side then
carries a block-diagonal algebra, the decoder blocks are indexed by flag
profiles, and a single-flag channel runs through the identical code path.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .algebras import AlgebraChangeOfBasis, AlgebraSpec, algebra_marginal_data
from .blockmap import ORTHO, BlockRep, ChangeOfBasis
from .blockops import (
    check_cpu,
    check_cptp,
    enforce_cpu,
    enforce_cptp,
    psd_sqrt_pinv,
)
from .channels import ChoiMatrix
from .linkprod import (
    compose_after_encoder,
    compose_before_decoder,
    ref_adjoint,
)
from .orbits import tensor_coefficients

#: slack below which a slightly negative convergence gap is treated as zero
CONVERGENCE_FLOOR = 1e-12


@dataclass
class SeesawConfig:
    """Knobs of one seesaw computation.

    d is both the Schmidt rank of the target entangled state and the
    dimension of the reference system carried through all blocks.
    """

    n: int
    d: int
    delta: float = 1e-7
    delta_power: float = 1e-9
    max_outer: int = 600
    max_power: int = 1000
    seeds: int = 2
    rng_seed: int = 0
    warm_start: bool = True

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if min(self.delta, self.delta_power) <= 0:
            raise ValueError("thresholds must be positive")


@dataclass
class SeesawResult:
    fidelity: float
    n: int
    d: int
    converged: bool
    truncated: bool
    trajectory: list[tuple[str, float]]
    encoder: Optional[BlockRep]
    decoder_adj: Optional[BlockRep]
    residuals: dict
    config: SeesawConfig
    seed_index: int
    wall_ms: float
    power_traces: list[list[float]] = field(default_factory=list, repr=False)
    param: Optional[float] = None

    def to_payload(self, include_timing: bool = False) -> dict:
        """JSON-ready summary: config echo, per-iteration trace, final value,
        residuals; wall time only on request so that fixed-seed runs stay
        byte-identical."""
        out = {
            "config": {
                "n": self.config.n,
                "d": self.config.d,
                "delta": self.config.delta,
                "delta_power": self.config.delta_power,
                "max_outer": self.config.max_outer,
                "max_power": self.config.max_power,
                "seeds": self.config.seeds,
                "rng_seed": self.config.rng_seed,
                "warm_start": self.config.warm_start,
            },
            "per_iteration": [
                {"phase": phase, "value": value} for phase, value in self.trajectory
            ],
            "final": {"fidelity": self.fidelity, "n": self.n, "seed": self.seed_index},
            "residuals": self.residuals,
            "converged": self.converged,
            "truncated": self.truncated,
        }
        if include_timing:
            out["wall_ms"] = self.wall_ms
        return out


def random_symmetric_seed(bcob, d_ref: int, kind: str, rng: np.random.Generator,
                          rank: Optional[int] = None) -> BlockRep:
    """Random constraint-satisfying block representation.

    Per block, a complex Gaussian rectangle of the requested rank is squared
    into a PSD matrix, blocks are weighted by a flat Dirichlet draw scaled by
    the inverse Specht multiplicity, and the appropriate sandwich enforces
    trace preservation (encoder) or unitality (decoder).  rank=1 gives the
    isometric-leaning warm start.
    """
    dims = bcob.block_dims if hasattr(bcob, "block_dims") else tuple(p.m for p in bcob.profiles)
    weights = (
        bcob.specht if hasattr(bcob, "specht") else tuple(p.weight for p in bcob.profiles)
    )
    probs = rng.dirichlet(np.ones(len(dims)))
    blocks = []
    for m, f, p in zip(dims, weights, probs):
        k = d_ref * m if rank is None else min(rank, d_ref * m)
        G = rng.standard_normal((d_ref * m, k)) + 1j * rng.standard_normal((d_ref * m, k))
        blocks.append((p / f) * (G @ G.conj().T))
    b = bcob.blockrep(blocks, d_ref)
    if kind == "encoder":
        return enforce_cptp(b)
    if kind == "decoder":
        return enforce_cpu(b)
    raise ValueError("kind must be 'encoder' or 'decoder'")


def block_objective(m_blocks: BlockRep, dual_blocks: BlockRep) -> float:
    """Multiplicity-weighted overlap of two block representations, scaled by
    the reference dimension squared: the entanglement fidelity of the
    composite they describe."""
    total = 0.0
    for w, A, B in zip(m_blocks.weights, m_blocks.blocks, dual_blocks.blocks):
        total += w * float(np.real(np.trace(A @ B)))
    return total / m_blocks.d_ref**2


def power_fd(m_blocks: BlockRep, seed: BlockRep, config: SeesawConfig):
    """Blockwise power iteration for the recovery value: sandwich the
    decoder-adjoint blocks between the channel blocks and renormalize the
    reference trace of every block to the identity.

    Returns (value, decoder blocks, fidelity trace, truncation flag).
    """
    d_ref = m_blocks.d_ref
    D = seed.copy()
    fid = block_objective(m_blocks, D)
    trace = [fid]
    truncated = True
    for _ in range(config.max_power):
        blocks = []
        for m, M, Db in zip(m_blocks.dims, m_blocks.blocks, D.blocks):
            X = M @ Db @ M
            X = 0.5 * (X + X.conj().T)
            Xr = np.trace(X.reshape(d_ref, m, d_ref, m), axis1=0, axis2=2)
            S = np.kron(np.eye(d_ref), psd_sqrt_pinv(Xr))
            blocks.append(S @ X @ S.conj().T)
        cand = BlockRep(D.d, D.n, d_ref, D.labels, D.weights, D.dims, blocks, ORTHO)
        new = block_objective(m_blocks, cand)
        if new < fid:
            # a rounding-dominated step near the fixed point; keep the best
            truncated = False
            break
        D = cand
        fid = new
        trace.append(new)
        if new - trace[-2] < config.delta_power:
            truncated = False
            break
    return fid, D, trace, truncated


def power_fe(m_adj_blocks: BlockRep, seed: BlockRep, config: SeesawConfig):
    """Blockwise power iteration for the preparation value: identical
    sandwich, but the normalization aggregates the multiplicity-weighted
    partial traces of all blocks into one matrix on the reference factor."""
    d_ref = m_adj_blocks.d_ref
    E = seed.copy()
    fid = block_objective(m_adj_blocks, E)
    trace = [fid]
    truncated = True
    for _ in range(config.max_power):
        sandwiched = []
        for M, Eb in zip(m_adj_blocks.blocks, E.blocks):
            X = M @ Eb @ M
            sandwiched.append(0.5 * (X + X.conj().T))
        T = np.zeros((d_ref, d_ref), dtype=complex)
        for w, m, X in zip(m_adj_blocks.weights, m_adj_blocks.dims, sandwiched):
            T += w * np.trace(X.reshape(d_ref, m, d_ref, m), axis1=1, axis2=3)
        S = psd_sqrt_pinv(T)
        blocks = [
            np.kron(S, np.eye(m)) @ X @ np.kron(S, np.eye(m)).conj().T
            for m, X in zip(m_adj_blocks.dims, sandwiched)
        ]
        cand = BlockRep(E.d, E.n, d_ref, E.labels, E.weights, E.dims, blocks, ORTHO)
        new = block_objective(m_adj_blocks, cand)
        if new < fid:
            # a rounding-dominated step near the fixed point; keep the best
            truncated = False
            break
        E = cand
        fid = new
        trace.append(new)
        if new - trace[-2] < config.delta_power:
            truncated = False
            break
    return fid, E, trace, truncated


class SeesawEngine:
    """Tables and the alternating loop for one (channel, n, d) problem.

    The output side is always treated as a block-diagonal algebra; a plain
    channel is the single-summand case, so flagged and unflagged runs share
    every line of the iteration.
    """

    def __init__(self, channel: ChoiMatrix, config: SeesawConfig,
                 cob_a: Optional[ChangeOfBasis] = None,
                 bcob: Optional[AlgebraChangeOfBasis] = None):
        self.channel = channel
        self.config = config
        n, d = config.n, config.d
        d_a = channel.d_in
        if d > min(d_a, channel.total_out) ** n:
            raise ValueError("reference dimension exceeds what the channel can carry")
        self.spec_b = AlgebraSpec((channel.d_out,) * channel.num_flags, n)
        gamma = channel.gamma() if not channel.flags else channel.matrix
        nz = frozenset(
            (int(a), int(b))
            for a, b in zip(*np.nonzero(gamma))
        )
        self.md = algebra_marginal_data(d_a, self.spec_b, channel_support=nz)
        self.cob_a = cob_a if cob_a is not None else ChangeOfBasis(d_a, n)
        self.bcob = bcob if bcob is not None else AlgebraChangeOfBasis(self.spec_b)
        if self.bcob.basis.index != self.md.basis_b.index:
            raise ValueError("output-side map does not match the marginal tables")
        self.c_n = tensor_coefficients(gamma, n, self.md.basis_joint)

    def run_single(self, rng: np.random.Generator, seed_index: int, warm: bool) -> SeesawResult:
        config = self.config
        t0 = time.perf_counter()
        rank = 1 if warm else None
        enc_blocks = random_symmetric_seed(self.cob_a, config.d, "encoder", rng, rank=rank)
        dstar_blocks = random_symmetric_seed(self.bcob, config.d, "decoder", rng)
        enc_ref = self.cob_a.psi_tilde_inv(enc_blocks)
        trajectory: list[tuple[str, float]] = []
        power_traces: list[list[float]] = []
        converged = False
        truncated = False
        fd = fe = 0.0
        for _ in range(config.max_outer):
            m_ref = compose_after_encoder(self.c_n, enc_ref, self.md)
            m_blocks = self.bcob.psi_tilde(m_ref)
            fd, dstar_blocks, tr_d, trunc_d = power_fd(m_blocks, dstar_blocks, config)
            trajectory.append(("fd", fd))
            power_traces.append(tr_d)
            dec_ref = ref_adjoint(self.bcob.psi_tilde_inv(dstar_blocks))
            mprime_ref = compose_before_decoder(self.c_n, dec_ref, self.md)
            ma_blocks = self.cob_a.psi_tilde(ref_adjoint(mprime_ref))
            fe, enc_blocks, tr_e, trunc_e = power_fe(ma_blocks, enc_blocks, config)
            trajectory.append(("fe", fe))
            power_traces.append(tr_e)
            enc_ref = self.cob_a.psi_tilde_inv(enc_blocks)
            truncated = truncated or trunc_d or trunc_e
            if fe - fd < max(config.delta, CONVERGENCE_FLOOR):
                converged = True
                break
        residuals = {
            "decoder_cpu": float(max(check_cpu(dstar_blocks))),
            "encoder_cptp": float(check_cptp(enc_blocks)),
        }
        return SeesawResult(
            fidelity=fe,
            n=config.n,
            d=config.d,
            converged=converged,
            truncated=truncated or not converged,
            trajectory=trajectory,
            encoder=enc_blocks,
            decoder_adj=dstar_blocks,
            residuals=residuals,
            config=config,
            seed_index=seed_index,
            wall_ms=(time.perf_counter() - t0) * 1e3,
            power_traces=power_traces,
        )

    def run(self) -> SeesawResult:
        config = self.config
        streams = np.random.SeedSequence(config.rng_seed).spawn(config.seeds)
        best: Optional[SeesawResult] = None
        warm_ok = config.warm_start and config.d <= self.channel.d_in
        for i, ss in enumerate(streams):
            rng = np.random.default_rng(ss)
            warm = warm_ok and i == 0
            res = self.run_single(rng, i, warm)
            if best is None or res.fidelity > best.fidelity:
                best = res
        assert best is not None
        return best


def seesaw_run(channel: ChoiMatrix, config: SeesawConfig, **engine_kwargs) -> SeesawResult:
    """Best seesaw lower bound over the configured random restarts."""
    if channel.flags:
        raise ValueError("flagged channels go through seesaw_flagged")
    return SeesawEngine(channel, config, **engine_kwargs).run()


def seesaw_flagged(channel: ChoiMatrix, config: SeesawConfig, **engine_kwargs) -> SeesawResult:
    """Seesaw for a flagged channel: identical loop over the block-diagonal
    output algebra, decoder blocks indexed by flag profiles."""
    if not channel.flags:
        raise ValueError("channel carries no flag structure")
    return SeesawEngine(channel, config, **engine_kwargs).run()


def sweep(
    family: str,
    params: list[float],
    n_values: list[int],
    config_base: SeesawConfig,
) -> list[SeesawResult]:
    """Seesaw over a parameter grid and a range of copy numbers.

    Returns one result per (param, n) pair; for every parameter the result
    with the best fidelity (ties broken toward smaller n) is flagged via
    `best_over_n`.
    """
    from .channels import adc, depolarizing

    maker = {"adc": adc, "depolarizing": depolarizing}[family]
    results: list[SeesawResult] = []
    for p in params:
        channel = maker(p)
        for n in sorted(n_values):
            config = replace(config_base, n=n)
            res = SeesawEngine(channel, config).run()
            res.param = p
            results.append(res)
    return results


def best_over_n(results: list[SeesawResult]) -> dict[float, SeesawResult]:
    """Pick the best copy number per parameter; strict improvement required,
    so equal values resolve to the smaller n."""
    best: dict[float, SeesawResult] = {}
    for res in results:
        key = res.param
        if key not in best or res.fidelity > best[key].fidelity:
            best[key] = res
    return best


class SymmetricSeesaw:
    """Estimator-style front end: configure once, fit on a channel.

    Follows the scikit-learn parameter protocol (get_params/set_params and
    keyword-only construction) so runs compose with that ecosystem's
    tooling; fit accepts a ChoiMatrix or a dense unnormalized Choi matrix
    with square single-copy dimensions.
    """

    def __init__(self, n=1, d=2, delta=1e-7, delta_power=1e-9, max_outer=600,
                 max_power=1000, seeds=2, rng_seed=0, warm_start=True):
        self.n = n
        self.d = d
        self.delta = delta
        self.delta_power = delta_power
        self.max_outer = max_outer
        self.max_power = max_power
        self.seeds = seeds
        self.rng_seed = rng_seed
        self.warm_start = warm_start

    _param_names = (
        "n", "d", "delta", "delta_power", "max_outer", "max_power",
        "seeds", "rng_seed", "warm_start",
    )

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params):
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    def _config(self) -> SeesawConfig:
        return SeesawConfig(
            n=self.n, d=self.d, delta=self.delta, delta_power=self.delta_power,
            max_outer=self.max_outer, max_power=self.max_power,
            seeds=self.seeds, rng_seed=self.rng_seed, warm_start=self.warm_start,
        )

    def fit(self, X, y=None):
        if isinstance(X, ChoiMatrix):
            channel = X
        else:
            X = np.asarray(X, dtype=complex)
            k = int(round(np.sqrt(X.shape[0])))
            if X.shape != (k * k, k * k):
                raise ValueError("dense input must be a square-channel Choi matrix")
            channel = ChoiMatrix(k, k, X)
        engine = SeesawEngine(channel, self._config())
        self.result_ = engine.run()
        self.best_fidelity_ = self.result_.fidelity
        self.trajectory_ = self.result_.trajectory
        return self

    def score(self, X=None, y=None):
        if not hasattr(self, "result_"):
            raise RuntimeError("estimator is not fitted")
        return self.best_fidelity_
