"""Experiment harnesses: viscosity sweep, entropy contraction, sup-norm
smoothing, and the randomized monotonicity probe.

Each study returns a ``StudyReport`` carrying a result table, named
verdicts, and enough inputs to reproduce the run. Reports render to a
human-readable text block (with grep-stable ``VERDICT <name> PASS|FAIL``
lines) and to CSV; both renderings are byte-deterministic for a fixed
configuration and seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig, build_controls, build_params, build_problem
from .diagnostics import dissipation_terms, l1_distance, relative_entropy
from .grid import Field
from .limiter import monotone_gap, unclamped_gap
from .profiles import poly_spike
from .stepping import cfl_dt, run, step_explicit

__all__ = [
    "Verdict",
    "StudyReport",
    "viscosity_study",
    "contraction_study",
    "smoothing_study",
    "monotonicity_test",
]


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str


@dataclass
class StudyReport:
    """Inputs, result table, and pass/fail verdicts of one study."""

    kind: str
    inputs: list[tuple[str, str]]
    columns: tuple[str, ...]
    rows: list[tuple]
    verdicts: list[Verdict]
    notes: list[str]

    @property
    def all_pass(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_text(self) -> str:
        lines = [f"study {self.kind}"]
        lines += [f"input {k} = {v}" for k, v in self.inputs]
        lines.append("columns " + ",".join(self.columns))
        for row in self.rows:
            lines.append("row " + ",".join(_cell(x) for x in row))
        lines += [f"note {n}" for n in self.notes]
        for v in self.verdicts:
            lines.append(f"VERDICT {v.name} {'PASS' if v.passed else 'FAIL'} ({v.detail})")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        out = [",".join(self.columns)]
        out += [",".join(_cell(x) for x in row) for row in self.rows]
        return "\n".join(out) + "\n"


def _cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _fmt_list(xs) -> str:
    return " ".join(repr(float(x)) for x in xs)


def _run_many(jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


def _sigma_for(cfg: RunConfig, reference: Field) -> float:
    """Relative-entropy floor guarding vacuum cells: sigma_rel * sup(reference)."""
    return cfg.sigma_rel * float(reference.values.max(initial=0.0))


def viscosity_study(base: RunConfig, eps_list=None, threads: int | None = None) -> StudyReport:
    """Run one initial condition across a decreasing viscosity list and
    measure how fast the solutions become a Cauchy family.

    Reports the L1 distance and relative entropy of every pair at the final
    time and fits H(T) against eps + delta (affine least squares, plus the
    through-origin slope). Verdicts: both pair metrics strictly decrease
    along consecutive pairs; the affine fit has positive slope and an
    intercept at most 10% of the largest H.
    """
    eps_list = tuple(float(e) for e in (base.eps_list if eps_list is None else eps_list))
    if len(eps_list) < 2:
        raise ValueError("eps_list needs at least two entries")
    if any(not (np.isfinite(e) and e >= 0.0) for e in eps_list):
        raise ValueError("viscosities must be finite and >= 0")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing (no duplicates)")
    threads = base.threads if threads is None else threads

    grid, initial = build_problem(base)
    controls = build_controls(base)
    dt = controls.dt if controls.dt is not None else cfl_dt(grid, max(eps_list), controls.cfl_safety)
    shared = replace(controls, dt=dt)

    def make_job(eps):
        def job():
            params = build_params(replace(base, eps=eps))
            return run(initial, params, shared, base.t_end, diag_stride=base.diag_stride,
                       p_set=base.p_set, grad_p_set=base.grad_p_set, scheme=base.scheme)
        return job

    trajectories = _run_many([make_job(e) for e in eps_list], threads)
    finals = [t.final for t in trajectories]

    rows = []
    consecutive_l1 = []
    consecutive_h = []
    fit_s = []
    fit_h = []
    for i in range(len(eps_list)):
        for j in range(i + 1, len(eps_list)):
            sig = _sigma_for(base, finals[j])
            d_l1 = l1_distance(finals[i], finals[j])
            h = relative_entropy(finals[i], finals[j], sigma=sig)
            rows.append((eps_list[i], eps_list[j], eps_list[i] + eps_list[j], d_l1, h))
            if j == i + 1:
                consecutive_l1.append(d_l1)
                consecutive_h.append(h)
                fit_s.append(eps_list[i] + eps_list[j])
                fit_h.append(h)

    # fit over the consecutive pairs: mixing all pairs would put several
    # widely different eps gaps at the same eps sum
    s = np.asarray(fit_s)
    hv = np.asarray(fit_h)
    slope, intercept = (float(c) for c in np.polyfit(s, hv, 1))
    origin_slope = float(np.dot(s, hv) / np.dot(s, s))
    h_max = float(hv.max())

    l1_mono = all(b < a for a, b in zip(consecutive_l1, consecutive_l1[1:]))
    h_mono = all(b < a for a, b in zip(consecutive_h, consecutive_h[1:]))
    verdicts = [
        Verdict("viscosity_l1_decreasing", l1_mono,
                f"consecutive-pair L1 distances {_fmt_list(consecutive_l1)}"),
        Verdict("viscosity_H_decreasing", h_mono,
                f"consecutive-pair relative entropies {_fmt_list(consecutive_h)}"),
        Verdict("viscosity_fit_slope_positive", slope > 0.0, f"affine slope {slope!r}"),
        Verdict("viscosity_fit_intercept_small", intercept <= 0.1 * h_max,
                f"intercept {intercept!r} vs 10% of max pair H {0.1 * h_max!r}"),
    ]
    return StudyReport(
        kind="viscosity",
        inputs=[("eps_list", _fmt_list(eps_list)), ("t_end", repr(base.t_end)),
                ("dt", repr(dt)), ("cells", str(base.cells)), ("chi", repr(base.chi))],
        columns=("eps_a", "eps_b", "eps_sum", "l1", "H"),
        rows=rows,
        verdicts=verdicts,
        notes=[f"fit H = {slope!r} * (eps+delta) + {intercept!r}",
               f"through-origin slope {origin_slope!r}"],
    )


def contraction_study(cfg1: RunConfig, cfg2: RunConfig,
                      h_slack_per_step: float = 1e-8) -> StudyReport:
    """Advance two inviscid runs on one time mesh and track the relative
    entropy between them together with its two dissipation integrals.

    Verdicts: H never increases by more than ``h_slack_per_step * H(0)`` per
    time step; both dissipation terms stay nonnegative; and if the two
    initial fields coincide, H stays below 1e-12 throughout.
    """
    if cfg1.eps != 0.0 or cfg2.eps != 0.0:
        raise ValueError("contraction study requires eps = 0 in both runs")
    grid1, u = build_problem(cfg1)
    grid2, v = build_problem(cfg2)
    if grid1 != grid2:
        raise ValueError("contraction study requires a shared grid")
    if u.values.min() <= 0.0 or v.values.min() <= 0.0:
        raise ValueError("contraction study requires strictly positive initial data")

    controls = build_controls(cfg1)
    dt = controls.dt if controls.dt is not None else cfl_dt(grid1, 0.0, controls.cfl_safety)
    t_end = cfg1.t_end
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    dt = t_end / n_steps
    shared = replace(controls, dt=dt)
    params1 = build_params(cfg1)
    params2 = build_params(cfg2)
    stride = cfg1.diag_stride
    sigma = _sigma_for(cfg1, v)
    identical = bool(np.array_equal(u.values, v.values))

    def probe(t, a, b):
        h = relative_entropy(a, b, sigma=sigma)
        d1, d2 = dissipation_terms(a, b, chi=cfg1.chi)
        return (t, h, d1, d2)

    rows = [probe(0.0, u, v)]
    steps_between = [0]
    last_recorded = 0
    for k in range(1, n_steps + 1):
        u = step_explicit(u, params1, shared)
        v = step_explicit(v, params2, shared)
        if k % stride == 0 or k == n_steps:
            t = t_end if k == n_steps else k * dt
            rows.append(probe(t, u, v))
            steps_between.append(k - last_recorded)
            last_recorded = k

    h0 = rows[0][1]
    slack = h_slack_per_step * h0
    mono_ok = True
    worst = 0.0
    for idx in range(1, len(rows)):
        rise = rows[idx][1] - rows[idx - 1][1]
        allowed = slack * steps_between[idx]
        worst = max(worst, rise - allowed)
        if rise > allowed:
            mono_ok = False
    d_ok = all(r[2] >= 0.0 and r[3] >= 0.0 for r in rows)
    h_all = [r[1] for r in rows]

    verdicts = [
        Verdict("contraction_H_nonincreasing", mono_ok,
                f"worst rise beyond slack {worst!r} with slack/step {slack!r}"),
        Verdict("contraction_dissipation_nonneg", d_ok,
                f"min D1 {min(r[2] for r in rows)!r} min D2 {min(r[3] for r in rows)!r}"),
    ]
    if identical:
        verdicts.append(Verdict("contraction_identity", max(h_all) <= 1e-12,
                                f"max H {max(h_all)!r} for identical data"))
    return StudyReport(
        kind="contraction",
        inputs=[("t_end", repr(t_end)), ("dt", repr(dt)), ("steps", str(n_steps)),
                ("sigma", repr(sigma)), ("chi", repr(cfg1.chi)),
                ("identical_data", str(identical))],
        columns=("time", "H", "D1", "D2"),
        rows=rows,
        verdicts=verdicts,
        notes=[f"H(0) = {h0!r}"],
    )


def _envelope(records, p_norm: float, exponent: float) -> float:
    best = 0.0
    for rec in records:
        if rec.time <= 0.0:
            continue
        best = max(best, rec.sup_norm / (p_norm * (1.0 + rec.time**-exponent)))
    return best


def smoothing_study(base: RunConfig, p: float | None = None, spike_widths=None,
                    threads: int | None = None) -> StudyReport:
    """Probe the sup-norm smoothing bound on an Lp-normalized spike family.

    Each spike (widths w, w/2, ... with equal Lp norm) runs inviscid; the
    envelope constant C_hat = max_t sup(t) / (|rho_in|_p (1 + t^{-d/2p}))
    must be stable (within a factor 2) across the family. A second envelope
    with the alternative exponent (d+2)/(2p) is reported without a verdict.
    The pure-diffusion control (limiter pinned to 1 by chi = 0) reruns the
    family to width-matched probe times t = w^2, where the sup values follow
    the classical power law; the fitted log-log slope must land within 10%
    of -d/(2p).
    """
    p = float(base.study_p if p is None else p)
    widths = tuple(float(w) for w in (base.spike_widths if spike_widths is None else spike_widths))
    if len(widths) < 2:
        raise ValueError("need at least two spike widths")
    if any(w2 >= w1 for w1, w2 in zip(widths, widths[1:])):
        raise ValueError("spike widths must be strictly decreasing")
    threads = base.threads if threads is None else threads
    if base.eps != 0.0:
        raise ValueError("smoothing study runs with eps = 0")

    cfg = replace(base, ic="spike", ic_p=p)
    grid, _ = build_problem(cfg)
    d = grid.dim
    exp_main = d / (2.0 * p)
    exp_alt = (d + 2.0) / (2.0 * p)
    controls = build_controls(base)
    dt = controls.dt if controls.dt is not None else cfl_dt(grid, 0.0, controls.cfl_safety)
    shared = replace(controls, dt=dt)
    params = build_params(cfg)

    def make_limited_job(w):
        def job():
            spike = poly_spike(grid, w, p, p_norm=cfg.ic_pnorm)
            return run(spike, params, shared, cfg.t_end, diag_stride=cfg.diag_stride,
                       p_set=cfg.p_set, grad_p_set=cfg.grad_p_set)
        return job

    def make_heat_job(w):
        def job():
            spike = poly_spike(grid, w, p, p_norm=cfg.ic_pnorm)
            heat_params = build_params(replace(cfg, chi=0.0))
            traj = run(spike, heat_params, shared, w * w, diag_stride=10**9)
            return traj.records[-1]
        return job

    limited = _run_many([make_limited_job(w) for w in widths], threads)
    heat = _run_many([make_heat_job(w) for w in widths], threads)

    rows = []
    c_main = []
    c_alt = []
    for w, traj in zip(widths, limited):
        cm = _envelope(traj.records, cfg.ic_pnorm, exp_main)
        ca = _envelope(traj.records, cfg.ic_pnorm, exp_alt)
        c_main.append(cm)
        c_alt.append(ca)
        for rec in traj.records:
            rows.append(("limited", w, rec.time, rec.sup_norm))
    for w, rec in zip(widths, heat):
        rows.append(("heat", w, rec.time, rec.sup_norm))

    ratio = max(c_main) / min(c_main)
    log_t = np.log([w * w for w in widths])
    log_s = np.log([rec.sup_norm for rec in heat])
    heat_slope = float(np.polyfit(log_t, log_s, 1)[0])
    slope_err = abs(heat_slope - (-exp_main)) / exp_main

    verdicts = [
        Verdict("smoothing_envelope_stable", ratio <= 2.0,
                f"C_hat per width {_fmt_list(c_main)} spread factor {ratio!r}"),
        Verdict("smoothing_heat_slope", slope_err <= 0.10,
                f"fitted slope {heat_slope!r} target {-exp_main!r} relative error {slope_err!r}"),
    ]
    return StudyReport(
        kind="smoothing",
        inputs=[("p", repr(p)), ("widths", _fmt_list(widths)), ("t_end", repr(cfg.t_end)),
                ("dt", repr(dt)), ("chi", repr(cfg.chi)), ("cells", str(cfg.cells))],
        columns=("phase", "width", "time", "sup"),
        rows=rows,
        verdicts=verdicts,
        notes=[f"envelope exponent {exp_main!r} alternative {exp_alt!r}",
               f"alternative-envelope constants {_fmt_list(c_alt)}"],
    )


def monotonicity_test(samples: int = 100_000, dims=(1, 2, 3), c_list=(0.1, 1.0, 10.0),
                      seed: int = 0) -> StudyReport:
    """Seeded sampling oracle for the flux-map pairing inequality.

    For every (dimension, threshold) combination the clamped map must give a
    nonnegative pairing against w - z (up to 1e-12 roundoff); the same
    sampling through the non-clamped map must exhibit a clearly negative
    gap, demonstrating that the positive part is what buys monotonicity.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    rows = []
    worst_clamped = np.inf
    worst_unclamped = np.inf
    for c in c_list:
        for d in dims:
            w = rng.uniform(-10.0, 10.0, size=(samples, d))
            z = rng.uniform(-10.0, 10.0, size=(samples, d))
            g_c = float(np.min(monotone_gap(w, z, c)))
            g_u = float(np.min(unclamped_gap(w, z, c)))
            worst_clamped = min(worst_clamped, g_c)
            worst_unclamped = min(worst_unclamped, g_u)
            rows.append((int(d), float(c), g_c, g_u))
    verdicts = [
        Verdict("monotone_min_gap", worst_clamped >= -1e-12,
                f"min clamped gap {worst_clamped!r}"),
        Verdict("unclamped_negative", worst_unclamped < -1e-6,
                f"min non-clamped gap {worst_unclamped!r}"),
    ]
    return StudyReport(
        kind="monotonicity",
        inputs=[("samples", str(samples)), ("dims", " ".join(str(d) for d in dims)),
                ("c_list", _fmt_list(c_list)), ("seed", str(seed))],
        columns=("dim", "c", "min_gap_clamped", "min_gap_unclamped"),
        rows=rows,
        verdicts=verdicts,
        notes=[],
    )
