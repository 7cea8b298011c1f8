"""Acceptance checks shared by ``epcont verify`` and the test suite.

Each ``criterion_N(seed)`` returns a list of :class:`CheckResult`; a
criterion passes when all of its results pass.
"""

from __future__ import annotations

import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import boundstates as bs
from . import evolution as ev
from . import jost, scattering
from .oracle import CrankNicolson, fd_first_derivative, fd_second_derivative, integrate_jost, jost_r_max
from .potential import CANONICAL, ModelParams, potential_v4, validate_no_singularity

__all__ = [
    "CheckResult",
    "random_valid_params",
    "CRITERIA",
    "run_criteria",
    "summary_line",
    "worker_count",
    "doublet_cn_errors",
    "packet_norm_variation",
    "oracle_flatness",
    "cn_doublet_states",
    "config_checks",
]


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    measured: float
    tolerance: float
    passed: bool
    note: str = ""
    gating: bool = True  # informational results never fail a criterion

    def line(self) -> str:
        status = ("PASS" if self.passed else "FAIL") if self.gating else "INFO"
        extra = f"  ({self.note})" if self.note else ""
        return f"{status}  [{self.criterion}] {self.name}: measured {self.measured:.3e}, tolerance {self.tolerance:.1e}{extra}"


def _le(c, name, measured, tol, note=""):
    measured = float(measured)
    return CheckResult(c, name, measured, tol, bool(measured <= tol), note)


def _within(c, name, measured, target, tol, note=""):
    dev = abs(float(measured) - target)
    return CheckResult(c, name, float(measured), tol, bool(dev <= tol), note or f"target {target} +- {tol}")


def worker_count() -> int:
    """Worker cap from EPCONT_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("EPCONT_THREADS", "1")))
    except ValueError:
        return 1


def random_valid_params(rng: np.random.Generator, n: int) -> list[ModelParams]:
    """Draw ``n`` parameter sets with W1(q, r) > 0 on r >= 0."""
    out = []
    while len(out) < n:
        a = rng.uniform(0.2, 2.5)
        b = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 4.0)
        q = rng.uniform(0.4, 2.0)
        p = ModelParams(a, b, q)
        if validate_no_singularity(p) is None:
            out.append(p)
    return out


def _residual(f, r, h, vin, e):
    """max |-f'' + (V - e) f| / max |f| on the stencil interior."""
    res = -fd_second_derivative(f, h) + (vin - e) * f[2:-2]
    return np.max(np.abs(res)) / np.max(np.abs(f[2:-2]))


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# -- 1 --------------------------------------------------------------------


def criterion_1(seed: int = 0):
    """Finite-difference residuals of f+-, psi_s, psi_B, chi_B on [0.5, 30]."""
    rng = np.random.default_rng(seed)
    h = 1e-3
    r = np.arange(0.5 - 2 * h, 30 + 2.5 * h, h)
    worst = {"f+": 0.0, "f-": 0.0, "psi_s": 0.0, "psi_B": 0.0, "chi_B": 0.0}

    def one(p):
        vin = potential_v4(p, r[2:-2])
        out = {}
        for x in (0.3, 0.7, 1.5, 3.0):
            k = x * p.q
            e = k * k
            out["f+"] = max(out.get("f+", 0), _residual(jost.jost_unnormalized(p, k, r, +1), r, h, vin, e))
            out["f-"] = max(out.get("f-", 0), _residual(jost.jost_unnormalized(p, k, r, -1), r, h, vin, e))
            out["psi_s"] = max(out.get("psi_s", 0), _residual(scattering.psi_regular(p, k, r), r, h, vin, e))
        r1, r2, s1, s2 = bs.jordan_chain_residuals(p, 0.5, 30.0, h)
        out["psi_B"], out["chi_B"] = r1 / s1, r2 / s2
        return out

    with ThreadPoolExecutor(worker_count()) as pool:
        for out in pool.map(one, random_valid_params(rng, 20)):
            for key, val in out.items():
                worst[key] = max(worst[key], val)
    return [_le(1, f"ODE residual {key} (20 params x 4 k)", val, 1e-6) for key, val in worst.items()]


# -- 2 --------------------------------------------------------------------


def _oracle_pairs(seed: int):
    rng = np.random.default_rng(seed + 1)
    pairs = [(CANONICAL, x) for x in (0.3, 0.7, 1.5, 2.5)]
    for p in random_valid_params(rng, 40):
        if len(pairs) == 10:
            break
        x = rng.uniform(0.3, 3.0)
        # integer k/q resonates with the 2nq harmonics of V4; keep clear of them
        if min(abs(x - n) for n in (1, 2, 3)) > 0.1:
            pairs.append((p, x * p.q))
    return pairs


def oracle_flatness(p: ModelParams, k: float, n: int = 400) -> float:
    R = jost_r_max(p, k)
    r = np.linspace(0.5, R / 2, n)
    ratio = integrate_jost(p, k, r) / jost.jost_normalized(p, k, r, +1)
    ref = np.median(ratio.real) + 1j * np.median(ratio.imag)
    return float(np.max(np.abs(ratio - ref)) / abs(ref))


def criterion_2(seed: int = 0):
    """Inward ODE integration against the closed-form F+."""
    pairs = _oracle_pairs(seed)
    with ThreadPoolExecutor(worker_count()) as pool:
        flat = list(pool.map(lambda pk: oracle_flatness(*pk), pairs))
    return [_le(2, f"integrate_jost / F+ ratio flatness ({len(pairs)} pairs)", max(flat), 1e-5)]


# -- 3 --------------------------------------------------------------------


def criterion_3(seed: int = 0):
    """Wronskian of f+ and f- and its fourth-order coalescence at k = q."""
    rng = np.random.default_rng(seed + 2)
    h = 1e-3
    r = np.arange(0.5 - 2 * h, 30 + 2.5 * h, h)
    worst = 0.0
    for p in [CANONICAL] + random_valid_params(rng, 5):
        for x in (0.3, 0.7, 1.5, 3.0):
            k = x * p.q
            fp, fm = jost.jost_unnormalized(p, k, r, +1), jost.jost_unnormalized(p, k, r, -1)
            wr = fp[2:-2] * fd_first_derivative(fm, h) - fd_first_derivative(fp, h) * fm[2:-2]
            ref = jost.wronskian_closed(p, k)
            worst = max(worst, np.max(np.abs(wr - ref)) / abs(ref))
    p = CANONICAL
    rr = np.linspace(0.5, 30, 60)
    eps = np.geomspace(1e-3, 1e-2, 9) * p.q
    mags = []
    for e in eps:
        k = p.q + e
        fp, fm = jost.jost_unnormalized(p, k, rr, +1), jost.jost_unnormalized(p, k, rr, -1)
        dp, dm = jost.jost_unnormalized_prime(p, k, rr, +1), jost.jost_unnormalized_prime(p, k, rr, -1)
        mags.append(np.median(np.abs(fp * dm - dp * fm)))
    return [
        _le(3, "finite-difference Wronskian vs -2ik(k+q)^4(k-q)^4, r in [0.5, 30]", worst, 1e-7),
        _within(3, "log-log coalescence slope of |W| at k -> q", _slope(eps, mags), 4.0, 0.05),
    ]


# -- 4 --------------------------------------------------------------------


def criterion_4(seed: int = 0):
    """Quartic (k - q) expansion of w+- and its continuation to -q."""
    rng = np.random.default_rng(seed + 3)
    r = np.linspace(0.0, 30.0, 301)
    recon = cont = 0.0
    for p in [CANONICAL] + random_valid_params(rng, 9):
        rp = r / p.q
        E = scattering.expansion_coeffs(p, rp)
        for sign in (1, -1):
            for d in (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0):
                k = p.q + d * p.q
                ref = jost.reduced_wronskian(p, k, rp, sign)
                recon = max(recon, np.max(np.abs(E.reconstruct(k, sign) - ref)) / np.max(np.abs(ref)))
        C, F = scattering.continued_coeffs(p, rp), E.continued()
        for a, b in ((C.w_plus, F.w_plus), (C.w_minus, F.w_minus)):
            cont = max(cont, np.max(np.abs(a - b)) / np.max(np.abs(b)))
    return [
        _le(4, "quartic reconstruction of w+- for |k - q| <= 2q", recon, 1e-8),
        _le(4, "(-1)^l w_l(q) = w_l(-q) under continuation", cont, 1e-8),
    ]


# -- 5 --------------------------------------------------------------------


def criterion_5(seed: int = 0):
    """zeta_0, zeta_1, zeta_2 vanish."""
    rng = np.random.default_rng(seed + 4)
    ps = random_valid_params(rng, 200)
    worst = [0.0, 0.0, 0.0]
    for p in ps:
        r = rng.uniform(0.0, 30.0) / p.q
        for order in range(3):
            z, scale = scattering.zeta(p, r, order, return_scale=True)
            worst[order] = max(worst[order], float(np.abs(z) / scale))
    return [_le(5, f"zeta_{n} / constituent scale (200 draws)", worst[n], 1e-9) for n in range(3)]


# -- 6 --------------------------------------------------------------------


def _residue_error(p: ModelParams, phase: complex):
    r = np.linspace(0.5, 30.0, 300) / p.q
    res = scattering.irregular_residue(p, r)
    pb = bs.psi_b(p, r)
    return float(np.max(np.abs(res - phase * pb)) / np.max(np.abs(pb)))


def criterion_6(seed: int = 0):
    """psi_s vanishes at k = q; (k - q)^2 psi_is tends to psi_B."""
    rng = np.random.default_rng(seed + 5)
    p = CANONICAL
    r = np.linspace(0.0, 30.0, 601)
    at_q = float(np.max(np.abs(scattering.psi_regular(p, p.q, r))))
    # the slope is an asymptotic statement: keep eps * r <= 0.2 across the fit
    eps = np.geomspace(1e-3, 1e-1, 13) * p.q
    rs = np.linspace(0.0, 0.2 / eps.max(), 201)
    mags = [np.max(np.abs(scattering.psi_regular(p, p.q + e, rs, branch="generic"))) for e in eps]
    out = [
        _le(6, "series branch max_r |psi_s(q, r)|", at_q, 0.0, "identically zero"),
        _within(6, "log-log slope of max_r |psi_s| in |k - q| at (1, 3, 1)", _slope(eps, mags), 1.0, 0.05),
    ]
    # with delta(q) = 0 the residue statement holds as written
    flat = ModelParams(1.0, 1.0, 1.0)
    out.append(_le(6, "Richardson (k-q)^2 psi_is vs psi_B, delta(q) = 0", _residue_error(flat, 1.0), 1e-4))
    worst = max(_residue_error(x, np.exp(1j * x.delta)) for x in [p] + random_valid_params(rng, 5))
    out.append(_le(6, "Richardson (k-q)^2 psi_is vs e^{i delta} psi_B, 6 param sets", worst, 1e-4))
    lit = _residue_error(p, 1.0)
    out.append(
        CheckResult(6, "literal residue vs psi_B at (1, 3, 1), informational", lit, 1e-4, True,
                    f"differs by the phase e^(i delta), |1 - e^(i delta)| = {abs(1 - np.exp(1j * p.delta)):.3f}",
                    gating=False)
    )
    return out


# -- 7 --------------------------------------------------------------------


def criterion_7(seed: int = 0):
    """|S| = 1, continuity through k = q, S = exp(2 i Delta), Delta(0) = 0."""
    rng = np.random.default_rng(seed + 6)
    unit = dual = 0.0
    jump_ratio = 0.0
    d0 = 0.0
    for p in [CANONICAL] + random_valid_params(rng, 9):
        k = np.linspace(0.0, 4.0 * p.q, 4001)
        s = scattering.s_matrix(p, k)
        unit = max(unit, np.max(np.abs(np.abs(s) - 1)))
        dual = max(dual, np.max(np.abs(np.exp(2j * scattering.big_delta(p, k)) - s)))
        d0 = max(d0, abs(scattering.big_delta(p, 0.0)))
        kk = p.q + np.arange(-100, 101) * 1e-4
        jumps = np.abs(np.diff(scattering.s_matrix(p, kk)))
        jump_ratio = max(jump_ratio, jumps.max() / np.median(jumps))
    return [
        _le(7, "max ||S(k)| - 1| on k in [0, 4q]", unit, 1e-12),
        _le(7, "max jump of S on a 1e-4 grid through q, over median jump", jump_ratio, 2.0),
        _le(7, "max |exp(2i Delta) - S|", dual, 1e-10),
        _le(7, "|Delta(0)|", d0, 0.0),
    ]


# -- 8 --------------------------------------------------------------------


def criterion_8(seed: int = 0):
    """Jordan block algebra and the invariant-subspace residual."""
    rng = np.random.default_rng(seed + 7)
    out = []
    block_err = nil_err = eta_err = 0.0
    worst = 0.0
    for p in [CANONICAL] + random_valid_params(rng, 5):
        H = bs.jordan_block(p)
        q2 = p.q**2
        block_err = max(block_err, np.max(np.abs(H - np.array([[q2, 0.0], [2 * p.q, q2]]))))
        N = H - q2 * np.eye(2)
        nil_err = max(nil_err, np.max(np.abs(N @ N)))
        eta_err = max(eta_err, np.max(np.abs(bs.ETA @ H @ bs.ETA - H.T)))
        r1, r2, s1, s2 = bs.jordan_chain_residuals(p)
        worst = max(worst, r1 / s1, r2 / s2)
    out.append(_le(8, "H_B = [[q^2, 0], [2q, q^2]] exactly", block_err, 0.0))
    out.append(_le(8, "(H_B - q^2 I)^2 = 0 exactly", nil_err, 0.0))
    out.append(_le(8, "eta H_B eta = H_B^T exactly", eta_err, 0.0))
    out.append(_le(8, "doublet invariant-subspace residual", worst, 1e-6))
    return out


# -- 9 --------------------------------------------------------------------


def cn_doublet_states(p: ModelParams, times, r_inner: float, h: float = 0.01, dt: float = 2e-3):
    """Crank-Nicolson runs started from psi_B and from chi_B.

    The states are tapered to zero around 1.5 r_inner on a domain of length
    2 r_inner and returned on r < r_inner.  chi_B(0) is not zero, so the
    left wall of the chi_B run carries the value chi(0, t) = e^{-i q^2 t} chi_B(0).
    Returns (r, psi states, chi states), one state per entry of ``times``.
    """
    R = 2.0 * r_inner
    r = np.arange(1, int(round(R / h))) * h
    taper = 0.5 * (1 - np.tanh((r - 0.75 * R) / (0.04 * R)))
    cn = CrankNicolson(potential_v4(p, r), dt, h)
    inner = r < r_inner
    chi0 = float(bs.chi_b(p, 0.0))

    def wall(t):
        return np.exp(-1j * p.q**2 * t) * chi0

    psi = bs.psi_b(p, r) * taper + 0j
    chi = bs.chi_b(p, r) * taper + 0j
    psis, chis, t_now = [], [], 0.0
    for t in times:
        n = int(round((t - t_now) / dt))
        psi = cn.evolve(psi, n)
        chi = cn.evolve(chi, n, left=wall, t0=t_now)
        t_now = t
        psis.append(psi[inner])
        chis.append(chi[inner])
    return r[inner], psis, chis


def doublet_cn_errors(p: ModelParams = CANONICAL, times=(0.5, 1.0, 2.0), h: float = 0.01, dt: float = 2e-3):
    """(overlap at t = 1, chi_B relative L2 errors at ``times``) on r < 100/q."""
    ts = sorted(set(times) | {1.0})
    r, psis, chis = cn_doublet_states(p, ts, 100.0 / p.q, h, dt)
    pb = bs.psi_b(p, r)
    overlap = abs(np.sum(pb * psis[ts.index(1.0)])) / np.sum(pb * pb)
    errs = []
    for t in times:
        _, ref = ev.evolve_doublet(p, r, t)
        errs.append(ev.l2_norm(chis[ts.index(t)] - ref, r) / ev.l2_norm(ref, r))
    return float(overlap), errs


def packet_norm_variation(p: ModelParams, k0: float, r_max: float, sigma: float = 0.15, h: float = 0.05):
    pk = ev.gaussian_packet(k0, sigma * p.q, n=201, t0=5.0)
    r = np.linspace(0.0, r_max, int(round(r_max / h)) + 1)
    prop = ev.PacketPropagator(p, pk, r)
    times = np.linspace(0.0, 10.0, 21)
    norms = np.array([ev.l2_norm(prop(t, check=(t == times[-1])), r) for t in times])
    return float((norms.max() - norms.min()) / norms.mean())


def criterion_9(seed: int = 0):
    """Crank-Nicolson against the doublet; regular packet norm over t in [0, 10]."""
    p = CANONICAL
    overlap, errs = doublet_cn_errors(p)
    return [
        _le(9, "1 - |<psi_B(0)|psi_B(t=1)>| / ||psi_B||^2 (Crank-Nicolson)", 1 - overlap, 1e-4),
        _le(9, "Crank-Nicolson vs closed-form chi_B(t), t in {0.5, 1, 2}, L2", max(errs), 1e-3),
        _le(9, "packet norm variation, k0 = 2q, R = 100", packet_norm_variation(p, 2.0 * p.q, 100.0), 1e-3),
        _le(9, "packet norm variation, k0 = q, R = 300", packet_norm_variation(p, p.q, 300.0), 1e-3,
            "1/r tail near the exceptional point needs the larger R"),
    ]


# -- 10 -------------------------------------------------------------------


def _extrema_signs(f, count=3):
    d = np.diff(f)
    idx = np.nonzero(np.sign(d[1:]) != np.sign(d[:-1]))[0] + 1
    return [int(np.sign(f[i])) for i in idx[:count]]


def criterion_10(seed: int = 0, out_dir: str | None = None):
    """Figure data at (1, 3, 1) and k = 1.5, with programmatic shape checks."""
    from . import cli

    p = CANONICAL
    out = []
    with tempfile.TemporaryDirectory() as tmp:
        d = out_dir or tmp
        files = {
            "fig1": (["potential", "--r-max", "30", "--n", "3000"], "fig1_potential.csv"),
            "fig2_3": (["boundstates", "--r-max", "30", "--n", "3000"], "fig2_3_boundstates.csv"),
            "fig4_5": (["scattering", "--k", "1.5", "--r-max", "30", "--n", "3000"], "fig4_5_scattering.csv"),
            "fig6": (["scattering", "--k-min", "0", "--k-max", "4", "--n", "4001"], "fig6_phase_shift.csv"),
        }
        tables = {}
        for key, (args, name) in files.items():
            path = os.path.join(d, name)
            code = cli.main(args + ["--alpha", "1", "--beta", "3", "--q", "1", "--out", path])
            out.append(_le(10, f"{name} written (exit code)", code, 0))
            tables[key] = cli.read_csv(path)[1]

    v4 = tables["fig1"]["V4"]
    out.append(_le(10, "V4 first three extrema signs (-, +, -)", float(_extrema_signs(v4) != [-1, 1, -1]), 0.0))
    pb = tables["fig2_3"]["psi_B"]
    out.append(_le(10, "psi_B first three extrema signs (-, +, -)", float(_extrema_signs(pb) != [-1, 1, -1]), 0.0))
    rs = tables["fig4_5"]
    out.append(_le(10, "psi_s(1.5, 0) = 0", abs(rs["Re(psi_s)"][0]) + abs(rs["Im(psi_s)"][0]), 1e-12))

    delta = tables["fig6"]["Delta"]
    out.append(_le(10, "Delta(0) = 0", abs(delta[0]), 0.0))
    out.append(_le(10, "Delta continuity: max step on a 1e-3 grid", np.max(np.abs(np.diff(delta))), 0.05))
    # large-k limit of -arctan(v(k, 0)/u(k, 0)): Delta * k -> -4q(b^2 - 4abq + 5a^2q^2)/b
    a, b, q = p.alpha, p.beta, p.q
    lim = -4 * q * (b * b - 4 * a * b * q + 5 * a * a * q * q) / b
    kk = 1e4
    out.append(_le(10, "Delta(k) k -> large-k limit", abs(scattering.big_delta(p, kk) * kk - lim) / abs(lim), 1e-3))
    out.append(_le(10, "Delta < 0 on (0, 4]", float(np.max(delta[1:])), 0.0))
    return out


def config_checks(p: ModelParams):
    """Quick invariants for one user-supplied parameter set."""
    r1, r2, s1, s2 = bs.jordan_chain_residuals(p)
    k = np.linspace(0.0, 4.0 * p.q, 2001)
    s = scattering.s_matrix(p, k)
    r = np.linspace(0.0, 30.0, 61) / p.q
    zmax = max(float(np.max(np.abs(z) / sc)) for z, sc in (scattering.zeta(p, r, n, return_scale=True) for n in range(3)))
    return [
        _le(0, "chain residual psi_B (given params)", r1 / s1, 1e-6),
        _le(0, "chain residual chi_B (given params)", r2 / s2, 1e-6),
        _le(0, "max ||S| - 1| (given params)", np.max(np.abs(np.abs(s) - 1)), 1e-12),
        _le(0, "max zeta_n / scale (given params)", zmax, 1e-9),
    ]


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_criteria(seed: int = 0, which=None):
    """Run the selected criteria (default all) and return {N: [CheckResult]}."""
    which = sorted(CRITERIA) if which is None else which
    return {n: CRITERIA[n](seed) for n in which}


def summary_line(n: int, results) -> str:
    gating = [r for r in results if r.gating]
    ok = all(r.passed for r in gating)
    worst = max(gating, key=lambda r: (not r.passed, r.measured / r.tolerance if r.tolerance else r.measured))
    count = f"{len(results)} check{'s' if len(results) != 1 else ''}"
    return (
        f"{'PASS' if ok else 'FAIL'} criterion {n}: {count}, worst {worst.name} = "
        f"{worst.measured:.3e} (tol {worst.tolerance:.1e})"
    )

