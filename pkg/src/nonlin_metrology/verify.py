"""Self-test suite: every module's identities checked on randomized inputs.

``run_suite(full=False)`` is the fast version (a few seconds); ``full=True``
uses the acceptance-size grids.  Each check reports the worst value seen and
the tolerance it is held to.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errorprop import RESIDUAL_TOL, interleaved_error, pull_through, sandwich_diagonal
from .generators import Generator, Linear, Plateau, PowerLaw, emergent_error, encoding_unitary, kerr
from .hilbert import (
    PureState,
    ShiftError,
    SpectrumSet,
    apply_diagonal,
    apply_shift,
    haar_sample,
    superposition,
)
from .lindblad import (
    build_binomial_code,
    no_jump_probability,
    recovered_fidelity_curve,
)
from .metrics import (
    average_fidelity,
    critical_phase_bound,
    crossover_phase,
    haar_states_surviving_shift,
    monte_carlo_average_fidelity,
    overlap_before_after,
)
from .qfi import loglog_slope, qfi_difference_scaling, qfi_heralded, qfi_nuisance, qfi_pure
from .sweeps import fidelity_onset, heatmap_row, level_crossings


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: {self.value:.3e} (tol {self.tol:.1e}){extra}"


def _upper(name, value, tol, detail="") -> Check:
    return Check(name, float(value), tol, bool(value <= tol), detail)


# -- random inputs ------------------------------------------------------------


def random_space(rng: np.random.Generator, max_dim: int = 17) -> SpectrumSet:
    kind = rng.integers(3)
    if kind == 0:
        return SpectrumSet.bosonic(int(rng.integers(1, max_dim)))
    if kind == 1:
        return SpectrumSet.rotor(int(rng.integers(1, max_dim // 2 + 1)))
    return SpectrumSet.spin(int(rng.integers(1, max_dim)))


def random_generator(rng: np.random.Generator, space: SpectrumSet) -> Generator:
    """Linear, power (z in {1.5, 2, 3}) or plateau; fractional powers avoid negative labels."""
    while True:
        pick = rng.integers(5)
        if pick == 0:
            return Linear(float(rng.uniform(-2, 2)))
        if pick == 4:
            return Plateau(int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        z = (1.5, 2.0, 3.0)[pick - 1]
        if z == 1.5 and space.bottom < 0:
            continue
        return PowerLaw(z)


def commutation_case(rng: np.random.Generator):
    """(g, shift error, phi, state) for the pull-through identity."""
    space = random_space(rng)
    g = random_generator(rng, space)
    k = int(rng.integers(-5, 6))
    e = ShiftError(k, float(rng.uniform(-math.pi, math.pi)))
    phi = float(rng.uniform(-math.pi, math.pi))
    return g, e, phi, haar_sample(space, rng)


# -- individual checks --------------------------------------------------------


def check_commutation(cases: int, seed: int) -> Check:
    rng = np.random.default_rng([seed, 1])
    worst = max(pull_through(*commutation_case(rng)).residual for _ in range(cases))
    return _upper("commutation U E = V E U", worst, RESIDUAL_TOL, f"{cases} random tuples")


def check_sandwich(cases: int, seed: int) -> Check:
    """E^dag V E equals the sandwich diagonal on every basis label."""
    rng = np.random.default_rng([seed, 2])
    worst = 0.0
    for _ in range(cases):
        g, e, phi, psi = commutation_case(rng)
        e = ShiftError(e.k)
        space = psi.space
        sand = sandwich_diagonal(g, e.k, phi, space)
        v = emergent_error(g, e.k, phi, space)
        back = ShiftError(-e.k)
        for i, label in enumerate(space.labels):
            basis = np.zeros(space.dim, complex)
            basis[i] = 1
            out = apply_shift(back, apply_diagonal(v, apply_shift(e, PureState(space, basis)))).amplitudes
            expected = np.zeros(space.dim, complex)
            expected[i] = sand.diagonal[i]
            worst = max(worst, float(np.max(np.abs(out - expected))))
    return _upper("sandwich E^dag V E diagonal", worst, RESIDUAL_TOL, f"{cases} random tuples")


def check_interleaved(cases: int, seed: int) -> Check:
    rng = np.random.default_rng([seed, 3])
    worst = 0.0
    for _ in range(cases):
        g, e, phi, psi = commutation_case(rng)
        theta = phi * float(rng.uniform(0, 1))
        out = interleaved_error(g, e.k, phi, theta, psi)
        ref = apply_diagonal(
            emergent_error(g, e.k, theta, psi.space),
            apply_shift(ShiftError(e.k), apply_diagonal(encoding_unitary(g, phi, psi.space), psi)),
        )
        worst = max(worst, float(np.linalg.norm(out.amplitudes - ref.amplitudes)))
    return _upper("interleaved error U(t) E U(phi - t)", worst, RESIDUAL_TOL, f"{cases} random tuples")


def check_critical_phase_overlap(states: int, cutoff: int, seed: int) -> Check:
    """min over Haar states of overlap - (1 - eps - 10 eps^2) at the critical phase bound."""
    eps = 0.01
    floor = 1 - eps - 10 * eps**2
    space = SpectrumSet.bosonic(cutoff)
    margin = math.inf
    for i, z in enumerate((1.5, 2.0, 3.0)):
        g = PowerLaw(z)
        for k in (1, 2, 3):
            phi = critical_phase_bound(g, k, eps, cutoff).bound_phi
            for psi in haar_states_surviving_shift(space, k, states, np.random.default_rng([seed, 4, i, k])):
                margin = min(margin, overlap_before_after(g, k, phi, psi) - floor)
    return Check(
        "critical-phase overlap margin", margin, 0.0, margin >= 0, f"{states} states x 9 cells, D={cutoff}"
    )


def _mc_cases(count: int, seed: int):
    rng = np.random.default_rng([seed, 5])
    cases = []
    while len(cases) < count:
        z = float(rng.choice([1.5, 2.0, 2.5, 3.0]))
        k = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        phi = float(rng.uniform(0.005, 0.3)) / z
        cases.append((PowerLaw(z), k, phi))
    return cases


def check_monte_carlo(count: int, samples: int, seed: int, dim: int = 16) -> Check:
    space = SpectrumSet.bosonic(dim - 1)
    worst = 0.0
    for i, (g, k, phi) in enumerate(_mc_cases(count, seed)):
        est = monte_carlo_average_fidelity(g, k, phi, space, samples, np.random.default_rng([seed, 6, i]))
        worst = max(worst, abs(est.mean - average_fidelity(g, k, phi, dim)) / est.stderr)
    edge = max(
        abs(average_fidelity(PowerLaw(2.0), 1, 0.0, dim) - 1),
        abs(average_fidelity(Linear(1.3), 2, 0.7, dim) - 1),
    )
    if edge != 0:
        worst = math.inf
    return _upper("Monte-Carlo vs analytic average fidelity [sigma]", worst, 3.0, f"{count} tuples, {samples} samples")


def check_kerr_limit(cutoff: int = 200) -> Check:
    worst = 0.0
    g = kerr()
    for k in range(-10, 11):
        if k == 0:
            continue
        for x in np.linspace(-math.pi, math.pi, 41):
            phi = x / (cutoff * k)
            if phi == 0:
                continue
            sinc2 = (math.sin(x) / x) ** 2 if x else 1.0
            worst = max(worst, abs(average_fidelity(g, k, phi, cutoff + 1) - sinc2))
    return _upper("Kerr average vs sinc^2 limit", worst, 0.01, f"D={cutoff}")


def check_heatmap() -> Check:
    dim, phi = 201, math.pi / 2000
    ks = np.round(np.arange(-100, 101) / 10, 10)
    linear = float(np.max(np.abs(heatmap_row(1.0, ks, phi, dim) - 1)))
    row2 = heatmap_row(2.0, ks, phi, dim)
    f21 = float(row2[np.isclose(ks, 1)][0])
    _, upper = level_crossings(ks, row2, 0.9)
    f32 = float(heatmap_row(3.0, np.array([2.0]), phi, dim)[0])
    ok = linear <= 1e-9 and abs(f21 - 0.9675) <= 0.01 and 1 < upper < 2 and f32 <= 0.1
    return Check(
        "heatmap anchors", abs(f21 - 0.9675), 0.01, ok,
        f"z=1 dev {linear:.1e}, F(2,1)={f21:.4f}, contour k={upper:.3f}, F(3,2)={f32:.4f}",
    )


def check_qfi(cases: int, seed: int) -> Check:
    rng = np.random.default_rng([seed, 7])
    worst = 0.0
    for _ in range(cases):
        cutoff = int(rng.integers(3, 20))
        space = SpectrumSet.bosonic(cutoff)
        g = PowerLaw(float(rng.choice([1.0, 1.5, 2.0, 3.0])))
        lo, hi = sorted(rng.choice(cutoff + 1, 2, replace=False))
        scale = max(1.0, float(g(hi) - g(lo)) ** 2)
        worst = max(worst, abs(qfi_pure(g, superposition(space, [lo, hi])) - float(g(hi) - g(lo)) ** 2) / scale)
        k = int(rng.integers(-2, 3))
        labels = np.arange(max(0, -k), cutoff + 1 - max(0, k))
        weights = rng.normal(size=len(labels)) + 1j * rng.normal(size=len(labels))
        psi = superposition(space, labels.tolist(), weights)
        p = psi.probabilities
        shifted = g(space.labels[p > 0] + k)
        var = float(np.sum(p[p > 0] * shifted**2) - np.sum(p[p > 0] * shifted) ** 2)
        scale = max(1.0, 4 * abs(var))
        worst = max(worst, abs(qfi_heralded(g, k, psi) - 4 * var) / scale)
        res = qfi_nuisance(g, k, psi)
        i_pp = res.matrix.i_phiphi
        bad = (not res.matrix.is_psd()) or res.effective < 0 or res.effective > i_pp * (1 + 1e-12)
        if bad:
            worst = math.inf
        lin = qfi_nuisance(Linear(1.0), k, psi)
        worst = max(worst, abs(lin.effective - lin.matrix.i_phiphi) / max(1.0, lin.matrix.i_phiphi))
    return _upper("QFI identities (relative)", worst, 1e-10, f"{cases} random tuples")


def check_qfi_slope() -> Check:
    space = SpectrumSet.bosonic(11)
    pairs = qfi_difference_scaling(kerr(), 1, superposition(space, [2, 10]), [1e-2, 1e-4, 1e-6])
    slope = loglog_slope(pairs)
    return Check("QFI-difference log-log slope", slope, 1.1, 0.4 <= slope <= 1.1, "accepted range [0.4, 1.1]")


def check_lindblad(full: bool) -> list:
    space = SpectrumSet.bosonic(30)
    code = build_binomial_code(space)
    checks = [
        _upper("codeword no-loss probability offset", abs(no_jump_probability(code.codeword_minus, 0.01) - 0.887), 1e-3)
    ]
    grids = {1.0: [0.0, 0.5, 2.0], 2.0: [0.01, 1.0, 2.0]}
    if full:
        grids = {
            1.0: list(np.linspace(0, 2, 9)),
            2.0: list(np.logspace(-3, math.log10(2), 25)),
            3.0: list(np.logspace(-4, math.log10(0.5), 25)),
            4.0: list(np.logspace(-5, math.log10(0.05), 25)),
        }
    tables = {z: recovered_fidelity_curve(PowerLaw(z), grid, 0.01, 1.0, code) for z, grid in grids.items()}
    trace = max(float(t.column("trace_error").max()) for t in tables.values())
    eig = min(float(t.column("min_eigenvalue").min()) for t in tables.values())
    checks.append(_upper("Lindblad trace drift", trace, 1e-8))
    checks.append(Check("Lindblad min eigenvalue", eig, -1e-8, eig >= -1e-8))
    lin = tables[1.0].column("fidelity_recovered")
    lin_ok = lin.min() >= 0.985 and lin.max() <= 1.0 and np.ptp(lin) <= 0.01
    checks.append(Check("linear recovered fidelity spread", float(np.ptp(lin)), 0.01, lin_ok, f"min {lin.min():.4f}"))
    kerr_table = tables[2.0]
    big = kerr_table.column("fidelity_recovered")[kerr_table.column("phi") >= 0.7]
    dev = float(np.max(np.abs(big - 0.90)))
    checks.append(_upper("Kerr recovered plateau |F - 0.90|", dev, 0.02))
    if full:
        onsets = [
            fidelity_onset(tables[z].column("phi"), tables[z].column("fidelity_recovered")) for z in (2.0, 3.0, 4.0)
        ]
        ok = all(math.isfinite(o) for o in onsets) and onsets[0] > onsets[1] > onsets[2]
        checks.append(Check("onset phi decreasing in z", onsets[-1], 0.0, ok, ", ".join(f"{o:.3g}" for o in onsets)))
    return checks


# -- recorded formula disagreements -------------------------------------------


def printed_average_fidelity(g: Generator, k: int, phi: float, cutoff: int) -> float:
    """Averaged fidelity with D + 1 summed labels normalised by D (D + 1), as printed."""
    n = np.arange(cutoff + 1)
    trace = np.sum(np.exp(-1j * phi * (g(n + k) - g(n))))
    return float((cutoff + abs(trace) ** 2) / (cutoff * (cutoff + 1)))


def discrepancy_lines(seed: int = 0) -> list:
    lines = ["Recorded formula disagreements (oracle | printed):"]
    g = kerr()
    for cutoff, phi in ((1, 0.0), (15, 0.0), (15, 0.05)):
        dim = cutoff + 1
        est = monte_carlo_average_fidelity(
            g, 1, phi, SpectrumSet.bosonic(cutoff), 20000, np.random.default_rng([seed, 9, cutoff])
        )
        lines.append(
            f"  averaged fidelity  D={cutoff:<3d} phi={phi:<5g} corrected={average_fidelity(g, 1, phi, dim):.6f} "
            f"monte-carlo={est.mean:.6f}+-{est.stderr:.1e} | printed={printed_average_fidelity(g, 1, phi, cutoff):.6f}"
        )
    for dim, eps in ((64, 0.1), (201, 0.05)):
        cross = crossover_phase(g, 1, dim, eps)
        lines.append(
            f"  crossover phase    d={dim:<3d} eps={eps:<4g} numeric={cross.numeric:.6e} "
            f"series={cross.series_formula:.6e} | printed={cross.printed_formula:.6e}"
        )
    m, n = 10, 50
    space = SpectrumSet.bosonic(n + 1)
    psi = superposition(space, [m, n])
    for label, gen in (("linear", Linear(1.0)), ("kerr", g)):
        res = qfi_nuisance(gen, 1, psi)
        lines.append(
            f"  effective QFI M={m} N={n} k=1 {label:<6s} matrix J={res.effective:.6g} "
            f"(I_phiphi={res.matrix.i_phiphi:.6g}) | printed={res.printed_closed_form:.6g}"
        )
    return lines


# -- driver -------------------------------------------------------------------


def run_suite(full: bool = False, seed: int = 1, out: Callable[[str], None] = print) -> list:
    sizes = (
        dict(commutation=1000, sandwich=200, interleaved=200, states=1000, cutoff=100, mc=20, samples=100_000, qfi=1000)
        if full
        else dict(commutation=200, sandwich=40, interleaved=50, states=100, cutoff=30, mc=3, samples=20_000, qfi=200)
    )
    steps = [
        lambda: [check_commutation(sizes["commutation"], seed)],
        lambda: [check_sandwich(sizes["sandwich"], seed)],
        lambda: [check_interleaved(sizes["interleaved"], seed)],
        lambda: [check_critical_phase_overlap(sizes["states"], sizes["cutoff"], seed)],
        lambda: [check_monte_carlo(sizes["mc"], sizes["samples"], seed)],
        lambda: [check_kerr_limit()],
        lambda: [check_heatmap()],
        lambda: [check_qfi(sizes["qfi"], seed)],
        lambda: [check_qfi_slope()],
        lambda: check_lindblad(full),
    ]
    checks = []
    start = time.perf_counter()
    for step in steps:
        for check in step():
            out(check.line())
            checks.append(check)
    for line in discrepancy_lines(seed):
        out(line)
    out(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed in {time.perf_counter() - start:.1f} s")
    return checks
