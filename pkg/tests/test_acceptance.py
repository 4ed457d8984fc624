"""End-to-end acceptance criteria; each test prints one PASS/FAIL line."""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from paratree import anneal as an
from paratree import classical as cl
from paratree import mediators as med
from paratree import sw
from paratree import theorem as th
from paratree import verify as vf
from paratree.problems import TargetProblem, load_problem


@pytest.fixture
def verdict(capsys):
    def _verdict(number, checks, detail=""):
        failed = [name for name, ok in checks.items() if not ok]
        line = f"{'PASS' if not failed else 'FAIL'} criterion {number}: {detail}"
        if failed:
            line += f" | failed: {', '.join(failed)}"
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line
    return _verdict


def test_criterion_01_sw_constants(verdict):
    t0 = time.perf_counter()
    c, cs = sw.sw_constants(1 / 16)
    grid = np.linspace(1e-6, 1 / 16, 1000)
    vals = np.array([sw.sw_constants(x) for x in grid])
    c0, cs0 = sw.sw_constants(1e-12)
    dt = time.perf_counter() - t0
    verdict(1, {
        "c endpoint": abs(c - 16 * math.tan(0.25 * math.log(7 / 3))) <= 1e-12,
        "c_S endpoint": abs(cs - 16 * (math.sqrt(7 / 3) - 1)) <= 1e-12,
        "monotone": bool(np.all(np.diff(vals[:, 0]) > 0) and np.all(np.diff(vals[:, 1]) > 0)),
        "limits": abs(c0 - 2) < 1e-9 and abs(cs0 - 4) < 1e-9,
        "runtime": dt < 1,
    }, f"c(1/16)={c:.12f} c_S(1/16)={cs:.12f} ({dt:.2f}s)")


def test_criterion_02_lemma_audit(verdict):
    t0 = time.perf_counter()
    rep = sw.empirical_lemma_audit(trials=500, dims=(8, 64), seed=0)
    dt = time.perf_counter() - t0
    verdict(2, {"no violations": not rep["violations"], "runtime": dt < 120},
            f"violations={len(rep['violations'])} worst ratios first-order={rep['max_ratio_first_order']:.3f} "
            f"Z={rep['max_ratio_Z']:.3f} U={rep['max_ratio_U']:.3f} ({dt:.1f}s)")


def test_criterion_03_transmission_line(verdict):
    t0 = time.perf_counter()
    zeta_dev = max(abs(med.tl_zeta(n, r, s) - med.tl_zeta_modesum(n, r, s))
                   for n in range(2, 13) for r in range(1, n + 1) for s in range(1, n + 1))
    band = th.F_inverse_bounds_check(10_000)
    chi_dev, gap_dev = 0.0, 0.0
    for n, t in ((2, 10), (3, 12)):
        f = med.tl_numeric_facts(n, 1.0, t)
        chi_dev = max(chi_dev, float(np.max(np.abs(f["chi"] - 1 / (n + 1)))))
        gap_dev = max(gap_dev, abs(f["gap"] - med.tl_facts(n, 1.0).gap))
    dt = time.perf_counter() - t0
    verdict(3, {
        "zeta": zeta_dev <= 1e-10, "chi": chi_dev <= 1e-6,
        "F band": band["violations"] == [], "gap": gap_dev <= 1e-6, "runtime": dt < 180,
    }, f"zeta dev={zeta_dev:.1e} chi dev={chi_dev:.1e} band violations={len(band['violations'])} "
       f"gap dev={gap_dev:.1e} ({dt:.1f}s)")


def test_criterion_04_warmup(verdict):
    t0 = time.perf_counter()
    d4 = th.warmup_delta_max(4, 1.5, 10.0, 0.1, 0.1)
    d40 = th.warmup_delta_max(40, 1.5, 10.0, 0.1, 0.1)
    dt = time.perf_counter() - t0
    verdict(4, {"n=4": f"{d4:.0e}" == "8e-04", "n=40": f"{d40:.0e}" == "8e-05", "runtime": dt < 1},
            f"delta_max n=4 {d4:.3e}, n=40 {d40:.3e}")


PEGASUS_TARGETS = {
    "simple_2PV": (4.1e-7, 0.76, None),
    "PVQ_split": (0.9e-5, 0.37, 2.56e-4),
    "finite_dim": (1.1e-5, 0.42, 3.02e-4),
}


def test_criterion_05_pegasus40(verdict):
    t0 = time.perf_counter()
    inst = th.Pegasus40Instance()
    checks, parts = {}, []
    for flavor, (d_ref, J_ref, a_ref) in PEGASUS_TARGETS.items():
        r = th.pegasus40_optimize(inst, flavor)
        checks[f"{flavor} delta"] = abs(r.delta_max / d_ref - 1) <= 0.05
        checks[f"{flavor} J"] = abs(r.J_opt - J_ref) <= 0.03
        if a_ref is not None:
            checks[f"{flavor} alpha"] = abs(r.alpha / a_ref - 1) <= 0.05
        parts.append(f"{flavor} delta={r.delta_max:.3e} J={r.J_opt:.3f} alpha={r.alpha:.3e}")
    dt = time.perf_counter() - t0
    checks["runtime"] = dt < 60
    verdict(5, checks, "; ".join(parts))


def test_criterion_06_spectral_soundness(verdict, fixtures_dir):
    t0 = time.perf_counter()
    checks, parts = {}, []
    qubit = med.MediatorModel("qubit", 0.5)
    for n in (2, 3, 4):
        d = vf.design_gadget(load_problem(fixtures_dir / f"problem_n{n}_seed0.json"), qubit, epsilon=0.1)
        c = vf.verify_spectrum(d)
        checks[f"qubit n={n}"] = d.certified and c.epsilon_emp <= 0.1
        parts.append(f"qubit n={n} eps_emp={c.epsilon_emp:.1e} slack={0.1 / max(c.epsilon_emp, 1e-300):.1e}")
    p2 = load_problem(fixtures_dir / "problem_n2_seed0.json")
    for label, model, truncs in (("lc", med.MediatorModel("lc", 0.5, truncation=12), [12, 24]),
                                 ("tl", med.MediatorModel("tl", 1.0, truncation=4, n=2), [4, 6])):
        rows, converged = vf.truncation_sweep(vf.design_gadget(p2, model, epsilon=0.1), truncs)
        checks[f"{label} n=2"] = converged and all(r["epsilon_emp"] <= 0.1 for r in rows)
        parts.append(f"{label} n=2 eps_emp={rows[-1]['epsilon_emp']:.1e} converged={converged}")
    dt = time.perf_counter() - t0
    checks["runtime"] = dt < 600
    verdict(6, checks, "; ".join(parts) + f" ({dt:.0f}s)")


def test_criterion_07_anneal_crossover(verdict):
    t0 = time.perf_counter()
    rows = an.crossover_report(4)
    dt = time.perf_counter() - t0
    gap = {(r["k"], r["method"]): r["min_gap"] for r in rows}
    me = [gap[(k, "minor_embedding")] for k in (2, 3, 4)]
    c = an.fit_exponential([2, 3, 4], me)
    verdict(7, {
        "exponential decay": c > 0,
        "paramagnetic wins at k=4": gap[(4, "paramagnetic")] > gap[(4, "minor_embedding")],
        "coincide at k=1": abs(gap[(1, "paramagnetic")] - gap[(1, "minor_embedding")]) <= 1e-9,
        "runtime": dt < 900,
    }, f"c={c:.3f} k=4 gaps ME={me[-1]:.4f} para={gap[(4, 'paramagnetic')]:.4f} ({dt:.0f}s)")


def test_criterion_08_norm_scaling(verdict):
    t0 = time.perf_counter()
    ns = list(range(8, 21, 2))
    dense = cl.scaling_fit("all_to_all", ns, reps=40)
    sparse = cl.scaling_fit("sparse", ns, reps=40)
    pt_ok, pt_total = 0, 0
    for n in (8, 12, 16):
        for ensemble in cl.ENSEMBLES:
            inst = cl.random_instance(n, ensemble, seed=3)
            ref = cl.exact_extrema(inst)
            est = cl.pt_extrema(inst, restarts=10, seed=0)
            pt_total += 1
            pt_ok += (abs(est.e_min - ref.e_min) <= 1e-9 and abs(est.e_max - ref.e_max) <= 1e-9
                      and est.confidence >= 9)
    dt = time.perf_counter() - t0
    verdict(8, {
        "all-to-all exponent": 1.4 <= dense.a <= 1.8,
        "degree-3 exponent": 0.9 <= sparse.a <= 1.1,
        "PT agreement": pt_ok == pt_total,
        "runtime": dt < 600,
    }, f"a_all={dense.a:.3f} a_sparse={sparse.a:.3f} PT {pt_ok}/{pt_total} instances at >=9/10 ({dt:.0f}s)")


def test_criterion_09_duhamel(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = -np.inf
    for _ in range(100):
        d = int(rng.integers(2, 33))
        H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        dH = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H, dH = (H + H.conj().T) / 2, (dH + dH.conj().T) * rng.uniform(1e-4, 1) / 2
        lhs, rhs = sw.duhamel_check(H, dH, float(rng.uniform(0, 10)))
        worst = max(worst, lhs - rhs)
    dt = time.perf_counter() - t0
    verdict(9, {"bound": worst <= 1e-9, "runtime": dt < 30}, f"max(lhs - rhs)={worst:.2e} ({dt:.2f}s)")


def _k4(path):
    p = TargetProblem(n=4, s=1.5, J={(i, j): 1.0 for i in range(4) for j in range(i + 1, 4)})
    path.write_text(json.dumps(p.to_dict()))
    return str(path)


def test_criterion_10_determinism(verdict, fixtures_dir, tmp_path):
    k4 = _k4(tmp_path / "k4.json")
    commands = {
        "design": ["design", k4, "--mediator", "tl"],
        "verify": ["verify", str(fixtures_dir / "design_qubit_n3.json")],
        "warmup": ["warmup"],
        "pegasus40": ["pegasus40"],
        "gapscan": ["gapscan", "--kmax", "2", "--grid", "51", "--coarse", "3"],
        "normscale": ["normscale", "--n-list", "6,7,8,9", "--reps", "3"],
        "audit": ["audit", "--trials", "20"],
    }
    checks = {}
    for name, argv in commands.items():
        outs = [subprocess.run([sys.executable, "-m", "paratree", *argv], capture_output=True).stdout
                for _ in range(2)]
        checks[name] = bool(outs[0]) and outs[0] == outs[1]
    verdict(10, checks, f"{sum(checks.values())}/{len(checks)} commands byte-identical")
