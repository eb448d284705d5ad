"""Acceptance criteria. Each test prints one ``criterion N: PASS/FAIL`` line."""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from corpus import pair_corpus, pure_state_fidelities, random_code_states, triple_corpus
from oqec.algebra import (
    commutant,
    containment_residual,
    decompose_structure,
    fixed_points,
    generate_interaction_algebra,
    noise_commutant_blocks,
)
from oqec.correction import (
    build_standard_recovery,
    check_correctable_triple,
    check_standard_condition,
    check_unified_condition,
    convert_to_standard,
    mix_kraus,
    rotate_decomposition,
    theorem2_necessity_audit,
    transform_lambda,
)
from oqec.matrix_core import compose, random_unitary
from oqec.subsystems import check_ns, check_theorem1, code_decomposition, leak_into_code
from oqec.zoo import default_fixtures, fixture, random_mixed_unitary_channel

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    def _report(n, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
        assert ok, detail

    return _report


@pytest.fixture(scope="module")
def pairs():
    return pair_corpus()


@pytest.fixture(scope="module")
def triples():
    return triple_corpus()


def test_criterion_1_ns_variants_agree(pairs, verdict):
    start = time.perf_counter()
    disagree = []
    for p in pairs:
        oks = [check_ns(p.channel, p.decomposition, v).ok for v in (1, 2, 3)]
        if len(set(oks)) != 1:
            disagree.append(p.name)
    elapsed = time.perf_counter() - start
    n_ok = sum(check_ns(p.channel, p.decomposition, 1).ok for p in pairs)
    ok = len(pairs) >= 200 and not disagree and elapsed <= 60
    verdict(1, ok, f"{len(pairs)} pairs, {n_ok} noiseless, {len(disagree)} disagreements, {elapsed:.1f}s")


def test_criterion_2_sector_condition_iff_ns(pairs, verdict):
    mismatch, worst = [], 0.0
    for p in pairs:
        ns_ok = check_ns(p.channel, p.decomposition, 1).ok
        t1_ok, lam = check_theorem1(p.channel, p.units)
        if ns_ok != t1_ok:
            mismatch.append(p.name)
        if t1_ok:
            worst = max(worst, lam.max_residual)
    ok = len(pairs) >= 200 and not mismatch and worst <= 1e-7
    verdict(2, ok, f"{len(mismatch)} mismatches, worst passing residual {worst:.2e}")


def test_criterion_3_necessity(triples, verdict):
    violations, n_verified = [], 0
    for t in triples:
        rep = theorem2_necessity_audit(t.noise, t.recovery, t.decomposition, t.units)
        n_verified += rep.triple_correctable
        if rep.violation:
            violations.append(t.name)
    n_random = sum(t.name.startswith("random") for t in triples)
    ok = len(triples) >= 200 and n_random > 0 and not violations
    verdict(3, ok, f"{len(triples)} triples ({n_random} random recoveries), {n_verified} verified, {len(violations)} violations")


def test_criterion_4_conversion(triples, verdict):
    failures, worst_res, worst_fid, n_conv = [], 0.0, 1.0, 0
    for i, t in enumerate(triples):
        triple = check_correctable_triple(t.recovery, t.noise, t.decomposition, t.units)
        if not triple.verified:
            continue
        for k in range(t.decomposition.m):
            rec, p_k = convert_to_standard(triple, k)
            ok2, lam = check_standard_condition(t.noise, p_k)
            sector, _ = code_decomposition(p_k)
            fid = pure_state_fidelities(compose(rec, t.noise), random_code_states(sector.embedding, 100, i))
            worst_res = max(worst_res, lam.max_residual)
            worst_fid = min(worst_fid, float(fid.min()))
            n_conv += 1
            if not ok2 or lam.max_residual > 1e-7 or fid.min() < 1 - 1e-8:
                failures.append(f"{t.name}[k={k}]")
    ok = n_conv > 0 and not failures
    verdict(4, ok, f"{n_conv} conversions, worst residual {worst_res:.2e}, worst fidelity 1-{1 - worst_fid:.1e}")


def test_criterion_5_standard_recovery(verdict):
    fx = fixture("bit_flip_code", p=0.05)
    _, lam = check_standard_condition(fx.channel, fx.projector)
    # oracle: <000| E_a^dag E_b |000> read straight from the Kraus operators
    k = fx.channel.kraus
    direct = np.array([[(k[a].conj().T @ k[b])[0, 0] for b in range(4)] for a in range(4)])
    lam_err = max(np.max(np.abs(lam.values - np.diag([0.85, 0.05, 0.05, 0.05]))), np.max(np.abs(lam.values - direct)))
    rec = build_standard_recovery(fx.channel, fx.projector)
    loop = compose(rec, fx.channel)
    states = random_code_states(fx.decomposition.embedding, 100, 0)
    worst = 0.0
    for psi in states.T:
        rho = np.outer(psi, psi.conj())
        out = loop(rho)
        worst = max(worst, np.linalg.norm(out / np.trace(out).real - rho))
    ok = lam_err <= 1e-10 and worst <= 1e-8
    verdict(5, ok, f"lambda error {lam_err:.1e}, worst recovery error {worst:.1e}")


def test_criterion_6_unital_fixed_points(verdict):
    channels = []
    for d in (2, 3, 4):
        structures = ["generic", "blocks"] + (["ampliated"] if d % 2 == 0 else [])
        for s in range(18):
            channels.append(random_mixed_unitary_channel(d, 2 + s % 3, s, structures[s % len(structures)]))
    worst, bad = 0.0, []
    for ch in channels:
        fix = fixed_points(ch)
        comm = commutant(generate_interaction_algebra(ch))
        res = max(containment_residual(fix, comm), containment_residual(comm, fix))
        worst = max(worst, res)
        if len(fix) != len(comm) or res > 1e-7:
            bad.append(ch.label)
    ad = fixture("amplitude_damping", gamma=0.3).channel
    ad_fix = fixed_points(ad)
    ad_comm = commutant(generate_interaction_algebra(ad))
    ad_res = containment_residual(ad_comm, ad_fix)
    ok = len(channels) >= 50 and not bad and len(ad_fix) == len(ad_comm) == 1 and ad_res > 0.1
    verdict(
        6,
        ok,
        f"{len(channels)} unital channels, worst residual {worst:.1e}; damping commutant outside Fix by {ad_res:.3f}",
    )


def test_criterion_7_collective_structure(verdict):
    fx = fixture("collective_unitary", n_qubits=3, n_samples=4, seed=7)
    alg = generate_interaction_algebra(fx.channel)
    st = decompose_structure(alg)
    cst = noise_commutant_blocks(fx.channel)
    accounting = sum(m * n for m, n in st.blocks) == 8 and sum(m * m for m, _ in st.blocks) == len(alg) == 20
    ok = (
        list(st.blocks) == [(4, 1), (2, 2)]
        and (2, 2) in cst.blocks
        and accounting
        and max(st.residual, cst.residual) <= 1e-6
    )
    verdict(7, ok, f"algebra blocks {list(st.blocks)}, commutant blocks {list(cst.blocks)}, residual {max(st.residual, cst.residual):.1e}")


def test_criterion_8_generalised_ns(verdict):
    fx = fixture("leaky_ns_channel", gamma=0.3)
    ok1, lam = check_theorem1(fx.channel, fx.units)
    leak = leak_into_code(fx.channel, fx.units)
    ok = ok1 and lam.max_residual <= 1e-8 and leak > 0.1
    verdict(8, ok, f"residual {lam.max_residual:.1e}, max ||P E_a P_perp|| = {leak:.3f}")


def test_criterion_9_covariance(verdict):
    passing = [fx for fx in default_fixtures() if check_unified_condition(fx.channel, fx.units)[0]]
    worst, changed = 0.0, 0
    for seed in range(50):
        fx = passing[seed % len(passing)]
        rng = np.random.default_rng(seed)
        u = random_unitary(fx.decomposition.m, rng)
        w = random_unitary(len(fx.channel), rng)
        ok, lam = check_unified_condition(fx.channel, fx.units)
        _, mu2 = rotate_decomposition(fx.decomposition, u)
        ok2, lam2 = check_unified_condition(mix_kraus(fx.channel, w), mu2)
        worst = max(worst, float(np.max(np.abs(transform_lambda(lam, u, w).values - lam2.values))))
        changed += ok != ok2
    ok = worst <= 1e-7 and changed == 0
    verdict(9, ok, f"50 (u, w) pairs over {len(passing)} fixtures, worst deviation {worst:.1e}, {changed} verdict changes")


def _cli(args, cwd):
    proc = subprocess.run([sys.executable, "-m", "oqec", *args], cwd=cwd, capture_output=True, text=True)
    report = json.loads(proc.stdout)
    report.pop("timing")
    return proc.returncode, json.dumps(report, sort_keys=True)


def test_criterion_10_cli_determinism(tmp_path, verdict):
    setup = []
    for name in ("bit_flip_code", "damping_on_A", "damping_on_B", "collective_unitary"):
        params = ["--param", "seed=7"] if name == "collective_unitary" else []
        setup.append(["fixture", name, *params, "--channel-out", f"{name}.json", "--code-out", f"{name}.code.json"])
    commands = setup + [
        ["validate", "bit_flip_code.json"],
        ["decompose", "collective_unitary.json"],
        ["check", "bit_flip_code.json", "bit_flip_code.code.json", "eq2"],
        ["check", "damping_on_A.json", "damping_on_A.code.json", "eq6"],
        ["check", "damping_on_A.json", "damping_on_A.code.json", "eq8"],
        ["check", "damping_on_B.json", "damping_on_B.code.json", "ns", "--variant", "1"],
        ["check", "damping_on_B.json", "damping_on_B.code.json", "ns", "--variant", "2"],
        ["check", "damping_on_B.json", "damping_on_B.code.json", "ns", "--variant", "3"],
        ["recover", "bit_flip_code.json", "bit_flip_code.code.json", "--out", "rec.json"],
        ["check", "bit_flip_code.json", "bit_flip_code.code.json", "eq6", "--recovery", "rec.json"],
        ["recover", "damping_on_A.json", "damping_on_A.code.json", "--out", "conv.json",
         "--convert-from-triple", "0", "--code-out", "conv.code.json"],
    ]
    differ = []
    for cmd in commands:
        first, second = _cli(cmd, tmp_path), _cli(cmd, tmp_path)
        if first != second:
            differ.append(" ".join(cmd[:2]))
    ok = not differ
    verdict(10, ok, f"{len(commands)} commands run twice, {len(differ)} differing reports")
