"""Seeded numerical checks of the common-cause channel results, bundled as one suite."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import (_divisor_splits, random_staged_channel, search_conjecture_counterexamples,
                       search_mixed_ssa_violation, verify_cq_theorem, verify_sigma_lemma, verify_stage1,
                       verify_stage2, verify_stage3_onesided)
from .states import DensityOperator, haar_random_unitary, quantum_cmi, random_density_operator, random_pure_state

TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    passed: bool
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.stats = {k: (float(v) if isinstance(v, np.floating) else v) for k, v in self.stats.items()}

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, **self.stats}


def _rngs(seed, n):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def check_stage1(rng, samples=50, qs=(1.5, 2.0, 3.0)) -> SuiteResult:
    dev = []
    for k in range(samples):
        dims = ((2, 2), (2, 3), (2, 4))[k % 3]
        U = haar_random_unitary(dims[0] * dims[1], rng)
        dev.extend(verify_stage1(U, q, dims).deviation for q in qs)
    return SuiteResult("stage1_equality", max(dev) < TOL, {"samples": samples, "max_deviation": max(dev)})


def check_stage2(rng, samples=50, qs=(1.5, 2.0, 3.0)) -> SuiteResult:
    dev = []
    for _ in range(samples):
        ch = random_staged_channel((2, 2), 2, 2, seed=rng)
        dev.extend(verify_stage2(ch, q).deviation for q in qs)
    return SuiteResult("stage2_isometry_invariance", max(dev) < TOL, {"samples": samples, "max_deviation": max(dev)})


def check_stage3(rng, samples=200, qs=(1.5, 2.0, 5.0)) -> SuiteResult:
    margins = []
    for _ in range(samples):
        da, db = (int(rng.integers(2, 4)) for _ in range(2))
        eb = int(rng.integers(1, 4))
        split_B = _divisor_splits(db * eb, rng)
        ch = random_staged_channel((da, db), 1, eb, None, split_B, ("B''",), rng)
        margins.extend(verify_stage3_onesided(ch, q).margin for q in qs)
    return SuiteResult("stage3_onesided", min(margins) >= -TOL,
                       {"samples": samples, "min_margin": min(margins), "max_margin": max(margins)})


def _random_cq(rng):
    dA, dB, dC = int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(1, 4))
    p = rng.dirichlet(np.ones(dC))
    sa = [random_density_operator((dA,), seed=rng).matrix for _ in range(dC)]
    sb = [random_density_operator((dB,), seed=rng).matrix for _ in range(dC)]
    return p, sa, sb


def check_cq_theorem(rng, samples=200, qs=(1.5, 2.0, 3.0)) -> list:
    margins, cq_identity, saturated_random = [], [], 0
    for _ in range(samples):
        p, sa, sb = _random_cq(rng)
        for q in qs:
            c = verify_cq_theorem(p, sa, sb, q)
            margins.append(c.margin)
            cq_identity.append(c.details["cq_identity_deviation"])
            saturated_random += bool(c.details["saturated"])
    sat = verify_cq_theorem([1.0], [np.eye(2) / 2], [np.eye(2) / 2], 2)
    pure = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    zero = verify_cq_theorem([0.5, 0.5], pure, pure, 2)
    theorem = SuiteResult(
        "cq_bound",
        min(margins) >= -TOL and sat.details["saturated"] and abs(sat.value - 0.25) < 1e-12
        and saturated_random == 0 and abs(zero.value) < 1e-12,
        {"samples": samples, "min_margin": min(margins), "saturation_value": sat.value,
         "saturation_margin": sat.margin, "random_saturations": saturated_random},
    )
    ident = SuiteResult("cq_entropy_identity", max(cq_identity) < 1e-10, {"max_deviation": max(cq_identity)})
    return [theorem, ident]


def check_pure_ssa(rng, samples=100, qs=(1.5, 2.0, 3.0, 10.0)) -> SuiteResult:
    vals = []
    for k in range(samples):
        dims = ((2, 2, 2), (2, 3, 2), (3, 2, 3))[k % 3]
        rho = DensityOperator.from_pure(random_pure_state(int(np.prod(dims)), rng), dims)
        vals.extend(quantum_cmi(rho, [0], [1], [2], q) for q in qs)
    return SuiteResult("pure_state_ssa", min(vals) >= -1e-10, {"samples": samples, "min_cmi": min(vals)})


def check_mixed_ssa_violation(rng) -> SuiteResult:
    hit = search_mixed_ssa_violation(seed=rng)
    return SuiteResult("mixed_state_ssa_violation_found", hit["cmi"] < 0,
                       {"cmi": hit["cmi"], "q": hit["q"], "sample": hit["sample"]})


def check_sigma_lemma(rng, samples=50, qs=(1.5, 2.0, 3.0)) -> SuiteResult:
    dev, bound_ok = [], True
    for _ in range(samples):
        ch = random_staged_channel((2, 2), 1, 2, None, (2, 2), ("B''",), rng)
        sigma = random_density_operator((ch.input_dim,), seed=rng)
        for q in qs:
            c = verify_sigma_lemma(sigma, ch, q)
            dev.append(c.details["identity_deviation"])
            bound_ok &= c.details["bound_ok"]
    return SuiteResult("sigma_multiplicative_identity", max(dev) < TOL and bound_ok,
                       {"samples": samples, "max_deviation": max(dev)})


def check_conjecture(which, rng, samples=500) -> SuiteResult:
    rep = search_conjecture_counterexamples(which, max_dim=3, q_range=(1.0, 10.0), samples=samples, seed=rng)
    return SuiteResult(f"{which}_search", not rep.found,
                       {"samples": samples, "max_margin": rep.max_margin, "mean_margin": rep.mean_margin,
                        "min_margin": rep.min_margin,
                        "max_margin_q_above_1": rep.max_margin_above_one, "counterexamples": len(rep.counterexamples)})


def appendix_suite(seed=0, samples: int | None = None) -> list:
    """Run every check; ``samples`` overrides the per-check sample counts (smoke runs)."""
    r = _rngs(seed, 9)

    def n(default):
        return default if samples is None else samples

    out = [
        check_stage1(r[0], n(50)),
        check_stage2(r[1], n(50)),
        check_stage3(r[2], n(200)),
        *check_cq_theorem(r[3], n(200)),
        check_pure_ssa(r[4], n(100)),
        check_mixed_ssa_violation(r[5]),
        check_sigma_lemma(r[6], n(50)),
        check_conjecture("conj1", r[7], n(500)),
        check_conjecture("conj2", r[8], n(500)),
    ]
    return out
