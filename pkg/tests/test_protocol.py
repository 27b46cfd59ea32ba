"""Protocol runs, exact branch enumeration, and control necessity."""

import numpy as np
import pytest

from qteleport.protocol import (
    ENUMERATION_GUARD,
    EnumerationGuardError,
    ForcedBranch,
    InputStateSpec,
    enumerate_branches,
    fidelity_without_control,
    run_protocol,
    run_structured,
    theoretical_success_probability,
)
from qteleport.primitives import ChannelSpec
from qteleport.state import SizeGuardError


def _spec(d, n, m, weights):
    return ChannelSpec(d, n, m, tuple(np.sqrt(w) for w in weights))


def test_input_spec_validation():
    InputStateSpec(2, 1, [0.6, 0.8])
    with pytest.raises(ValueError, match="length"):
        InputStateSpec(2, 2, [1.0, 0.0])
    with pytest.raises(ValueError, match="norm"):
        InputStateSpec(2, 1, [1.0, 1.0])


def test_input_spec_constructors():
    basis = InputStateSpec.basis(3, 2, 4)
    assert basis.beta[4] == 1.0
    assert abs(np.linalg.norm(basis.beta) - 1.0) < 1e-12
    a = InputStateSpec.random(3, 1, 9)
    b = InputStateSpec.random(3, 1, 9)
    assert np.array_equal(a.beta, b.beta)
    assert not np.array_equal(a.beta, InputStateSpec.random(3, 1, 10).beta)


def test_success_probability_uniform_channel_is_one():
    report = enumerate_branches(
        InputStateSpec.random(2, 1, 1), _spec(2, 1, 1, (1.0, 1.0))
    )
    assert abs(report.success_probability - 1.0) < 1e-10
    assert abs(report.total_probability - 1.0) < 1e-10


def test_success_probability_weighted_qubit_channel():
    report = enumerate_branches(
        InputStateSpec.random(2, 1, 2), _spec(2, 2, 1, (1.5, 0.5))
    )
    assert abs(report.success_probability - 0.5) < 1e-10
    assert abs(report.theoretical - 0.5) < 1e-12


def test_success_probability_two_copies_qutrit():
    spec = _spec(3, 1, 2, (1.2, 0.9, 0.9))
    report = enumerate_branches(InputStateSpec.random(3, 2, 4), spec)
    assert abs(report.success_probability - 0.81) < 1e-10
    assert abs(theoretical_success_probability(spec) - 0.81) < 1e-12


def test_success_probability_independent_of_input_state():
    spec = _spec(3, 1, 1, (1.5, 1.0, 0.5))
    values = [
        enumerate_branches(InputStateSpec.random(3, 1, seed), spec).success_probability
        for seed in (1, 2, 3)
    ]
    values.append(
        enumerate_branches(InputStateSpec.basis(3, 1, 2), spec).success_probability
    )
    assert max(values) - min(values) < 1e-12
    assert abs(values[0] - 0.5) < 1e-10


def test_success_branches_have_unit_fidelity():
    spec = _spec(3, 2, 1, (1.5, 1.0, 0.5))
    report = enumerate_branches(InputStateSpec.random(3, 1, 8), spec)
    for b in report.branches:
        if b.aux == 0 and b.probability > 1e-12:
            assert b.fidelity >= 1.0 - 1e-10


def test_complex_coefficients_still_unit_fidelity():
    w = np.exp(0.4j)
    spec = ChannelSpec(2, 1, 1, (np.sqrt(1.5) * w, np.sqrt(0.5) * w.conjugate()))
    report = enumerate_branches(InputStateSpec.random(2, 1, 12), spec)
    assert abs(report.success_probability - 0.5) < 1e-10
    for b in report.branches:
        if b.aux == 0 and b.probability > 1e-12:
            assert b.fidelity >= 1.0 - 1e-10


def test_branch_count_and_probability_closure():
    spec = _spec(2, 2, 1, (1.5, 0.5))
    report = enumerate_branches(InputStateSpec.random(2, 1, 3), spec)
    # d^2 sender outcomes, d^n controller outcomes, 2 aux outcomes.
    assert len(report.branches) == 4 * 4 * 2
    assert abs(report.total_probability - 1.0) < 1e-10


def test_no_controllers_case():
    spec = _spec(3, 0, 1, (1.5, 1.0, 0.5))
    report = enumerate_branches(InputStateSpec.random(3, 1, 5), spec)
    assert abs(report.success_probability - 0.5) < 1e-10
    for b in report.branches:
        assert b.controllers == ((),)


def test_forced_run_trivial_branch():
    # All-zero outcomes on a uniform channel: success with no correction.
    spec = _spec(2, 1, 1, (1.0, 1.0))
    inp = InputStateSpec(2, 1, [0.6, 0.8])
    forced = ForcedBranch(gbs=((0, 0),), controllers=((0,),), aux=0)
    t = run_protocol(inp, spec, forced=forced)
    assert t.success
    assert abs(t.fidelity - 1.0) < 1e-12
    # p = (1/4 per Bell outcome) * (1/2 per controller) * 1 for aux.
    assert abs(t.probability - 0.125) < 1e-12
    assert t.gbs == ((0, 0),)
    assert t.r_sums == (0,)


def test_forced_aux_failure_branch():
    spec = _spec(2, 0, 1, (1.5, 0.5))
    inp = InputStateSpec.random(2, 1, 6)
    forced = ForcedBranch(gbs=((0, 0),), controllers=((),), aux=1)
    t = run_protocol(inp, spec, forced=forced)
    assert not t.success
    assert t.aux == 1


def test_transcript_probability_matches_enumeration():
    spec = _spec(3, 1, 1, (1.5, 1.0, 0.5))
    inp = InputStateSpec.random(3, 1, 7)
    report = enumerate_branches(inp, spec)
    by_key = {(b.gbs, b.controllers, b.aux): b for b in report.branches}
    forced = ForcedBranch(gbs=((1, 2),), controllers=((2,),), aux=0)
    t = run_protocol(inp, spec, forced=forced)
    ref = by_key[(t.gbs, t.controllers, t.aux)]
    assert abs(t.probability - ref.probability) < 1e-12
    assert abs(t.fidelity - ref.fidelity) < 1e-10


def test_structured_and_dense_agree_on_forced_branches():
    spec = _spec(3, 2, 2, (1.5, 1.0, 0.5))
    inp = InputStateSpec.random(3, 2, 21)
    rng = np.random.default_rng(20)
    for _ in range(50):
        forced = ForcedBranch(
            gbs=tuple((int(rng.integers(3)), int(rng.integers(3))) for _ in range(2)),
            controllers=tuple(
                tuple(int(rng.integers(3)) for _ in range(2)) for _ in range(2)
            ),
            aux=int(rng.integers(2)),
        )
        a = run_protocol(inp, spec, forced=forced)
        b = run_structured(inp, spec, forced=forced)
        assert abs(a.probability - b.probability) < 1e-10
        assert abs(a.fidelity - b.fidelity) < 1e-10


def test_structured_and_dense_agree_on_sampled_seeds():
    spec = _spec(2, 1, 2, (1.5, 0.5))
    inp = InputStateSpec.random(2, 2, 2)
    for seed in range(10):
        a = run_protocol(inp, spec, seed=seed)
        b = run_structured(inp, spec, seed=seed)
        assert a.gbs == b.gbs
        assert a.controllers == b.controllers
        assert a.aux == b.aux
        assert abs(a.fidelity - b.fidelity) < 1e-10


def test_structured_path_survives_dense_size_guard():
    spec = _spec(5, 4, 2, (1.5, 1.2, 1.0, 0.8, 0.5))
    inp = InputStateSpec.random(5, 2, 1)
    with pytest.raises(SizeGuardError):
        run_protocol(inp, spec, seed=0)
    t = run_structured(inp, spec, seed=0)
    assert t.aux in (0, 1)
    if t.success:
        assert t.fidelity >= 1.0 - 1e-9


def test_run_requires_exactly_one_of_seed_and_forced():
    spec = _spec(2, 0, 1, (1.0, 1.0))
    inp = InputStateSpec.basis(2, 1, 0)
    with pytest.raises(ValueError, match="exactly one"):
        run_protocol(inp, spec)
    forced = ForcedBranch(gbs=((0, 0),), controllers=((),), aux=0)
    with pytest.raises(ValueError, match="exactly one"):
        run_protocol(inp, spec, seed=1, forced=forced)


def test_mismatched_input_and_channel_rejected():
    with pytest.raises(ValueError, match="does not match"):
        run_protocol(InputStateSpec.basis(2, 1, 0), _spec(3, 0, 1, (1, 1, 1)), seed=0)
    with pytest.raises(ValueError, match="does not match"):
        enumerate_branches(InputStateSpec.basis(2, 2, 0), _spec(2, 0, 1, (1, 1)))


def test_enumeration_guard():
    spec = _spec(4, 8, 2, (1.0, 1.0, 1.0, 1.0))  # 4^20 branches
    with pytest.raises(EnumerationGuardError, match="enumeration guard"):
        enumerate_branches(InputStateSpec.basis(4, 2, 0), spec)
    assert ENUMERATION_GUARD == 10**6


def test_fidelity_without_control_full_cooperation_is_unit():
    spec = _spec(2, 1, 1, (1.0, 1.0))
    inp = InputStateSpec(2, 1, [0.6, 0.8])
    assert abs(fidelity_without_control(inp, spec, set()) - 1.0) < 1e-10


def test_fidelity_without_control_regression_value():
    # Enumeration oracle for beta = (0.6, 0.8) with the lone controller
    # withheld; agrees with (1 + (|b0|^2 - |b1|^2)^2) / 2 = 0.5392.
    spec = _spec(2, 1, 1, (1.0, 1.0))
    inp = InputStateSpec(2, 1, [0.6, 0.8])
    value = fidelity_without_control(inp, spec, {0})
    assert abs(value - 0.5392) < 1e-10
    assert value < 0.999


def test_fidelity_without_control_basis_state_is_immune():
    # Computational basis inputs only need the shift correction, which
    # does not involve the controllers' outcomes.
    spec = _spec(2, 1, 1, (1.0, 1.0))
    value = fidelity_without_control(InputStateSpec.basis(2, 1, 1), spec, {0})
    assert abs(value - 1.0) < 1e-10


def test_fidelity_without_control_validates_range():
    spec = _spec(2, 1, 1, (1.0, 1.0))
    with pytest.raises(ValueError, match="out of range"):
        fidelity_without_control(InputStateSpec.basis(2, 1, 0), spec, {3})


def test_sampled_success_rate_short_run():
    spec = _spec(2, 1, 1, (1.5, 0.5))
    inp = InputStateSpec.random(2, 1, 30)
    root = np.random.SeedSequence(17)
    trials = 600
    wins = sum(run_structured(inp, spec, seed=c).success for c in root.spawn(trials))
    sigma = np.sqrt(0.5 * 0.5 / trials)
    assert abs(wins / trials - 0.5) < 5 * sigma


def test_transcript_records_integer_seed():
    spec = _spec(2, 0, 1, (1.0, 1.0))
    inp = InputStateSpec.basis(2, 1, 0)
    assert run_protocol(inp, spec, seed=42).seed == 42
    child = np.random.SeedSequence(1).spawn(1)[0]
    assert run_structured(inp, spec, seed=child).seed is None
