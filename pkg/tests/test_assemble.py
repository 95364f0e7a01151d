"""Component assembly: consistency equations, MMI closed form, composition."""
import numpy as np
import pytest

from gpid.assemble import (
    PidResult,
    compose_additive,
    mmi_pid,
    pid_distance,
    pid_from_solution,
)
from gpid.channel import reduce_to_channel
from gpid.errors import IntegrityError, ValidationError
from gpid.solver import solve
from gpid.synth import SynthSpec, make_instance

LN2 = np.log(2.0)


def solve_case(case, sigma2, rho=0.0):
    inst = make_instance(SynthSpec("canonical1d",
                                   {"case": case, "sigma2": sigma2, "rho": rho}))
    ch = reduce_to_channel(inst.cov)
    return pid_from_solution(ch, solve(ch)).converted("bits")


def test_chain_case_matches_table_values():
    # X1 = Y + n1, X2 = X1 + n2 at unit variances splits into pure
    # redundancy plus unique-to-X1, no synergy
    pid = solve_case("uniq_red", 1.0)
    assert pid.r == pytest.approx(0.5 * np.log2(3.0 / 2.0), abs=1e-8)
    assert pid.u1 == pytest.approx(0.5 - 0.5 * np.log2(3.0 / 2.0), abs=1e-8)
    assert pid.u2 == pytest.approx(0.0, abs=1e-8)
    assert pid.s == pytest.approx(0.0, abs=1e-8)
    assert pid.r == pytest.approx(0.29248125, abs=1e-7)
    assert pid.u1 == pytest.approx(0.20751875, abs=1e-7)


def test_symmetric_pair_splits_evenly():
    pid = solve_case("red_syn", 1.0, 0.0)
    assert pid.u1 == pytest.approx(pid.u2, abs=1e-9)
    assert pid.total == pytest.approx(pid.r + pid.u1 + pid.u2 + pid.s, abs=0)
    assert pid.i1 == pytest.approx(pid.i2, abs=1e-12)


def test_mmi_closed_form():
    pid = mmi_pid(0.5, 0.0, 0.6110, unit="nats")
    assert pid.r == 0.0
    assert pid.u1 == pytest.approx(0.5, abs=0)
    assert pid.u2 == 0.0
    assert pid.s == pytest.approx(0.1110, abs=1e-12)
    assert pid.method == "mmi_oracle"


def test_mmi_zero_synergy_is_exact():
    pid = mmi_pid(0.4, 0.7, 0.7)
    assert pid.s == 0.0  # ip equals the max: exactly zero, no roundoff
    assert pid.r == pytest.approx(0.4, abs=0)
    assert pid.u2 == pytest.approx(0.3, abs=1e-15)


def test_mmi_rejects_inconsistent_total():
    with pytest.raises(ValidationError):
        mmi_pid(0.5, 0.2, 0.3)  # ip below max(i1, i2)
    with pytest.raises(ValidationError):
        mmi_pid(-0.1, 0.2, 0.3)


def test_compose_single_is_identity():
    pid = mmi_pid(0.5, 0.2, 0.6)
    out = compose_additive([pid])
    assert (out.r, out.u1, out.u2, out.s) == (pid.r, pid.u1, pid.u2, pid.s)
    assert out.method == "composed"


def test_compose_scales_componentwise():
    pid = mmi_pid(0.5, 0.2, 0.6)
    out = compose_additive([pid] * 4)
    assert out.r == pytest.approx(4 * pid.r, abs=1e-12)
    assert out.u1 == pytest.approx(4 * pid.u1, abs=1e-12)
    assert out.s == pytest.approx(4 * pid.s, abs=1e-12)
    assert out.i1 == pytest.approx(4 * pid.i1, abs=1e-12)


def test_compose_propagates_missing_synergy():
    full = mmi_pid(0.5, 0.2, 0.6)
    partial = PidResult(r=0.2, u1=0.3, u2=0.0, s=None, unit="nats",
                        i1=0.5, i2=0.2, min_mi=0.5, ip_total=None,
                        method="solver", raw=(0.2, 0.3, 0.0, None))
    out = compose_additive([full, partial])
    assert out.s is None
    assert out.ip_total is None
    assert out.r == pytest.approx(0.4, abs=1e-12)  # 0.2 from each part


def test_compose_rejects_mixed_units_and_empty():
    a = mmi_pid(0.5, 0.2, 0.6, unit="nats")
    b = mmi_pid(0.5, 0.2, 0.6, unit="nats").converted("bits")
    with pytest.raises(ValidationError):
        compose_additive([a, b])
    with pytest.raises(ValidationError):
        compose_additive([])


def test_unit_conversion_round_trip():
    pid = mmi_pid(0.5, 0.2, 0.6, unit="nats")
    bits = pid.converted("bits")
    assert bits.unit == "bits"
    assert bits.r == pytest.approx(pid.r / LN2, abs=1e-15)
    assert bits.ip_total == pytest.approx(0.6 / LN2, abs=1e-15)
    back = bits.converted("nats")
    assert back.r == pytest.approx(pid.r, abs=1e-15)
    assert pid.converted("nats") is pid


def test_components_dict_drops_missing_synergy():
    pid = mmi_pid(0.5, 0.2, 0.6)
    assert set(pid.components) == {"r", "u1", "u2", "s"}
    partial = PidResult(r=0.2, u1=0.3, u2=0.0, s=None, unit="nats",
                        i1=0.5, i2=0.2, min_mi=0.5, ip_total=None,
                        method="solver", raw=(0.2, 0.3, 0.0, None))
    assert set(partial.components) == {"r", "u1", "u2"}
    assert partial.total == pytest.approx(0.5, abs=1e-15)


def test_tiny_negative_raw_is_clamped_but_kept():
    pid = PidResult(r=0.0, u1=0.3, u2=0.0, s=0.0, unit="nats",
                    i1=0.3 - 1e-9, i2=-1e-9 + 0.0, min_mi=0.3 - 1e-9,
                    ip_total=0.3 - 1e-9, method="solver",
                    raw=(-1e-9, 0.3, -1e-9, 0.0))
    assert pid.r == 0.0
    assert pid.raw[0] == -1e-9


def test_large_negative_raw_is_an_integrity_error():
    with pytest.raises(IntegrityError, match="below"):
        PidResult(r=0.0, u1=0.8, u2=0.0, s=0.0, unit="nats",
                  i1=0.5, i2=0.2, min_mi=1.0, ip_total=1.0,
                  method="solver", raw=(-0.3, 0.8, 0.1, 0.0))


def test_inconsistent_components_are_an_integrity_error():
    with pytest.raises(IntegrityError):
        PidResult(r=0.2, u1=0.2, u2=0.0, s=0.0, unit="nats",
                  i1=0.5, i2=0.2, min_mi=0.5, ip_total=0.5,
                  method="solver", raw=(0.2, 0.2, 0.0, 0.0))


def test_unconverged_solution_is_clamped_into_bounds():
    # a garbage iterate far above ip_total must still assemble (the CLI
    # writes a report on non-convergence); components stay in bounds
    from gpid.solver import SolverConfig
    inst = make_instance(SynthSpec("canonical1d",
                                   {"case": "uniq_red", "sigma2": 1.0}))
    ch = reduce_to_channel(inst.cov)
    res = solve(ch, SolverConfig(max_iters=1))
    assert not res.converged
    pid = pid_from_solution(ch, res, allow_unconverged=True)
    assert pid.r >= 0.0 and pid.s >= 0.0
    assert pid.min_mi <= (ch.ip_total or np.inf) + 1e-12


def test_pid_distance():
    a = mmi_pid(0.5, 0.0, 0.5)   # pure unique-1
    assert pid_distance(a, a) == 0.0
    b = mmi_pid(0.0, 0.5, 0.5)   # pure unique-2
    assert pid_distance(a, b) == pytest.approx(2.0, abs=1e-12)
    c = mmi_pid(0.5, 0.0, 0.75)  # same unique mass, some synergy added
    assert 0.0 < pid_distance(a, c) < 2.0


def test_pid_distance_requires_same_unit():
    a = mmi_pid(0.5, 0.0, 0.5)
    with pytest.raises(ValidationError):
        pid_distance(a, a.converted("bits"))
