# Copyright (c) 2014, Salesforce.com, Inc.  All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted provided that the following conditions
# are met:
#
# - Redistributions of source code must retain the above copyright
#   notice, this list of conditions and the following disclaimer.
# - Redistributions in binary form must reproduce the above copyright
#   notice, this list of conditions and the following disclaimer in the
#   documentation and/or other materials provided with the distribution.
# - Neither the name of Salesforce.com nor the names of its contributors
#   may be used to endorse or promote products derived from this
#   software without specific prior written permission.
#
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS
# "AS IS" AND ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT
# LIMITED TO, THE IMPLIED WARRANTIES OF MERCHANTABILITY AND FITNESS
# FOR A PARTICULAR PURPOSE ARE DISCLAIMED.  IN NO EVENT SHALL THE
# COPYRIGHT HOLDER OR CONTRIBUTORS BE LIABLE FOR ANY DIRECT, INDIRECT,
# INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL DAMAGES (INCLUDING,
# BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR SERVICES; LOSS
# OF USE, DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER CAUSED AND
# ON ANY THEORY OF LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY, OR
# TORT (INCLUDING NEGLIGENCE OR OTHERWISE) ARISING IN ANY WAY OUT OF THE
# USE OF THIS SOFTWARE, EVEN IF ADVISED OF THE POSSIBILITY OF SUCH DAMAGE.

from nose.tools import (
    assert_equal,
    assert_false,
    assert_greater,
    assert_raises,
    assert_true,
)
import pytest
from hebbnet.circuits import (
    EquivalenceReport,
    NonconvergenceError,
    OutputCircuit,
    ShutdownCircuit,
    check_output_equivalence,
    check_shutdown_equivalence,
    closed_grid,
    hinge_oracle,
    interior_grid,
    oscillation_period,
    output_circuit_effective,
    output_circuit_trace,
    shutdown_step,
)
from hebbnet.util import ContractError


def effective(h, s, **kwargs):
    return output_circuit_effective(OutputCircuit(h, s, **kwargs))


@pytest.mark.parametrize('h,s,expected', [
    (.5, 1, 1.),
    (-5., 1, 1.),
    (-9.5, 1, 1.),
    (.5, -1, -1.),
    (5., -1, -1.),
    (9.5, -1, -1.),
])
def test_margin_violations_settle(h, s, expected):
    circuit = OutputCircuit(h, s)
    assert_equal(oscillation_period(circuit), 0)
    assert_equal(effective(h, s), expected)


@pytest.mark.parametrize('h,s', [
    (2., 1),
    (1.05, 1),
    (9.5, 1),
    (-2., -1),
    (-1.05, -1),
    (-9.5, -1),
])
def test_satisfied_margins_oscillate(h, s):
    assert_equal(oscillation_period(OutputCircuit(h, s)), 4)
    assert_equal(effective(h, s), 0.)


def test_margin_boundary_counts_as_violated():
    assert_equal(effective(1., 1), 1.)
    assert_equal(effective(-1., -1), -1.)
    assert_equal(hinge_oracle(1., 1), 1.)
    assert_equal(hinge_oracle(-1., -1), -1.)


def test_margin_scales_with_S():
    assert_equal(effective(1.5, 1, S=2.), 1.)
    assert_equal(effective(2.5, 1, S=2.), 0.)


def test_mu_sets_the_negative_level():
    assert_equal(effective(3., -1, mu=.5), -.5)
    assert_equal(hinge_oracle(3., -1, mu=.5), -.5)


def test_trace():
    rows = output_circuit_trace(OutputCircuit(2., 1))
    assert_equal(rows, [
        (1, 1.1, 0),
        (2, 1.1, 1),
        (3, 0., 1),
        (4, 0., 0),
    ])


def test_trace_is_periodic():
    rows = output_circuit_trace(OutputCircuit(-3., -1), micro_steps=8)
    deltas = [delta for _, delta, _ in rows]
    assert_equal(deltas[:4], deltas[4:])
    assert_equal(deltas[0], -1.1)


def test_output_contract():
    assert_raises(ContractError, OutputCircuit, 10., 1)
    assert_raises(ContractError, OutputCircuit, -10., -1)
    assert_raises(ContractError, OutputCircuit, 4., 1, M=4.)
    OutputCircuit(9.99, 1)


def test_misplaced_control_threshold_is_caught():
    circuit = OutputCircuit(2., 1, t_threshold=1.5)
    assert_equal(output_circuit_effective(circuit), 1.1)
    report = check_output_equivalence(resolution=4, t_threshold=1.5)
    assert_false(report.equivalent)
    for example in report.counterexamples:
        assert_greater(example['s'] * example['h'], 1.)


def test_settling_budget():
    circuit = OutputCircuit(2., 1)
    assert_raises(NonconvergenceError, output_circuit_effective, circuit, 0)


@pytest.mark.parametrize('eps_osc', [.05, .1, .5])
def test_output_equivalence(eps_osc):
    report = check_output_equivalence(eps_osc=eps_osc)
    assert_equal(report.checked, 2 * (2 * 10 * 20 - 1))
    assert_true(report.equivalent, report.counterexamples[:5])


def test_output_equivalence_other_constants():
    report = check_output_equivalence(M=5., S=2., mu=.5, resolution=8)
    assert_true(report.equivalent, report.counterexamples[:5])


@pytest.mark.parametrize('x,delta,expected', [
    (.5, .3, .3),
    (0., -9.5, -9.5),
    (.99, 9.5, 9.5),
    (1.2, .3, 0.),
    (1., 9.5, 0.),
    (-1., .3, 0.),
    (-2., -9.5, 0.),
])
def test_shutdown(x, delta, expected):
    assert_equal(shutdown_step(ShutdownCircuit(x, delta)), expected)


def test_shutdown_control_units():
    circuit = ShutdownCircuit(1.5, .3)
    shutdown_step(circuit)
    assert_equal((circuit.u, circuit.v), (1, 0))
    circuit = ShutdownCircuit(-1.5, .3)
    shutdown_step(circuit)
    assert_equal((circuit.u, circuit.v), (0, -1))


def test_shutdown_contract():
    assert_raises(ContractError, ShutdownCircuit, 0., 10.)
    assert_raises(ContractError, ShutdownCircuit, 0., -3., 3.)


def test_shutdown_equivalence():
    report = check_shutdown_equivalence()
    assert_equal(report.checked, 121 * 39)
    assert_true(report.equivalent, report.counterexamples[:5])
    report = check_shutdown_equivalence(K=2., delta_resolution=10)
    assert_true(report.equivalent, report.counterexamples[:5])


def test_grids():
    assert_equal(list(interior_grid(1., 2)), [-.5, 0., .5])
    assert_equal(list(closed_grid(-1., 1., 2)), [-1., -.5, 0., .5, 1.])


def test_report_dict_io():
    report = EquivalenceReport('output', 3, [{'h': 1., 's': 1}])
    raw = report.dump()
    assert_false(raw['equivalent'])
    assert_equal(EquivalenceReport.from_dict(raw), report)
