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

import math
import numpy
from nose.tools import (
    assert_almost_equal,
    assert_equal,
    assert_greater,
    assert_less,
    assert_less_equal,
    assert_raises,
    assert_true,
)
import pytest
from hebbnet.lindyn import (
    EPS_LIST,
    SIM_DIMS,
    InstabilityError,
    MatrixDynState,
    RateReport,
    ScalarDynState,
    aligned_setup,
    conserved_check,
    euler_step_matrix,
    euler_step_scalar,
    first_passage,
    mode_errors,
    random_setup,
    rate_monotonicity,
    replicate_sim,
)
from hebbnet.rng import Rng


def test_first_matrix_step_moves_only_the_bottom_layer():
    state = random_setup((5, 6, 7, 4), Rng(1))
    euler_step_matrix(state)
    assert_greater(numpy.abs(state.W[0]).max(), 0.)
    for w in state.W[1:]:
        assert_equal(numpy.abs(w).max(), 0.)
    assert_equal(state.iteration, 1)


def test_zero_target_is_a_fixed_point():
    W = [numpy.zeros((3, 4)), numpy.zeros((2, 3))]
    R0 = [numpy.ones((4, 3)), numpy.ones((3, 2))]
    state = MatrixDynState(W, R0, numpy.zeros((2, 4)))
    for _ in range(10):
        euler_step_matrix(state)
    for w in state.W:
        assert_equal(numpy.abs(w).max(), 0.)


def test_aligned_matrix_error_decreases():
    state, _, _ = aligned_setup((6, 5, 3), [1., 1.5, 2.], [.4], Rng(2))
    errors = [state.e2()]
    for _ in range(3000):
        euler_step_matrix(state)
        errors.append(state.e2())
    assert_true(all(b <= a + 1e-12 for a, b in zip(errors, errors[1:])))
    assert_less(errors[-1], .5 * errors[0])


def test_matrix_divergence_is_reported():
    state = MatrixDynState(
        [numpy.zeros((2, 3))], [numpy.zeros((3, 2))], numpy.ones((2, 3)),
        dt=3.)
    assert_raises(InstabilityError, first_passage, state, 1e-6, 100)


def test_scalar_rates_at_zero():
    state = ScalarDynState.from_zero(2, [.3], [2.])
    rates = state.rates()
    assert_equal(rates[1, 0], 0.)
    assert_almost_equal(rates[0, 0], .3 * 2.)


def test_scalar_stationary_point():
    state = ScalarDynState([[2.], [1.5]], [.3], [3.])
    assert_equal(state.error()[0], 0.)
    euler_step_scalar(state)
    assert_equal(state.lam.tolist(), [[2.], [1.5]])


def test_scalar_divergence_is_reported():
    state = ScalarDynState.from_zero(2, [1.], [1.], eps=1., dt=5.)
    assert_raises(InstabilityError, first_passage, state, 1e-6, 100)


def test_scalar_lambdas_increase():
    state = ScalarDynState.from_zero(3, [.5, .3], [1., 2.], eps=.5)
    previous = state.lam.copy()
    for _ in range(5000):
        euler_step_scalar(state)
        assert_true(numpy.all(state.lam >= previous))
        assert_true(numpy.all(numpy.prod(state.lam, axis=0) <= state.lam_T))
        previous = state.lam.copy()


def test_updated_feedback_converges_sooner_in_two_layers():
    passages = {}
    for eps in [0., 1.]:
        state = ScalarDynState.from_zero(2, [.05], [1.], eps=eps)
        passages[eps] = first_passage(state, 1e-6, 200000)
        assert_true(passages[eps] is not None)
    assert_less(passages[1.], passages[0.])


def test_conserved_quantity_at_start():
    state = ScalarDynState.from_zero(3, [.5, .3], [1., 2.], eps=1.)
    assert_equal(conserved_check(state), 0.)


def residual_trace(dt, t_end=10., t_start=1., eps=1.):
    state = ScalarDynState.from_zero(3, [.5, .3], [1., 2.], eps=eps, dt=dt)
    steps = int(round(t_end / dt))
    first = int(round(t_start / dt))
    worst = 0.
    for step in range(1, steps + 1):
        euler_step_scalar(state)
        if step >= first:
            worst = max(worst, conserved_check(state))
    return worst


@pytest.mark.parametrize('eps', [0., .5, 1.])
def test_conserved_quantity_is_first_order(eps):
    coarse = residual_trace(1e-3, eps=eps)
    fine = residual_trace(5e-4, eps=eps)
    print('residuals {} {}'.format(coarse, fine))
    assert_less_equal(coarse, 1e-2)
    ratio = coarse / fine
    assert_true(1.7 <= ratio <= 2.3, ratio)


@pytest.mark.parametrize('dims', [(6, 5, 4), (7, 6, 5, 4), (20, 12, 8)])
def test_matrix_and_scalar_systems_agree(dims):
    k = len(dims) - 1
    modes = dims[-1]
    lam_T = numpy.linspace(1., 2., modes)
    lam_R = [.4 - .1 * i for i in range(k - 1)]
    matrix, scalar, U = aligned_setup(dims, lam_T, lam_R, Rng(3), eps=.5)
    for _ in range(500):
        euler_step_matrix(matrix)
        euler_step_scalar(scalar)
        assert_less(numpy.abs(mode_errors(matrix, U) - scalar.error()).max(),
                    1e-6)


def test_rate_report():
    report = RateReport([0., .5, 1.], [300, 200, 100])
    assert_true(report.ordered and report.strict)
    report = RateReport([0., .5, 1.], [300, 300, 100])
    assert_true(report.ordered and not report.strict)
    report = RateReport([0., 1.], [None, 100])
    assert_true(report.ordered)
    report = RateReport([0., 1.], [100, None])
    assert_true(not report.ordered)
    assert_equal(RateReport.from_dict(report.dump()), report)


def test_single_eps_is_trivially_ordered():
    report = rate_monotonicity(
        lambda eps: ScalarDynState.from_zero(2, [.5], [1.], eps=eps), [1.])
    assert_true(report.ordered)
    assert_equal(len(report.passages), 1)


def test_scalar_rates_increase_with_eps():
    # lam_R_2 > (1 + sqrt(1 + eps)) / 2 * lam_R_3 and lam_R << lam_T
    lam_R = [.05, .03]
    assert_greater(lam_R[0], (1. + math.sqrt(2.)) / 2. * lam_R[1])
    report = rate_monotonicity(
        lambda eps: ScalarDynState.from_zero(3, lam_R, [1.], eps=eps),
        EPS_LIST,
        max_steps=10 ** 6)
    print(report.dump())
    assert_true(report.strict)


@pytest.mark.parametrize('seed', range(2))
def test_updated_feedback_converges_sooner_in_random_networks(seed):
    rng = Rng(seed)
    report = rate_monotonicity(
        lambda eps: random_setup((20, 40, 40, 5), rng, eps),
        EPS_LIST,
        threshold=1e-4,
        max_steps=100000)
    print(report.dump())
    assert_true(all(p is not None for p in report.passages))
    assert_less(report.passages[-1], report.passages[0])


def test_replicate_sim_layout():
    bundle = replicate_sim((6, 8, 8, 3), iterations=20, rng=Rng(4))
    assert_equal([t.label for t in bundle], ['BP'] + ['eps'] * 4)
    assert_equal([t.eps for t in bundle[1:]], list(EPS_LIST))
    for trajectory in bundle:
        assert_equal(len(trajectory.log10_e2), 21)
        assert_equal(len(trajectory.correlations), 21)
        assert_equal(len(trajectory.correlations[-1]), 3)
    for corrs in bundle[0].correlations:
        for corr in corrs:
            assert_almost_equal(corr, 1.)
    rows = list(bundle[1].rows())
    assert_equal(rows[0][:2], ['0', '0.0'])
    assert_equal(len(rows[0]), 6)


@pytest.mark.parametrize('seed', range(3))
def test_full_size_passages_strictly_decrease(seed):
    report = rate_monotonicity(
        lambda eps: random_setup(SIM_DIMS, Rng(seed), eps),
        EPS_LIST,
        max_steps=20000)
    print(report.dump())
    assert_true(all(p is not None for p in report.passages))
    assert_true(report.strict)


@pytest.mark.parametrize('seed', range(3))
def test_replicate_sim_top_layer_alignment(seed):
    bundle = replicate_sim(SIM_DIMS, rng=Rng(seed), baseline=False)
    top = [trajectory.correlations[-1][-1] for trajectory in bundle]
    print('top layer by eps: {}'.format(top))
    for lower, higher in zip(top, top[1:]):
        assert_less(lower, higher)
    assert_greater(top[-1], .97)
    for trajectory in bundle:
        assert_less(trajectory.log10_e2[-1], trajectory.log10_e2[0])
