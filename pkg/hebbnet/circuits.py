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

'''
Local circuits that compute the training signals with ordinary units.

The output-error circuit attaches a supervisory unit s (+1 for the true
class, -1 otherwise) and a control unit t to every output unit.  The
output unit o sees H = h + 2M s - 2M t and responds through a five level
transfer function; t watches o and cancels the supervisory drive whenever
o overshoots.  When the margin is violated o settles at 1 (or -mu);
otherwise o oscillates between 0 and 1 + eps (or -mu - eps) with period
four micro-steps, which averages to the hinge output delta.

The shutdown circuit places two control units u, v next to each hidden
unit; either one fires once the unit saturates and pushes the feedback
through the threshold so that nothing passes.
'''

import logging
import numpy
from hebbnet.feedback import hinge_output_delta
from hebbnet.mixins import DictIoMixin
from hebbnet.tensor import gate_mask
from hebbnet.util import ContractError

LOG = logging.getLogger(__name__)

DEFAULT_M = 10.
DEFAULT_S = 1.
DEFAULT_K = 10.
DEFAULT_EPS_OSC = 0.1
MAX_STEPS = 16


class NonconvergenceError(RuntimeError):
    pass


def _contract(ok, what, value, bound):
    if not ok:
        LOG.error('\n  '.join([
            'circuit input out of range',
            '{} = {}'.format(what, value),
            'bound = {}'.format(bound),
        ]))
        raise ContractError(
            '|{}| = {} must be below {}'.format(what, abs(value), bound))


# ----------------------------------------------------------------------------
# Output-error circuit

class OutputCircuit(object):
    def __init__(
            self,
            h=0.,
            s=1,
            M=DEFAULT_M,
            S=DEFAULT_S,
            mu=1.,
            eps_osc=DEFAULT_EPS_OSC,
            t_threshold=1.):
        assert s in (1, -1), s
        assert 0 < S < M, (S, M)
        assert mu > 0 and eps_osc > 0, (mu, eps_osc)
        _contract(abs(h) < M, 'h', h, M)
        self.h = float(h)
        self.s = int(s)
        self.M = float(M)
        self.S = float(S)
        self.mu = float(mu)
        self.eps_osc = float(eps_osc)
        self.t_threshold = float(t_threshold)
        self.delta = 0.
        self.t = 0

    @property
    def state(self):
        return (self.delta, self.t)

    def drive(self):
        return self.h + 2. * self.M * (self.s - self.t)

    def sigma_delta(self, x):
        M, S = self.M, self.S
        if x > 2. * M + S:
            return 1. + self.eps_osc
        if x >= M:
            return 1.
        if x > -M:
            return 0.
        if x >= -2. * M - S:
            return -self.mu
        return -self.mu - self.eps_osc

    def sigma_t(self, x):
        if x > self.t_threshold:
            return 1
        if x >= -self.mu:
            return 0
        return -1

    def update_delta(self):
        self.delta = self.sigma_delta(self.drive())

    def update_t(self):
        self.t = self.sigma_t(self.delta)


def output_circuit_step(c):
    '''
    One synchronous cycle: delta from the current drive, then t from delta.
    '''
    c.update_delta()
    c.update_t()
    return c


def output_circuit_trace(c, micro_steps=4):
    '''
    Returns [(micro_step, delta, t)], one row after each phase.
    '''
    rows = []
    for step in range(micro_steps):
        if step % 2 == 0:
            c.update_delta()
        else:
            c.update_t()
        rows.append((step + 1, c.delta, c.t))
    return rows


def _settle(c, max_steps):
    seen = [c.state]
    for _ in range(max_steps):
        output_circuit_step(c)
        state = c.state
        if state in seen:
            return seen[seen.index(state):]
        seen.append(state)
    LOG.error('\n  '.join([
        'output circuit did not settle',
        'h = {}, s = {}'.format(c.h, c.s),
        'states = {}'.format(seen),
    ]))
    raise NonconvergenceError(
        'no fixed point or cycle within {} steps'.format(max_steps))


def output_circuit_effective(c, max_steps=MAX_STEPS):
    '''
    The value the circuit computes once transients are ignored: a fixed
    point returns its delta, a cycle through 0 returns 0.
    '''
    cycle = _settle(c, max_steps)
    if len(cycle) == 1:
        return cycle[0][0]
    deltas = [delta for delta, _ in cycle]
    if 0. in deltas:
        return 0.
    LOG.error('\n  '.join([
        'output circuit cycles without a zero phase',
        'h = {}, s = {}'.format(c.h, c.s),
        'cycle = {}'.format(cycle),
    ]))
    raise NonconvergenceError('cycle {} never passes through 0'.format(cycle))


def oscillation_period(c, max_steps=MAX_STEPS):
    '''
    Period in micro-steps of the settled regime, 0 for a fixed point.
    '''
    cycle = _settle(c, max_steps)
    return 0 if len(cycle) == 1 else 2 * len(cycle)


# ----------------------------------------------------------------------------
# Shutdown circuit

class ShutdownCircuit(object):
    def __init__(self, x=0., delta=0., K=DEFAULT_K):
        assert K > 0, K
        _contract(abs(delta) < K, 'delta', delta, K)
        self.x = float(x)
        self.delta = float(delta)
        self.K = float(K)
        self.u = 0
        self.v = 0

    def sigma(self, y):
        return y if y >= -self.K else 0.


def shutdown_step(c):
    '''
    Update the control units from x and return the gated feedback.
    '''
    c.u = 1 if c.x >= 1. else 0
    c.v = -1 if c.x <= -1. else 0
    assert c.u * c.v == 0
    return c.sigma(c.delta - 2. * c.K * c.u + 2. * c.K * c.v)


# ----------------------------------------------------------------------------
# Equivalence against the training engine

class EquivalenceReport(DictIoMixin):
    def __init__(self, name='', checked=0, counterexamples=()):
        self.name = name
        self.checked = checked
        self.counterexamples = list(counterexamples)

    @property
    def equivalent(self):
        return not self.counterexamples

    def load(self, raw):
        self.__init__(raw['name'], raw['checked'], raw['counterexamples'])

    def dump(self):
        return {
            'name': self.name,
            'equivalent': self.equivalent,
            'checked': self.checked,
            'counterexamples': self.counterexamples,
        }


def interior_grid(bound, resolution):
    '''
    Points i / resolution strictly inside (-bound, bound).
    '''
    top = int(round(bound * resolution))
    return numpy.arange(-top + 1, top) / float(resolution)


def closed_grid(low, high, resolution):
    lo = int(round(low * resolution))
    hi = int(round(high * resolution))
    return numpy.arange(lo, hi + 1) / float(resolution)


def hinge_oracle(h, s, S=DEFAULT_S, mu=1.):
    '''
    The engine's output delta for a unit with activity h, rescaled to
    margin S.
    '''
    c = 0 if s == 1 else 1
    return float(hinge_output_delta([h / S, 0.], c, mu)[0])


def check_output_equivalence(
        M=DEFAULT_M,
        S=DEFAULT_S,
        mu=1.,
        eps_osc=DEFAULT_EPS_OSC,
        resolution=20,
        t_threshold=1.):
    report = EquivalenceReport('output')
    for h in interior_grid(M, resolution):
        for s in (1, -1):
            circuit = OutputCircuit(h, s, M, S, mu, eps_osc, t_threshold)
            try:
                actual = output_circuit_effective(circuit)
            except NonconvergenceError:
                actual = None
            expected = hinge_oracle(h, s, S, mu)
            report.checked += 1
            if actual != expected:
                report.counterexamples.append({
                    'h': float(h),
                    's': s,
                    'expected': expected,
                    'actual': actual,
                })
    LOG.info('output circuit: %d checked, %d counterexamples',
             report.checked, len(report.counterexamples))
    return report


def check_shutdown_equivalence(
        K=DEFAULT_K,
        x_range=3.,
        x_resolution=20,
        delta_resolution=2):
    report = EquivalenceReport('shutdown')
    xs = closed_grid(-x_range, x_range, x_resolution)
    for delta in interior_grid(K, delta_resolution):
        expected = gate_mask(xs) * delta
        for x, want in zip(xs, expected):
            actual = shutdown_step(ShutdownCircuit(x, delta, K))
            report.checked += 1
            if actual != want:
                report.counterexamples.append({
                    'x': float(x),
                    'delta': float(delta),
                    'expected': float(want),
                    'actual': float(actual),
                })
    LOG.info('shutdown circuit: %d checked, %d counterexamples',
             report.checked, len(report.counterexamples))
    return report
