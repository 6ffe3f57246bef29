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
Gradient dynamics of deep linear networks trained with random feedback.

A network W_k ... W_1 learns a target T (n_k x n_0) under

    dW_i/dt = F_{i+1} ... F_k E W_1^t ... W_{i-1}^t,    E = T - W_k ... W_1

with feedback factors F_j = R_j(0) + eps W_j^t.  eps = 0 keeps the feedback
fixed, eps = 1 updates it with the same increment as W (starting from
W(0) = 0), and exact back-propagation uses F_j = W_j^t.

When T, R(0) share singular vectors the system decouples into one scalar
system per singular value:

    dlam_i/dt = prod_{j>i}(lam_R_j + eps lam_j) * e * prod_{j<i} lam_j,
    e = lam_T - prod_j lam_j

along which lam_R_i lam_i + eps/2 lam_i^2 - 1/2 lam_{i-1}^2 is conserved.
'''

import logging
import numpy
from hebbnet.mixins import DictIoMixin
from hebbnet.tensor import UndefinedCorrelationError, check_finite, pearson

LOG = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DIVERGENCE_FACTOR = 10.
PASSAGE_THRESHOLD = 1e-6
TINY = 1e-300
EPS_LIST = (0., .25, .5, 1.)
SIM_DIMS = (40, 100, 100, 10)
SIM_SD = .2


class InstabilityError(ArithmeticError):
    pass


def _guard(error_norm, initial_norm, dt, iteration):
    if not numpy.isfinite(error_norm) or (
            error_norm > DIVERGENCE_FACTOR * initial_norm):
        LOG.error('\n  '.join([
            'linear dynamics diverged',
            'iteration = {}'.format(iteration),
            'error norm = {}'.format(error_norm),
            'initial error norm = {}'.format(initial_norm),
            'dt = {}'.format(dt),
        ]))
        raise InstabilityError(
            'error grew from {:g} to {:g} at iteration {}; '
            'retry with a smaller dt than {:g}'.format(
                initial_norm, error_norm, iteration, dt))


class MatrixDynState(object):
    '''
    W[i] holds W_{i+1} (n_{i+1} x n_i) and R0[i] holds R_{i+1}(0)
    (n_i x n_{i+1}).  R0[0] never enters the dynamics; it only serves the
    alignment statistic of the first layer.
    '''
    def __init__(self, W, R0, T, eps=1., dt=DEFAULT_DT, mode='RFB'):
        assert mode in ('RFB', 'BP'), mode
        assert dt > 0, dt
        assert len(W) == len(R0) >= 1
        self.W = [numpy.array(w, dtype=numpy.float64) for w in W]
        self.R0 = [numpy.array(r, dtype=numpy.float64) for r in R0]
        self.T = numpy.array(T, dtype=numpy.float64)
        self.eps = float(eps)
        self.dt = float(dt)
        self.mode = mode
        self.iteration = 0
        for w, r in zip(self.W, self.R0):
            assert r.shape == w.T.shape, (w.shape, r.shape)
        assert self.T.shape == (self.W[-1].shape[0], self.W[0].shape[1])
        self.initial_norm = numpy.linalg.norm(self.error())

    @property
    def k(self):
        return len(self.W)

    def product(self):
        result = self.W[0]
        for w in self.W[1:]:
            result = numpy.dot(w, result)
        return result

    def error(self):
        return self.T - self.product()

    def e2(self):
        return float(numpy.sum(self.error() ** 2))

    def feedback(self, i):
        if self.mode == 'BP':
            return self.W[i].T
        return self.R0[i] + self.eps * self.W[i].T

    def correlations(self):
        '''
        corr(W_i, R_i^t) per layer, nan where undefined.
        '''
        result = []
        for i in range(self.k):
            try:
                result.append(pearson(self.W[i], self.feedback(i).T))
            except UndefinedCorrelationError:
                result.append(float('nan'))
        return result


def euler_step_matrix(s):
    '''
    Advance a MatrixDynState by one explicit Euler step, in place.
    '''
    E = s.error()
    _guard(numpy.linalg.norm(E), s.initial_norm, s.dt, s.iteration)
    k = s.k
    suffix = [None] * k
    suffix[k - 1] = numpy.eye(s.T.shape[0])
    for i in range(k - 2, -1, -1):
        suffix[i] = numpy.dot(s.feedback(i + 1), suffix[i + 1])
    prefix = numpy.eye(s.T.shape[1])
    rates = []
    for i in range(k):
        rates.append(numpy.dot(numpy.dot(suffix[i], E), prefix))
        prefix = numpy.dot(prefix, s.W[i].T)
    for w, rate in zip(s.W, rates):
        w += s.dt * rate
    s.iteration += 1
    return s


def _per_layer(values, layers, modes):
    '''
    A flat list holds one scalar per layer; nested rows hold one entry
    per mode.
    '''
    values = numpy.array(values, dtype=numpy.float64)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    values = values * numpy.ones((layers, modes))
    assert values.shape == (layers, modes), values.shape
    return values


class ScalarDynState(object):
    '''
    lam[i] holds lam_{i+1}, lam_R[i] holds lam_R_{i+2}; each row carries
    one entry per decoupled mode.
    '''
    def __init__(self, lam, lam_R, lam_T, eps=1., dt=DEFAULT_DT):
        assert dt > 0, dt
        self.lam_T = numpy.atleast_1d(numpy.array(lam_T, dtype=numpy.float64))
        modes = len(self.lam_T)
        self.lam = numpy.array(lam, dtype=numpy.float64).reshape(-1, modes)
        k = len(self.lam)
        self.lam_R = _per_layer(lam_R, k - 1, modes)
        self.eps = float(eps)
        self.dt = float(dt)
        self.iteration = 0
        self.initial_norm = numpy.linalg.norm(self.error())

    @classmethod
    def from_zero(cls, k, lam_R, lam_T, eps=1., dt=DEFAULT_DT):
        modes = len(numpy.atleast_1d(lam_T))
        return cls(numpy.zeros((k, modes)), lam_R, lam_T, eps, dt)

    @property
    def k(self):
        return len(self.lam)

    def error(self):
        return self.lam_T - numpy.prod(self.lam, axis=0)

    def e2(self):
        return float(numpy.sum(self.error() ** 2))

    def rates(self):
        e = self.error()
        factors = self.lam_R + self.eps * self.lam[1:]
        return numpy.array([
            numpy.prod(factors[i:], axis=0) * e *
            numpy.prod(self.lam[:i], axis=0)
            for i in range(self.k)
        ])


def euler_step_scalar(s):
    e = s.error()
    _guard(numpy.linalg.norm(e), s.initial_norm, s.dt, s.iteration)
    s.lam += s.dt * s.rates()
    check_finite(s.lam, 'lambda')
    s.iteration += 1
    return s


def conserved_residuals(s):
    '''
    Relative residual of lam_R_i lam_i + eps/2 lam_i^2 = 1/2 lam_{i-1}^2
    for each upper layer i and mode.
    '''
    upper = s.lam[1:]
    lower = s.lam[:-1]
    drift = s.lam_R * upper + .5 * s.eps * upper ** 2 - .5 * lower ** 2
    return numpy.abs(drift) / (.5 * lower ** 2 + TINY)


def conserved_check(s):
    if s.k < 2:
        return 0.
    return float(conserved_residuals(s).max())


def _step_fn(state):
    if isinstance(state, ScalarDynState):
        return euler_step_scalar
    return euler_step_matrix


def first_passage(state, threshold=PASSAGE_THRESHOLD, max_steps=10 ** 6):
    '''
    First iteration at which e^2 <= threshold * e^2(0), or None.
    '''
    step = _step_fn(state)
    target = threshold * state.e2()
    while state.iteration < max_steps:
        if state.e2() <= target:
            return state.iteration
        step(state)
    return state.iteration if state.e2() <= target else None


class RateReport(DictIoMixin):
    def __init__(self, eps=(), passages=(), threshold=PASSAGE_THRESHOLD):
        self.eps = list(eps)
        self.passages = list(passages)
        self.threshold = threshold

    def _times(self):
        pairs = sorted(zip(self.eps, self.passages))
        return [
            float('inf') if passage is None else passage
            for _, passage in pairs
        ]

    @property
    def ordered(self):
        '''
        Larger eps is never slower.
        '''
        times = self._times()
        return all(b <= a for a, b in zip(times, times[1:]))

    @property
    def strict(self):
        times = self._times()
        return all(b < a for a, b in zip(times, times[1:]))

    def load(self, raw):
        self.__init__(raw['eps'], raw['passages'], raw['threshold'])

    def dump(self):
        return {
            'eps': self.eps,
            'passages': self.passages,
            'threshold': self.threshold,
            'ordered': self.ordered,
            'strict': self.strict,
        }


def rate_monotonicity(
        setup,
        eps_list=EPS_LIST,
        threshold=PASSAGE_THRESHOLD,
        max_steps=10 ** 6):
    '''
    setup(eps) must build identical initial data for every eps.
    '''
    passages = []
    for eps in eps_list:
        passage = first_passage(setup(eps), threshold, max_steps)
        LOG.info('eps=%g: first passage at %s', eps, passage)
        passages.append(passage)
    return RateReport(eps_list, passages, threshold)


# ----------------------------------------------------------------------------
# Initial conditions

def _orthonormal_columns(rng, rows, cols):
    q, r = numpy.linalg.qr(rng.normal(size=(rows, cols)))
    return q * numpy.sign(numpy.diag(r))


def aligned_setup(dims, lam_T, lam_R, rng, eps=1., dt=DEFAULT_DT):
    '''
    Build a matrix system and its decoupled scalar twin.

    dims = (n_0, ..., n_k) with n_k <= every n_i; lam_T has n_k entries;
    lam_R lists the feedback singular values of layers 2..k (scalars or
    n_k entries each).  Returns (MatrixDynState, ScalarDynState, U) where
    U[i] (n_i x n_k) holds the orthonormal modes of layer i.
    '''
    dims = list(dims)
    k = len(dims) - 1
    modes = dims[-1]
    assert k >= 1 and modes <= min(dims), dims
    lam_T = numpy.array(lam_T, dtype=numpy.float64) * numpy.ones(modes)
    lam_R = _per_layer(lam_R, k - 1, modes)
    U = [_orthonormal_columns(rng.spawn('modes', i), n, modes)
         for i, n in enumerate(dims)]
    T = numpy.dot(U[k] * lam_T, U[0].T)
    first = lam_R[0] if k > 1 else numpy.ones(modes)
    R0 = [numpy.dot(U[0] * first, U[1].T)]
    R0 += [numpy.dot(U[i] * lam_R[i - 1], U[i + 1].T) for i in range(1, k)]
    W = [numpy.zeros((dims[i + 1], dims[i])) for i in range(k)]
    matrix = MatrixDynState(W, R0, T, eps, dt)
    scalar = ScalarDynState.from_zero(k, lam_R, lam_T, eps, dt)
    return matrix, scalar, U


def mode_errors(matrix, U):
    return numpy.diag(numpy.dot(numpy.dot(U[-1].T, matrix.error()), U[0]))


def random_setup(
        dims,
        rng,
        eps=1.,
        dt=DEFAULT_DT,
        weight_sd=SIM_SD,
        feedback_sd=SIM_SD,
        bp=False):
    '''
    Target T = W*_k ... W*_1 with iid normal factors.  Feedback runs start
    from W(0) = 0 and random R(0); the BP baseline starts from random W(0).
    The same rng gives the same T, R(0) and W(0) for every eps.
    '''
    dims = list(dims)
    k = len(dims) - 1
    target_rng = rng.spawn('target')
    factors = [
        target_rng.normal(0., weight_sd, (dims[i + 1], dims[i]))
        for i in range(k)
    ]
    T = factors[0]
    for factor in factors[1:]:
        T = numpy.dot(factor, T)
    feedback_rng = rng.spawn('feedback')
    R0 = [
        feedback_rng.normal(0., feedback_sd, (dims[i], dims[i + 1]))
        for i in range(k)
    ]
    if bp:
        init_rng = rng.spawn('init')
        W = [
            init_rng.normal(0., weight_sd, (dims[i + 1], dims[i]))
            for i in range(k)
        ]
        return MatrixDynState(W, R0, T, 0., dt, mode='BP')
    W = [numpy.zeros((dims[i + 1], dims[i])) for i in range(k)]
    return MatrixDynState(W, R0, T, eps, dt)


# ----------------------------------------------------------------------------
# Simulation study

class Trajectory(object):
    def __init__(self, label, eps=None):
        self.label = label
        self.eps = eps
        self.log10_e2 = []
        self.correlations = []

    def record(self, state):
        self.log10_e2.append(float(numpy.log10(max(state.e2(), TINY))))
        self.correlations.append(state.correlations())

    def rows(self):
        eps = self.label if self.eps is None else repr(self.eps)
        for iteration, (log_e2, corrs) in enumerate(
                zip(self.log10_e2, self.correlations)):
            yield [str(iteration), eps, repr(log_e2)] + [
                repr(float(c)) for c in corrs
            ]


def run_trajectory(state, label, iterations, eps=None):
    trajectory = Trajectory(label, eps)
    trajectory.record(state)
    for _ in range(iterations):
        euler_step_matrix(state)
        trajectory.record(state)
    return trajectory


def replicate_sim(
        dims=SIM_DIMS,
        eps_list=EPS_LIST,
        iterations=1000,
        dt=DEFAULT_DT,
        rng=None,
        baseline=True):
    '''
    The BP baseline plus one feedback run per eps from shared initial data.
    Returns a list of Trajectory, the baseline first.
    '''
    assert rng is not None, 'replicate_sim needs an rng'
    bundle = []
    if baseline:
        state = random_setup(dims, rng, dt=dt, bp=True)
        bundle.append(run_trajectory(state, 'BP', iterations))
    for eps in eps_list:
        state = random_setup(dims, rng, eps=eps, dt=dt)
        bundle.append(run_trajectory(state, 'eps', iterations, eps))
        LOG.info('eps=%g: final log10 e2 = %.3f, correlations = %s',
                 eps, bundle[-1].log10_e2[-1],
                 ', '.join('{:.3f}'.format(c)
                           for c in bundle[-1].correlations[-1]))
    return bundle
