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
Dense numerics helpers.

Tensors are plain numpy float64 arrays in row-major order.  The helpers
here add the shape checks, finiteness checks and statistics that the
training engine relies on.
'''

import math
import logging
import numpy
from scipy.stats import pearsonr

LOG = logging.getLogger(__name__)


class DimensionError(ValueError):
    pass


class NonFiniteError(ValueError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


def as_tensor(x):
    return numpy.asarray(x, dtype=numpy.float64)


def check_finite(x, name='tensor'):
    if not numpy.all(numpy.isfinite(x)):
        bad = int(numpy.sum(~numpy.isfinite(x)))
        LOG.error('\n  '.join([
            'non-finite values',
            'name = {}'.format(name),
            'count = {} of {}'.format(bad, numpy.size(x)),
        ]))
        raise NonFiniteError('{} has {} non-finite values'.format(name, bad))
    return x


def check_shape(x, shape, name='tensor'):
    if tuple(numpy.shape(x)) != tuple(shape):
        LOG.error('\n  '.join([
            'shape mismatch',
            'name = {}'.format(name),
            'expected = {}'.format(tuple(shape)),
            'actual = {}'.format(tuple(numpy.shape(x))),
        ]))
        raise DimensionError('{} has shape {}, expected {}'.format(
            name, tuple(numpy.shape(x)), tuple(shape)))
    return x


def matmul(a, b):
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        LOG.error('\n  '.join([
            'matmul shape mismatch',
            'lhs = {}'.format(a.shape),
            'rhs = {}'.format(b.shape),
        ]))
        raise DimensionError(
            'cannot multiply {} by {}'.format(a.shape, b.shape))
    return check_finite(numpy.dot(a, b), 'matmul')


def saturate(h):
    return numpy.clip(h, -1., 1.)


def gate_mask(h):
    '''
    Feedback gate: 1 where |h| < 1, else 0.  The boundary |h| == 1 is shut.
    '''
    return (numpy.abs(h) < 1.).astype(numpy.float64)


def pearson(a, b):
    a = as_tensor(a).ravel()
    b = as_tensor(b).ravel()
    if a.size != b.size:
        raise DimensionError(
            'pearson needs equal sizes, got {} and {}'.format(a.size, b.size))
    if a.size < 2 or numpy.all(a == a[0]) or numpy.all(b == b[0]):
        raise UndefinedCorrelationError('zero variance')
    if numpy.array_equal(a, b):
        return 1.
    r, _ = pearsonr(a, b)
    return float(min(1., max(-1., r)))


def glorot_bound(fan_in, fan_out):
    assert fan_in > 0 and fan_out > 0, (fan_in, fan_out)
    return math.sqrt(6. / (fan_in + fan_out))


def glorot_uniform(rng, fan_in, fan_out, shape):
    bound = glorot_bound(fan_in, fan_out)
    return rng.uniform(-bound, bound, shape)
