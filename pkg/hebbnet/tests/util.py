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

import os
import math
import numpy
from numpy.testing import assert_array_almost_equal
from nose import SkipTest
from nose.tools import assert_true, assert_less, assert_equal
from goftests import multinomial_goodness_of_fit
import hebbnet
from hebbnet.netspec import ExperimentConfig

ROOT = os.path.abspath(os.path.dirname(os.path.dirname(__file__)))
TOL = 1e-3

DATA_FILES = {
    'cifar10': 'cifar10/test_batch.bin',
    'cifar100': 'cifar100/test.bin',
    'mnist': 'mnist/t10k-labels-idx1-ubyte',
}


def require_dataset(name):
    dirname, filename = os.path.split(DATA_FILES[name])
    dirname = os.path.join(hebbnet.DATA, dirname)
    for suffix in ['', '.gz', '.bz2']:
        if os.path.exists(os.path.join(dirname, filename + suffix)):
            return
    raise SkipTest('{} not found under {}'.format(name, hebbnet.DATA))


def toy_config(**kwargs):
    defaults = {
        'dataset': 'toy',
        'arch': 'Output',
        'batch_size': 10,
        'epochs': 3,
        'validation': 0,
        'toy_classes': 2,
        'toy_dim': 4,
        'toy_per_class': 20,
    }
    defaults.update(kwargs)
    return ExperimentConfig().update(defaults)


def print_short(x, size=64):
    string = str(x)
    if len(string) > size:
        string = string[:size - 3] + '...'
    return string


def assert_close(lhs, rhs, tol=TOL, err_msg=None):
    try:
        if isinstance(lhs, dict):
            assert_true(
                isinstance(rhs, dict),
                'type mismatch: {} vs {}'.format(type(lhs), type(rhs)))
            assert_equal(set(lhs.keys()), set(rhs.keys()))
            for key, val in lhs.items():
                msg = '{}[{}]'.format(err_msg or '', key)
                assert_close(val, rhs[key], tol, msg)
        elif isinstance(lhs, (float, numpy.floating)):
            diff = abs(lhs - rhs)
            norm = 1 + abs(lhs) + abs(rhs)
            msg = '{} off by {}% = {}'.format(
                err_msg or '',
                100 * diff / norm,
                diff)
            assert_less(diff, tol * norm, msg)
        elif isinstance(lhs, numpy.ndarray) or isinstance(rhs, numpy.ndarray):
            decimal = int(round(-math.log10(tol)))
            assert_array_almost_equal(
                lhs,
                rhs,
                decimal=decimal,
                err_msg=(err_msg or ''))
        elif isinstance(lhs, (list, tuple)):
            assert_true(
                isinstance(rhs, (list, tuple)),
                'type mismatch: {} vs {}'.format(type(lhs), type(rhs)))
            assert_equal(len(lhs), len(rhs))
            for pos, (x, y) in enumerate(zip(lhs, rhs)):
                msg = '{}[{}]'.format(err_msg or '', pos)
                assert_close(x, y, tol, msg)
        else:
            assert_equal(lhs, rhs, err_msg)
    except Exception:
        print(err_msg or '')
        print('actual = {}'.format(print_short(lhs)))
        print('expected = {}'.format(print_short(rhs)))
        raise


def assert_relative_error(actual, expected, tol):
    '''
    Norm-wise relative error ||actual - expected|| / ||expected||.
    '''
    actual = numpy.asarray(actual, dtype=float)
    expected = numpy.asarray(expected, dtype=float)
    scale = max(numpy.linalg.norm(expected), 1e-12)
    error = numpy.linalg.norm(actual - expected) / scale
    print('relative error = {:0.3g}'.format(error))
    assert_less(error, tol)


def assert_counts_match_probs(counts, probs, tol=1e-3):
    '''
    Pearson chi-squared goodness of fit of observed counts to probabilities.
    '''
    total_count = sum(counts)
    gof = multinomial_goodness_of_fit(probs, counts, total_count)
    print('goodness of fit = {}'.format(gof))
    assert gof > tol, 'failed with goodness of fit {}'.format(gof)
