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
Reproducible random streams.

Every stream is a numpy Philox4x64 counter-based generator keyed directly by
the run seed, so that identical seeds and identical call sequences produce
identical values on every platform.  Child streams for sweeps, pruning masks
and dropout derive their keys through numpy.random.SeedSequence.
'''

import zlib
import numpy

DEFAULT_SEED = 0


def derive_seed(seed, *keys):
    '''
    Deterministically combine a seed with integer or string keys.
    '''
    entropy = [int(seed) % 2 ** 64]
    for key in keys:
        if isinstance(key, str):
            key = zlib.crc32(key.encode('utf-8'))
        entropy.append(int(key) % 2 ** 64)
    state = numpy.random.SeedSequence(entropy).generate_state(2, numpy.uint64)
    return int(state[0]) | (int(state[1]) << 64)


class Rng(object):
    def __init__(self, seed=DEFAULT_SEED):
        assert 0 <= seed < 2 ** 128, seed
        self.seed = int(seed)
        self.np = numpy.random.Generator(numpy.random.Philox(key=self.seed))

    def spawn(self, *keys):
        return Rng(derive_seed(self.seed, *keys))

    def uniform(self, low=0., high=1., size=None):
        return self.np.uniform(low, high, size)

    def normal(self, loc=0., scale=1., size=None):
        return self.np.normal(loc, scale, size)

    def random(self, size=None):
        return self.np.random(size)

    def permutation(self, n):
        return self.np.permutation(n)

    def integers(self, low, high=None, size=None):
        return self.np.integers(low, high, size)
