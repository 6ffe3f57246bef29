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
import bz2
import gzip
import logging
import numpy
import simplejson

LOG = logging.getLogger(__name__)

TENSOR_DTYPE = '<f8'


class CheckpointError(IOError):
    pass


def mkdir_p(dirname):
    'like mkdir -p'
    if not os.path.exists(dirname):
        try:
            os.makedirs(dirname)
        except OSError as e:
            if not os.path.exists(dirname):
                raise e


def open_compressed(filename, mode='r'):
    if 'w' in mode:
        dirname = os.path.dirname(filename)
        if dirname:
            mkdir_p(dirname)
    if filename.endswith('.bz2'):
        return bz2.open(filename, mode)
    elif filename.endswith('.gz'):
        return gzip.open(filename, mode)
    else:
        return open(filename, mode)


def json_dump(data, filename, **kwargs):
    kwargs.setdefault('sort_keys', True)
    kwargs.setdefault('indent', 2)
    with open_compressed(filename, 'wt') as f:
        simplejson.dump(data, f, **kwargs)


def json_load(filename):
    with open_compressed(filename, 'rt') as f:
        return simplejson.load(f)


def tensor_stream_write(name, array, fd):
    '''
    Write one named tensor as a text header line followed by raw
    little-endian float64 bytes in row-major order.
    '''
    assert name and len(name.split()) == 1, name
    array = numpy.ascontiguousarray(array, dtype=TENSOR_DTYPE)
    assert array.ndim >= 1, name
    shape = 'x'.join(str(dim) for dim in array.shape)
    header = 'tensor {} {} {}\n'.format(name, TENSOR_DTYPE, shape)
    fd.write(header.encode('ascii'))
    fd.write(array.tobytes())


def tensor_stream_read(fd):
    line = fd.readline()
    if not line:
        raise StopIteration
    try:
        kind, name, dtype, shape = line.decode('ascii').split()
        shape = tuple(int(dim) for dim in shape.split('x'))
    except (UnicodeDecodeError, ValueError):
        LOG.error('bad checkpoint header: {!r}'.format(line[:80]))
        raise CheckpointError('bad checkpoint header: {!r}'.format(line[:80]))
    if kind != 'tensor' or dtype != TENSOR_DTYPE:
        raise CheckpointError(
            'unsupported tensor record: {} {}'.format(kind, dtype))
    size = int(numpy.prod(shape)) * numpy.dtype(TENSOR_DTYPE).itemsize
    raw = fd.read(size)
    if len(raw) < size:
        LOG.error('\n  '.join([
            'truncated checkpoint tensor',
            'name = {}'.format(name),
            'expected bytes = {}'.format(size),
            'actual bytes = {}'.format(len(raw)),
        ]))
        raise CheckpointError('truncated checkpoint tensor {}'.format(name))
    array = numpy.frombuffer(raw, dtype=TENSOR_DTYPE).reshape(shape)
    return name, array.astype(numpy.float64)


def tensor_stream_dump(stream, filename):
    with open_compressed(filename, 'wb') as f:
        for name, array in stream:
            tensor_stream_write(name, array, f)


class tensor_stream_load(object):
    def __init__(self, filename):
        self.fd = open_compressed(filename, 'rb')

    def __iter__(self):
        return self

    def __next__(self):
        try:
            return tensor_stream_read(self.fd)
        except BaseException:
            self.close()
            raise

    def close(self):
        self.fd.close()
