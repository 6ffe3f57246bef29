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
Dataset ingestion.

Directory layouts (relative to a data root, default $HEBBNET_DATA)::

    cifar10/   data_batch_1.bin ... data_batch_5.bin, test_batch.bin
    cifar100/  train.bin, test.bin
    mnist/     train-images-idx3-ubyte, train-labels-idx1-ubyte,
               t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte

Any of these files may carry a .gz or .bz2 suffix.  Pixels are mapped to
[0,1] by v / 255 and nothing else.
'''

import os
import struct
import logging
import numpy
import hebbnet
from hebbnet.fileutil import find_files
from hebbnet.io.stream import open_compressed

LOG = logging.getLogger(__name__)

CIFAR_SHAPE = (3, 32, 32)
CIFAR_PIXELS = 3072
MNIST_SHAPE = (1, 28, 28)
IDX_UBYTE = 0x08
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class FormatError(ValueError):
    pass


class Dataset(object):
    def __init__(self, images, labels, classes):
        self.images = numpy.asarray(images, dtype=numpy.float64)
        self.labels = numpy.asarray(labels, dtype=numpy.int64)
        self.classes = int(classes)
        if len(self.images) != len(self.labels):
            raise FormatError('{} images but {} labels'.format(
                len(self.images), len(self.labels)))
        if len(self.labels) and not (
                0 <= self.labels.min() and self.labels.max() < self.classes):
            raise FormatError('labels outside [0, {})'.format(self.classes))

    def __len__(self):
        return len(self.labels)

    @property
    def shape(self):
        return tuple(self.images.shape[1:])

    def subset(self, begin, end=None):
        return Dataset(
            self.images[begin:end],
            self.labels[begin:end],
            self.classes)

    def split(self, validation):
        '''
        Hold out the last `validation` samples.
        '''
        assert 0 <= validation <= len(self), validation
        cut = len(self) - validation
        return self.subset(0, cut), self.subset(cut)

    def batches(self, batch_size, rng):
        '''
        Seeded shuffled batches; the final partial batch is dropped.
        '''
        assert batch_size >= 1, batch_size
        order = rng.permutation(len(self))
        for start in range(0, len(self) - batch_size + 1, batch_size):
            index = order[start: start + batch_size]
            yield self.images[index], self.labels[index]


# ----------------------------------------------------------------------------
# CIFAR binary batches

def parse_cifar_records(raw, label_bytes, classes, filename='<bytes>'):
    record = label_bytes + CIFAR_PIXELS
    data = numpy.frombuffer(raw, dtype=numpy.uint8)
    if len(data) % record:
        LOG.error('\n  '.join([
            'truncated CIFAR record',
            'file = {}'.format(filename),
            'bytes = {}'.format(len(data)),
            'record size = {}'.format(record),
        ]))
        raise FormatError('{}: {} trailing bytes'.format(
            filename, len(data) % record))
    data = data.reshape(-1, record)
    labels = data[:, label_bytes - 1].astype(numpy.int64)
    if len(labels) and labels.max() >= classes:
        raise FormatError('{}: label {} >= {}'.format(
            filename, labels.max(), classes))
    images = data[:, label_bytes:].reshape((-1,) + CIFAR_SHAPE) / 255.
    return Dataset(images, labels, classes)


def dump_cifar(dataset, filename, coarse_labels=None):
    '''
    Write a dataset as CIFAR binary records.  With coarse_labels the
    three byte CIFAR-100 layout is used.
    '''
    pixels = numpy.rint(dataset.images * 255).astype(numpy.uint8)
    pixels = pixels.reshape(len(dataset), CIFAR_PIXELS)
    columns = [dataset.labels.astype(numpy.uint8)[:, None]]
    if coarse_labels is not None:
        columns.insert(0, numpy.asarray(coarse_labels, numpy.uint8)[:, None])
    with open_compressed(filename, 'wb') as f:
        f.write(numpy.hstack(columns + [pixels]).tobytes())


def _read_bytes(filename):
    with open_compressed(filename, 'rb') as f:
        return f.read()


def _concat(parts, classes, shape):
    if not parts:
        return Dataset(numpy.zeros((0,) + shape), numpy.zeros(0), classes)
    return Dataset(
        numpy.concatenate([part.images for part in parts]),
        numpy.concatenate([part.labels for part in parts]),
        classes)


def _require(dirname, pattern):
    found = find_files(dirname, pattern)
    if not found:
        raise IOError('missing {} in {}'.format(pattern, dirname))
    return found[0]


def load_cifar10(dirname, train=True):
    if train:
        names = ['data_batch_{}.bin'.format(i) for i in range(1, 6)]
    else:
        names = ['test_batch.bin']
    parts = []
    for name in names:
        filename = _require(dirname, name)
        parts.append(parse_cifar_records(_read_bytes(filename), 1, 10, filename))
    return _concat(parts, 10, CIFAR_SHAPE)


def load_cifar100(dirname, train=True):
    filename = _require(dirname, 'train.bin' if train else 'test.bin')
    return parse_cifar_records(_read_bytes(filename), 2, 100, filename)


# ----------------------------------------------------------------------------
# MNIST IDX files

def parse_idx(raw, filename='<bytes>'):
    if len(raw) < 4:
        raise FormatError('{}: missing IDX header'.format(filename))
    magic, = struct.unpack('>I', raw[:4])
    if magic >> 8 != IDX_UBYTE or magic not in (
            IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC):
        LOG.error('bad IDX magic 0x{:08x} in {}'.format(magic, filename))
        raise FormatError('{}: bad magic 0x{:08x}'.format(filename, magic))
    ndim = magic & 0xff
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise FormatError('{}: truncated IDX header'.format(filename))
    dims = struct.unpack('>' + 'I' * ndim, raw[4:header])
    data = numpy.frombuffer(raw, dtype=numpy.uint8, offset=header)
    if len(data) != int(numpy.prod(dims)):
        raise FormatError('{}: expected {} values, found {}'.format(
            filename, int(numpy.prod(dims)), len(data)))
    return data.reshape(dims)


def dump_idx(array, filename):
    array = numpy.asarray(array, dtype=numpy.uint8)
    magic = (IDX_UBYTE << 8) | array.ndim
    with open_compressed(filename, 'wb') as f:
        f.write(struct.pack('>I', magic))
        f.write(struct.pack('>' + 'I' * array.ndim, *array.shape))
        f.write(array.tobytes())


def load_mnist_files(images_filename, labels_filename):
    images = parse_idx(_read_bytes(images_filename), images_filename)
    labels = parse_idx(_read_bytes(labels_filename), labels_filename)
    if images.ndim != 3 or labels.ndim != 1:
        raise FormatError('unexpected IDX ranks {} and {}'.format(
            images.ndim, labels.ndim))
    if len(images) != len(labels):
        LOG.error('\n  '.join([
            'MNIST count mismatch',
            'images = {} ({})'.format(images_filename, len(images)),
            'labels = {} ({})'.format(labels_filename, len(labels)),
        ]))
        raise FormatError('{} images but {} labels'.format(
            len(images), len(labels)))
    images = images.reshape((len(images), 1) + images.shape[1:]) / 255.
    return Dataset(images, labels.astype(numpy.int64), 10)


def load_mnist(dirname, train=True):
    prefix = 'train' if train else 't10k'
    return load_mnist_files(
        _require(dirname, '{}-images-idx3-ubyte'.format(prefix)),
        _require(dirname, '{}-labels-idx1-ubyte'.format(prefix)))


# ----------------------------------------------------------------------------
# Synthetic sets

def toy_centers(rng, classes, dim, separation, max_tries=10000):
    '''
    Random centers of common norm whose pairwise distances are at least
    separation.
    '''
    assert separation > 0, separation
    radius = separation * max(1., classes / 2.)
    for _ in range(max_tries):
        directions = rng.normal(size=(classes, dim))
        directions /= numpy.linalg.norm(directions, axis=1, keepdims=True)
        centers = radius * directions
        gaps = numpy.linalg.norm(
            centers[:, None, :] - centers[None, :, :], axis=-1)
        gaps[numpy.diag_indices(classes)] = numpy.inf
        if gaps.min() >= separation:
            return centers
    raise ValueError('cannot place {} centers {} apart in dimension {}'.format(
        classes, separation, dim))


def toy_blobs(
        rng, n_per_class, classes, dim, separation, noise=1., centers=None):
    '''
    Gaussian blobs around seeded centers.  Noise is truncated at three
    standard deviations per coordinate.  Images have shape (dim, 1, 1).
    '''
    if centers is None:
        centers = toy_centers(rng, classes, dim, separation)
    assert centers.shape == (classes, dim), centers.shape
    labels = numpy.repeat(numpy.arange(classes), n_per_class)
    offsets = numpy.clip(rng.normal(size=(len(labels), dim)), -3., 3.)
    points = centers[labels] + noise * offsets
    order = rng.permutation(len(labels))
    images = points[order].reshape(len(labels), dim, 1, 1)
    dataset = Dataset(images, labels[order], classes)
    dataset.centers = centers
    return dataset


# ----------------------------------------------------------------------------
# Dispatch

def data_root(data_dir=''):
    return data_dir or hebbnet.DATA


def load_dataset(config, rng=None, train=True):
    '''
    Load the dataset named by an ExperimentConfig.
    '''
    name = config.dataset
    root = data_root(config.data_dir)
    if name == 'cifar10':
        dataset = load_cifar10(os.path.join(root, 'cifar10'), train)
    elif name == 'cifar100':
        dataset = load_cifar100(os.path.join(root, 'cifar100'), train)
    elif name == 'mnist':
        dataset = load_mnist(os.path.join(root, 'mnist'), train)
    elif name == 'toy':
        assert rng is not None, 'toy data needs an rng'
        args = (config.toy_classes, config.toy_dim, config.toy_separation)
        centers = toy_centers(rng.spawn('toy'), *args)
        dataset = toy_blobs(
            rng.spawn('toy', int(train)),
            config.toy_per_class,
            *args,
            centers=centers)
    else:
        raise ValueError('unknown dataset: {}'.format(name))
    LOG.info('loaded %s (%s): %d samples', name,
             'train' if train else 'test', len(dataset))
    return dataset
