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
import numpy
from nose.tools import (
    assert_equal,
    assert_greater_equal,
    assert_less_equal,
    assert_raises,
    assert_true,
)
import pytest
import hebbnet
from hebbnet.data import (
    CIFAR_SHAPE,
    Dataset,
    FormatError,
    dump_cifar,
    dump_idx,
    load_cifar10,
    load_cifar100,
    load_dataset,
    load_mnist,
    parse_cifar_records,
    parse_idx,
    toy_blobs,
    toy_centers,
)
from hebbnet.fileutil import tempdir
from hebbnet.rng import Rng
from hebbnet.tests.util import require_dataset, toy_config

SUFFIXES = ['', '.gz', '.bz2']


def random_pixels(rng, count, shape):
    return rng.integers(0, 256, size=(count,) + shape) / 255.


def random_dataset(rng, count, classes, shape=CIFAR_SHAPE):
    return Dataset(
        random_pixels(rng, count, shape),
        rng.integers(0, classes, size=count),
        classes)


def assert_same_dataset(actual, expected):
    assert_equal(actual.classes, expected.classes)
    assert_equal(actual.shape, expected.shape)
    assert_true(numpy.array_equal(actual.labels, expected.labels))
    assert_true(numpy.array_equal(actual.images, expected.images))


@pytest.mark.parametrize('suffix', SUFFIXES)
def test_cifar10_files(suffix):
    rng = Rng(0)
    batches = [random_dataset(rng, 3, 10) for _ in range(5)]
    test = random_dataset(rng, 4, 10)
    with tempdir():
        for i, batch in enumerate(batches):
            dump_cifar(batch, 'data_batch_{}.bin{}'.format(i + 1, suffix))
        dump_cifar(test, 'test_batch.bin' + suffix)
        train = load_cifar10('.', train=True)
        assert_equal(len(train), 15)
        assert_same_dataset(train.subset(6, 9), batches[2])
        assert_same_dataset(load_cifar10('.', train=False), test)


def test_cifar10_missing_batch():
    rng = Rng(1)
    with tempdir():
        dump_cifar(random_dataset(rng, 2, 10), 'data_batch_1.bin')
        assert_raises(IOError, load_cifar10, '.')


@pytest.mark.parametrize('suffix', SUFFIXES)
def test_cifar100_files(suffix):
    rng = Rng(2)
    fine = random_dataset(rng, 6, 100)
    coarse = rng.integers(0, 20, size=6)
    with tempdir():
        dump_cifar(fine, 'test.bin' + suffix, coarse_labels=coarse)
        assert_same_dataset(load_cifar100('.', train=False), fine)


def test_cifar_pixels_are_scaled():
    raw = bytes(bytearray([3] + [255] * 1024 + [0] * 1024 + [51] * 1024))
    dataset = parse_cifar_records(raw, 1, 10)
    assert_equal(dataset.labels.tolist(), [3])
    assert_equal(dataset.images[0, 0, 0, 0], 1.)
    assert_equal(dataset.images[0, 1, 31, 31], 0.)
    assert_equal(dataset.images[0, 2, 5, 7], .2)


def test_cifar_format_errors():
    record = bytes(bytearray([1] + [0] * 3072))
    assert_raises(FormatError, parse_cifar_records, record[:-1], 1, 10)
    assert_raises(FormatError, parse_cifar_records, record + b'\0', 1, 10)
    bad_label = bytes(bytearray([12] + [0] * 3072))
    assert_raises(FormatError, parse_cifar_records, bad_label, 1, 10)


@pytest.mark.parametrize('suffix', SUFFIXES)
def test_mnist_files(suffix):
    rng = Rng(3)
    images = rng.integers(0, 256, size=(5, 28, 28))
    labels = rng.integers(0, 10, size=5)
    with tempdir():
        dump_idx(images, 't10k-images-idx3-ubyte' + suffix)
        dump_idx(labels, 't10k-labels-idx1-ubyte' + suffix)
        dataset = load_mnist('.', train=False)
    assert_equal(dataset.shape, (1, 28, 28))
    assert_equal(dataset.labels.tolist(), labels.tolist())
    assert_true(numpy.array_equal(dataset.images[:, 0] * 255, images))


def test_mnist_count_mismatch():
    rng = Rng(4)
    with tempdir():
        dump_idx(rng.integers(0, 256, size=(5, 28, 28)),
                 'train-images-idx3-ubyte')
        dump_idx(rng.integers(0, 10, size=4), 'train-labels-idx1-ubyte')
        assert_raises(FormatError, load_mnist, '.')


def test_idx_format_errors():
    with tempdir():
        dump_idx(numpy.arange(12).reshape(2, 2, 3), 'good')
        with open('good', 'rb') as f:
            raw = f.read()
    assert_equal(parse_idx(raw).shape, (2, 2, 3))
    assert_equal(parse_idx(raw)[1, 0].tolist(), [6, 7, 8])
    assert_raises(FormatError, parse_idx, raw[:-1])
    assert_raises(FormatError, parse_idx, raw + b'\0')
    assert_raises(FormatError, parse_idx, b'\0\0\x0d\x01' + raw[4:])
    assert_raises(FormatError, parse_idx, b'\0\0')


def test_dataset_rejects_bad_labels():
    assert_raises(FormatError, Dataset, numpy.zeros((2, 1)), [0, 2], 2)
    assert_raises(FormatError, Dataset, numpy.zeros((2, 1)), [0], 2)


def test_split():
    dataset = random_dataset(Rng(5), 20, 3, shape=(2,))
    train, valid = dataset.split(5)
    assert_equal((len(train), len(valid)), (15, 5))
    assert_same_dataset(valid, dataset.subset(15))
    train, valid = dataset.split(0)
    assert_equal((len(train), len(valid)), (20, 0))


def test_batches():
    dataset = Dataset(numpy.arange(20.)[:, None], numpy.zeros(20), 1)
    batches = list(dataset.batches(7, Rng(6)))
    assert_equal([len(labels) for _, labels in batches], [7, 7])
    seen = numpy.concatenate([images[:, 0] for images, _ in batches])
    assert_equal(len(set(seen.tolist())), 14)
    again = list(dataset.batches(7, Rng(6)))
    for (a, _), (b, _) in zip(batches, again):
        assert_true(numpy.array_equal(a, b))


def test_toy_centers_are_separated():
    centers = toy_centers(Rng(7), 5, 3, 4.)
    for i in range(5):
        for j in range(i):
            assert_greater_equal(
                numpy.linalg.norm(centers[i] - centers[j]), 4.)


def test_toy_blobs_are_separable():
    dataset = toy_blobs(Rng(8), 30, 3, 2, 10.)
    assert_equal(len(dataset), 90)
    assert_equal(dataset.shape, (2, 1, 1))
    points = dataset.images.reshape(len(dataset), 2)
    distances = numpy.linalg.norm(
        points[:, None, :] - dataset.centers[None, :, :], axis=-1)
    assert_true(numpy.array_equal(distances.argmin(axis=1), dataset.labels))
    assert_equal(numpy.bincount(dataset.labels).tolist(), [30, 30, 30])


def test_toy_dataset_shares_centers():
    config = toy_config(toy_classes=3, toy_dim=5)
    train = load_dataset(config, Rng(9), train=True)
    test = load_dataset(config, Rng(9), train=False)
    assert_true(numpy.array_equal(train.centers, test.centers))
    assert_true(not numpy.array_equal(train.images, test.images))
    again = load_dataset(config, Rng(9), train=True)
    assert_same_dataset(again, train)


def test_load_dataset_reads_data_dir():
    rng = Rng(10)
    test = random_dataset(rng, 4, 10)
    with tempdir() as root:
        os.mkdir('cifar10')
        dump_cifar(test, os.path.join('cifar10', 'test_batch.bin.gz'))
        config = toy_config(dataset='cifar10', data_dir=root)
        assert_same_dataset(load_dataset(config, train=False), test)


def test_unknown_dataset():
    config = toy_config()
    config.dataset = 'imagenet'
    assert_raises(ValueError, load_dataset, config, Rng(0))


def test_mnist_test_set():
    require_dataset('mnist')
    dataset = load_mnist(os.path.join(hebbnet.DATA, 'mnist'), train=False)
    assert_equal(len(dataset), 10000)
    assert_equal(dataset.shape, (1, 28, 28))
    assert_less_equal(dataset.images.max(), 1.)
    assert_greater_equal(dataset.images.min(), 0.)
