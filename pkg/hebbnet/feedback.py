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
The training engine.

Output deltas are defined as delta_L = -dL/dx_L, so every weighted layer
learns by W += eta * mean(outer(delta, x_in)) over a batch.  The sweep
visits layers top-down: a layer first turns the delta arriving from above
into its own feedback activity, then its increment is formed from that
activity and the still cached feedforward input from below.  Increments
are committed together once the sweep reaches the bottom.
'''

import time
import logging
import numpy
from scipy.special import logsumexp
from hebbnet.layers import SequencingError
from hebbnet.mixins import DictIoMixin
from hebbnet.tensor import UndefinedCorrelationError, as_tensor
from hebbnet.util import scores_to_probs

LOG = logging.getLogger(__name__)

LOSSES = ('hinge', 'softmax-xent')


def _batched(x, c):
    x = as_tensor(x)
    single = (x.ndim == 1)
    x = numpy.atleast_2d(x)
    c = numpy.atleast_1d(numpy.asarray(c, dtype=int))
    assert x.ndim == 2 and len(c) == len(x), (x.shape, c.shape)
    assert numpy.all((0 <= c) & (c < x.shape[1])), c
    y = numpy.zeros_like(x)
    y[numpy.arange(len(c)), c] = 1.
    return x, y, single


def hinge_loss(x, c, mu=1.):
    '''
    max(1 - x_c, 0) + mu * sum_{i != c} max(1 + x_i, 0)
    '''
    x, y, single = _batched(x, c)
    assert x.shape[1] >= 2, 'hinge loss needs at least two classes'
    true_term = numpy.maximum(1. - x, 0.) * y
    other_term = mu * numpy.maximum(1. + x, 0.) * (1. - y)
    loss = (true_term + other_term).sum(axis=1)
    return loss[0] if single else loss


def hinge_output_delta(x, c, mu=1.):
    '''
    +1 at the true class while x_c <= 1, -mu at other classes while
    x_i >= -1, else 0.
    '''
    x, y, single = _batched(x, c)
    delta = y * (x <= 1.) - mu * (1. - y) * (x >= -1.)
    return delta[0] if single else delta


def softmax_xent_loss(x, c):
    x, y, single = _batched(x, c)
    loss = logsumexp(x, axis=1) - (x * y).sum(axis=1)
    return loss[0] if single else loss


def softmax_xent_delta(x, c):
    x, y, single = _batched(x, c)
    delta = y - scores_to_probs(x)
    return delta[0] if single else delta


def loss_value(loss, x, c, mu=1.):
    if loss == 'hinge':
        return hinge_loss(x, c, mu)
    elif loss == 'softmax-xent':
        return softmax_xent_loss(x, c)
    raise ValueError('unknown loss: {}'.format(loss))


def output_delta(loss, x, c, mu=1.):
    if loss == 'hinge':
        return hinge_output_delta(x, c, mu)
    elif loss == 'softmax-xent':
        return softmax_xent_delta(x, c)
    raise ValueError('unknown loss: {}'.format(loss))


# ----------------------------------------------------------------------------
# Sweep

def compute_increments(net, states, output_deltas, mode):
    '''
    Run the top-down feedback pass and collect (node, increment) pairs.
    Each layer cache is released as soon as the sweep has passed it.
    '''
    if len(states) != len(net.nodes):
        raise SequencingError('expected {} layer states, got {}'.format(
            len(net.nodes), len(states)))
    deltas = {len(net.nodes) - 1: as_tensor(output_deltas)}
    increments = []
    for node in reversed(net.nodes):
        state = states[node.index]
        delta = deltas.pop(node.index)
        propagate = any(j >= 0 for j in node.inputs)
        below = node.feedback(state, delta, mode, propagate)
        if node.weights is not None:
            increments.append((node, node.increment(state)))
        for j, routed in zip(node.inputs, below):
            if j < 0 or routed is None:
                continue
            if j in deltas:
                deltas[j] = deltas[j] + routed
            else:
                deltas[j] = routed
        state.release()
    return increments


def apply_increments(increments, eta, mode):
    for node, increment in increments:
        node.weights.apply(eta * increment, mode)


def backward_sweep(net, states, output_deltas, mode, eta):
    apply_increments(
        compute_increments(net, states, output_deltas, mode),
        eta,
        mode)
    return net


# ----------------------------------------------------------------------------
# Metrics

def alignment(net):
    '''
    Per weighted layer correlation of W with the transpose of R.
    '''
    return [node.weights.alignment() for node in net.weighted_nodes]


def alignment_or_nan(net):
    result = []
    for node in net.weighted_nodes:
        try:
            result.append(node.weights.alignment())
        except UndefinedCorrelationError:
            LOG.debug('alignment undefined for {}'.format(node.name))
            result.append(float('nan'))
    return result


def evaluate(net, dataset, loss='hinge', mu=1.):
    '''
    Return (error rate, mean loss) in evaluation mode, or (None, None)
    on an empty dataset.
    '''
    if dataset is None or len(dataset) == 0:
        return None, None
    outputs = net.predict(dataset.images)
    error = float(numpy.mean(outputs.argmax(axis=1) != dataset.labels))
    mean_loss = float(numpy.mean(loss_value(loss, outputs, dataset.labels, mu)))
    return error, mean_loss


class MetricsRecord(DictIoMixin):
    FIELDS = ('epoch', 'train_err', 'val_err', 'train_loss')

    def __init__(
            self,
            epoch=0,
            train_error=None,
            val_error=None,
            train_loss=None,
            correlations=(),
            wall_time=0.):
        for error in (train_error, val_error):
            assert error is None or 0. <= error <= 1., error
        self.epoch = epoch
        self.train_error = train_error
        self.val_error = val_error
        self.train_loss = train_loss
        self.correlations = list(correlations)
        self.wall_time = wall_time

    def load(self, raw):
        self.__init__(**raw)

    def dump(self):
        return {
            'epoch': self.epoch,
            'train_error': self.train_error,
            'val_error': self.val_error,
            'train_loss': self.train_loss,
            'correlations': list(self.correlations),
            'wall_time': self.wall_time,
        }

    def header(self):
        return list(self.FIELDS) + [
            'corr_l{}'.format(i + 1) for i in range(len(self.correlations))
        ]

    def row(self):
        '''
        CSV cells; wall time is left out so reruns produce identical files.
        '''
        values = [self.train_error, self.val_error, self.train_loss]
        values += self.correlations
        return [str(self.epoch)] + [
            '' if value is None else repr(float(value)) for value in values
        ]


def initial_record(net, dataset, config, validation=None):
    loss = config.resolved_loss
    train_error, train_loss = evaluate(net, dataset, loss, config.mu)
    val_error, _ = evaluate(net, validation, loss, config.mu)
    return MetricsRecord(
        0, train_error, val_error, train_loss, alignment_or_nan(net), 0.)


def train_epoch(net, dataset, config, rng, validation=None, epoch=1):
    '''
    One pass of fixed step SGD over seeded shuffled batches.
    '''
    assert len(dataset), 'empty training set'
    start = time.time()
    loss = config.resolved_loss
    batch_losses = []
    for images, labels in dataset.batches(config.batch_size, rng):
        states = net.forward(images, train=True, rng=rng)
        outputs = states[-1].x_out
        batch_losses.append(
            float(numpy.mean(loss_value(loss, outputs, labels, config.mu))))
        deltas = output_delta(loss, outputs, labels, config.mu)
        backward_sweep(net, states, deltas, config.mode, config.eta)
    train_error, train_loss = evaluate(net, dataset, loss, config.mu)
    if batch_losses:
        train_loss = float(numpy.mean(batch_losses))
    val_error, _ = evaluate(net, validation, loss, config.mu)
    record = MetricsRecord(
        epoch,
        train_error,
        val_error,
        train_loss,
        alignment_or_nan(net),
        time.time() - start)
    LOG.info(
        'epoch %d: train_err=%.4f val_err=%s loss=%.4f (%.1fs)',
        epoch,
        train_error,
        'n/a' if val_error is None else '{:.4f}'.format(val_error),
        train_loss,
        record.wall_time)
    return record


def train(net, dataset, config, rng, validation=None):
    '''
    Generate MetricsRecords for epochs 1..config.epochs.
    '''
    for epoch in range(1, config.epochs + 1):
        yield train_epoch(net, dataset, config, rng, validation, epoch)
