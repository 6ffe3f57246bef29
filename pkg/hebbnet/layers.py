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
Forward and feedback transforms for every layer kind.

Each weighted layer carries a DualWeights bundle: feedforward weights W,
feedback weights R and optional fixed connectivity masks.  The feedback
pass of a layer gates the incoming delta by the layer's own gate, stores it
as the layer's feedback activity, and sends it down through R (or through
the transpose of W for exact back-propagation).  The Hebbian increment of a
layer is the batch mean of outer(delta, x_in).

All transforms take batches: dense layers accept (n,) or (batch, n) inputs,
image layers accept (batch, channels, height, width).
'''

import logging
import numpy
import scipy.sparse
from numpy.lib.stride_tricks import sliding_window_view
from hebbnet.tensor import (
    DimensionError,
    as_tensor,
    check_finite,
    check_shape,
    gate_mask,
    glorot_uniform,
    pearson,
    saturate,
)
from hebbnet.util import ContractError

LOG = logging.getLogger(__name__)

TRANSPOSE_MODES = ('BP', 'BP-H')


class SequencingError(RuntimeError):
    pass


def uses_transpose(mode):
    return mode in TRANSPOSE_MODES


# ----------------------------------------------------------------------------
# Weights

class DualWeights(object):
    '''
    Feedforward weights W (n_out x n_in) with feedback weights R (n_in x n_out)
    and optional binary masks of matching shapes.
    '''
    transposed = True

    def __init__(self, W, R=None, mask_W=None, mask_R=None):
        self.W = numpy.array(W, dtype=numpy.float64)
        if R is None:
            R = self.dual(self.W)
        self.R = numpy.array(R, dtype=numpy.float64)
        check_shape(self.R, self.dual(self.W).shape, 'R')
        self.mask_W = None
        self.mask_R = None
        self.set_masks(mask_W, mask_R)

    def dual(self, x):
        '''
        Map a W-shaped array onto the R layout (and back).
        '''
        return x.T if self.transposed else x

    def set_masks(self, mask_W=None, mask_R=None):
        if mask_W is not None:
            self.mask_W = check_shape(as_tensor(mask_W), self.W.shape, 'mask_W')
            self.W *= self.mask_W
        if mask_R is not None:
            self.mask_R = check_shape(as_tensor(mask_R), self.R.shape, 'mask_R')
            self.R *= self.mask_R

    def tie(self):
        self.R = self.dual(self.W).copy()
        if self.mask_R is not None:
            self.R *= self.mask_R

    def feedback_weights(self, mode):
        return self.dual(self.W) if uses_transpose(mode) else self.R

    def apply(self, dW, mode):
        '''
        Commit an increment: W always learns, R learns the same increment
        in URFB, stays fixed in FRFB and tracks W in the BP modes.
        '''
        check_shape(dW, self.W.shape, 'increment')
        if self.mask_W is None:
            self.W += dW
        else:
            self.W += dW * self.mask_W
        if mode == 'URFB':
            dR = self.dual(dW)
            if self.mask_R is None:
                self.R += dR
            else:
                self.R += dR * self.mask_R
        elif uses_transpose(mode):
            self.tie()
        check_finite(self.W, 'W')
        return self

    def alignment(self):
        '''
        Pearson correlation of W with the transpose of R over the entries
        present in both masks.
        '''
        keep = numpy.ones(self.W.shape, dtype=bool)
        if self.mask_W is not None:
            keep &= self.mask_W > 0
        if self.mask_R is not None:
            keep &= self.dual(self.mask_R) > 0
        return pearson(self.W[keep], self.dual(self.R)[keep])

    def arrays(self):
        yield 'W', self.W
        yield 'R', self.R
        if self.mask_W is not None:
            yield 'mask_W', self.mask_W
        if self.mask_R is not None:
            yield 'mask_R', self.mask_R


class FilterWeights(DualWeights):
    '''
    Convolution filter banks W, R of shape (filters, channels, kh, kw).
    R[f, c] is the feedback partner of W[f, c] and is applied as a
    transposed convolution.
    '''
    transposed = False

    @property
    def kernel(self):
        return self.W.shape[2:]


def same_padding(extent):
    return ((extent - 1) // 2, extent // 2)


class LocalConvWeights(DualWeights):
    '''
    Untied convolution stored as a sparse matrix in coordinate form.

    Entry e connects input unit cols[e] to output unit rows[e] and holds
    the value W[e]; taps[e] is the flat (filter, channel, i, j) index of the
    convolution tap it replaces.  The support is fixed by the convolution
    geometry.  R[e] is the feedback partner of W[e], placed at the
    transposed position (cols[e], rows[e]).
    '''
    transposed = False

    def __init__(
            self,
            input_shape,
            filters,
            kernel,
            W=None,
            R=None,
            mask_W=None,
            mask_R=None):
        self.input_shape = tuple(input_shape)
        self.filters = int(filters)
        self.kernel = tuple(kernel)
        self._init_support()
        if W is None:
            W = numpy.zeros(len(self.rows))
        super(LocalConvWeights, self).__init__(W, R, mask_W, mask_R)

    def _init_support(self):
        C, H, W = self.input_shape
        F = self.filters
        kh, kw = self.kernel
        top = same_padding(kh)[0]
        left = same_padding(kw)[0]
        f, c, i, j, y, x = numpy.indices((F, C, kh, kw, H, W)).reshape(6, -1)
        yy = y + i - top
        xx = x + j - left
        inside = (yy >= 0) & (yy < H) & (xx >= 0) & (xx < W)
        self.untied_index = numpy.flatnonzero(inside)
        self.rows = ((f * H + y) * W + x)[inside]
        self.cols = ((c * H + yy) * W + xx)[inside]
        self.taps = (((f * C + c) * kh + i) * kw + j)[inside]
        self.shape = (F * H * W, C * H * W)

        self._order_W = numpy.lexsort((self.cols, self.rows))
        self._indptr_W = numpy.concatenate([
            [0], numpy.cumsum(numpy.bincount(self.rows, minlength=self.shape[0]))
        ])
        self._order_R = numpy.lexsort((self.rows, self.cols))
        self._indptr_R = numpy.concatenate([
            [0], numpy.cumsum(numpy.bincount(self.cols, minlength=self.shape[1]))
        ])
        self._keys = (self.rows * self.shape[1] + self.cols)[self._order_W]

    @property
    def output_shape(self):
        return (self.filters,) + self.input_shape[1:]

    def matrix_W(self):
        return scipy.sparse.csr_matrix(
            (
                self.W[self._order_W],
                self.cols[self._order_W],
                self._indptr_W,
            ),
            shape=self.shape)

    def matrix_R(self):
        return scipy.sparse.csr_matrix(
            (
                self.R[self._order_R],
                self.rows[self._order_R],
                self._indptr_R,
            ),
            shape=self.shape[::-1])

    def entry_index(self, row, col):
        key = row * self.shape[1] + col
        pos = numpy.searchsorted(self._keys, key)
        if pos == len(self._keys) or self._keys[pos] != key:
            LOG.error('\n  '.join([
                'write outside the locally connected support',
                'row = {}'.format(row),
                'col = {}'.format(col),
            ]))
            raise ContractError(
                'entry ({}, {}) is outside the support'.format(row, col))
        return self._order_W[pos]

    def set_entry(self, row, col, value, which='W'):
        assert which in ('W', 'R'), which
        getattr(self, which)[self.entry_index(row, col)] = value

    def get_entry(self, row, col, which='W'):
        assert which in ('W', 'R'), which
        return getattr(self, which)[self.entry_index(row, col)]

    @classmethod
    def from_filters(cls, filters, input_shape, feedback=None):
        '''
        Tied initialization: every location starts from the same taps.
        '''
        filters = as_tensor(filters)
        F, C, kh, kw = filters.shape
        assert C == input_shape[0], (filters.shape, input_shape)
        weights = cls(input_shape, F, (kh, kw))
        weights.W = filters.ravel()[weights.taps].copy()
        if feedback is None:
            weights.R = weights.W.copy()
        else:
            weights.R = as_tensor(feedback).ravel()[weights.taps].copy()
        return weights


def prune(w, fraction, rng, tied=False):
    '''
    Draw fixed random connectivity masks zeroing a fraction of W and of R.
    Masks are drawn independently unless tied, in which case R follows W.
    '''
    assert 0 <= fraction < 1, fraction
    mask_W = (rng.random(w.W.shape) >= fraction).astype(numpy.float64)
    if tied:
        mask_R = w.dual(mask_W).copy()
    else:
        mask_R = (rng.random(w.R.shape) >= fraction).astype(numpy.float64)
    w.set_masks(mask_W, mask_R)
    return w


# ----------------------------------------------------------------------------
# Per-batch state

class LayerState(object):
    def __init__(self, x_in, h, x_out, gate=None):
        self.x_in = x_in
        self.h = h
        self.x_out = x_out
        self.gate = gate
        self.delta = None
        self.argmax = None
        self.mask = None
        self.live = True

    def require(self, what):
        if not self.live:
            LOG.error('{} on a released layer cache'.format(what))
            raise SequencingError(
                '{} needs the cached forward pass, which was released'.format(
                    what))

    def require_delta(self, what):
        self.require(what)
        if self.delta is None:
            LOG.error('{} before the feedback pass'.format(what))
            raise SequencingError(
                '{} needs the feedback activity of this layer'.format(what))

    def release(self):
        self.x_in = None
        self.h = None
        self.live = False


def _check_state(state, what):
    if state is None:
        LOG.error('{} before the forward pass'.format(what))
        raise SequencingError('{} before the forward pass'.format(what))
    state.require(what)


def _gated_delta(state, delta_above, what):
    _check_state(state, what)
    delta_above = as_tensor(delta_above)
    check_shape(delta_above, state.h.shape, 'delta')
    state.delta = state.gate * delta_above
    return state.delta


def _mean_outer(delta, x):
    delta = numpy.atleast_2d(delta)
    x = numpy.atleast_2d(x)
    return numpy.dot(delta.T, x) / len(x)


# ----------------------------------------------------------------------------
# Fully connected

def _check_dense_input(w, x):
    x = as_tensor(x)
    if x.ndim not in (1, 2) or x.shape[-1] != w.W.shape[1]:
        LOG.error('\n  '.join([
            'dense input shape mismatch',
            'W = {}'.format(w.W.shape),
            'x = {}'.format(x.shape),
        ]))
        raise DimensionError(
            'cannot apply W {} to x {}'.format(w.W.shape, x.shape))
    return x


def full_forward(w, x):
    x = _check_dense_input(w, x)
    h = check_finite(numpy.dot(x, w.W.T), 'h')
    return LayerState(x, h, saturate(h), gate_mask(h))


def output_forward(w, x):
    '''
    Class layer: linear, with an always open gate.
    '''
    x = _check_dense_input(w, x)
    h = check_finite(numpy.dot(x, w.W.T), 'h')
    return LayerState(x, h, h, numpy.ones_like(h))


def full_feedback(w, state, delta_above, mode, propagate=True):
    delta = _gated_delta(state, delta_above, 'full_feedback')
    if not propagate:
        return None
    return numpy.dot(delta, w.feedback_weights(mode).T)


def full_increment(state):
    state.require_delta('hebbian_update')
    return _mean_outer(state.delta, state.x_in)


def hebbian_update(w, state, eta, mode):
    return w.apply(eta * full_increment(state), mode)


# ----------------------------------------------------------------------------
# Convolution

def _padded(x, kernel, value=0.):
    pads = ((0, 0), (0, 0), same_padding(kernel[0]), same_padding(kernel[1]))
    return numpy.pad(x, pads, constant_values=value)


def _windows(x, kernel):
    # (batch, channels, height, width, kh, kw)
    return sliding_window_view(_padded(x, kernel), tuple(kernel), axis=(2, 3))


def _check_image(x, channels, what):
    x = as_tensor(x)
    if x.ndim != 4 or x.shape[1] != channels:
        LOG.error('\n  '.join([
            '{} input shape mismatch'.format(what),
            'channels = {}'.format(channels),
            'x = {}'.format(x.shape),
        ]))
        raise DimensionError('{} expects (batch, {}, h, w), got {}'.format(
            what, channels, x.shape))
    return x


def correlate(x, filters):
    '''
    Same-padded cross-correlation of a batch of images with a filter bank.
    '''
    return numpy.einsum(
        'bchwij,fcij->bfhw',
        _windows(x, filters.shape[2:]),
        filters,
        optimize=True)


def correlate_transposed(delta, filters):
    '''
    Adjoint of correlate: route deltas on the output grid back to the input
    grid through the flipped filters.
    '''
    kh, kw = filters.shape[2:]
    top = same_padding(kh)[0]
    left = same_padding(kw)[0]
    pads = ((0, 0), (0, 0), (kh - 1 - top, top), (kw - 1 - left, left))
    windows = sliding_window_view(numpy.pad(delta, pads), (kh, kw), axis=(2, 3))
    return numpy.einsum(
        'bfhwij,fcij->bchw',
        windows,
        filters[:, :, ::-1, ::-1],
        optimize=True)


def conv_forward(w, x):
    x = _check_image(x, w.W.shape[1], 'conv')
    h = check_finite(correlate(x, w.W), 'h')
    return LayerState(x, h, saturate(h), gate_mask(h))


def conv_feedback(w, state, delta_above, mode, propagate=True):
    delta = _gated_delta(state, delta_above, 'conv_feedback')
    if not propagate:
        return None
    return correlate_transposed(delta, w.feedback_weights(mode))


def conv_increment(state, kernel):
    state.require_delta('conv_update')
    return numpy.einsum(
        'bfhw,bchwij->fcij',
        state.delta,
        _windows(state.x_in, kernel),
        optimize=True) / len(state.delta)


def conv_update(w, state, eta, mode):
    return w.apply(eta * conv_increment(state, w.kernel), mode)


# ----------------------------------------------------------------------------
# Locally connected

def localconv_forward(w, x):
    x = _check_image(x, w.input_shape[0], 'localconv')
    check_shape(x[0], w.input_shape, 'localconv input')
    flat = x.reshape(len(x), -1)
    h = w.matrix_W().dot(flat.T).T.reshape((len(x),) + w.output_shape)
    check_finite(h, 'h')
    return LayerState(x, h, saturate(h), gate_mask(h))


def localconv_feedback(w, state, delta_above, mode, propagate=True):
    delta = _gated_delta(state, delta_above, 'localconv_feedback')
    if not propagate:
        return None
    flat = delta.reshape(len(delta), -1)
    if uses_transpose(mode):
        below = w.matrix_W().T.dot(flat.T).T
    else:
        below = w.matrix_R().dot(flat.T).T
    return below.reshape((len(delta),) + w.input_shape)


def localconv_increment(w, state):
    '''
    Per-entry Hebbian products, each entry with its own location.
    '''
    state.require_delta('localconv_update')
    untied = numpy.einsum(
        'bfyx,bcyxij->fcijyx',
        state.delta,
        _windows(state.x_in, w.kernel),
        optimize=True)
    return untied.ravel()[w.untied_index] / len(state.delta)


def localconv_update(w, state, eta, mode):
    return w.apply(eta * localconv_increment(w, state), mode)


# ----------------------------------------------------------------------------
# Pooling, dropout, sums

def _pool_padding(extent, size, stride):
    out = -(-extent // stride)
    before = (size - 1) // 2
    after = max(0, (out - 1) * stride - before + size - extent)
    return out, (before, after)


def maxpool_forward(x, size, stride=2):
    '''
    Max over size x size windows centered at every stride-th pixel, with
    zeros outside the grid.  Ties go to the lowest in-grid index; a window
    whose maximum is only attained by padding records argmax -1, and its
    feedback is dropped.
    '''
    x = as_tensor(x)
    assert x.ndim == 4, x.shape
    B, C, H, W = x.shape
    Ho, (top, bottom) = _pool_padding(H, size, stride)
    Wo, (left, right) = _pool_padding(W, size, stride)
    pad = ((top, bottom), (left, right))
    padded = numpy.pad(x, ((0, 0), (0, 0)) + pad)
    inside = numpy.pad(numpy.ones((H, W), dtype=bool), pad)
    windows = sliding_window_view(padded, (size, size), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride][:, :, :Ho, :Wo]
    windows = windows.reshape(B, C, Ho, Wo, size * size)
    valid = sliding_window_view(inside, (size, size))
    valid = valid[::stride, ::stride][:Ho, :Wo].reshape(Ho, Wo, size * size)
    out = windows.max(axis=-1)
    winners = (windows == out[..., None]) & valid
    k = winners.argmax(axis=-1)
    rows = numpy.arange(Ho)[:, None] * stride - top + k // size
    cols = numpy.arange(Wo)[None, :] * stride - left + k % size
    state = LayerState(x, out, out)
    state.argmax = numpy.where(winners.any(axis=-1), rows * W + cols, -1)
    return state


def maxpool_feedback(state, delta_above):
    '''
    Route each delta to its window's argmax.  Deltas of windows won by
    padding vanish, so the total is conserved only over in-grid winners.
    '''
    _check_state(state, 'maxpool_feedback')
    delta_above = check_shape(as_tensor(delta_above), state.h.shape, 'delta')
    state.delta = delta_above
    B, C, H, W = state.x_in.shape
    argmax = state.argmax.reshape(B * C, -1)
    offsets = numpy.arange(B * C)[:, None] * (H * W)
    index = offsets + numpy.maximum(argmax, 0)
    weights = numpy.where(argmax >= 0, delta_above.reshape(B * C, -1), 0.)
    routed = numpy.bincount(
        index.ravel(),
        weights=weights.ravel(),
        minlength=B * C * H * W)
    return routed.reshape(B, C, H, W)


def dropout_forward(x, prob, rng=None, train=True):
    '''
    Zero a random fraction prob of the units of a batch, sharing one mask
    across the batch.  No rescaling; evaluation is the identity.
    '''
    assert 0 <= prob < 1, prob
    x = as_tensor(x)
    state = LayerState(x, x, x)
    if train and prob > 0:
        assert rng is not None, 'dropout needs an rng'
        state.mask = (rng.random(x.shape[1:]) >= prob).astype(numpy.float64)
        state.x_out = x * state.mask
    return state


def dropout_feedback(state, delta_above):
    _check_state(state, 'dropout_feedback')
    delta_above = check_shape(as_tensor(delta_above), state.h.shape, 'delta')
    state.delta = delta_above
    if state.mask is None:
        return delta_above
    return delta_above * state.mask


def sum_forward(a, b):
    a = as_tensor(a)
    b = as_tensor(b)
    if a.shape != b.shape:
        LOG.error('sum of mismatched shapes {} and {}'.format(a.shape, b.shape))
        raise DimensionError(
            'cannot add shapes {} and {}'.format(a.shape, b.shape))
    out = a + b
    return LayerState(None, out, out)


def sum_feedback(delta_above):
    delta_above = as_tensor(delta_above)
    return delta_above, delta_above


# ----------------------------------------------------------------------------
# Network assembly

class LayerNode(object):
    '''
    One layer of a network: its spec, shapes and (for weighted kinds)
    its DualWeights.  inputs lists the indices of the layers it reads,
    with -1 standing for the data.
    '''
    def __init__(self, index, spec, in_shape, out_shape, weights=None):
        self.index = index
        self.spec = spec
        self.kind = spec.kind
        self.in_shape = tuple(in_shape)
        self.out_shape = tuple(out_shape)
        self.weights = weights
        if self.kind == 'Sum':
            self.inputs = (index - 2, index - 1)
        else:
            self.inputs = (index - 1,)

    @property
    def name(self):
        return '{}{}'.format(self.kind.lower(), self.index)

    def forward(self, xs, train=True, rng=None):
        kind = self.kind
        if kind == 'Sum':
            return sum_forward(xs[0], xs[1])
        x = xs[0]
        if kind in ('Full', 'Output'):
            x = as_tensor(x).reshape(len(x), -1)
            if kind == 'Full':
                return full_forward(self.weights, x)
            return output_forward(self.weights, x)
        elif kind == 'Conv':
            return conv_forward(self.weights, x)
        elif kind == 'LocalConv':
            return localconv_forward(self.weights, x)
        elif kind == 'Maxpool':
            return maxpool_forward(x, self.spec.pool, self.spec.stride)
        elif kind == 'Drop':
            return dropout_forward(x, self.spec.prob, rng, train)
        raise ValueError('unknown layer kind: {}'.format(kind))

    def feedback(self, state, delta, mode, propagate=True):
        '''
        Return the deltas sent to each input (None where not propagated).
        '''
        kind = self.kind
        if kind == 'Sum':
            _check_state(state, 'sum_feedback')
            state.delta = delta
            return list(sum_feedback(delta))
        if kind in ('Full', 'Output'):
            below = full_feedback(self.weights, state, delta, mode, propagate)
            if below is not None:
                below = below.reshape((len(below),) + self.in_shape)
        elif kind == 'Conv':
            below = conv_feedback(self.weights, state, delta, mode, propagate)
        elif kind == 'LocalConv':
            below = localconv_feedback(
                self.weights, state, delta, mode, propagate)
        elif kind == 'Maxpool':
            below = maxpool_feedback(state, delta)
        elif kind == 'Drop':
            below = dropout_feedback(state, delta)
        else:
            raise ValueError('unknown layer kind: {}'.format(kind))
        return [below]

    def increment(self, state):
        kind = self.kind
        if kind in ('Full', 'Output'):
            return full_increment(state)
        elif kind == 'Conv':
            return conv_increment(state, self.weights.kernel)
        elif kind == 'LocalConv':
            return localconv_increment(self.weights, state)
        return None


def init_weights(spec, in_shape, out_shape, rng, tied=False):
    kind = spec.kind
    if kind in ('Full', 'Output'):
        fan_in = int(numpy.prod(in_shape))
        fan_out = out_shape[0]
        W = glorot_uniform(rng, fan_in, fan_out, (fan_out, fan_in))
        if tied:
            return DualWeights(W)
        R = glorot_uniform(rng, fan_in, fan_out, (fan_in, fan_out))
        return DualWeights(W, R)
    elif kind in ('Conv', 'LocalConv'):
        C = in_shape[0]
        F = spec.units
        kh, kw = spec.kernel
        fan_in = C * kh * kw
        fan_out = F * kh * kw
        if kind == 'Conv':
            shape = (F, C, kh, kw)
            W = glorot_uniform(rng, fan_in, fan_out, shape)
            R = None if tied else glorot_uniform(rng, fan_in, fan_out, shape)
            return FilterWeights(W, R)
        weights = LocalConvWeights(in_shape, F, (kh, kw))
        weights.W = glorot_uniform(rng, fan_in, fan_out, weights.W.shape)
        if tied:
            weights.tie()
        else:
            weights.R = glorot_uniform(rng, fan_in, fan_out, weights.R.shape)
        return weights
    return None


class Network(object):
    def __init__(self, spec, nodes):
        self.spec = spec
        self.nodes = list(nodes)

    @classmethod
    def build(cls, spec, rng, mode='URFB', connectivity=1., tied_init=False):
        '''
        Glorot-initialize every weighted layer of a NetSpec.  R starts as
        an independent draw, or as the transpose of W in the BP modes and
        under tied_init.  connectivity < 1 prunes W and R.
        '''
        assert 0 < connectivity <= 1, connectivity
        tied = tied_init or uses_transpose(mode)
        nodes = []
        for index, layer in enumerate(spec.layers):
            in_shape = spec.input_shape_of(index)
            out_shape = spec.shapes[index]
            weights = init_weights(
                layer,
                in_shape,
                out_shape,
                rng.spawn('init', index),
                tied=tied)
            if weights is not None and connectivity < 1:
                prune(
                    weights,
                    1. - connectivity,
                    rng.spawn('prune', index),
                    tied=uses_transpose(mode))
            nodes.append(LayerNode(index, layer, in_shape, out_shape, weights))
        LOG.debug('built network {}'.format(spec.format()))
        return cls(spec, nodes)

    @property
    def weighted_nodes(self):
        return [node for node in self.nodes if node.weights is not None]

    def forward(self, x, train=True, rng=None):
        x = as_tensor(x)
        if tuple(x.shape[1:]) != self.spec.input_shape:
            LOG.error('input batch {} does not match {}'.format(
                x.shape, self.spec.input_shape))
            raise DimensionError('input shape {} != {}'.format(
                x.shape[1:], self.spec.input_shape))
        states = []
        for node in self.nodes:
            xs = [x if j < 0 else states[j].x_out for j in node.inputs]
            states.append(node.forward(xs, train, rng))
        return states

    def predict(self, x, chunk=1000):
        '''
        Output activities in evaluation mode (dropout off).
        '''
        x = as_tensor(x)
        outputs = []
        for start in range(0, len(x), chunk):
            states = self.forward(x[start: start + chunk], train=False)
            outputs.append(states[-1].x_out)
        if not outputs:
            return numpy.zeros((0, self.spec.classes))
        return numpy.concatenate(outputs)

    def classify(self, x):
        return self.predict(x).argmax(axis=1)

    def dump_weights(self):
        for node in self.weighted_nodes:
            for key, array in node.weights.arrays():
                yield '{}.{}'.format(node.name, key), array

    def load_weights(self, named_arrays):
        by_name = {node.name: node for node in self.weighted_nodes}
        masks = {}
        for name, array in named_arrays:
            node_name, key = name.rsplit('.', 1)
            if node_name not in by_name or key not in (
                    'W', 'R', 'mask_W', 'mask_R'):
                raise ValueError('unknown weight array: {}'.format(name))
            weights = by_name[node_name].weights
            if key in ('W', 'R'):
                expected = getattr(weights, key).shape
                setattr(weights, key, check_shape(
                    numpy.array(array, dtype=numpy.float64), expected, name))
            else:
                masks.setdefault(node_name, {})[key] = array
        for node_name, raw in masks.items():
            by_name[node_name].weights.set_masks(
                raw.get('mask_W'), raw.get('mask_R'))
        return self
