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
Network architecture strings and experiment configuration.

Architectures are written as semicolon separated items, e.g.::

    Conv 32 5x5; Maxpool 3; Drop .8; Full 500; Drop .3; Output

Keywords are case-insensitive.  Supported items are::

    Conv <filters> <h>x<w>          same-padded cross-correlation
    LocalConv <filters> <h>x<w>     untied (locally connected) version of Conv
    Maxpool <n> [, stride <s>]      centered n x n max window, default stride 2
    Drop <p>                        zero a random fraction p of units per batch
    Full [conn.] <units>            fully connected
    Sum                             add the outputs of the two previous layers
    Output                          fully connected class layer, no nonlinearity

Configs are UTF-8 text files of key=value lines with # comments.
'''

import re
import copy
import logging
from hebbnet.mixins import DictIoMixin
from hebbnet.io.stream import open_compressed
from hebbnet.util import parse_bool

LOG = logging.getLogger(__name__)

KINDS = ('Conv', 'LocalConv', 'Maxpool', 'Drop', 'Full', 'Sum', 'Output')
KEYWORDS = {
    'conv': 'Conv',
    'localconv': 'LocalConv',
    'local': 'LocalConv',
    'maxpool': 'Maxpool',
    'drop': 'Drop',
    'full': 'Full',
    'sum': 'Sum',
    'output': 'Output',
}
WEIGHTED_KINDS = ('Conv', 'LocalConv', 'Full', 'Output')
SPATIAL_KINDS = ('Conv', 'LocalConv', 'Maxpool')
DEFAULT_STRIDE = 2
DEFAULT_INPUT_SHAPE = (3, 32, 32)
DEFAULT_CLASSES = 10

ARCHITECTURES = {
    'simpnet': 'Conv 32 5x5; Maxpool 3; Drop .8; Full 500; Drop .3; Output',
    'simpnet_lite': 'Conv 16 5x5; Maxpool 3; Full 128; Output',
    'deepnet': (
        'Conv 32 5x5; Maxpool 3; Conv 32 3x3; Conv 32 3x3; Maxpool 3; '
        'Drop .8; Conv 32 3x3; Conv 32 3x3; Maxpool 3; Drop .3; Full 500; '
        'Output'
    ),
    'deepernet': (
        'conv 16 3x3; conv 16 3x3; SUM; conv 32 3x3; conv 32 3x3; SUM; '
        'maxpool 3; drop .5; conv 64 3x3; conv 64 3x3; SUM; maxpool 3; '
        'conv 128 3x3; conv 128 3x3; SUM; maxpool 3; drop .8; '
        'full conn. 500; output'
    ),
    'deepnet_s': (
        'conv 16 3x3; conv 16 3x3; SUM;maxpool 3, stride 3; drop .5; '
        'conv 64 3x3; conv 64 3x3; SUM; maxpool 2, stride 2; '
        'conv 64 2x2; conv 64 2x2; SUM; maxpool 2, stride 2; drop .5; '
        'full conn. 500; output'
    ),
}


class ArchParseError(ValueError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = '{} (at position {})'.format(message, position)
        super(ArchParseError, self).__init__(message)


class ConfigError(ValueError):
    def __init__(self, key, message):
        self.key = key
        super(ConfigError, self).__init__('{}: {}'.format(key, message))


class LayerSpec(DictIoMixin):
    def __init__(
            self,
            kind='Output',
            units=None,
            kernel=None,
            pool=None,
            stride=None,
            prob=None):
        self.kind = kind
        self.units = units
        self.kernel = None if kernel is None else tuple(kernel)
        self.pool = pool
        self.stride = stride
        self.prob = prob
        self.position = None

    @property
    def weighted(self):
        return self.kind in WEIGHTED_KINDS

    def validate(self):
        assert self.kind in KINDS, self.kind
        if self.kind in ('Conv', 'LocalConv', 'Full'):
            if not (self.units and self.units >= 1):
                return 'unit count must be >= 1'
        if self.kind in ('Conv', 'LocalConv'):
            if not (self.kernel and min(self.kernel) >= 1):
                return 'kernel extents must be >= 1'
        if self.kind == 'Maxpool':
            if not (self.pool and self.pool >= 1):
                return 'pool extent must be >= 1'
            if not (self.stride and self.stride >= 1):
                return 'stride must be >= 1'
        if self.kind == 'Drop':
            if self.prob is None or not (0 <= self.prob < 1):
                return 'drop probability must lie in [0,1)'
        return None

    def format(self):
        if self.kind in ('Conv', 'LocalConv'):
            return '{} {} {}x{}'.format(self.kind, self.units, *self.kernel)
        elif self.kind == 'Maxpool':
            if self.stride == DEFAULT_STRIDE:
                return 'Maxpool {}'.format(self.pool)
            return 'Maxpool {} stride {}'.format(self.pool, self.stride)
        elif self.kind == 'Drop':
            return 'Drop {!r}'.format(self.prob)
        elif self.kind == 'Full':
            return 'Full {}'.format(self.units)
        else:
            return self.kind

    def load(self, raw):
        self.__init__(
            kind=raw['kind'],
            units=raw.get('units'),
            kernel=raw.get('kernel'),
            pool=raw.get('pool'),
            stride=raw.get('stride'),
            prob=raw.get('prob'))

    def dump(self):
        raw = {'kind': self.kind}
        for key in ['units', 'pool', 'stride', 'prob']:
            value = getattr(self, key)
            if value is not None:
                raw[key] = value
        if self.kernel is not None:
            raw['kernel'] = list(self.kernel)
        return raw


class NetSpec(object):
    def __init__(
            self,
            layers,
            input_shape=DEFAULT_INPUT_SHAPE,
            classes=DEFAULT_CLASSES):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.classes = int(classes)
        self.shapes = infer_shapes(self)

    def __len__(self):
        return len(self.layers)

    def __eq__(self, other):
        return (
            isinstance(other, NetSpec) and
            self.layers == other.layers and
            self.input_shape == other.input_shape and
            self.classes == other.classes
        )

    def __ne__(self, other):
        return not (self == other)

    def __repr__(self):
        return 'NetSpec({!r}, {}, {})'.format(
            self.format(), self.input_shape, self.classes)

    def input_shape_of(self, index):
        return self.input_shape if index == 0 else self.shapes[index - 1]

    def format(self):
        return format_arch(self)

    def untied(self):
        '''
        Copy with every Conv layer replaced by a LocalConv layer.
        '''
        layers = copy.deepcopy(self.layers)
        for layer in layers:
            if layer.kind == 'Conv':
                layer.kind = 'LocalConv'
        return NetSpec(layers, self.input_shape, self.classes)


def _parse_int(token, position):
    text, pos = token
    if not re.match(r'^\d+$', text):
        raise ArchParseError('malformed integer {!r}'.format(text), pos)
    return int(text)


def _parse_prob(token, position):
    text, pos = token
    if not re.match(r'^(\d+\.?\d*|\.\d+)$', text):
        raise ArchParseError('malformed number {!r}'.format(text), pos)
    return float(text)


def _parse_kernel(token, position):
    text, pos = token
    match = re.match(r'^(\d+)[xX](\d+)$', text)
    if not match:
        raise ArchParseError('malformed kernel {!r}'.format(text), pos)
    return (int(match.group(1)), int(match.group(2)))


def _parse_item(item, position):
    tokens = [
        (match.group(), position + match.start())
        for match in re.finditer(r'[^\s,]+', item)
    ]
    assert tokens
    word, pos = tokens[0]
    kind = KEYWORDS.get(word.lower())
    if kind is None:
        raise ArchParseError('unknown keyword {!r}'.format(word), pos)
    args = tokens[1:]
    if kind == 'Full' and args and args[0][0].lower() in ('conn', 'conn.'):
        args = args[1:]
    expected = {
        'Conv': 2,
        'LocalConv': 2,
        'Maxpool': 1,
        'Drop': 1,
        'Full': 1,
        'Sum': 0,
        'Output': 0,
    }[kind]
    if kind == 'Maxpool' and len(args) == 3:
        if args[1][0].lower() != 'stride':
            raise ArchParseError(
                'expected "stride", got {!r}'.format(args[1][0]), args[1][1])
    elif len(args) < expected:
        raise ArchParseError('{} needs {} argument(s)'.format(
            kind, expected), position + len(item.rstrip()))
    elif len(args) > expected:
        extra, extra_pos = args[expected]
        raise ArchParseError('unexpected token {!r}'.format(extra), extra_pos)

    if kind in ('Conv', 'LocalConv'):
        layer = LayerSpec(
            kind,
            units=_parse_int(args[0], position),
            kernel=_parse_kernel(args[1], position))
    elif kind == 'Maxpool':
        stride = DEFAULT_STRIDE
        if len(args) == 3:
            stride = _parse_int(args[2], position)
        layer = LayerSpec(
            kind,
            pool=_parse_int(args[0], position),
            stride=stride)
    elif kind == 'Drop':
        layer = LayerSpec(kind, prob=_parse_prob(args[0], position))
    elif kind == 'Full':
        layer = LayerSpec(kind, units=_parse_int(args[0], position))
    else:
        layer = LayerSpec(kind)
    problem = layer.validate()
    if problem:
        raise ArchParseError(problem, position)
    layer.position = position
    return layer


def parse_layers(text):
    layers = []
    items = text.split(';')
    offset = 0
    for i, item in enumerate(items):
        position = offset + len(item) - len(item.lstrip())
        offset += len(item) + 1
        if not item.strip():
            if i == len(items) - 1 and layers:
                break
            raise ArchParseError('empty item', position)
        layers.append(_parse_item(item.lstrip(), position))
    return layers


def parse_arch(
        text,
        input_shape=DEFAULT_INPUT_SHAPE,
        classes=DEFAULT_CLASSES):
    '''
    Parse an architecture string (or a registered architecture name)
    into a shape-checked NetSpec.
    '''
    text = ARCHITECTURES.get(text.strip().lower(), text)
    try:
        return NetSpec(parse_layers(text), input_shape, classes)
    except ArchParseError as e:
        LOG.error('\n  '.join([
            'failed to parse architecture',
            'text = {}'.format(text),
            'error = {}'.format(e),
        ]))
        raise


def format_arch(spec):
    return '; '.join(layer.format() for layer in spec.layers)


def _ceil_div(extent, stride):
    return -(-extent // stride)


def infer_shapes(spec):
    '''
    Per-layer output shapes.  Images are (channels, height, width),
    fully connected layers are (units,).
    '''
    if not spec.layers or spec.layers[-1].kind != 'Output':
        raise ArchParseError('last layer must be Output')
    shape = tuple(spec.input_shape)
    if min(shape) < 1:
        raise ArchParseError('non-positive input extent {}'.format(shape))
    shapes = []
    for i, layer in enumerate(spec.layers):
        if layer.kind == 'Output' and i != len(spec.layers) - 1:
            raise ArchParseError(
                'Output must be the last layer', layer.position)
        if layer.kind in SPATIAL_KINDS and len(shape) != 3:
            raise ArchParseError(
                '{} needs an image input, got shape {}'.format(
                    layer.kind, shape),
                layer.position)
        if layer.kind in ('Conv', 'LocalConv'):
            shape = (layer.units,) + shape[1:]
        elif layer.kind == 'Maxpool':
            shape = (
                shape[0],
                _ceil_div(shape[1], layer.stride),
                _ceil_div(shape[2], layer.stride),
            )
        elif layer.kind == 'Full':
            shape = (layer.units,)
        elif layer.kind == 'Output':
            shape = (spec.classes,)
        elif layer.kind == 'Sum':
            if i < 2:
                raise ArchParseError(
                    'Sum needs two preceding layers', layer.position)
            if shapes[i - 1] != shapes[i - 2]:
                raise ArchParseError(
                    'Sum of mismatched shapes {} and {}'.format(
                        shapes[i - 2], shapes[i - 1]),
                    layer.position)
        if min(shape) < 1:
            raise ArchParseError(
                'non-positive extent {}'.format(shape), layer.position)
        shapes.append(shape)
    return shapes


# ----------------------------------------------------------------------------
# Experiment configuration

MODES = ('BP', 'BP-H', 'FRFB', 'URFB')
LOSSES = ('hinge', 'softmax-xent')
DATASETS = ('cifar10', 'cifar100', 'mnist', 'toy')


def _upper(text):
    return str(text).strip().upper()


def _lower(text):
    return str(text).strip().lower()


def _text(text):
    return str(text).strip()


FIELDS = [
    ('mode', _upper, 'URFB'),
    ('loss', _lower, ''),
    ('eta', float, 0.1),
    ('mu', float, 1.0),
    ('batch_size', int, 500),
    ('epochs', int, 1000),
    ('connectivity', float, 1.0),
    ('seed', int, 0),
    ('untied', parse_bool, False),
    ('tied_init', parse_bool, False),
    ('arch', _text, 'simpnet'),
    ('dataset', _lower, 'cifar10'),
    ('data_dir', _text, ''),
    ('validation', int, 5000),
    ('train_limit', int, 0),
    ('checkpoint_every', int, 0),
    ('toy_classes', int, 2),
    ('toy_dim', int, 2),
    ('toy_per_class', int, 50),
    ('toy_separation', float, 10.0),
]
PARSERS = {key: parse for key, parse, _ in FIELDS}
DEFAULTS = {key: default for key, _, default in FIELDS}
ALIASES = {'batch': 'batch_size'}


class ExperimentConfig(DictIoMixin):
    def __init__(self, **kwargs):
        for key, default in DEFAULTS.items():
            setattr(self, key, default)
        for key, value in kwargs.items():
            self.set(key, value)

    def set(self, key, value):
        key = ALIASES.get(key, key)
        if key not in PARSERS:
            LOG.error('unknown config key: {}'.format(key))
            raise ConfigError(key, 'unknown key')
        try:
            value = PARSERS[key](value)
        except (TypeError, ValueError):
            LOG.error('bad config value: {} = {!r}'.format(key, value))
            raise ConfigError(key, 'cannot parse {!r}'.format(value))
        setattr(self, key, value)

    def update(self, raw):
        for key, value in raw.items():
            self.set(key, value)
        self.validate()
        return self

    @property
    def resolved_loss(self):
        if self.loss:
            return self.loss
        return 'softmax-xent' if self.mode == 'BP' else 'hinge'

    def validate(self):
        checks = [
            ('mode', self.mode in MODES, 'expected one of {}'.format(MODES)),
            ('loss', self.loss in ('',) + LOSSES,
                'expected one of {}'.format(LOSSES)),
            ('eta', self.eta > 0, 'must be positive'),
            ('mu', self.mu > 0, 'must be positive'),
            ('batch_size', self.batch_size >= 1, 'must be >= 1'),
            ('epochs', self.epochs >= 0, 'must be >= 0'),
            ('connectivity', 0 < self.connectivity <= 1,
                'must lie in (0,1]'),
            ('seed', self.seed >= 0, 'must be >= 0'),
            ('dataset', self.dataset in DATASETS,
                'expected one of {}'.format(DATASETS)),
            ('validation', self.validation >= 0, 'must be >= 0'),
            ('train_limit', self.train_limit >= 0, 'must be >= 0'),
            ('checkpoint_every', self.checkpoint_every >= 0,
                'must be >= 0'),
            ('toy_classes', self.toy_classes >= 1, 'must be >= 1'),
            ('toy_dim', self.toy_dim >= 1, 'must be >= 1'),
            ('toy_per_class', self.toy_per_class >= 1, 'must be >= 1'),
            ('toy_separation', self.toy_separation > 0, 'must be positive'),
        ]
        for key, ok, message in checks:
            if not ok:
                LOG.error('\n  '.join([
                    'invalid config',
                    'key = {}'.format(key),
                    'value = {!r}'.format(getattr(self, key)),
                    'problem = {}'.format(message),
                ]))
                raise ConfigError(key, message)

    def load(self, raw):
        self.__init__()
        self.update(raw)

    def dump(self):
        return {key: getattr(self, key) for key in PARSERS}


def parse_config_lines(lines):
    raw = {}
    for number, line in enumerate(lines):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            LOG.error('config line {} is not key=value: {}'.format(
                number + 1, line))
            raise ConfigError(line, 'expected key=value')
        key, value = line.split('=', 1)
        raw[key.strip()] = value.strip()
    return raw


def load_config(path, **overrides):
    with open_compressed(path, 'rt') as f:
        raw = parse_config_lines(f)
    raw.update(overrides)
    return ExperimentConfig().update(raw)
