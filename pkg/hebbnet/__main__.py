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
import sys
import logging
import parsable
from hebbnet import harness
from hebbnet.data import FormatError
from hebbnet.circuits import NonconvergenceError
from hebbnet.io.stream import CheckpointError
from hebbnet.lindyn import InstabilityError
from hebbnet.netspec import (
    PARSERS,
    ArchParseError,
    ConfigError,
    ExperimentConfig,
    load_config,
    parse_arch,
)
from hebbnet.layers import SequencingError
from hebbnet.tensor import DimensionError, NonFiniteError
from hebbnet.util import ContractError, parse_bool, parse_list
parsable = parsable.Parsable()

LOG = logging.getLogger('hebbnet')

ERRORS = (
    ArchParseError,
    CheckpointError,
    ConfigError,
    ContractError,
    DimensionError,
    FormatError,
    InstabilityError,
    NonconvergenceError,
    NonFiniteError,
    SequencingError,
    IOError,
)


def _fail(error):
    LOG.error('{}: {}'.format(type(error).__name__, error))
    sys.exit(1)


@parsable.command
def train(
        config_path='',
        out='run',
        modes='',
        processes='',
        mode='',
        loss='',
        eta='',
        mu='',
        batch_size='',
        epochs='',
        connectivity='',
        seed='',
        untied='',
        tied_init='',
        arch='',
        dataset='',
        data_dir='',
        validation='',
        train_limit='',
        checkpoint_every=''):
    '''
    Train a network, writing metrics.csv, checkpoints and a manifest to out.
    key=value arguments override the config file; modes=BP,URFB,FRFB runs
    a sweep with one sibling directory per mode.
    '''
    args = dict(locals())
    overrides = {
        key: value
        for key, value in args.items()
        if key in PARSERS and value != ''
    }
    try:
        if config_path:
            config = load_config(config_path, **overrides)
        else:
            config = ExperimentConfig().update(overrides)
        if modes:
            modes = [m.upper() for m in parse_list(modes)]
            for m in modes:
                ExperimentConfig(mode=m).validate()
            harness.run_sweep(
                config, out, modes, int(processes) if processes else None)
        else:
            harness.run_training(config, out)
    except ERRORS as e:
        _fail(e)


@parsable.command
def lindyn(
        out='lindyn',
        k='3',
        eps='0,.25,.5,1',
        iterations='1000',
        dt='1e-3',
        seed='0',
        dims='',
        baseline='',
        max_steps='20000'):
    '''
    Simulate linear network dynamics for each eps and compare convergence.
    '''
    try:
        report = harness.run_lindyn(
            out,
            k=int(k),
            eps_list=parse_list(eps, float),
            iterations=int(iterations),
            dt=float(dt),
            seed=int(seed),
            dims=parse_list(dims, int) if dims else None,
            baseline=parse_bool(baseline) if baseline else None,
            max_steps=int(max_steps))
    except ERRORS as e:
        _fail(e)
    print('first passage: {}'.format(', '.join(
        'eps={:g}: {}'.format(e, p)
        for e, p in zip(report.eps, report.passages))))
    if not report.ordered:
        LOG.error('convergence is not monotone in eps')
        sys.exit(1)


@parsable.command
def circuit(
        out='circuit',
        M='10',
        S='1',
        mu='1',
        eps_osc='.1',
        K='10',
        resolution='20',
        t_threshold='1',
        h='',
        s='1'):
    '''
    Check both local circuits against the engine on a grid; h=2 s=1 also
    writes a trace of one oscillation.
    '''
    try:
        output, shutdown = harness.run_circuit(
            out,
            M=float(M),
            S=float(S),
            mu=float(mu),
            eps_osc=float(eps_osc),
            K=float(K),
            resolution=int(resolution),
            t_threshold=float(t_threshold),
            trace=(float(h), int(s)) if h else None)
    except ERRORS as e:
        _fail(e)
    for report in (output, shutdown):
        print('{}: equivalent: {}, {} checked, {} counterexamples'.format(
            report.name,
            str(report.equivalent).lower(),
            report.checked,
            len(report.counterexamples)))
        for example in report.counterexamples[:10]:
            print('  {}'.format(example))
    if not (output.equivalent and shutdown.equivalent):
        sys.exit(1)


@parsable.command
def align(checkpoint_dir, out=''):
    '''
    Tabulate per-layer alignment of every checkpoint in a run.
    '''
    try:
        harness.run_align(checkpoint_dir, out or None)
    except ERRORS as e:
        _fail(e)


@parsable.command
def shapes(arch='simpnet', input_shape='3,32,32', classes='10'):
    '''
    Print the output shape of every layer of an architecture.
    '''
    try:
        spec = parse_arch(arch, parse_list(input_shape, int), int(classes))
    except ERRORS as e:
        _fail(e)
    print('input {}'.format('x'.join(map(str, spec.input_shape))))
    for layer, shape in zip(spec.layers, spec.shapes):
        print('{:<24} {}'.format(layer.format(), 'x'.join(map(str, shape))))


def main():
    logging.basicConfig(
        level=os.environ.get('HEBBNET_LOG_LEVEL', 'INFO').upper(),
        format='%(asctime)s %(name)s %(levelname)s %(message)s')
    parsable.dispatch()


if __name__ == '__main__':
    main()
