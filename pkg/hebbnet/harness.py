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
Run directories for training, linear dynamics and circuit experiments.

A training run directory holds::

    manifest.json          resolved config, seed, version, timestamps, files
    metrics.csv            epoch,train_err,val_err,train_loss,corr_l1,...
    checkpoints/epoch_NNNNN.tensors
    curves.png

CSV files are authoritative; plots can be regenerated from them alone.
'''

import os
import re
import csv
import time
import logging
import multiprocessing
import numpy
import hebbnet
from hebbnet import circuits
from hebbnet import lindyn
from hebbnet.data import load_dataset
from hebbnet.feedback import initial_record, train_epoch
from hebbnet.fileutil import find_files
from hebbnet.io.stream import (
    CheckpointError,
    json_dump,
    mkdir_p,
    tensor_stream_dump,
    tensor_stream_load,
)
from hebbnet.layers import DualWeights, FilterWeights, Network
from hebbnet.mixins import DictIoMixin
from hebbnet.netspec import ExperimentConfig, parse_arch
from hebbnet.rng import Rng
from hebbnet.tensor import UndefinedCorrelationError

LOG = logging.getLogger(__name__)

CHECKPOINT_DIR = 'checkpoints'
CHECKPOINT_PATTERN = 'epoch_*.tensors'
TIME_FORMAT = '%Y-%m-%dT%H:%M:%S'


def _now():
    return time.strftime(TIME_FORMAT, time.gmtime())


def _pyplot():
    import matplotlib
    matplotlib.use('Agg')
    from matplotlib import pyplot
    return pyplot


def write_csv(filename, header, rows):
    with open(filename, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def read_csv(filename):
    with open(filename, newline='') as f:
        reader = csv.reader(f)
        header = next(reader)
        return header, [row for row in reader]


class RunManifest(DictIoMixin):
    def __init__(
            self,
            command='',
            config=None,
            seed=0,
            output_dir='',
            started='',
            finished='',
            files=(),
            version=hebbnet.__version__):
        self.command = command
        self.config = dict(config or {})
        self.seed = seed
        self.output_dir = output_dir
        self.started = started
        self.finished = finished
        self.files = list(files)
        self.version = version

    def add(self, filename):
        name = os.path.relpath(filename, self.output_dir)
        assert name not in self.files, name
        self.files.append(name)

    def load(self, raw):
        self.__init__(**raw)

    def dump(self):
        return {
            'command': self.command,
            'config': self.config,
            'seed': self.seed,
            'output_dir': self.output_dir,
            'started': self.started,
            'finished': self.finished,
            'files': list(self.files),
            'version': self.version,
        }

    def save(self):
        self.finished = _now()
        json_dump(self.dump(), os.path.join(self.output_dir, 'manifest.json'))


# ----------------------------------------------------------------------------
# Training

def prepare_data(config, rng):
    '''
    Returns (train, validation) after train_limit and the held out split.
    '''
    dataset = load_dataset(config, rng.spawn('data'), train=True)
    if config.train_limit:
        dataset = dataset.subset(0, config.train_limit)
    validation = config.validation
    if validation >= len(dataset):
        clamped = len(dataset) // 10
        LOG.warning('validation=%d exceeds %d samples; using %d',
                    validation, len(dataset), clamped)
        validation = clamped
    return dataset.split(validation)


def build_network(config, dataset, rng):
    spec = parse_arch(config.arch, dataset.shape, dataset.classes)
    if config.untied:
        spec = spec.untied()
    return Network.build(
        spec,
        rng.spawn('net'),
        config.mode,
        config.connectivity,
        config.tied_init)


def checkpoint_name(dirname, epoch):
    return os.path.join(dirname, CHECKPOINT_DIR, 'epoch_{:05d}.tensors'.format(
        epoch))


def plot_training(records, filename):
    pyplot = _pyplot()
    epochs = [r.epoch for r in records]
    fig, (left, right) = pyplot.subplots(1, 2, figsize=(10, 4))
    for key, label in [('train_error', 'train'), ('val_error', 'validation')]:
        values = [getattr(r, key) for r in records]
        if any(v is not None for v in values):
            left.plot(epochs, [numpy.nan if v is None else v for v in values],
                      label=label)
    left.set_xlabel('epoch')
    left.set_ylabel('error rate')
    left.legend(loc='best')
    corrs = numpy.array([r.correlations for r in records], dtype=float)
    for layer in range(corrs.shape[1] if corrs.ndim == 2 else 0):
        right.plot(epochs, corrs[:, layer], label='layer {}'.format(layer + 1))
    right.set_xlabel('epoch')
    right.set_ylabel('corr(W, R^t)')
    right.legend(loc='best')
    fig.tight_layout()
    fig.savefig(filename)
    pyplot.close(fig)


def run_training(config, outdir, stream=None):
    '''
    Train one network and write a run directory.  stream optionally names
    an independent batch/dropout stream, e.g. the mode within a sweep.
    '''
    config.validate()
    manifest = RunManifest(
        'train', config.dump(), config.seed, outdir, _now())
    mkdir_p(outdir)
    rng = Rng(config.seed)
    train_set, validation = prepare_data(config, rng)
    net = build_network(config, train_set, rng)
    train_rng = rng.spawn('train') if stream is None else rng.spawn(
        'train', stream)
    LOG.info('training %s in %s mode on %d samples (%d held out)',
             net.spec.format(), config.mode, len(train_set), len(validation))

    def checkpoint(epoch):
        filename = checkpoint_name(outdir, epoch)
        tensor_stream_dump(net.dump_weights(), filename)
        manifest.add(filename)

    records = [initial_record(net, train_set, config, validation)]
    metrics = os.path.join(outdir, 'metrics.csv')
    with open(metrics, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(records[0].header())
        writer.writerow(records[0].row())
        checkpoint(0)
        for epoch in range(1, config.epochs + 1):
            record = train_epoch(
                net, train_set, config, train_rng, validation, epoch)
            records.append(record)
            writer.writerow(record.row())
            f.flush()
            every = config.checkpoint_every
            if epoch == config.epochs or (every and epoch % every == 0):
                checkpoint(epoch)
    manifest.add(metrics)
    curves = os.path.join(outdir, 'curves.png')
    plot_training(records, curves)
    manifest.add(curves)
    manifest.save()
    return records


def _sweep_worker(args):
    raw, outdir, mode = args
    config = ExperimentConfig.from_dict(raw)
    config.mode = mode
    config.validate()
    records = run_training(config, outdir, stream=mode)
    return [record.dump() for record in records]


def run_sweep(config, outdir, modes, processes=None):
    '''
    One sibling run directory per mode.  Data and initial weights depend
    only on the seed; batch order and dropout streams on (seed, mode).
    '''
    jobs = [
        (config.dump(), os.path.join(outdir, mode.lower()), mode)
        for mode in modes
    ]
    if processes == 1 or len(jobs) == 1:
        results = [_sweep_worker(job) for job in jobs]
    else:
        with multiprocessing.Pool(processes) as pool:
            results = pool.map(_sweep_worker, jobs)
    return dict(zip(modes, results))


# ----------------------------------------------------------------------------
# Alignment tables

def _checkpoint_epoch(filename):
    match = re.search(r'epoch_(\d+)\.tensors', os.path.basename(filename))
    return int(match.group(1)) if match else -1


def checkpoint_alignment(filename):
    '''
    Per-layer corr(W, R^t) of one checkpoint, in layer order.
    '''
    layers = {}
    order = []
    for name, array in tensor_stream_load(filename):
        layer, key = name.rsplit('.', 1)
        if layer not in layers:
            layers[layer] = {}
            order.append(layer)
        layers[layer][key] = array
    result = []
    for layer in order:
        arrays = layers[layer]
        if 'W' not in arrays or 'R' not in arrays:
            LOG.error('checkpoint {} lacks W or R for {}'.format(
                filename, layer))
            raise CheckpointError('incomplete layer {} in {}'.format(
                layer, filename))
        dense = layer.startswith('full') or layer.startswith('output')
        Weights = DualWeights if dense else FilterWeights
        weights = Weights(
            arrays['W'],
            arrays['R'],
            arrays.get('mask_W'),
            arrays.get('mask_R'))
        try:
            result.append(weights.alignment())
        except UndefinedCorrelationError:
            result.append(float('nan'))
    return result


def run_align(checkpoint_dir, out=None):
    '''
    Write alignment.csv (checkpoint,epoch,corr_l1,...) and return the rows.
    '''
    if os.path.isdir(os.path.join(checkpoint_dir, CHECKPOINT_DIR)):
        checkpoint_dir = os.path.join(checkpoint_dir, CHECKPOINT_DIR)
    filenames = find_files(checkpoint_dir, CHECKPOINT_PATTERN)
    if not filenames:
        LOG.error('no checkpoints in {}'.format(checkpoint_dir))
        raise CheckpointError('no checkpoints in {}'.format(checkpoint_dir))
    filenames.sort(key=_checkpoint_epoch)
    rows = []
    width = 0
    for filename in filenames:
        corrs = checkpoint_alignment(filename)
        width = max(width, len(corrs))
        rows.append([
            os.path.basename(filename),
            str(_checkpoint_epoch(filename)),
        ] + [repr(float(c)) for c in corrs])
    header = ['checkpoint', 'epoch'] + [
        'corr_l{}'.format(i + 1) for i in range(width)
    ]
    if out is None:
        out = os.path.join(os.path.dirname(checkpoint_dir), 'alignment.csv')
    write_csv(out, header, rows)
    LOG.info('wrote %s (%d checkpoints)', out, len(rows))
    return header, rows


# ----------------------------------------------------------------------------
# Linear dynamics

def default_dims(k):
    assert k >= 1, k
    return [40] + [100] * (k - 1) + [10]


def trajectory_header(k):
    return ['iteration', 'eps', 'log10_e2'] + [
        'corr_layer_{}'.format(i + 1) for i in range(k)
    ]


def plot_lindyn(bundle, filename):
    pyplot = _pyplot()
    k = len(bundle[0].correlations[0])
    fig, axes = pyplot.subplots(1, k + 1, figsize=(4 * (k + 1), 4))
    for trajectory in bundle:
        label = trajectory.label if trajectory.eps is None else (
            'eps={:g}'.format(trajectory.eps))
        axes[0].plot(trajectory.log10_e2, label=label)
        if trajectory.eps is None:
            continue
        corrs = numpy.array(trajectory.correlations)
        for layer in range(k):
            axes[layer + 1].plot(corrs[:, layer], label=label)
    axes[0].set_ylabel('log10 error')
    axes[0].legend(loc='best')
    for layer in range(k):
        axes[layer + 1].set_ylabel('corr layer {}'.format(layer + 1))
    for ax in axes:
        ax.set_xlabel('iteration')
    fig.tight_layout()
    fig.savefig(filename)
    pyplot.close(fig)


def run_lindyn(
        outdir,
        k=3,
        eps_list=lindyn.EPS_LIST,
        iterations=1000,
        dt=lindyn.DEFAULT_DT,
        seed=0,
        dims=None,
        baseline=None,
        max_steps=20000,
        threshold=lindyn.PASSAGE_THRESHOLD):
    '''
    Simulate the matrix systems, write trajectory.csv, lindyn.png and
    rates.json, and return the RateReport.  The BP baseline is included
    whenever more than one eps is compared, unless baseline says otherwise.
    '''
    dims = list(dims) if dims else default_dims(k)
    k = len(dims) - 1
    if baseline is None:
        baseline = len(eps_list) > 1
    manifest = RunManifest('lindyn', {
        'dims': dims,
        'eps': list(eps_list),
        'iterations': iterations,
        'dt': dt,
        'max_steps': max_steps,
        'threshold': threshold,
    }, seed, outdir, _now())
    mkdir_p(outdir)
    rng = Rng(seed)
    bundle = lindyn.replicate_sim(
        dims, eps_list, iterations, dt, rng, baseline=baseline)
    trajectory = os.path.join(outdir, 'trajectory.csv')
    write_csv(
        trajectory,
        trajectory_header(k),
        (row for t in bundle for row in t.rows()))
    manifest.add(trajectory)
    plot = os.path.join(outdir, 'lindyn.png')
    plot_lindyn(bundle, plot)
    manifest.add(plot)
    report = lindyn.rate_monotonicity(
        lambda eps: lindyn.random_setup(dims, rng, eps, dt),
        eps_list,
        threshold,
        max_steps)
    rates = os.path.join(outdir, 'rates.json')
    json_dump(report.dump(), rates)
    manifest.add(rates)
    manifest.save()
    return report


# ----------------------------------------------------------------------------
# Circuits

def run_circuit(
        outdir,
        M=circuits.DEFAULT_M,
        S=circuits.DEFAULT_S,
        mu=1.,
        eps_osc=circuits.DEFAULT_EPS_OSC,
        K=circuits.DEFAULT_K,
        resolution=20,
        t_threshold=1.,
        trace=None):
    '''
    Write circuit_report.json and, given trace=(h, s), trace.csv.
    Returns the pair of EquivalenceReports.
    '''
    manifest = RunManifest('circuit', {
        'M': M,
        'S': S,
        'mu': mu,
        'eps_osc': eps_osc,
        'K': K,
        'resolution': resolution,
        't_threshold': t_threshold,
    }, 0, outdir, _now())
    mkdir_p(outdir)
    output = circuits.check_output_equivalence(
        M, S, mu, eps_osc, resolution, t_threshold)
    shutdown = circuits.check_shutdown_equivalence(K)
    report = os.path.join(outdir, 'circuit_report.json')
    json_dump({
        'equivalent': output.equivalent and shutdown.equivalent,
        'output': output.dump(),
        'shutdown': shutdown.dump(),
    }, report)
    manifest.add(report)
    if trace is not None:
        h, s = trace
        circuit = circuits.OutputCircuit(
            h, s, M, S, mu, eps_osc, t_threshold)
        rows = circuits.output_circuit_trace(circuit)
        filename = os.path.join(outdir, 'trace.csv')
        write_csv(
            filename,
            ['step', 'delta_c', 't_c'],
            ([str(step), repr(delta), str(t)] for step, delta, t in rows))
        manifest.add(filename)
    manifest.save()
    return output, shutdown
