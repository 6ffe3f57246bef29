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

import numpy
import matplotlib
matplotlib.use('Agg')
from matplotlib import pyplot
import parsable
from hebbnet.circuits import OutputCircuit, ShutdownCircuit, output_circuit_trace
parsable = parsable.Parsable()


@parsable.command
def output(M=10., S=1., mu=1., eps_osc=.1, filename='sigma_delta.png'):
    '''
    Plot both transfer functions of the output-error circuit.
    '''
    circuit = OutputCircuit(0., 1, float(M), float(S), float(mu),
                            float(eps_osc))
    M = circuit.M
    xs = numpy.linspace(-3 * M, 3 * M, 2001)
    fig, (left, right) = pyplot.subplots(1, 2, figsize=(10, 4))
    left.plot(xs, [circuit.sigma_delta(x) for x in xs])
    for edge in [-2 * M - circuit.S, -M, M, 2 * M + circuit.S]:
        left.axvline(edge, color='gray', linestyle=':')
    left.set_xlabel('drive')
    left.set_ylabel('delta')
    ys = numpy.linspace(-2., 2., 801)
    right.plot(ys, [circuit.sigma_t(y) for y in ys])
    right.set_xlabel('delta')
    right.set_ylabel('t')
    fig.tight_layout()
    fig.savefig(filename)
    print('wrote {}'.format(filename))


@parsable.command
def shutdown(K=10., filename='sigma_shutdown.png'):
    '''
    Plot the shutdown nonlinearity.
    '''
    circuit = ShutdownCircuit(K=float(K))
    K = circuit.K
    ys = numpy.linspace(-4 * K, 2 * K, 1201)
    pyplot.figure()
    pyplot.plot(ys, [circuit.sigma(y) for y in ys])
    pyplot.axvline(-K, color='gray', linestyle=':')
    pyplot.xlabel('input')
    pyplot.ylabel('output')
    pyplot.savefig(filename)
    print('wrote {}'.format(filename))


@parsable.command
def trace(h=2., s=1, micro_steps=8):
    '''
    Print the micro-step trace of one output unit.
    '''
    circuit = OutputCircuit(float(h), int(s))
    for step, delta, t in output_circuit_trace(circuit, int(micro_steps)):
        print('{}\t{:g}\t{}'.format(step, delta, t))


if __name__ == '__main__':
    parsable.dispatch()
