# cutgraph, modular (cut) Bayesian inference on DAG models
# Copyright (C), 2026 cutgraph developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program. If not, see <http://www.gnu.org/licenses/>.

"""
Command line interface.

    cutgraph validate MODEL
    cutgraph modules MODEL [--partition A=refs ...]
    cutgraph order MODEL [--blocks ... | --three-blocks A=refs B=refs C=refs] [--reliability A,B]
    cutgraph cut MODEL [--blocks ...] [--reliability ...] [--within B=refs] [--standard] [--out DIR]
    cutgraph sample MODEL --method {cut,standard} [--seed S] [--out DIR]
    cutgraph experiment appendix-c --out DIR

MODEL is a path or the name of a bundled model. --partition and --blocks are the same option, and the experiment
appendix-c is also called longitudinal-bias. Exit codes: 0 success, 1 usage error, 2 model error,
3 numerical failure.
"""

import argparse
import json
import logging
import os
import re
import sys

from cutgraph import __version__
from cutgraph.data.model_io import build_executable, bundled_models, flatten, load_model, resolve_references
from cutgraph.errors import CutGraphError, ModelError, NumericError
from cutgraph.experiments.simulation import ExperimentConfig, run_bias_experiment
from cutgraph.graph.dag import sorted_nodes
from cutgraph.helper.seeding import resolve_seed
from cutgraph.modules.construction import check_partition, check_structure, construct_module, two_module_partition
from cutgraph.modules.factorization import (
    WithinModuleCutSpec, apply_within_cut, cut_general, standard_factorization
)
from cutgraph.modules.ordering import (
    ReliabilityOrder, order_three, order_two, resolve_order, sequential_split
)
from cutgraph.stats.gaussian import LinGaussModel
from cutgraph.stats.sampling import SamplerConfig, nested_cut_sample, standard_sample

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_NUMERIC = 0, 1, 2, 3

# commas inside brackets belong to the index, not to the list
LIST_SEPARATOR = re.compile(r',(?![^\[]*\])')


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError(f'{self.prog}: {message}')


def _references(text):
    return [item.strip() for item in LIST_SEPARATOR.split(text) if item.strip()]


def _assignment(text):
    label, separator, value = text.partition('=')
    if separator == '' or label.strip() == '' or value.strip() == '':
        raise argparse.ArgumentTypeError(f'expected LABEL=VALUE, got {text!r}')
    return label.strip(), value.strip()


def _constant(text):
    name, value = _assignment(text)
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'constant {name} must be a number, got {value!r}')
    return name, int(number) if number.is_integer() else number


def _emit(args, payload, text):
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + '\n')
    else:
        sys.stdout.write(text.rstrip('\n') + '\n')


# --------------------------------------------------------------------------------------------------------------------
# Model loading
# --------------------------------------------------------------------------------------------------------------------
def _flat_model(args):
    spec = load_model(args.model)
    try:
        return flatten(spec, dict(args.set or []))
    except CutGraphError:
        raise
    except (TypeError, ValueError) as error:
        raise ModelError(f'{args.model}: {error}') from error


def _reliability_option(text):
    try:
        return ReliabilityOrder(_references(text))
    except ModelError as error:
        raise UsageError(f'--reliability: {error}')


def _partition(args, flat):
    if args.blocks:
        partition = {label: resolve_references(flat, _references(refs)) for label, refs in args.blocks}
        check_partition(flat.dag, partition.values())
        return partition
    if len(flat.partition) == 0:
        raise UsageError('the model declares no partition; pass --blocks')
    return dict(flat.partition)


def _reliability(args, flat, partition):
    if args.reliability:
        return _reliability_option(args.reliability)
    if set(flat.reliability) == set(partition):
        return ReliabilityOrder(flat.reliability)
    if args.blocks:
        return ReliabilityOrder(label for label, _ in args.blocks)
    raise UsageError('no reliability order for these blocks; pass --reliability')


def _within(args, flat):
    if args.within:
        return [WithinModuleCutSpec(label, resolve_references(flat, _references(refs))) for label, refs in args.within]
    if args.blocks:
        return []
    return list(flat.within)


# --------------------------------------------------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------------------------------------------------
def _validate(args):
    flat = _flat_model(args)
    dag = flat.dag
    payload = {
        'name': flat.name,
        'nodes': len(dag),
        'observables': len(dag.observables),
        'parameters': len(dag.parameters),
        'edges': len(dag.edges),
        'blocks': {label: sorted_nodes(block) for label, block in sorted(flat.partition.items())},
        'reliability': list(flat.reliability),
    }
    text = f'{flat.name}: {len(dag)} nodes ({len(dag.observables)} observable, {len(dag.parameters)} parameter), ' \
           f'{len(dag.edges)} edges, {len(flat.partition)} block(s)'
    if args.dot:
        with open(args.dot, 'w', encoding='utf-8') as f:
            f.write(dag.to_dot(name=flat.name))
    _emit(args, payload, text)


def _modules(args):
    flat = _flat_model(args)
    partition = _partition(args, flat)
    modules = [construct_module(flat.dag, label, block) for label, block in partition.items()]
    lines = [str(module) for module in modules]
    payload = {'modules': [module.to_dict() for module in modules]}
    if len(modules) == 2:
        report = check_structure(flat.dag, two_module_partition(flat.dag, *modules))
        relation = order_two(flat.dag, *modules)
        payload.update(structure=report.to_dict(), relation=relation.value)
        lines.append(f'relation: {relation.value}')
        lines.extend(f'violation: {violation}' for violation in report.violations)
    _emit(args, payload, '\n'.join(lines))


def _three_way(args, flat):
    (label_a, refs_a), (label_b, refs_b), (label_c, refs_c) = args.three_blocks
    blocks = {label: resolve_references(flat, _references(refs))
              for label, refs in ((label_a, refs_a), (label_b, refs_b), (label_c, refs_c))}
    check_partition(flat.dag, blocks.values())
    dag = flat.dag
    mod_a, mod_b, mod_c = (construct_module(dag, label, blocks[label]) for label in (label_a, label_b, label_c))
    mod_t = construct_module(dag, f'({label_b}..{label_c})', blocks[label_b] | blocks[label_c])
    reliability = _reliability_option(args.reliability) if args.reliability else None
    pair_order, context = None, None
    if reliability is not None:
        pair_order = ReliabilityOrder(sorted((label_b, label_c), key=reliability.rank))
        context = ReliabilityOrder(
            [label_a, mod_t.label] if reliability.rank(label_a) < min(map(reliability.rank, (label_b, label_c)))
            else [mod_t.label, label_a]
        )
    prior = resolve_order(order_two(dag, mod_a, mod_t), mod_a, mod_t, context)
    three = order_three(dag, mod_a, mod_b, mod_c, prior, reliability=pair_order, mod_t=mod_t)
    lines = [
        f'{label_a} vs {mod_t.label}: {prior.value}',
        f'case {three.case}',
        'admissible: ' + ', '.join(outcome.notation for outcome in three.admissible),
        'chosen: ' + ('undecided' if three.chosen is None else three.chosen.notation),
    ]
    payload = {'prior': prior.value, **three.to_dict()}
    _emit(args, payload, '\n'.join(lines))


def _order(args):
    flat = _flat_model(args)
    if args.three_blocks:
        return _three_way(args, flat)
    partition = _partition(args, flat)
    reliability = _reliability(args, flat, partition)
    result = sequential_split(flat.dag, partition, reliability, tie_break=args.tie_break)
    if args.dot:
        with open(args.dot, 'w', encoding='utf-8') as f:
            f.write(result.ordering.to_dot())
    payload = {
        'modules': [module.to_dict() for module in result.modules],
        'ordering': result.ordering.to_dict(),
        'display': result.ordering.describe(),
    }
    _emit(args, payload, '\n'.join([str(module) for module in result.modules] + [result.ordering.describe()]))


def _factorization(args, flat, standard=False):
    partition = _partition(args, flat)
    if standard:
        if len(partition) != 2:
            raise UsageError('--standard needs exactly two blocks')
        modules = [construct_module(flat.dag, label, block) for label, block in partition.items()]
        return standard_factorization(flat.dag, *modules), None
    reliability = _reliability(args, flat, partition)
    result = sequential_split(flat.dag, partition, reliability, tie_break=args.tie_break)
    cf = cut_general(flat.dag, result.modules, result.ordering, label=f'cut[{result.ordering.describe()}]')
    for spec in _within(args, flat):
        cf = apply_within_cut(cf, spec, flat.dag)
    return cf, result.ordering


def _factor_report(cf):
    lines = [f'{cf.label}: {cf}']
    for factor in cf:
        lines.append(f'  {factor}  [{factor.kind.value}, module {factor.source_module}]')
    return '\n'.join(lines)


def _cut(args):
    flat = _flat_model(args)
    cf, ordering = _factorization(args, flat, standard=args.standard)
    payload = {'factorization': cf.to_dict(), 'ordering': None if ordering is None else ordering.to_dict()}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, 'factors.json'), 'w', encoding='utf-8') as f:
            json.dump(payload, f, sort_keys=True, indent=2)
            f.write('\n')
        if ordering is not None:
            with open(os.path.join(args.out, 'ordering.dot'), 'w', encoding='utf-8') as f:
                f.write(ordering.to_dot())
    _emit(args, payload, _factor_report(cf))


def _sample(args):
    flat = _flat_model(args)
    seed = resolve_seed(args.seed)
    model = build_executable(flat, seed=seed)
    config = SamplerConfig(
        n_outer=args.draws, n_inner=args.inner, burn_in=args.burn_in, proposal_scale=args.proposal_scale
    )
    if args.method == 'cut':
        cf = None
        if not isinstance(model, LinGaussModel):
            cf, _ = _factorization(args, flat)
        sample = nested_cut_sample(model, cf, evidence=flat.data, config=config, seed=seed)
    else:
        sample = standard_sample(model, evidence=flat.data, config=config, seed=seed)

    summary = sample.draws.agg(['mean', 'std']).T
    summary['ess'] = [sample.effective_size(column) for column in sample.columns]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        sample.to_csv(os.path.join(args.out, f'samples_{args.method}.csv'))
    payload = {
        'method': sample.method,
        'seed': seed,
        'draws': len(sample),
        'acceptance': sample.acceptance,
        'summary': {
            column: {key: float(value) for key, value in summary.loc[column].items()} for column in sample.columns
        },
    }
    _emit(args, payload, f'{sample.method} sample, {len(sample)} draws, seed {seed}\n'
                         + summary.to_string(float_format=lambda v: f'{v:.4f}'))


def _experiment(args):
    config = ExperimentConfig(
        T=args.T, n=args.n, offsets=tuple(float(v) for v in _references(args.offsets)), replicates=args.replicates,
        seed=resolve_seed(args.seed), n_draws=args.draws, n_jobs=args.jobs, standard_method=args.standard_method,
        echo_progress=args.progress,
    )
    report = run_bias_experiment(config)
    paths = report.write(args.out)
    summary = report.summary()
    payload = {'outputs': paths, 'summary': json.loads(summary.to_json(orient='records'))}
    _emit(args, payload, summary.to_string(index=False, float_format=lambda v: f'{v:.3f}'))


# --------------------------------------------------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------------------------------------------------
def _add_model(parser):
    parser.add_argument('model', help=f'model file or bundled model ({", ".join(bundled_models())})')
    parser.add_argument('--set', type=_constant, action='append', metavar='NAME=VALUE',
                        help='override a constant of the model file')


def _add_structure(parser):
    parser.add_argument('--blocks', '--partition', type=_assignment, nargs='+', metavar='LABEL=REFS',
                        help='observable blocks, e.g. A=Y[*],Z[1] (default: the partition of the model file)')
    parser.add_argument('--reliability', metavar='LABELS', help='block labels, most reliable first, e.g. B,A')
    parser.add_argument('--tie-break', choices=('reliability', 'strict'), default='reliability')
    parser.add_argument('--within', type=_assignment, action='append', metavar='MODULE=REFS',
                        help='parameters of MODULE inferred from their prior only')


def build_parser():
    parser = _Parser(prog='cutgraph', description='Modular (cut) Bayesian inference on DAG models.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging on stderr')
    parser.add_argument('--json', action='store_true', help='machine-readable output')
    commands = parser.add_subparsers(dest='command', parser_class=_Parser)
    commands.required = True

    validate = commands.add_parser('validate', help='parse and flatten a model file')
    _add_model(validate)
    validate.add_argument('--dot', metavar='PATH', help='write the flattened DAG in DOT format')
    validate.set_defaults(handler=_validate)

    modules = commands.add_parser('modules', help='construct the module of every block')
    _add_model(modules)
    modules.add_argument('--blocks', '--partition', type=_assignment, nargs='+', metavar='LABEL=REFS')
    modules.set_defaults(handler=_modules)

    order = commands.add_parser('order', help='order the modules')
    _add_model(order)
    order.add_argument('--blocks', '--partition', type=_assignment, nargs='+', metavar='LABEL=REFS')
    order.add_argument('--three-blocks', type=_assignment, nargs=3, metavar='LABEL=REFS',
                       help='context block A and the two halves B, C of a split')
    order.add_argument('--reliability', metavar='LABELS')
    order.add_argument('--tie-break', choices=('reliability', 'strict'), default='reliability')
    order.add_argument('--dot', metavar='PATH', help='write the ordering graph in DOT format')
    order.set_defaults(handler=_order)

    cut = commands.add_parser('cut', help='print the cut factorization')
    _add_model(cut)
    _add_structure(cut)
    cut.add_argument('--standard', action='store_true', help='print the standard factorization instead')
    cut.add_argument('--out', metavar='DIR', help='write factors.json and ordering.dot')
    cut.set_defaults(handler=_cut)

    sample = commands.add_parser('sample', help='sample the cut or the standard posterior')
    _add_model(sample)
    _add_structure(sample)
    sample.add_argument('--method', choices=('cut', 'standard'), default='cut')
    sample.add_argument('--seed', type=int, default=None, help='default: $CUTGRAPH_SEED, else 0')
    sample.add_argument('--draws', type=int, default=2000)
    sample.add_argument('--inner', type=int, default=200)
    sample.add_argument('--burn-in', type=float, default=.2)
    sample.add_argument('--proposal-scale', type=float, default=.5)
    sample.add_argument('--out', metavar='DIR', help='write samples_<method>.csv')
    sample.set_defaults(handler=_sample)

    experiment = commands.add_parser('experiment', help='run a bundled experiment')
    experiment.add_argument('name', choices=('appendix-c', 'longitudinal-bias'))
    experiment.add_argument('--out', metavar='DIR', required=True)
    experiment.add_argument('--T', type=int, default=100)
    experiment.add_argument('--n', type=int, default=100)
    experiment.add_argument('--offsets', default='-2,0,2')
    experiment.add_argument('--replicates', type=int, default=1)
    experiment.add_argument('--seed', type=int, default=None)
    experiment.add_argument('--draws', type=int, default=1000)
    experiment.add_argument('--jobs', type=int, default=1)
    experiment.add_argument('--standard-method', choices=('conjugate', 'mh'), default='conjugate')
    experiment.add_argument('--progress', action='store_true')
    experiment.set_defaults(handler=_experiment)
    return parser


def main(argv=None):
    """
    Run the command line interface and return its exit code.
    """

    try:
        args = build_parser().parse_args(argv)
    except UsageError as error:
        sys.stderr.write(f'{error}\n')
        return EXIT_USAGE
    except SystemExit as exit_:
        # --help and --version
        return EXIT_OK if exit_.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    try:
        args.handler(args)
    except UsageError as error:
        sys.stderr.write(f'usage error: {error}\n')
        return EXIT_USAGE
    except ModelError as error:
        sys.stderr.write(f'model error: {error}\n')
        return EXIT_MODEL
    except NumericError as error:
        sys.stderr.write(f'numerical failure: {error}\n')
        return EXIT_NUMERIC
    except CutGraphError as error:
        sys.stderr.write(f'error: {error}\n')
        return EXIT_MODEL
    except (FileNotFoundError, IsADirectoryError, ValueError) as error:
        sys.stderr.write(f'usage error: {error}\n')
        return EXIT_USAGE
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
