# **************************************************************************
# *
# * Authors:     degenflow developers
# *
# * This program is free software; you can redistribute it and/or modify
# * it under the terms of the GNU General Public License as published by
# * the Free Software Foundation; either version 3 of the License, or
# * (at your option) any later version.
# *
# * This program is distributed in the hope that it will be useful,
# * but WITHOUT ANY WARRANTY; without even the implied warranty of
# * MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# * GNU General Public License for more details.
# *
# * You should have received a copy of the GNU General Public License
# * along with this program; if not, write to the Free Software
# * Foundation, Inc., 59 Temple Place, Suite 330, Boston, MA
# * 02111-1307  USA
# *
# **************************************************************************
"""
Command line runner.

    degenflow run <config.json> [--out-dir DIR] [--threads N] [--log-level LEVEL]
    degenflow validate <config.json>
    degenflow export-csv <field-file> [-o out.csv]

Logs go to standard error. Exit codes: 0 success, 2 configuration error,
3 numerical failure; failures also leave an error.json in the output directory.
"""

# General imports
import argparse
import logging
import os
import sys
from typing import List, Optional

# Plugin imports
from .constants import ERROR_FILE, EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL
from .utils.errors import DegenFlowError, ConfigInvalid
from .utils.experiment import ExperimentConfig, runExperiment
from .utils.io import readField, exportCsv, readJson, writeJson, ensureDir

logger = logging.getLogger('degenflow')


def buildParser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='degenflow', description='Degenerate elliptic flux laboratory')
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    verbs = parser.add_subparsers(dest='verb', required=True)

    run = verbs.add_parser('run', parents=[common], help='Run the pipeline of an experiment configuration')
    run.add_argument('config')
    run.add_argument('--out-dir', default=None, help='Overrides out_dir of the configuration')
    run.add_argument('--threads', type=int, default=1, help='Worker hint, results do not depend on it')

    validate = verbs.add_parser('validate', parents=[common], help='Check a configuration without computing')
    validate.add_argument('config')

    export = verbs.add_parser('export-csv', parents=[common], help='Write a field file as CSV')
    export.add_argument('field')
    export.add_argument('-o', '--output', default=None)
    return parser


def _writeError(outDir: Optional[str], error: DegenFlowError):
    if outDir:
        writeJson(os.path.join(ensureDir(outDir), ERROR_FILE), error.toDict())


def _outDirOf(args) -> Optional[str]:
    if args.out_dir:
        return args.out_dir
    try:
        outDir = readJson(args.config).get('out_dir', 'degenflow-out')
    except (OSError, ValueError, AttributeError):
        return None
    return outDir if os.path.isabs(outDir) else os.path.join(os.path.dirname(os.path.abspath(args.config)), outDir)


def runCommand(args) -> int:
    try:
        config = ExperimentConfig.fromFile(args.config)
        manifest = runExperiment(config, outDir=args.out_dir, threads=args.threads)
    except DegenFlowError as e:
        logger.error('%s', e)
        _writeError(_outDirOf(args), e)
        return e.exitCode if e.exitCode in (EXIT_CONFIG, EXIT_NUMERICAL) else EXIT_NUMERICAL
    logger.info('Wrote %d artifacts', len(manifest['artifacts']))
    return EXIT_OK


def validateCommand(args) -> int:
    try:
        data = readJson(args.config)
    except (OSError, ValueError) as e:
        logger.error('Cannot read %s: %s', args.config, e)
        return EXIT_CONFIG
    errors = ExperimentConfig.validate(data, os.path.dirname(os.path.abspath(args.config)))
    for error in errors:
        logger.error('%s', error)
    if errors:
        _writeError(_outDirOf(argparse.Namespace(config=args.config, out_dir=None)), ConfigInvalid(errors))
        return EXIT_CONFIG
    logger.info('%s is valid', args.config)
    return EXIT_OK


def exportCommand(args) -> int:
    try:
        field = readField(args.field)
    except (OSError, ValueError, DegenFlowError) as e:
        logger.error('Cannot read %s: %s', args.field, e)
        return EXIT_CONFIG
    output = args.output or os.path.splitext(args.field)[0] + '.csv'
    exportCsv(field, output)
    logger.info('Wrote %s', output)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = buildParser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, args.log_level),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    commands = {'run': runCommand, 'validate': validateCommand, 'export-csv': exportCommand}
    return commands[args.verb](args)


if __name__ == '__main__':
    sys.exit(main())
