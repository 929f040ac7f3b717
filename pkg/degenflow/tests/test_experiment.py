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
# General imports
import copy, os, shutil, tempfile
import numpy as np

# Scipion em imports
from pyworkflow.tests import BaseTest

# Plugin imports
from ..cli import main
from ..constants import MANIFEST_FILE, ERROR_FILE, EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL
from ..utils.errors import ConfigInvalid, StageFailed, MaxIterations
from ..utils.experiment import ExperimentConfig, runExperiment
from ..utils.io import readJson, writeJson, readField

BASE_CONFIG = {
    'grid': {'nx': 16, 'ny': 16},
    'potential': {'kind': 'power_q', 'q': 2.0},
    'source': {'name': 'two-blocks', 'params': {'amplitude': 1.0}},
    'pipeline': ['primal', 'dual', 'gap'],
    'dual': {'tol': 1e-7},
    'seed': 0,
}


def configWith(**changes) -> dict:
    data = copy.deepcopy(BASE_CONFIG)
    data.update(changes)
    return data


class TestConfiguration(BaseTest):
    """ Validation of experiment configurations. """

    def setUp(self):
        self.tmpDir = tempfile.mkdtemp(prefix='degenflow-config-')

    def tearDown(self):
        shutil.rmtree(self.tmpDir, ignore_errors=True)

    def assertError(self, data: dict, fragment: str):
        errors = ExperimentConfig.validate(data, self.tmpDir)
        self.assertTrue(any(fragment in e for e in errors), f'"{fragment}" not in {errors}')

    def testValidConfig(self):
        self.assertEqual(ExperimentConfig.validate(BASE_CONFIG), [])
        config = ExperimentConfig.fromDict(BASE_CONFIG, self.tmpDir)
        self.assertEqual(config.pipeline, ('primal', 'dual', 'gap'))
        self.assertEqual(config.dual.tol, 1e-7)
        self.assertEqual(config.traffic.audit.p, 2.0)
        self.assertEqual(config.digest(), ExperimentConfig.fromDict(configWith(out_dir='x'), self.tmpDir).digest())

    def testInvalidConfigs(self):
        self.assertError(configWith(colour='red'), 'colour: unknown key')
        self.assertError(configWith(pipeline=['gap']), 'gap requires primal')
        self.assertError(configWith(pipeline=['primal', 'primal']), 'appears twice')
        self.assertError(configWith(pipeline=['solve']), "unknown stage 'solve'")
        self.assertError(configWith(pipeline=[]), 'nonempty list')
        self.assertError(configWith(source={'name': 'spiral'}), 'unknown source')
        self.assertError(configWith(source={'name': 'two-blocks', 'file': 'f.dfield'}), 'exactly one')
        self.assertError(configWith(source={'file': 'missing.dfield'}), 'does not exist')
        self.assertError(configWith(source={'name': 'two-blocks', 'params': {'width': 1.0}}),
                         'source.params.width')
        self.assertError(configWith(grid={'nx': 2, 'ny': 16}), 'grid:')
        self.assertError(configWith(potential={'q': 0.5}), 'potential:')
        self.assertError(configWith(artifacts={'dual': 'nowhere'}), 'artifacts.dual')
        self.assertError(configWith(seed=1.5), 'seed')

    def testFromDictRaises(self):
        with self.assertRaises(ConfigInvalid) as ctx:
            ExperimentConfig.fromDict(configWith(pipeline=['gap'], colour='red'), self.tmpDir)
        self.assertEqual(len(ctx.exception.errors), 3)
        self.assertEqual(ctx.exception.exitCode, EXIT_CONFIG)


class TestExperimentRun(BaseTest):
    """ Pipelines, artifacts and manifests. """

    def setUp(self):
        self.tmpDir = tempfile.mkdtemp(prefix='degenflow-run-')

    def tearDown(self):
        shutil.rmtree(self.tmpDir, ignore_errors=True)

    def runConfig(self, data: dict, name: str) -> dict:
        config = ExperimentConfig.fromDict(data, self.tmpDir)
        return runExperiment(config, os.path.join(self.tmpDir, name))

    def testZeroSource(self):
        data = configWith(pipeline=['primal'], source={'name': 'two-blocks', 'params': {'amplitude': 0.0}})
        manifest = self.runConfig(data, 'zero')
        self.assertEqual(manifest['summaries']['primal']['energy'], 0.0)
        sigma = readField(os.path.join(self.tmpDir, 'zero', 'primal', 'sigma.dfield'))
        self.assertEqual(np.abs(sigma.x).max(), 0.0)
        self.assertEqual(np.abs(sigma.y).max(), 0.0)

    def testDeterministicManifest(self):
        first = self.runConfig(BASE_CONFIG, 'first')
        second = self.runConfig(BASE_CONFIG, 'second')
        self.assertEqual(first, second)
        self.assertEqual(first, readJson(os.path.join(self.tmpDir, 'first', MANIFEST_FILE)))
        stages = {a['stage'] for a in first['artifacts']}
        self.assertEqual(stages, {'source', 'primal', 'dual', 'gap'})
        gap = first['summaries']['gap']
        self.assertGreaterEqual(gap['gap'], -1e-8)
        self.assertLessEqual(gap['relative_gap'], 1e-4)

    def testStageFromArtifacts(self):
        self.runConfig(configWith(pipeline=['primal', 'dual']), 'solves')
        solves = os.path.join(self.tmpDir, 'solves')
        data = configWith(pipeline=['gap'], artifacts={'primal': os.path.join(solves, 'primal'),
                                                      'dual': os.path.join(solves, 'dual')})
        manifest = self.runConfig(data, 'gap')
        self.assertEqual(manifest['pipeline'], ['gap'])
        self.assertLessEqual(manifest['summaries']['gap']['relative_gap'], 1e-4)
        self.assertFalse(os.path.exists(os.path.join(self.tmpDir, 'gap', 'primal')))

    def testStageFailure(self):
        with self.assertRaises(StageFailed) as ctx:
            self.runConfig(configWith(pipeline=['dual'], dual={'max_iter': 1}), 'failed')
        self.assertEqual(ctx.exception.stage, 'dual')
        self.assertIsInstance(ctx.exception.cause, MaxIterations)
        self.assertEqual(ctx.exception.exitCode, EXIT_NUMERICAL)
        self.assertEqual(ctx.exception.toDict()['error'], 'MaxIterations')


class TestCommandLine(BaseTest):
    """ Verbs and exit codes of the degenflow command. """

    def setUp(self):
        self.tmpDir = tempfile.mkdtemp(prefix='degenflow-cli-')

    def tearDown(self):
        shutil.rmtree(self.tmpDir, ignore_errors=True)

    def writeConfig(self, data: dict, name: str = 'config.json') -> str:
        return writeJson(os.path.join(self.tmpDir, name), data)

    def testRunAndExport(self):
        path = self.writeConfig(configWith(pipeline=['primal'], out_dir='out'))
        self.assertEqual(main(['validate', path]), EXIT_OK)
        self.assertEqual(main(['run', path, '--log-level', 'WARNING']), EXIT_OK)
        outDir = os.path.join(self.tmpDir, 'out')
        self.assertTrue(os.path.isfile(os.path.join(outDir, MANIFEST_FILE)))
        self.assertTrue(os.path.isfile(os.path.join(outDir, 'config.json')))

        csvPath = os.path.join(self.tmpDir, 'u.csv')
        self.assertEqual(main(['export-csv', os.path.join(outDir, 'primal', 'u.dfield'), '-o', csvPath]), EXIT_OK)
        with open(csvPath) as fh:
            self.assertEqual(len(fh.read().splitlines()), 1 + 16 * 16)
        self.assertEqual(main(['export-csv', os.path.join(self.tmpDir, 'missing.dfield')]), EXIT_CONFIG)

    def testConfigError(self):
        path = self.writeConfig(configWith(pipeline=['gap']))
        outDir = os.path.join(self.tmpDir, 'bad')
        self.assertEqual(main(['validate', path]), EXIT_CONFIG)
        self.assertEqual(main(['run', path, '--out-dir', outDir]), EXIT_CONFIG)
        error = readJson(os.path.join(outDir, ERROR_FILE))
        self.assertEqual(error['error'], 'ConfigInvalid')

    def testNumericalError(self):
        path = self.writeConfig(configWith(pipeline=['dual'], dual={'max_iter': 1}))
        outDir = os.path.join(self.tmpDir, 'failed')
        self.assertEqual(main(['run', path, '--out-dir', outDir, '--threads', '2']), EXIT_NUMERICAL)
        error = readJson(os.path.join(outDir, ERROR_FILE))
        self.assertEqual(error['stage'], 'dual')
        self.assertEqual(error['error'], 'MaxIterations')
