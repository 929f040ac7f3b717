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
Experiment configuration and the staged pipeline runner.

Each stage writes its fields and a summary.json under <out_dir>/<stage>/ and reads
earlier stages only from those files (or from the directories named under
"artifacts"), so any stage can be rerun on its own. The run ends with a manifest
listing every written file with its sha256.
"""

# General imports
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import fft

# Plugin imports
from ..constants import STAGES, STAGE_PRIMAL, STAGE_DUAL, STAGE_GAP, STAGE_DIAGNOSE, STAGE_TRAFFIC, \
    STAGE_REQUIRES, BUILTIN_SOURCES, MANIFEST_FILE, SUMMARY_FILE, CONFIG_FILE, REPORT_CSV_HEADER
from .errors import DegenFlowError, ConfigInvalid, StageFailed
from .grid import Grid2D, ScalarField, checkGrid, gradient
from .io import writeField, readField, writeJson, readJson, fileHash, ensureDir
from .potentials import PotentialSpec, evalForce
from .primal import PrimalParams, PrimalSolution, solvePrimal, feasibilityResidual
from .dual import DualParams, DualSolution, solveDual, gapReport
from .regularity import DiagnosticsConfig, continuityReport, computeExcessModulus, coefficientField, \
    diagnosticCenter
from .sources import SourceField, builtinSources, fileSource, checkSourceParams
from .traffic import TraceParams, AuditParams, splitSource, traceCurves, depositIntensity, \
    terminalDeposit, intensityMismatch, wardropAudit, controlCurve, writeCurvesCsv

logger = logging.getLogger(__name__)

TOP_KEYS = {'grid', 'potential', 'source', 'pipeline', 'primal', 'dual', 'diagnostics', 'traffic', 'out_dir',
            'seed', 'artifacts'}
SOURCE_STAGE = 'source'


# --------------------------- Configuration --------------------
@dataclass(frozen=True)
class SourceConfig:
    name: Optional[str] = None
    params: Dict = field(default_factory=dict)
    file: Optional[str] = None

    def build(self, g: Grid2D) -> SourceField:
        if self.file:
            source = fileSource(self.file)
            checkGrid(g, source.field.grid)
            return source
        return builtinSources(self.name, g, self.params)


@dataclass(frozen=True)
class DiagnoseSettings:
    config: DiagnosticsConfig = DiagnosticsConfig()
    center: Optional[Tuple[float, float]] = None
    radius: Optional[float] = None
    composition: bool = True

    @classmethod
    def fromDict(cls, data: dict) -> 'DiagnoseSettings':
        center = data.get('center')
        return cls(config=DiagnosticsConfig.fromDict(data),
                   center=None if center is None else (float(center[0]), float(center[1])),
                   radius=None if data.get('radius') is None else float(data['radius']),
                   composition=bool(data.get('composition', True)))


@dataclass(frozen=True)
class TrafficSettings:
    trace: TraceParams = TraceParams()
    audit: AuditParams = AuditParams()
    runAudit: bool = True
    controlCurve: bool = False

    @classmethod
    def fromDict(cls, data: dict, seed: int = 0, p: float = 2.0) -> 'TrafficSettings':
        audit = {'seed': seed, 'p': p}
        audit.update(data.get('audit', {}))
        return cls(trace=TraceParams.fromDict(data.get('trace', {})), audit=AuditParams.fromDict(audit),
                   runAudit=bool(data.get('run_audit', True)), controlCurve=bool(data.get('control_curve', False)))


def _resolve(path: str, baseDir: str) -> str:
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(baseDir, path))


def _collect(errors: List[str], key: str, build):
    try:
        return build()
    except ConfigInvalid as e:
        errors.extend(e.errors)
    except (KeyError, ValueError, TypeError, IndexError) as e:
        errors.append(f'{key}: {e}')
    return None


@dataclass(frozen=True)
class ExperimentConfig:
    grid: Grid2D
    potential: PotentialSpec
    source: SourceConfig
    pipeline: Tuple[str, ...]
    primal: PrimalParams = PrimalParams()
    dual: DualParams = DualParams()
    diagnose: DiagnoseSettings = DiagnoseSettings()
    traffic: TrafficSettings = TrafficSettings()
    outDir: str = 'degenflow-out'
    seed: int = 0
    artifacts: Dict[str, str] = field(default_factory=dict)
    raw: Dict = field(default_factory=dict)

    @staticmethod
    def validate(data: dict, baseDir: str = '.') -> List[str]:
        """ Every problem found in a configuration document; empty when it is valid. """
        errors = []
        if not isinstance(data, dict):
            return ['configuration must be a JSON object']
        errors += [f'{key}: unknown key' for key in sorted(set(data) - TOP_KEYS)]

        pipeline = data.get('pipeline')
        artifacts = data.get('artifacts', {})
        if not isinstance(artifacts, dict):
            errors.append('artifacts: must map stage names to directories')
            artifacts = {}
        for stage, path in artifacts.items():
            if stage not in STAGES:
                errors.append(f'artifacts.{stage}: unknown stage')
            elif not os.path.isdir(_resolve(str(path), baseDir)):
                errors.append(f'artifacts.{stage}: directory {path} does not exist')
        if not isinstance(pipeline, list) or not pipeline:
            errors.append('pipeline: must be a nonempty list of stages')
        else:
            for k, stage in enumerate(pipeline):
                if stage not in STAGES:
                    errors.append(f'pipeline: unknown stage {stage!r}, expected one of {STAGES}')
                    continue
                if stage in pipeline[:k]:
                    errors.append(f'pipeline: stage {stage} appears twice')
                for needed in STAGE_REQUIRES[stage]:
                    if needed not in pipeline[:k] and needed not in artifacts:
                        errors.append(f'pipeline: {stage} requires {needed} earlier in the pipeline or in artifacts')

        g = _collect(errors, 'grid', lambda: Grid2D.fromDict(data.get('grid', {})))
        _collect(errors, 'potential', lambda: PotentialSpec.fromDict(data.get('potential', {})))
        source = data.get('source')
        if not isinstance(source, dict) or ('name' in source) == ('file' in source):
            errors.append('source: give exactly one of "name" or "file"')
        elif 'file' in source:
            if not os.path.isfile(_resolve(source['file'], baseDir)):
                errors.append(f'source.file: {source["file"]} does not exist')
        elif source['name'] not in BUILTIN_SOURCES:
            errors.append(f'source.name: unknown source {source["name"]!r}, expected one of {BUILTIN_SOURCES}')
        elif g is not None:
            _collect(errors, 'source.params',
                     lambda: checkSourceParams(source['name'], source.get('params', {}), g))
        _collect(errors, 'primal', lambda: PrimalParams.fromDict(data.get('primal', {})))
        _collect(errors, 'dual', lambda: DualParams.fromDict(data.get('dual', {})))
        _collect(errors, 'diagnostics', lambda: DiagnoseSettings.fromDict(data.get('diagnostics', {})))
        _collect(errors, 'traffic', lambda: TrafficSettings.fromDict(data.get('traffic', {})))
        if not isinstance(data.get('seed', 0), int):
            errors.append('seed: must be an integer')
        return errors

    @classmethod
    def fromDict(cls, data: dict, baseDir: str = '.') -> 'ExperimentConfig':
        errors = cls.validate(data, baseDir)
        if errors:
            raise ConfigInvalid(errors)
        potential = PotentialSpec.fromDict(data.get('potential', {}))
        seed = int(data.get('seed', 0))
        source = data['source']
        return cls(grid=Grid2D.fromDict(data['grid']), potential=potential,
                   source=SourceConfig(name=source.get('name'), params=dict(source.get('params', {})),
                                       file=_resolve(source['file'], baseDir) if 'file' in source else None),
                   pipeline=tuple(data['pipeline']), primal=PrimalParams.fromDict(data.get('primal', {})),
                   dual=DualParams.fromDict(data.get('dual', {})),
                   diagnose=DiagnoseSettings.fromDict(data.get('diagnostics', {})),
                   traffic=TrafficSettings.fromDict(data.get('traffic', {}), seed=seed, p=potential.p),
                   outDir=_resolve(data.get('out_dir', 'degenflow-out'), baseDir), seed=seed,
                   artifacts={k: _resolve(v, baseDir) for k, v in data.get('artifacts', {}).items()},
                   raw=dict(data))

    @classmethod
    def fromFile(cls, path: str) -> 'ExperimentConfig':
        try:
            data = readJson(path)
        except (OSError, ValueError) as e:
            raise ConfigInvalid([f'{path}: {e}'])
        return cls.fromDict(data, os.path.dirname(os.path.abspath(path)))

    def digest(self) -> str:
        """ sha256 of the configuration without its output directory. """
        data = {k: v for k, v in self.raw.items() if k != 'out_dir'}
        return hashlib.sha256(json.dumps(data, sort_keys=True).encode('utf-8')).hexdigest()


# --------------------------- Loaders --------------------
def loadSource(path: str) -> Tuple[ScalarField, dict]:
    return readField(os.path.join(path, 'source.dfield')), readJson(os.path.join(path, SUMMARY_FILE))


def loadPrimal(path: str) -> PrimalSolution:
    summary = readJson(os.path.join(path, SUMMARY_FILE))
    return PrimalSolution(u=readField(os.path.join(path, 'u.dfield')),
                          sigma=readField(os.path.join(path, 'sigma.dfield')),
                          energy=summary['energy'], gradNorm=summary['grad_norm'],
                          epsSchedule=tuple(summary['eps_schedule']), iterations=summary['iterations'],
                          cornerFlux=readField(os.path.join(path, 'corner_flux.dfield')),
                          maxGradient=summary['max_gradient'], hessianBound=summary['hessian_bound'],
                          regularizedEnergy=summary.get('regularized_energy'))


def loadDual(path: str) -> DualSolution:
    summary = readJson(os.path.join(path, SUMMARY_FILE))
    return DualSolution(sigmaBar=readField(os.path.join(path, 'sigma_bar.dfield')),
                        objective=summary['objective'], feasResidual=summary['feas_residual'],
                        iterations=summary['iterations'],
                        cornerFlux=readField(os.path.join(path, 'corner_flux.dfield')),
                        converged=summary['converged'], step=summary['step'])


# --------------------------- Runner --------------------
class ExperimentRun:
    """ Runs the configured stages in order inside one output directory. """

    def __init__(self, config: ExperimentConfig, outDir: Optional[str] = None):
        self.config = config
        self.grid = config.grid
        self.outDir = ensureDir(outDir or config.outDir)
        self.written: List[Tuple[str, str]] = []
        self.summaries: Dict[str, dict] = {}
        self.done: List[str] = []

    # Paths
    def stageDir(self, stage: str) -> str:
        return ensureDir(os.path.join(self.outDir, stage))

    def inputDir(self, stage: str) -> str:
        if stage in self.done:
            return os.path.join(self.outDir, stage)
        return self.config.artifacts[stage]

    def _field(self, stage: str, name: str, value) -> str:
        path = writeField(os.path.join(self.stageDir(stage), name), value)
        self.written.append((stage, path))
        return path

    def _json(self, stage: str, name: str, data: dict) -> str:
        path = writeJson(os.path.join(self.stageDir(stage), name), data)
        self.written.append((stage, path))
        return path

    def _summary(self, stage: str, summary: dict):
        self.summaries[stage] = summary
        self._json(stage, SUMMARY_FILE, summary)

    # Stages
    def runSource(self):
        source = self.config.source.build(self.grid)
        self._field(SOURCE_STAGE, 'source.dfield', source.field)
        self._summary(SOURCE_STAGE, source.toSummary())

    def runPrimal(self):
        f, _ = loadSource(self.inputDir(SOURCE_STAGE))
        spec = self.config.potential
        sol = solvePrimal(self.grid, spec, f, self.config.primal)
        self._field(STAGE_PRIMAL, 'u.dfield', sol.u)
        self._field(STAGE_PRIMAL, 'sigma.dfield', sol.sigma)
        self._field(STAGE_PRIMAL, 'corner_flux.dfield', sol.cornerFlux)
        summary = sol.toSummary(spec)
        summary['feas_residual'] = feasibilityResidual(self.grid, sol.sigma, f)
        self._summary(STAGE_PRIMAL, summary)

    def runDual(self):
        f, _ = loadSource(self.inputDir(SOURCE_STAGE))
        sol = solveDual(self.grid, self.config.potential, f, self.config.dual)
        self._field(STAGE_DUAL, 'sigma_bar.dfield', sol.sigmaBar)
        self._field(STAGE_DUAL, 'corner_flux.dfield', sol.cornerFlux)
        self._summary(STAGE_DUAL, sol.toSummary())

    def runGap(self):
        f, _ = loadSource(self.inputDir(SOURCE_STAGE))
        primal = loadPrimal(self.inputDir(STAGE_PRIMAL))
        dual = loadDual(self.inputDir(STAGE_DUAL))
        report = gapReport(self.grid, self.config.potential, primal, dual, f)
        if report['gap'] < 0:
            logger.warning('Negative duality gap %.3e, the dual flux is not exactly feasible', report['gap'])
        self._summary(STAGE_GAP, report)

    def runDiagnose(self):
        _, sourceSummary = loadSource(self.inputDir(SOURCE_STAGE))
        primal = loadPrimal(self.inputDir(STAGE_PRIMAL))
        settings, spec, g = self.config.diagnose, self.config.potential, self.grid
        gradu = gradient(g, primal.u)
        center, radius = settings.center, settings.radius
        if center is None:
            center, margin = diagnosticCenter(g, gradu)
            radius = radius or margin
        elif radius is None:
            radius = min(center[0], center[1], g.lx - center[0], g.ly - center[1])
        base = spec.unregularized()
        gfun = (lambda z: np.linalg.norm(evalForce(base, z), axis=-1)) if settings.composition else None
        report = continuityReport(g, gradu, center, radius, settings.config,
                                  sourceClass=sourceSummary['smoothness'], spec=spec, gfun=gfun)
        self._json(STAGE_DIAGNOSE, 'report.json', report.toDict())
        csvPath = os.path.join(self.stageDir(STAGE_DIAGNOSE), 'report.csv')
        with open(csvPath, 'w') as fh:
            fh.write(','.join(REPORT_CSV_HEADER) + '\n')
            for row in report.csvRows():
                fh.write(','.join(str(v) for v in row) + '\n')
        self.written.append((STAGE_DIAGNOSE, csvPath))
        self._field(STAGE_DIAGNOSE, 'excess.dfield', computeExcessModulus(g, gradu, settings.config.deltaList[-1]))
        self._field(STAGE_DIAGNOSE, 'lambda_min.dfield', coefficientField(g, spec, gradu)[0])
        excess = [s for s in report.slices if s.label == 'excess']
        self._summary(STAGE_DIAGNOSE, {
            'center': list(report.center), 'R0': report.R0, 'source_class': report.sourceClass,
            'max_gradient': float(np.max(np.linalg.norm(gradu.centered(), axis=-1))),
            'excess': [{'delta': s.delta, 'tallies': s.tallies, 'c_fit': s.cFit, 'residual': s.residual,
                        'none_scales': s.noneScales()} for s in excess],
            'direction_spread': {str(d): report.directionSpread(d) for d in settings.config.deltaList},
            'flux_consistency': report.fluxConsistency})

    def runTraffic(self):
        f, _ = loadSource(self.inputDir(SOURCE_STAGE))
        dual = loadDual(self.inputDir(STAGE_DUAL))
        settings, g = self.config.traffic, self.grid
        fplus, fminus = splitSource(f)
        plan = traceCurves(dual.sigmaBar, fplus, fminus, settings.trace)
        summary = {}
        if plan.curves:
            intensity = depositIntensity(plan, g)
            summary['intensity_mismatch'] = intensityMismatch(intensity, dual.sigmaBar)
            self._field(STAGE_TRAFFIC, 'intensity.dfield', intensity)
            self._field(STAGE_TRAFFIC, 'terminal.dfield', terminalDeposit(g, plan))
            if settings.controlCurve:
                chords = [np.linalg.norm(c.points[-1] - c.points[0]) for c in plan.curves]
                controlCurve(plan, base=int(np.argmax(chords)))
            if settings.runAudit:
                wardropAudit(plan, intensity, params=settings.audit)
                self._json(STAGE_TRAFFIC, 'audit.json', plan.auditDict())
        else:
            logger.info('Empty traffic plan, nothing to deposit')
        self.written.append((STAGE_TRAFFIC, writeCurvesCsv(plan, os.path.join(self.stageDir(STAGE_TRAFFIC),
                                                                                  'curves.csv'))))
        summary.update(plan.toSummary())
        self._summary(STAGE_TRAFFIC, summary)

    # Driver
    def run(self) -> dict:
        steps = [(SOURCE_STAGE, self.runSource)]
        steps += [(stage, getattr(self, 'run' + stage.capitalize())) for stage in self.config.pipeline]
        writeJson(os.path.join(self.outDir, CONFIG_FILE), self.config.raw)
        for stage, step in steps:
            logger.info('Stage %s', stage)
            try:
                step()
            except (DegenFlowError, ValueError, ArithmeticError) as e:
                logger.error('Stage %s failed: %s', stage, e)
                raise StageFailed(stage, e) from e
            self.done.append(stage)
        return self.writeManifest()

    def writeManifest(self) -> dict:
        artifacts = [{'stage': stage, 'path': os.path.relpath(path, self.outDir), 'sha256': fileHash(path)}
                     for stage, path in self.written]
        manifest = {'config_sha256': self.config.digest(), 'pipeline': list(self.config.pipeline),
                    'artifacts': sorted(artifacts, key=lambda a: a['path']), 'summaries': self.summaries}
        writeJson(os.path.join(self.outDir, MANIFEST_FILE), manifest)
        return manifest


def runExperiment(config: ExperimentConfig, outDir: Optional[str] = None, threads: int = 1) -> dict:
    """ Runs every stage and returns the manifest. threads only sizes the FFT worker pool. """
    with fft.set_workers(max(1, int(threads))):
        return ExperimentRun(config, outDir).run()
