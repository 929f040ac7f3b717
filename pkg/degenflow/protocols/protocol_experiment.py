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
import os

# Scipion em imports
from pyworkflow.protocol.params import PathParam
from pyworkflow.utils import Message

# Plugin imports
from .protocol_base import ProtDegenFlowBase, STAGE_OUTPUTS, stageAttributes
from ..constants import SUMMARY_FILE, MANIFEST_FILE
from ..utils.experiment import ExperimentConfig
from ..utils.errors import ConfigInvalid
from ..utils.io import readJson


class ProtDegenFlowExperiment(ProtDegenFlowBase):
    """
    Runs a complete experiment configuration file, the same document accepted by
    'degenflow run', and registers one output per stage of its pipeline.
    """
    _label = 'run experiment'
    _possibleOutputs = {name: cls for name, cls in STAGE_OUTPUTS.values()}

    def _defineParams(self, form):
        form.addSection(label=Message.LABEL_INPUT)
        form.addParam('configFile', PathParam, label='Experiment configuration: ',
                      help='JSON configuration with grid, potential, source and pipeline. '
                           'Examples are shipped in the configs folder of the plugin.')
        self._defineThreadsSection(form)

    # --------------------------- STEPS functions --------------------
    def createOutputStep(self):
        outputs = {}
        for stage in self.getPipeline():
            name, cls = STAGE_OUTPUTS[stage]
            summaryFile = os.path.join(self.getRunDir(), stage, SUMMARY_FILE)
            outputs[name] = cls(filename=summaryFile, **stageAttributes(stage, readJson(summaryFile)))
        self._defineOutputs(**outputs)

    # --------------------------- INFO functions --------------------
    def _validate(self):
        errors = []
        if not os.path.exists(self.getConfigPath()):
            return ['The configuration file {} does not exist.'.format(self.getConfigPath())]
        try:
            ExperimentConfig.fromFile(self.getConfigPath())
        except ConfigInvalid as e:
            errors += e.errors
        return errors

    def _summary(self):
        summary = []
        manifestFile = os.path.join(self.getRunDir(), MANIFEST_FILE)
        if os.path.exists(manifestFile):
            manifest = readJson(manifestFile)
            summary.append('Pipeline: {}'.format(' -> '.join(manifest['pipeline'])))
            summary.append('{} artifacts, configuration sha256 {}'.format(
                len(manifest['artifacts']), manifest['config_sha256'][:12]))
        return summary

    # --------------------------- Utils functions --------------------
    def getConfigPath(self):
        return os.path.abspath(self.configFile.get() or '')

    def getPipeline(self):
        return readJson(self.getConfigFile())['pipeline']

    def buildConfig(self):
        """ The configuration file with relative paths resolved against its own folder """
        config = ExperimentConfig.fromFile(self.getConfigPath())
        data = dict(config.raw)
        if config.source.file:
            data['source'] = {'file': config.source.file}
        data['artifacts'] = dict(config.artifacts)
        data['out_dir'] = '.'
        return data
