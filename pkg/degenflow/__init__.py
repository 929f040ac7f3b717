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
This package contains protocols for the degenflow numerical laboratory: a degenerate
elliptic flux problem, its dual, regularity diagnostics of the solution gradient and
the traffic plan that realises the optimal flux.
"""

# General imports
import os
import sys

# Scipion em imports
import pwem

# Plugin imports
from .bibtex import _bibtexStr
from .constants import DEGENFLOW_DIC, CONFIG_FILE

__version__ = '1.0.0'
_references = ['Beckmann1952', 'Wardrop1952']


class Plugin(pwem.Plugin):
    @classmethod
    def _defineVariables(cls):
        cls._defineVar(DEGENFLOW_DIC['threads'], 1)

    @classmethod
    def getThreads(cls):
        return int(cls.getVar(DEGENFLOW_DIC['threads']))

    @classmethod
    def getPluginHome(cls, path=""):
        import degenflow
        fnDir = os.path.split(degenflow.__file__)[0]
        return os.path.join(fnDir, path)

    @classmethod
    def getConfigsDir(cls, fn=''):
        return cls.getPluginHome(os.path.join('configs', fn))

    @classmethod
    def runDegenFlow(cls, protocol, outDir, threads=None, cwd=None):
        """ Run the experiment configured in outDir/config.json from a given protocol. """
        threads = threads or cls.getThreads()
        args = '-m degenflow.cli run {} --out-dir {} --threads {}'.format(
            os.path.join(outDir, CONFIG_FILE), outDir, threads)
        protocol.runJob(sys.executable, args, cwd=cwd or outDir)
