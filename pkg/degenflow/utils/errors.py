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
Exception hierarchy of the degenflow numerical core.

Every error belongs to one of two families that map onto the command line
exit codes: configuration problems (exit 2) and numerical failures (exit 3).
"""

from typing import Any, Dict


class DegenFlowError(Exception):
    """ Base class of every error raised by degenflow. """
    exitCode = 1

    def __init__(self, message: str = '', **details):
        super().__init__(message or self.__class__.__name__)
        self.details = details

    def toDict(self) -> Dict[str, Any]:
        """ Machine readable representation written to the error JSON. """
        out = {'error': self.__class__.__name__, 'message': str(self)}
        if self.details:
            out['details'] = {key: _plain(value) for key, value in self.details.items()}
        return out


def _plain(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


# --------------------------- Configuration errors --------------------
class ConfigError(DegenFlowError):
    exitCode = 2


class ConfigInvalid(ConfigError):
    """ The experiment configuration does not validate. """

    def __init__(self, errors, **details):
        self.errors = list(errors)
        super().__init__('; '.join(self.errors), errors=self.errors, **details)


class UnknownSource(ConfigError):
    pass


# --------------------------- Numerical errors --------------------
class NumericalError(DegenFlowError):
    exitCode = 3


class GridMismatch(NumericalError):
    pass


class IncompatibleSource(NumericalError):
    """ The source does not integrate to zero, so the Neumann problem has no solution. """


class SolverStagnation(NumericalError):
    pass


class RegionOutOfDomain(NumericalError):
    pass


class EmptyRegion(NumericalError):
    pass


class DegenerateKink(NumericalError):
    """ Hessian requested exactly on the unit circle for q < 2. """


class NotElliptic(NumericalError):
    pass


class Unsupported(NumericalError):
    pass


class InversionFailed(NumericalError):
    pass


class LineSearchFailure(NumericalError):
    pass


class MaxIterations(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class NotVanishingOnBall(NumericalError):
    pass


class UnresolvedScales(NumericalError):
    """ Fewer than three dyadic scales fit between the ball radius and the resolution floor. """


class OutOfDomain(NumericalError):
    pass


class InfeasibleFlux(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass


class EmptyPlan(NumericalError):
    pass


class NonpositiveMetric(NumericalError):
    pass


class StageFailed(DegenFlowError):
    """ Wraps an error raised inside a pipeline stage, keeping its exit code. """

    def __init__(self, stage: str, cause: DegenFlowError):
        self.stage = stage
        self.cause = cause
        self.exitCode = getattr(cause, 'exitCode', 3)
        super().__init__(f'stage "{stage}" failed: {cause}', stage=stage)

    def toDict(self) -> Dict[str, Any]:
        out = self.cause.toDict() if isinstance(self.cause, DegenFlowError) else \
            {'error': self.cause.__class__.__name__, 'message': str(self.cause)}
        out['stage'] = self.stage
        return out
