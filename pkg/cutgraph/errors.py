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
Exception hierarchy.

Every error raised on purpose by cutgraph derives from CutGraphError. Structural problems with a model,
a partition or an ordering are ModelError (also a ValueError); failures of the numerical engines are
NumericError (also a RuntimeError). The command line interface maps the two families onto exit codes 2 and 3.
"""


class CutGraphError(Exception):
    pass


class ModelError(CutGraphError, ValueError):
    pass


class NumericError(CutGraphError, RuntimeError):
    pass


# Graph construction and queries
class CycleDetected(ModelError):
    pass


class UnknownEndpoint(ModelError):
    pass


class DuplicateNode(ModelError):
    pass


class SelfLoop(ModelError):
    pass


class DuplicateEdge(ModelError):
    pass


class UnknownNode(ModelError):
    pass


class OverlappingSets(ModelError):
    pass


# Modules, ordering and factorizations
class NotObservable(ModelError):
    pass


class NotAPartition(ModelError):
    pass


class InconsistentSplit(ModelError):
    pass


class UnknownModule(ModelError):
    pass


class CyclicOrdering(ModelError):
    pass


class UnresolvedTie(ModelError):
    pass


class ParamNotInModule(ModelError):
    pass


# Model files
class ModelSyntaxError(ModelError):

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f'line {line}, column {column}: {message}'
        super().__init__(message)


class SchemaViolation(ModelError):

    def __init__(self, path, message):
        self.path = path
        super().__init__(f'{path}: {message}')


class UnresolvedReference(ModelError):
    pass


class PlateBoundError(ModelError):
    pass


class UnsupportedFamily(ModelError):
    pass


# Numerical engines
class StateSpaceTooLarge(NumericError):
    pass


class ZeroProbabilityConditioning(NumericError):
    pass


class DimensionMismatch(NumericError):
    pass


class SingularSystem(NumericError):
    pass


class NonFiniteDensity(NumericError):
    pass
