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

from cutgraph.modules.construction import (
    ModuleSet, TwoModulePartition, SevenWayPartition, StructureReport, Violation,
    construct_module, construct_module_by_paths, associated_parameters, associated_observables, associated_module,
    check_partition, two_module_partition, check_structure, is_self_contained, posterior_factor_groups,
    seven_way_partition, check_three_way
)
from cutgraph.modules.ordering import (
    OrderRelation, ReliabilityOrder, OrderingGraph, Outcome, ThreeModuleOrdering, GroupedOrderingGraph,
    order_two, resolve_order, two_module_graph, order_three, group_modules, update_after_split, sequential_split
)
from cutgraph.modules.factorization import (
    FactorKind, CutFactor, CutFactorization, WithinModuleCutSpec,
    cut_subgraph, cut_general, cut_two, standard_factorization, apply_within_cut
)
