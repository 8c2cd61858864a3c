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

from cutgraph.stats.discrete import (
    CategoricalTable, DiscreteModel, MAX_STATES, enumerate_posterior, brute_force_ci, kl_cut_oracle,
    module_posterior_factor, total_variation, random_discrete_model
)
from cutgraph.stats.continuous import Distribution, ContinuousModel, evaluate
from cutgraph.stats.gaussian import (
    Link, GaussianDist, LinGaussModel, conjugate_step, bias_coefficients, step_precision, design_matrix,
    precision_blocks, standard_longitudinal_posterior, standard_bias, cut_longitudinal_posterior,
    sample_cut_chain, accumulation_multipliers, longitudinal_log_density, chain_structure
)
from cutgraph.stats.sampling import (
    SamplerConfig, SampleSet, integrated_time, mh_sample, sampling_order, nested_cut_sample, standard_sample
)
