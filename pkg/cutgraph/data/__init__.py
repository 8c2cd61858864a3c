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

from cutgraph.data.model_io import (
    MODEL_ALIASES, SCHEMA, ModelSpec, FlatModel, parse_model, validate_schema, serialize_model, load_model,
    bundled_models, flatten, flat_name, resolve_references, build_executable
)
