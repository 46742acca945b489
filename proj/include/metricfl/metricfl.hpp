// Copyright 2026 The metricfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METRICFL_METRICFL_HPP_
#define METRICFL_METRICFL_HPP_

#include "metricfl/accounting.hpp"
#include "metricfl/clustering.hpp"
#include "metricfl/data.hpp"
#include "metricfl/diagnostics.hpp"
#include "metricfl/experiment.hpp"
#include "metricfl/federation.hpp"
#include "metricfl/mechanism.hpp"
#include "metricfl/models.hpp"
#include "metricfl/parameter_vector.hpp"
#include "metricfl/rng.hpp"

#endif  // METRICFL_METRICFL_HPP_
