// Copyright 2026 The privflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "privflow/flow.hpp"

namespace privflow {

/// The built-in node palette:
///   datasources  light, smartphone, twitter
///   processors   function, extract, trigger, combine, chart, aggregate
///   outputs      debug, display, chart-data, export, actuate
SpecRegistry builtin_specs();

/// Schema the chart node emits and the display node consumes.
Schema chart_series_schema();

}  // namespace privflow
