// Copyright 2026 The qbayes Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

namespace qbayes {

/// Locale-independent rendering with 17 significant digits, so values
/// round-trip exactly. Negative zero prints as "0".
std::string format_double(double v);

/// CSV field, quoted when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);

}  // namespace qbayes
